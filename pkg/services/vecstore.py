"""
Vector store - word2vec text format reader/writer and lexicon resolution
"""

import logging
import os
from typing import Optional, Union

import numpy as np

from .errors import LexiconFormatError, MissingWordsError, VectorFormatError
from .models import (
    CategoryLexicon,
    EmbeddingTable,
    MissingPolicy,
    ResolvedWordSet,
    normalize_word,
)
from .performance_manager import performance_monitor

logger = logging.getLogger(__name__)


def _parse_header(raw: bytes, path: str):
    try:
        fields = raw.decode('ascii').split()
        count, dimension = int(fields[0]), int(fields[1])
        if len(fields) != 2:
            raise ValueError("extra fields")
    except (UnicodeDecodeError, ValueError, IndexError):
        raise VectorFormatError(
            f"{path}: malformed header {raw[:40]!r}, expected '<count> <dim>'", line=1, path=path
        )
    if count < 0 or dimension <= 0:
        raise VectorFormatError(f"{path}: header declares count={count}, dim={dimension}", line=1, path=path)
    return count, dimension


@performance_monitor('load_vectors')
def load_word2vec_text(path: str, limit: Optional[int] = None,
                       source_label: str = None, dtype=np.float32) -> EmbeddingTable:
    """
    Stream a word2vec text file into an EmbeddingTable.

    Only the first min(count, limit) vector lines are read; memory grows with
    the retained entries, not with the file. A repeated word keeps its first
    vector and is counted in `duplicate_count`.

    Args:
        path (str): UTF-8 `.vec`/`.txt` file
        limit (int): optional cap on the number of vector lines read
        source_label (str): tag stored on the table, defaults to the file name

    Raises:
        VectorFormatError: unreadable file, bad header, wrong float count,
            undecodable bytes or a truncated file (the message names the line)
    """
    if limit is not None and limit < 1:
        raise VectorFormatError(f"limit must be positive, got {limit}", path=path)
    if not os.path.isfile(path):
        raise VectorFormatError(f"vector file not found: {path}", path=path)

    with open(path, 'rb') as handle:
        count, dimension = _parse_header(handle.readline(), path)
        wanted = count if limit is None else min(count, limit)

        words = []
        index = {}
        vectors = np.empty((wanted, dimension), dtype=dtype)
        duplicates = 0

        for line_no in range(2, wanted + 2):
            raw = handle.readline()
            if not raw:
                raise VectorFormatError(
                    f"{path}: file ends at line {line_no}, header promised {count} vectors",
                    line=line_no, path=path
                )
            try:
                text = raw.decode('utf-8')
            except UnicodeDecodeError as e:
                raise VectorFormatError(f"{path}: line {line_no} is not valid UTF-8 ({e.reason})",
                                        line=line_no, path=path)

            parts = text.rstrip('\r\n ').split(' ')
            word = normalize_word(parts[0])
            if not word or len(parts) - 1 != dimension:
                raise VectorFormatError(
                    f"{path}: line {line_no} has {len(parts) - 1} values, expected {dimension}",
                    line=line_no, path=path
                )
            if word in index:
                duplicates += 1
                logger.debug(f"Duplicate word '{word}' at line {line_no} ignored")
                continue
            try:
                vectors[len(words)] = [float(x) for x in parts[1:]]
            except ValueError:
                raise VectorFormatError(f"{path}: line {line_no} contains a non-numeric value",
                                        line=line_no, path=path)
            index[word] = len(words)
            words.append(word)

    if duplicates:
        logger.warning(f"{path}: {duplicates} duplicate word(s) skipped, first occurrence kept")
    logger.info(f"Loaded {len(words)} vectors of dimension {dimension} from {path}")

    return EmbeddingTable(
        dimension=dimension,
        words=tuple(words),
        vectors=vectors[:len(words)].copy(),
        source_label=source_label if source_label is not None else os.path.basename(path),
        duplicate_count=duplicates,
    )


def write_word2vec_text(table: EmbeddingTable, path: str):
    """Write the table in word2vec text format (9 significant digits per value)"""
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"{len(table)} {table.dimension}\n")
        for word, row in zip(table.words, table.vectors):
            handle.write(word + ' ' + ' '.join(f"{value:.9g}" for value in row.tolist()) + '\n')
    logger.debug(f"Wrote {len(table)} vectors to {path}")


def resolve(table: EmbeddingTable, lexicon: CategoryLexicon,
            policy: Union[MissingPolicy, str] = MissingPolicy.SKIP_MISSING) -> ResolvedWordSet:
    """
    Bind the lexicon words to their vectors, in lexicon order.

    With `skip-missing` absent words are dropped and the returned set carries
    the restricted lexicon, so category counts follow the surviving words.
    """
    policy = MissingPolicy(policy)
    if len(lexicon) == 0:
        raise LexiconFormatError("lexicon is empty")

    present = [word for word in lexicon.words if word in table]
    missing = [word for word in lexicon.words if word not in table]

    if missing and policy is MissingPolicy.FAIL:
        preview = ', '.join(missing[:10]) + (' ...' if len(missing) > 10 else '')
        raise MissingWordsError(f"{len(missing)} lexicon word(s) have no vector: {preview}", missing)
    if len(present) < 2:
        raise MissingWordsError(
            f"only {len(present)} lexicon word(s) found in {table.source_label or 'the vectors'}, need at least 2",
            missing
        )
    if missing:
        logger.warning(f"{len(missing)} lexicon word(s) missing from {table.source_label or 'the vectors'}, skipped")

    vectors = np.vstack([table.vector(word) for word in present])
    restricted = lexicon if not missing else lexicon.restrict(present)
    return ResolvedWordSet(words=tuple(present), vectors=vectors, missing=tuple(missing), lexicon=restricted)
