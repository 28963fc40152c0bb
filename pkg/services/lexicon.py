"""
Category lexicon - TSV reader/writer and per-level category assignments
"""

import logging
import os
from functools import lru_cache
from typing import Dict, Tuple, Union

from .errors import LexiconFormatError
from .models import (
    LEVELS,
    CategoryAssignment,
    CategoryLexicon,
    LexiconMode,
    normalize_word,
)

logger = logging.getLogger(__name__)

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data')
BINDER_CATALOG_PATH = os.path.join(DATA_DIR, 'binder_categories.tsv')


@lru_cache(maxsize=None)
def binder_catalog(path: str = BINDER_CATALOG_PATH) -> Tuple[Tuple[str, ...], Tuple[str, ...], Tuple[str, ...]]:
    """
    Canonical catalogs of the three levels, read from `level<TAB>category` rows

    Returns:
        tuple: (level-1 labels, level-2 labels, level-3 labels) in file order
    """
    catalogs: Dict[int, list] = {level: [] for level in LEVELS}
    try:
        with open(path, encoding='utf-8') as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.rstrip('\r\n')
                if not line.strip() or line.startswith('#'):
                    continue
                fields = line.split('\t')
                if len(fields) != 2 or fields[0] not in ('1', '2', '3'):
                    raise LexiconFormatError(f"{path}: line {line_no} is not 'level<TAB>category'", line=line_no)
                catalogs[int(fields[0])].append(fields[1].strip())
    except OSError as e:
        raise LexiconFormatError(f"cannot read category catalog {path}: {e}")
    return tuple(tuple(catalogs[level]) for level in LEVELS)


@lru_cache(maxsize=None)
def _binder_label_sets(path: str = BINDER_CATALOG_PATH):
    return tuple(frozenset(catalog) for catalog in binder_catalog(path))


def load_lexicon(path: str, mode: Union[LexiconMode, str] = LexiconMode.GENERIC) -> CategoryLexicon:
    """
    Read a `word<TAB>level1<TAB>level2<TAB>level3` file.

    Blank lines and `#` comments are ignored. In binder-strict mode every
    label must belong to the canonical catalog of its level.
    """
    mode = LexiconMode(mode)
    allowed = _binder_label_sets() if mode is LexiconMode.BINDER_STRICT else None

    rows = []
    seen: Dict[str, int] = {}
    try:
        with open(path, encoding='utf-8') as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.rstrip('\r\n')
                if not line.strip() or line.lstrip().startswith('#'):
                    continue
                fields = [field.strip() for field in line.split('\t')]
                if len(fields) != 4:
                    raise LexiconFormatError(
                        f"{path}: row {line_no} has {len(fields)} fields, expected 4 "
                        f"(word, level1, level2, level3)", line=line_no
                    )
                if not all(fields):
                    raise LexiconFormatError(f"{path}: row {line_no} has an empty field", line=line_no)

                word = normalize_word(fields[0])
                if word in seen:
                    raise LexiconFormatError(
                        f"{path}: duplicate word '{word}' at row {line_no} (first at row {seen[word]})",
                        line=line_no
                    )
                seen[word] = line_no

                if allowed is not None:
                    for level, label in zip(LEVELS, fields[1:]):
                        if label not in allowed[level - 1]:
                            raise LexiconFormatError(
                                f"{path}: row {line_no} label '{label}' is not a level {level} category",
                                line=line_no
                            )
                rows.append((word, fields[1], fields[2], fields[3]))
    except UnicodeDecodeError as e:
        raise LexiconFormatError(f"{path}: not valid UTF-8 ({e.reason})")
    except OSError as e:
        raise LexiconFormatError(f"cannot read lexicon {path}: {e}")

    if not rows:
        raise LexiconFormatError(f"{path}: lexicon has no words")

    lexicon = CategoryLexicon.from_rows(rows, source=path)
    logger.info(
        f"Loaded lexicon {path}: {len(lexicon)} words, "
        f"{'/'.join(str(len(c)) for c in lexicon.level_catalogs)} categories per level"
    )
    return lexicon


def write_lexicon(lexicon: CategoryLexicon, path: str):
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        for word, labels in zip(lexicon.words, lexicon.labels):
            handle.write('\t'.join((word,) + tuple(labels)) + '\n')


def assignment_at_level(lexicon: CategoryLexicon, level: int) -> CategoryAssignment:
    """Category indices follow the first appearance of each label at that level"""
    labels = lexicon.labels_at(level)
    catalog = lexicon.level_catalogs[level - 1]
    position = {label: i for i, label in enumerate(catalog)}
    return CategoryAssignment(
        level=level,
        category_of=tuple(position[label] for label in labels),
        labels=tuple(catalog),
    )
