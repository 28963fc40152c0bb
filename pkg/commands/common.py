"""
Helpers shared by the subcommand handlers
"""

import argparse
import logging
import os
from typing import Any, Dict, Tuple

from config import get_config
from services import (
    EmbeddingTable,
    LexiconMode,
    MissingPolicy,
    ModularityMode,
    OutputError,
    ReportCache,
    ResolvedWordSet,
    load_lexicon,
    load_word2vec_text,
    resolve,
)
from services.report_cache import dumps_document

logger = logging.getLogger(__name__)


def add_global_args(parser: argparse.ArgumentParser, suppress: bool = False):
    """
    --log-level/--jobs/--cache-dir/--strict

    With suppress=True an option only lands in the namespace when given, so a
    subcommand copy never overwrites a value passed before the subcommand.
    """
    config = get_config()

    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument('--log-level', default=default(None), help='DEBUG, INFO, WARNING or ERROR')
    parser.add_argument('--jobs', type=int, default=default(config.DEFAULT_JOBS), help='parallel sweep runs')
    parser.add_argument('--cache-dir', default=default(None), help='report cache directory (env CATMOD_CACHE_DIR)')
    parser.add_argument('--strict', action='store_true', default=default(False),
                        help='partial sweep failures make the exit code nonzero')


def global_options() -> argparse.ArgumentParser:
    """Parent parser accepting the global options after a subcommand name"""
    parent = argparse.ArgumentParser(add_help=False)
    add_global_args(parent, suppress=True)
    return parent


def add_vector_args(parser: argparse.ArgumentParser, lexicon: bool = True):
    """--vectors/--limit, and --lexicon/--policy/--lexicon-mode when the command needs words"""
    config = get_config()
    parser.add_argument('--vectors', required=True, help='word2vec text file')
    parser.add_argument('--limit', type=int, default=None, help='read at most this many vectors')
    if lexicon:
        parser.add_argument('--lexicon', required=True, help='word<TAB>level1<TAB>level2<TAB>level3 file')
        parser.add_argument('--policy', choices=[p.value for p in MissingPolicy], default=config.DEFAULT_POLICY,
                            help='lexicon words without a vector: fail or skip-missing')
        parser.add_argument('--lexicon-mode', choices=[m.value for m in LexiconMode],
                            default=LexiconMode.GENERIC.value, help='validate labels against the canonical catalog')


def add_graph_args(parser: argparse.ArgumentParser):
    config = get_config()
    parser.add_argument('--k', type=int, default=config.DEFAULT_K, help='nearest neighbors per word')
    parser.add_argument('--mode', choices=[m.value for m in ModularityMode], default=config.DEFAULT_MODE,
                        help='how the directed k-NN graph is made undirected')


def add_output_args(parser: argparse.ArgumentParser):
    parser.add_argument('--out', default=None, help='write the JSON document to this path')


def load_inputs(args) -> Tuple[EmbeddingTable, ResolvedWordSet]:
    table = load_word2vec_text(args.vectors, args.limit)
    lexicon = load_lexicon(args.lexicon, args.lexicon_mode)
    return table, resolve(table, lexicon, args.policy)


def write_document(document: Dict[str, Any], path: str):
    """Raises OutputError when the file or its directory cannot be written"""
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(dumps_document(document))
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}", path=path) from e
    logger.info(f"Wrote {path}")


def open_cache(args) -> ReportCache:
    """Cache directory: --cache-dir, then CATMOD_CACHE_DIR, then the configured default"""
    config = get_config()
    cache_dir = args.cache_dir or os.environ.get('CATMOD_CACHE_DIR') or config.CACHE_DIR
    return ReportCache(cache_dir, lock_timeout=config.LOCK_TIMEOUT)
