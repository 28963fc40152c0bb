#!/usr/bin/env python3
"""
catmod - categorical modularity of word embeddings

Usage:
    python catmod.py modularity --vectors V --lexicon L --level 3 --k 2
    python catmod.py communities --vectors V --lexicon L --k 2
    python catmod.py task {sentiment|wordsim|bli} ...
    python catmod.py sweep --manifest M
    python catmod.py correlate --reports DIR --tasks DIR --subset merged
    python catmod.py leaderboard --reports DIR --row "2, 2"

Exit codes: 0 success, 1 input or data error, 2 internal invariant violation.
Errors are reported on standard error as `error:<stage>:<message>`.
"""

import argparse
import logging
import sys

from config import get_config, get_app_info, setup_logging
from commands import register_all
from commands.common import add_global_args
from services import CatmodError, get_performance_manager

logger = logging.getLogger('catmod')


class CliArgumentParser(argparse.ArgumentParser):
    """Argument errors follow the `error:<stage>:` contract"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"error:cli:{message}\n")


def build_parser() -> argparse.ArgumentParser:
    info = get_app_info()
    parser = CliArgumentParser(prog='catmod', description='Categorical modularity of word embeddings')
    parser.add_argument('--version', action='version', version=f"%(prog)s {info['version']}")
    add_global_args(parser)

    subparsers = parser.add_subparsers(dest='command', metavar='command', parser_class=CliArgumentParser)
    subparsers.required = True
    register_all(subparsers)
    return parser


def _one_line(text: str) -> str:
    return ' '.join(str(text).split())


def main(argv=None) -> int:
    config = get_config()
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(config, args.log_level)

    try:
        return args.handler(args)
    except CatmodError as e:
        logger.debug(f"{e.stage} failed: {e.details}")
        print(f"error:{e.stage}:{_one_line(e.message)}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("Unexpected failure")
        print(f"error:internal:{_one_line(e)}", file=sys.stderr)
        return 2
    finally:
        if config.ENABLE_PERFORMANCE_LOGGING:
            get_performance_manager().log_summary()


if __name__ == '__main__':
    sys.exit(main())
