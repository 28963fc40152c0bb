"""
Command task {sentiment|wordsim|bli}
"""

import logging

from config import get_config
from services import (
    Direction,
    bli_task,
    load_dictionary_tsv,
    load_sentiment_tsv,
    load_word2vec_text,
    load_wordsim_tsv,
    sentiment_task,
    wordsim_task,
)

from .common import add_output_args, add_vector_args, global_options, write_document

logger = logging.getLogger(__name__)


def _add_trial_args(parser):
    config = get_config()
    parser.add_argument('--trials', type=int, default=config.DEFAULT_TRIALS, help='independent trials to average')
    parser.add_argument('--seed', type=int, default=config.DEFAULT_SEED, help='master seed of the trial splits')
    add_output_args(parser)


def register(subparsers):
    shared = global_options()
    parser = subparsers.add_parser('task', help='run one downstream task')
    tasks = parser.add_subparsers(dest='task', metavar='{sentiment,wordsim,bli}')
    tasks.required = True

    sentiment = tasks.add_parser('sentiment', parents=[shared], help='linear SVM on mean word vectors')
    add_vector_args(sentiment, lexicon=False)
    sentiment.add_argument('--data', required=True, help='label<TAB>text file')
    _add_trial_args(sentiment)

    wordsim = tasks.add_parser('wordsim', parents=[shared], help='word-pair similarity regression')
    add_vector_args(wordsim, lexicon=False)
    wordsim.add_argument('--data', required=True, help='word1<TAB>word2<TAB>score file')
    _add_trial_args(wordsim)

    bli = tasks.add_parser('bli', parents=[shared], help='bilingual lexicon induction by linear regression')
    bli.add_argument('--source-vectors', required=True)
    bli.add_argument('--target-vectors', required=True)
    bli.add_argument('--source-limit', type=int, default=None)
    bli.add_argument('--target-limit', type=int, default=None)
    bli.add_argument('--dictionary', required=True, help='source<TAB>target file')
    bli.add_argument('--direction', choices=[d.value for d in Direction], default=Direction.GENERIC.value)
    bli.add_argument('--train-size', type=int, default=None)
    bli.add_argument('--test-size', type=int, default=None)
    bli.add_argument('--test-fraction', type=float, default=0.2)
    _add_trial_args(bli)

    parser.set_defaults(handler=cmd_task)


def cmd_task(args) -> int:
    """Run the task, write the TaskResult JSON and print `column<TAB>value` lines"""
    if args.task == 'sentiment':
        table = load_word2vec_text(args.vectors, args.limit)
        results = list(sentiment_task(table, load_sentiment_tsv(args.data, split_seed=args.seed),
                                      args.trials, args.seed))
    elif args.task == 'wordsim':
        table = load_word2vec_text(args.vectors, args.limit)
        results = [wordsim_task(table, load_wordsim_tsv(args.data), args.trials, args.seed)]
    else:
        source = load_word2vec_text(args.source_vectors, args.source_limit)
        target = load_word2vec_text(args.target_vectors, args.target_limit)
        dictionary = load_dictionary_tsv(args.dictionary, Direction(args.direction))
        results = [bli_task(source, target, dictionary, args.trials, args.seed,
                            train_size=args.train_size, test_size=args.test_size,
                            test_fraction=args.test_fraction)]

    if args.out:
        write_document({'results': [result.to_dict() for result in results]}, args.out)
    for result in results:
        print(f"{result.column}\t{result.value:.6f}")
    return 0
