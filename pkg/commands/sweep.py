"""
Commands sweep, correlate and leaderboard
"""

import logging
import os
import sys

from services import (
    best_model_counts,
    correlate_grid,
    load_manifest,
    load_reports_dir,
    load_tasks_dir,
    rank_languages,
    rank_single_categories,
    run_sweep,
    select_optimal_rows,
    write_correlation_csv,
    write_correlation_json,
    write_reports_dir,
    write_tasks_dir,
)
from services.models import MERGED
from services.report_cache import dumps_document
from services.sweep import correlation_csv_text, ranking_ends

from .common import global_options, open_cache, write_document

logger = logging.getLogger(__name__)

FATAL_STAGES = ('invariant', 'internal')


def register(subparsers):
    shared = global_options()
    parser = subparsers.add_parser('sweep', parents=[shared],
                                   help='modularity grid and tasks for every run of a manifest')
    parser.add_argument('--manifest', required=True, help='JSON run manifest')
    parser.add_argument('--out', default='sweep_out', help='directory receiving reports/ and tasks/')
    parser.add_argument('--skip-tasks', action='store_true', help='only compute the modularity grid')
    parser.set_defaults(handler=cmd_sweep)

    parser = subparsers.add_parser('correlate', parents=[shared],
                                   help='Spearman correlations between modularity and tasks')
    parser.add_argument('--reports', required=True, help='directory of per-run report JSON files')
    parser.add_argument('--tasks', required=True, help='directory of per-run task JSON files')
    parser.add_argument('--subset', default=MERGED, help='merged, or a model tag such as ft, m, s')
    parser.add_argument('--out', default=None, help='path prefix: writes PREFIX.json and PREFIX.csv')
    parser.add_argument('--format', choices=['json', 'csv'], default='json', help='standard output format')
    parser.add_argument('--rank-categories', metavar='ROW', default=None,
                        help='also rank single categories of this row, e.g. "3, 2"')
    parser.set_defaults(handler=cmd_correlate)

    parser = subparsers.add_parser('leaderboard', parents=[shared],
                                   help='best model per language and language ranking')
    parser.add_argument('--reports', required=True, help='directory of per-run report JSON files')
    parser.add_argument('--row', default='3, 2', help='grid row to compare, e.g. "2, 2"')
    parser.set_defaults(handler=cmd_leaderboard)


def cmd_sweep(args) -> int:
    """
    Run the manifest, write one JSON per run under OUT/reports and OUT/tasks.
    Failed runs are summarized on standard error; they only change the exit
    code with --strict.
    """
    manifest = load_manifest(args.manifest)
    cache = open_cache(args)
    result = run_sweep(manifest, cache, jobs=args.jobs, with_tasks=not args.skip_tasks)

    write_reports_dir(result.reports, os.path.join(args.out, 'reports'))
    if result.tasks:
        write_tasks_dir(result.tasks, os.path.join(args.out, 'tasks'))
    write_document({'failures': result.failures}, os.path.join(args.out, 'failures.json'))

    for run_id, failures in result.failures.items():
        for failure in failures:
            where = f"{run_id}/{failure['row']}" if failure['row'] else run_id
            print(f"failed:{where}:{failure['stage']}:{failure['message']}", file=sys.stderr)

    stats = cache.stats()
    print(f"reports={result.report_count} cache_hits={result.cache_hits} "
          f"cache_entries={stats['entries']} failed_runs={len(result.failures)}")

    if result.failures and args.strict:
        stages = {failure['stage'] for failures in result.failures.values() for failure in failures}
        return 2 if stages & set(FATAL_STAGES) else 1
    return 0


def cmd_correlate(args) -> int:
    reports = load_reports_dir(args.reports)
    tasks = load_tasks_dir(args.tasks)
    table = correlate_grid(reports, tasks, args.subset)

    document = {
        'table': table.to_dict(),
        'optimal_rows': select_optimal_rows(table),
    }
    if args.rank_categories:
        rankings = {}
        for metric in table.metrics:
            ranking = rank_single_categories(reports, tasks, args.rank_categories, metric, args.subset)
            most, least = ranking_ends(ranking)
            rankings[metric] = {
                'ranking': [rank.to_dict() for rank in ranking],
                'most_predictive': [rank.category for rank in most],
                'least_predictive': [rank.category for rank in least],
            }
        document['category_rankings'] = {'row': args.rank_categories, 'metrics': rankings}

    if args.out:
        write_correlation_json(table, f"{args.out}.json")
        write_correlation_csv(table, f"{args.out}.csv")
        if args.rank_categories:
            write_document(document['category_rankings'], f"{args.out}.categories.json")

    if args.format == 'csv':
        sys.stdout.write(correlation_csv_text(table))
    else:
        sys.stdout.write(dumps_document(document))
    return 0


def cmd_leaderboard(args) -> int:
    reports = load_reports_dir(args.reports)
    winners, counts = best_model_counts(reports, args.row)
    models = sorted({run.model for run in reports.values()})
    document = {
        'row': args.row,
        'best_model_per_language': winners,
        'wins_per_model': counts,
        'languages_by_model': {
            model: [[language, q_norm] for language, q_norm in rank_languages(reports, model, args.row)]
            for model in models
        },
    }
    sys.stdout.write(dumps_document(document))
    return 0
