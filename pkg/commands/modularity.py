"""
Commands modularity and communities
"""

import logging

from config import get_config
from services import (
    assignment_at_level,
    greedy_modularity_communities,
    knn_graph,
    modularity_report,
    partition_as_assignment,
    similarity_matrix,
    write_edge_list,
)
from services.models import LEVELS

from .common import add_graph_args, add_output_args, add_vector_args, global_options, load_inputs, write_document

logger = logging.getLogger(__name__)


def register(subparsers):
    config = get_config()
    shared = global_options()

    parser = subparsers.add_parser('modularity', parents=[shared],
                                   help='categorical modularity of one embedding table')
    add_vector_args(parser)
    parser.add_argument('--level', type=int, choices=LEVELS, default=config.DEFAULT_LEVEL,
                        help='category level of the lexicon')
    add_graph_args(parser)
    parser.add_argument('--edges', default=None, help='also dump the directed k-NN edges as TSV')
    add_output_args(parser)
    parser.set_defaults(handler=cmd_modularity)

    parser = subparsers.add_parser('communities', parents=[shared],
                                   help='greedy modularity communities (control clusters)')
    add_vector_args(parser)
    add_graph_args(parser)
    add_output_args(parser)
    parser.set_defaults(handler=cmd_communities)


def cmd_modularity(args) -> int:
    """Write the ModularityReport JSON and print Q_norm"""
    table, ws = load_inputs(args)
    graph = knn_graph(similarity_matrix(ws), args.k, ws.words)
    if args.edges:
        write_edge_list(graph, args.edges)

    report = modularity_report(graph, assignment_at_level(ws.lexicon, args.level), args.mode,
                               table.source_label)
    if args.out:
        document = report.to_dict()
        document['words'] = ws.n
        document['missing'] = list(ws.missing)
        write_document(document, args.out)

    print(f"{report.Q_norm:.6f}")
    return 0


def cmd_communities(args) -> int:
    """Write the partition and the control report scored on its own communities"""
    table, ws = load_inputs(args)
    graph = knn_graph(similarity_matrix(ws), args.k, ws.words)
    partition = greedy_modularity_communities(graph)
    report = modularity_report(graph, partition_as_assignment(partition), args.mode, table.source_label)

    if args.out:
        document = {
            'partition': partition.to_dict(),
            'words': list(ws.words),
            'report': report.to_dict(),
        }
        write_document(document, args.out)

    logger.info(f"{partition.num_communities} communities over {ws.n} words")
    print(f"{report.Q_norm:.6f}")
    return 0
