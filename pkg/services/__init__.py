"""
Services catmod - categorical modularity pipeline
"""

from .errors import (
    CatmodError,
    VectorFormatError,
    MissingWordsError,
    LexiconFormatError,
    GraphError,
    DegenerateInputError,
    StatisticsError,
    TaskDataError,
    ManifestError,
    OutputError,
    InvariantViolation
)
from .models import (
    MissingPolicy,
    LexiconMode,
    ModularityMode,
    Direction,
    EmbeddingTable,
    ResolvedWordSet,
    CategoryLexicon,
    CategoryAssignment,
    SimilarityMatrix,
    KnnGraph,
    ModularityReport,
    Partition,
    PairedSample,
    LabeledTextSet,
    WordPairSet,
    BilingualDictionary,
    TaskResult,
    RunSpec,
    RunManifest,
    RunReports,
    RunTaskResults,
    CorrelationCell,
    CorrelationTable,
    CategoryRank,
    row_label
)
from .performance_manager import (
    PerformanceManager,
    get_performance_manager,
    performance_monitor
)
from .report_cache import ReportCache, content_key
from .vecstore import load_word2vec_text, write_word2vec_text, resolve
from .lexicon import load_lexicon, write_lexicon, assignment_at_level, binder_catalog
from .simgraph import cosine_similarity, similarity_matrix, knn_graph, write_edge_list
from .modularity import (
    expected_fractions,
    observed_fractions,
    modularity_report,
    undirected_modularity
)
from .community import (
    greedy_modularity_partition,
    greedy_modularity_communities,
    partition_as_assignment
)
from .stats import rank_transform, spearman
from .solvers import LinearSVM, fit_ols, predict
from .tasks import (
    load_sentiment_tsv,
    load_wordsim_tsv,
    load_dictionary_tsv,
    embed_text_mean,
    sentiment_task,
    wordsim_features,
    wordsim_task,
    bli_task
)
from .sweep import (
    load_manifest,
    run_sweep,
    run_modularity_grid,
    run_tasks,
    correlate_grid,
    rank_single_categories,
    ranking_ends,
    select_optimal_rows,
    best_model_counts,
    rank_languages,
    write_reports_dir,
    load_reports_dir,
    write_tasks_dir,
    load_tasks_dir,
    write_correlation_json,
    write_correlation_csv
)

__all__ = [
    # Errors
    'CatmodError',
    'VectorFormatError',
    'MissingWordsError',
    'LexiconFormatError',
    'GraphError',
    'DegenerateInputError',
    'StatisticsError',
    'TaskDataError',
    'ManifestError',
    'OutputError',
    'InvariantViolation',
    # Models
    'MissingPolicy',
    'LexiconMode',
    'ModularityMode',
    'Direction',
    'EmbeddingTable',
    'ResolvedWordSet',
    'CategoryLexicon',
    'CategoryAssignment',
    'SimilarityMatrix',
    'KnnGraph',
    'ModularityReport',
    'Partition',
    'PairedSample',
    'LabeledTextSet',
    'WordPairSet',
    'BilingualDictionary',
    'TaskResult',
    'RunSpec',
    'RunManifest',
    'RunReports',
    'RunTaskResults',
    'CorrelationCell',
    'CorrelationTable',
    'CategoryRank',
    'row_label',
    # Cache & Performance
    'ReportCache',
    'content_key',
    'PerformanceManager',
    'get_performance_manager',
    'performance_monitor',
    # Vectors & Lexicon
    'load_word2vec_text',
    'write_word2vec_text',
    'resolve',
    'load_lexicon',
    'write_lexicon',
    'assignment_at_level',
    'binder_catalog',
    # Graphs
    'cosine_similarity',
    'similarity_matrix',
    'knn_graph',
    'write_edge_list',
    'expected_fractions',
    'observed_fractions',
    'modularity_report',
    'undirected_modularity',
    'greedy_modularity_partition',
    'greedy_modularity_communities',
    'partition_as_assignment',
    # Statistics
    'rank_transform',
    'spearman',
    # Tasks
    'LinearSVM',
    'fit_ols',
    'predict',
    'load_sentiment_tsv',
    'load_wordsim_tsv',
    'load_dictionary_tsv',
    'embed_text_mean',
    'sentiment_task',
    'wordsim_features',
    'wordsim_task',
    'bli_task',
    # Sweep
    'load_manifest',
    'run_sweep',
    'run_modularity_grid',
    'run_tasks',
    'correlate_grid',
    'rank_single_categories',
    'ranking_ends',
    'select_optimal_rows',
    'best_model_counts',
    'rank_languages',
    'write_reports_dir',
    'load_reports_dir',
    'write_tasks_dir',
    'load_tasks_dir',
    'write_correlation_json',
    'write_correlation_csv',
]
