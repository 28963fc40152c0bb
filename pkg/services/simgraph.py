"""
Similarity graph - cosine similarity matrix and k-nearest-neighbor adjacency
"""

import logging
from typing import Sequence, Union

import numpy as np

from .errors import GraphError, InvariantViolation, OutputError
from .models import KnnGraph, ResolvedWordSet, SimilarityMatrix
from .performance_manager import performance_monitor

logger = logging.getLogger(__name__)


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """dot(u, v) / (|u| |v|), or 0.0 when either vector is zero"""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise GraphError(f"cannot compare vectors of length {u.shape[0]} and {v.shape[0]}")
    norm_u, norm_v = np.linalg.norm(u), np.linalg.norm(v)
    if norm_u == 0.0 or norm_v == 0.0:
        logger.warning("Cosine similarity with a zero vector set to 0")
        return 0.0
    return float(np.clip(np.dot(u, v) / (norm_u * norm_v), -1.0, 1.0))


@performance_monitor('similarity_matrix')
def similarity_matrix(ws: Union[ResolvedWordSet, np.ndarray]) -> SimilarityMatrix:
    """
    Pairwise cosine similarities of the rows of a resolved word set.

    The upper triangle is computed and mirrored, so the result is exactly
    symmetric. Zero vectors get similarity 0 with everything, themselves included.
    """
    vectors = ws.vectors if isinstance(ws, ResolvedWordSet) else ws
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise GraphError(f"need at least 2 vectors, got shape {X.shape}")

    norms = np.linalg.norm(X, axis=1)
    zero = norms == 0.0
    if zero.any():
        logger.warning(f"{int(zero.sum())} zero vector(s): similarity set to 0")
    unit = np.divide(X, norms[:, None], out=np.zeros_like(X), where=~zero[:, None])

    upper = np.triu(unit @ unit.T, k=1)
    values = upper + upper.T
    np.fill_diagonal(values, np.where(zero, 0.0, 1.0))
    np.clip(values, -1.0, 1.0, out=values)
    values.setflags(write=False)
    return SimilarityMatrix(values=values)


@performance_monitor('knn_graph')
def knn_graph(sim: SimilarityMatrix, k: int, words: Sequence[str] = ()) -> KnnGraph:
    """
    Directed k-NN adjacency: row i marks the k most similar other words.

    Ties go to the smaller column index; a word is never its own neighbor.
    """
    n = sim.n
    if not 1 <= k <= n - 1:
        raise GraphError(f"k must be in [1, {n - 1}] for {n} words, got {k}")

    scores = np.array(sim.values, dtype=np.float64)
    np.fill_diagonal(scores, -np.inf)
    # stable sort keeps equal scores in ascending column order
    neighbors = np.argsort(-scores, axis=1, kind='stable')[:, :k]

    adjacency = np.zeros((n, n), dtype=np.int64)
    adjacency[np.repeat(np.arange(n), k), neighbors.ravel()] = 1
    sym_weights = adjacency + adjacency.T

    if np.any(np.diag(adjacency)) or np.any(adjacency.sum(axis=1) != k):
        raise InvariantViolation("k-NN adjacency must have k off-diagonal ones per row")
    if sym_weights.sum() != 2 * n * k:
        raise InvariantViolation("symmetric weights must sum to 2m")

    adjacency.setflags(write=False)
    sym_weights.setflags(write=False)
    logger.debug(f"Built {k}-NN graph over {n} words")
    return KnnGraph(k=k, adjacency=adjacency, sym_weights=sym_weights, words=tuple(words))


def write_edge_list(graph: KnnGraph, path: str, words: Sequence[str] = None):
    """One `i<TAB>j` line per directed edge, plus the two words when known"""
    words = tuple(words) if words is not None else graph.words
    try:
        with open(path, 'w', encoding='utf-8', newline='\n') as handle:
            for i, j in graph.edges():
                if words:
                    handle.write(f"{i}\t{j}\t{words[i]}\t{words[j]}\n")
                else:
                    handle.write(f"{i}\t{j}\n")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}", path=path) from e
    logger.info(f"Wrote {graph.m} directed edges to {path}")
