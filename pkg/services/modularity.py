"""
Categorical modularity of a k-NN graph

    a_c    = (1/2m) sum_i d_i [g_i = c]
    e_c    = (1/2m) sum_ij W_ij [g_i = c][g_j = c]
    Q      = sum_c (e_c - a_c^2)
    Q_max  = 1 - sum_c a_c^2
    Q_norm = Q / Q_max,   Q_c = (e_c - a_c^2) / Q_max

W is B = A + A^T with 2m = 2Nk in multigraph-sum mode, and the simple union
graph (A OR A^T) with m undirected edges in union-simple mode.
"""

import logging
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateInputError, GraphError, InvariantViolation
from .models import CategoryAssignment, KnnGraph, ModularityMode, ModularityReport

logger = logging.getLogger(__name__)

IDENTITY_TOLERANCE = 1e-9
DEGENERATE_TOLERANCE = 1e-12


def _weights(g: KnnGraph, mode: ModularityMode) -> Tuple[np.ndarray, float]:
    if mode is ModularityMode.MULTIGRAPH_SUM:
        return np.asarray(g.sym_weights, dtype=np.float64), float(2 * g.m)
    union = g.union_adjacency().astype(np.float64)
    return union, float(union.sum())


def _prepare(g: KnnGraph, assign: CategoryAssignment, mode) -> Tuple[np.ndarray, float, np.ndarray]:
    if assign.n != g.n:
        raise GraphError(f"assignment covers {assign.n} words but the graph has {g.n} nodes")
    W, two_m = _weights(g, ModularityMode(mode))
    if two_m == 0:
        raise DegenerateInputError("graph has no edges")
    return W, two_m, assign.indicator()


def expected_fractions(g: KnnGraph, assign: CategoryAssignment,
                       mode: Union[ModularityMode, str] = ModularityMode.MULTIGRAPH_SUM) -> np.ndarray:
    """a_c: share of edge endpoints attached to category c"""
    W, two_m, S = _prepare(g, assign, mode)
    degrees = W.sum(axis=1)
    return S.T @ degrees / two_m


def observed_fractions(g: KnnGraph, assign: CategoryAssignment,
                       mode: Union[ModularityMode, str] = ModularityMode.MULTIGRAPH_SUM) -> np.ndarray:
    """e_c: share of edge endpoints inside category c"""
    W, two_m, S = _prepare(g, assign, mode)
    return ((W @ S) * S).sum(axis=0) / two_m


def _check_identities(a: np.ndarray, e: np.ndarray, Q: float, Q_norm: float, Q_c: np.ndarray):
    if abs(a.sum() - 1.0) > IDENTITY_TOLERANCE:
        raise InvariantViolation(f"expected fractions sum to {a.sum():.12f}, not 1")
    if not -IDENTITY_TOLERANCE <= e.sum() <= 1.0 + IDENTITY_TOLERANCE:
        raise InvariantViolation(f"observed fractions sum to {e.sum():.12f}, outside [0, 1]")
    if abs(Q - float(np.sum(e - a ** 2))) > IDENTITY_TOLERANCE:
        raise InvariantViolation("Q differs from sum_c (e_c - a_c^2)")
    if abs(Q_c.sum() - Q_norm) > IDENTITY_TOLERANCE:
        raise InvariantViolation(f"per-category values sum to {Q_c.sum():.12f}, Q_norm is {Q_norm:.12f}")
    if Q_norm > 1.0 + IDENTITY_TOLERANCE:
        raise InvariantViolation(f"Q_norm {Q_norm} exceeds 1")


def modularity_report(g: KnnGraph, assign: CategoryAssignment,
                      mode: Union[ModularityMode, str] = ModularityMode.MULTIGRAPH_SUM,
                      source_label: str = "") -> ModularityReport:
    """
    Score one category assignment on one graph

    Raises:
        DegenerateInputError: Q_max is 0, i.e. all edge endpoints sit in one category
        InvariantViolation: an internal identity does not hold
    """
    mode = ModularityMode(mode)
    W, two_m, S = _prepare(g, assign, mode)
    a = S.T @ W.sum(axis=1) / two_m
    e = ((W @ S) * S).sum(axis=0) / two_m

    contributions = e - a ** 2
    Q = float(contributions.sum())
    Q_max = float(1.0 - np.sum(a ** 2))
    if Q_max <= DEGENERATE_TOLERANCE:
        raise DegenerateInputError(
            f"Q_max is 0 at level {assign.level}, k={g.k}: a single effective category "
            f"({assign.num_categories} label(s)), modularity cannot be normalized"
        )
    Q_c = contributions / Q_max
    Q_norm = Q / Q_max
    _check_identities(a, e, Q, Q_norm, Q_c)

    logger.debug(f"level={assign.level} k={g.k} mode={mode.value}: Q={Q:.6f} Q_norm={Q_norm:.6f}")
    return ModularityReport(
        level=assign.level,
        k=g.k,
        mode=mode,
        categories=tuple(assign.labels),
        a=tuple(a.tolist()),
        e=tuple(e.tolist()),
        Q=Q,
        Q_max=Q_max,
        Q_norm=Q_norm,
        Q_c=tuple(Q_c.tolist()),
        source_label=source_label,
    )


def undirected_modularity(adjacency: np.ndarray, category_of: Sequence[int]) -> float:
    """Newman modularity Q of a symmetric 0/1 adjacency (each edge counted once)"""
    W = np.asarray(adjacency, dtype=np.float64)
    two_m = W.sum()
    if two_m == 0:
        raise DegenerateInputError("graph has no edges")
    _, groups = np.unique(np.asarray(category_of), return_inverse=True)
    S = np.zeros((W.shape[0], groups.max() + 1))
    S[np.arange(W.shape[0]), groups] = 1.0
    a = S.T @ W.sum(axis=1) / two_m
    e = ((W @ S) * S).sum(axis=0) / two_m
    return float(np.sum(e - a ** 2))
