"""
Tests for greedy modularity communities
"""

import logging
from itertools import combinations

import networkx as nx
import numpy as np
import pytest

from services import (
    DegenerateInputError,
    GraphError,
    Partition,
    greedy_modularity_communities,
    greedy_modularity_partition,
    knn_graph,
    modularity_report,
    partition_as_assignment,
    similarity_matrix,
    undirected_modularity,
)
from tests.conftest import graph_from_adjacency, make_clusters


def _adjusted_rand(labels_a, labels_b):
    """Pair-counting ARI over all node pairs"""
    pairs = list(combinations(range(len(labels_a)), 2))
    same_a = [labels_a[i] == labels_a[j] for i, j in pairs]
    same_b = [labels_b[i] == labels_b[j] for i, j in pairs]
    both = sum(1 for x, y in zip(same_a, same_b) if x and y)
    total = len(pairs)
    sum_a, sum_b = sum(same_a), sum(same_b)
    expected = sum_a * sum_b / total
    best = (sum_a + sum_b) / 2
    if best == expected:
        return 1.0
    return (both - expected) / (best - expected)


def _planted(seed, groups=4, size=10, p_in=0.9, p_out=0.05):
    rng = np.random.default_rng(seed)
    n = groups * size
    truth = [i // size for i in range(n)]
    A = np.zeros((n, n), dtype=int)
    for i, j in combinations(range(n), 2):
        p = p_in if truth[i] == truth[j] else p_out
        if rng.random() < p:
            A[i, j] = A[j, i] = 1
    return A, truth


def test_two_cliques_with_bridge():
    A = nx.to_numpy_array(nx.barbell_graph(4, 0), dtype=int)

    p = greedy_modularity_partition(A)

    assert p.num_communities == 2
    assert p.communities() == [[0, 1, 2, 3], [4, 5, 6, 7]]


def test_partition_json_document():
    p = greedy_modularity_partition(nx.to_numpy_array(nx.barbell_graph(4, 0), dtype=int))

    document = p.to_dict()

    assert document['communities'] == [[0, 1, 2, 3], [4, 5, 6, 7]]
    assert document['num_communities'] == 2
    assert document['Q_trace'][-1] == pytest.approx(max(document['Q_trace']))
    assert Partition.from_dict(document) == p


def test_complete_graph_is_self_consistent():
    A = 1 - np.eye(5, dtype=int)

    p = greedy_modularity_partition(A)

    assert undirected_modularity(A, p.community_of) == pytest.approx(p.Q_trace[-1], abs=1e-9)


def test_trace_strictly_increases():
    A, _ = _planted(3)

    p = greedy_modularity_partition(A)

    assert all(later > earlier for earlier, later in zip(p.Q_trace, p.Q_trace[1:]))
    assert len(p.Q_trace) - 1 <= A.shape[0] - 1


def test_ids_are_compact_and_ordered():
    A, _ = _planted(5)

    p = greedy_modularity_partition(A)

    assert set(p.community_of) == set(range(p.num_communities))
    firsts = [members[0] for members in p.communities()]
    assert firsts == sorted(firsts)


def test_deterministic():
    A, _ = _planted(11)

    assert greedy_modularity_partition(A) == greedy_modularity_partition(A.copy())


@pytest.mark.acceptance
def test_planted_partition_recovery():
    recovered = 0
    for seed in range(10):
        A, truth = _planted(seed)

        p = greedy_modularity_partition(A)

        assert undirected_modularity(A, p.community_of) == pytest.approx(p.Q_trace[-1], abs=1e-9)
        if _adjusted_rand(truth, p.community_of) >= 0.9:
            recovered += 1
    assert recovered >= 8


def test_final_q_close_to_networkx_greedy():
    A, _ = _planted(7)
    G = nx.from_numpy_array(A)

    ours = greedy_modularity_partition(A)
    theirs = nx.community.greedy_modularity_communities(G)

    assert ours.Q_trace[-1] == pytest.approx(nx.community.modularity(G, theirs), abs=0.05)


def test_disconnected_components_stay_apart():
    A = np.zeros((6, 6), dtype=int)
    for i, j in ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)):
        A[i, j] = A[j, i] = 1

    p = greedy_modularity_partition(A)

    assert p.communities() == [[0, 1, 2], [3, 4, 5]]


@pytest.mark.parametrize('adjacency', [
    np.array([[0, 1], [0, 0]]),
    np.array([[1, 1], [1, 0]]),
    np.array([[0, 2], [2, 0]]),
    np.zeros((3, 3), dtype=int),
    np.zeros((2, 3), dtype=int),
])
def test_rejects_invalid_adjacency(adjacency):
    with pytest.raises(GraphError):
        greedy_modularity_partition(adjacency)


def test_knn_graph_communities_score_as_control(rng):
    words, X, groups = make_clusters(rng, 4, per_cluster=6, dim=16, noise=0.05)
    g = knn_graph(similarity_matrix(X), 2, words)

    p = greedy_modularity_communities(g)
    report = modularity_report(g, partition_as_assignment(p), 'union-simple')

    assert report.level == 'custom'
    assert report.Q == pytest.approx(p.Q_trace[-1], abs=1e-9)
    assert p.num_communities >= 4


def test_exact_recovery_scores_like_planted_labels():
    exact = 0
    for seed in range(10):
        A, truth = _planted(seed)
        g = graph_from_adjacency(A, 1)
        p = greedy_modularity_communities(g)
        if _adjusted_rand(truth, p.community_of) < 1.0:
            continue
        exact += 1
        planted = partition_as_assignment(Partition(community_of=tuple(truth), Q_trace=(0.0,)))

        control = modularity_report(g, partition_as_assignment(p), 'union-simple')
        labelled = modularity_report(g, planted, 'union-simple')

        assert control.Q_norm == pytest.approx(labelled.Q_norm, abs=0.02)
    assert exact >= 1


class TestPartitionAsAssignment:

    def test_two_blocks(self):
        assign = partition_as_assignment(Partition(community_of=(0, 0, 1, 1), Q_trace=(0.0,)))

        assert assign.num_categories == 2
        assert assign.labels == ('community-0', 'community-1')
        assert assign.level == 'custom'

    def test_singletons(self):
        assign = partition_as_assignment(Partition(community_of=tuple(range(5)), Q_trace=(0.0,)))

        assert assign.num_categories == 5

    def test_single_community_is_degenerate_downstream(self, caplog):
        A = 1 - np.eye(4, dtype=int)
        g = knn_graph(similarity_matrix(np.ones((4, 3))), 3)
        p = greedy_modularity_partition(A)

        with caplog.at_level(logging.WARNING):
            assign = partition_as_assignment(p)
        assert p.num_communities == 1
        assert 'single community' in caplog.text

        with pytest.raises(DegenerateInputError):
            modularity_report(g, assign)
