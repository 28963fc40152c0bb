"""
pytest configuration for catmod
"""

import os
import shutil
import sys
import tempfile

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from services import EmbeddingTable, KnnGraph, write_word2vec_text  # noqa: E402


@pytest.fixture
def temp_data_dir():
    """Temporary directory for test files"""
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def write_vectors(temp_data_dir):
    """Write {word: vector} (or words + matrix) as a word2vec text file, return the path"""
    def _write(mapping=None, name='vectors.vec', words=None, matrix=None):
        if mapping is None:
            mapping = dict(zip(words, np.asarray(matrix)))
        path = os.path.join(temp_data_dir, name)
        write_word2vec_text(EmbeddingTable.from_mapping(mapping), path)
        return path
    return _write


@pytest.fixture
def write_text(temp_data_dir):
    """Write raw text (or bytes) to a file in the temp dir, return the path"""
    def _write(name, content):
        path = os.path.join(temp_data_dir, name)
        mode = 'wb' if isinstance(content, bytes) else 'w'
        with open(path, mode, **({} if mode == 'wb' else {'encoding': 'utf-8'})) as handle:
            handle.write(content)
        return path
    return _write


@pytest.fixture
def write_lexicon_rows(temp_data_dir):
    """Write (word, l1, l2, l3) rows as a lexicon TSV, return the path"""
    def _write(rows, name='lexicon.tsv'):
        path = os.path.join(temp_data_dir, name)
        with open(path, 'w', encoding='utf-8') as handle:
            for row in rows:
                handle.write('\t'.join(row) + '\n')
        return path
    return _write


def make_clusters(rng, clusters, per_cluster, dim, noise, scale=10.0):
    """
    Gaussian clusters around orthogonal centers.

    Returns:
        (words, vectors, cluster index per word)
    """
    assert dim >= clusters
    centers = np.eye(dim)[:clusters] * scale
    words, rows, groups = [], [], []
    for c in range(clusters):
        for i in range(per_cluster):
            words.append(f"w{c}_{i}")
            rows.append(centers[c] + noise * rng.normal(size=dim))
            groups.append(c)
    return words, np.vstack(rows), groups


def cluster_lexicon_rows(words, groups):
    """Level 1 groups clusters in pairs, levels 2 and 3 use the cluster itself"""
    return [(w, f"super{g // 2}", f"cluster{g}", f"cluster{g}") for w, g in zip(words, groups)]


def graph_from_adjacency(adjacency, k):
    A = np.asarray(adjacency, dtype=np.int64)
    return KnnGraph(k=k, adjacency=A, sym_weights=A + A.T)


def random_knn_adjacency(rng, n, k):
    A = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        others = [j for j in range(n) if j != i]
        A[i, rng.choice(others, size=k, replace=False)] = 1
    return A


@pytest.fixture
def cluster_factory(rng):
    def _make(clusters=3, per_cluster=5, dim=8, noise=0.01):
        return make_clusters(rng, clusters, per_cluster, dim, noise)
    return _make
