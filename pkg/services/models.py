"""
Data models for catmod
Central place for every value type passed between pipeline stages
"""

import unicodedata
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    CatmodError,
    GraphError,
    LexiconFormatError,
    ManifestError,
    StatisticsError,
    TaskDataError,
    VectorFormatError,
)


# ============================================================
# ENUMS
# ============================================================

class MissingPolicy(Enum):
    """What `resolve` does with lexicon words absent from the vectors"""
    FAIL = "fail"
    SKIP_MISSING = "skip-missing"


class LexiconMode(Enum):
    BINDER_STRICT = "binder-strict"
    GENERIC = "generic"


class ModularityMode(Enum):
    """How the asymmetric k-NN matrix is turned into an undirected graph"""
    MULTIGRAPH_SUM = "multigraph-sum"  # B = A + A^T, m = N*k
    UNION_SIMPLE = "union-simple"      # A OR A^T, mutual edges counted once


class Direction(Enum):
    TO_ENGLISH = "to-english"
    FROM_ENGLISH = "from-english"
    GENERIC = "generic"


LEVELS = (1, 2, 3)
CONTROL = "C"
CUSTOM = "custom"
MERGED = "merged"


def normalize_word(word: str) -> str:
    """NFC normalization, no case folding"""
    return unicodedata.normalize('NFC', word)


def row_label(level: Union[int, str], k: int) -> str:
    """Table row key: "3, 2" for level 3 with k=2, "C, 2" for the control clusters"""
    return f"{level}, {k}"


# ============================================================
# EMBEDDINGS
# ============================================================

class _EntryView(Mapping):
    """Read-only word -> vector mapping backed by the table matrix"""

    def __init__(self, table: 'EmbeddingTable'):
        self._table = table

    def __getitem__(self, word: str) -> np.ndarray:
        return self._table.vector(word)

    def __iter__(self) -> Iterator[str]:
        return iter(self._table.words)

    def __len__(self) -> int:
        return len(self._table.words)


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """
    Word vectors of one (language, model) pair.
    Immutable after construction; the matrix is flagged read-only.
    """
    dimension: int
    words: Tuple[str, ...]
    vectors: np.ndarray
    source_label: str = ""
    duplicate_count: int = 0
    _index: Dict[str, int] = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.dimension <= 0:
            raise VectorFormatError(f"dimension must be positive, got {self.dimension}")
        vectors = np.asarray(self.vectors)
        if vectors.ndim != 2 or vectors.shape != (len(self.words), self.dimension):
            raise VectorFormatError(
                f"vector matrix shape {vectors.shape} does not match "
                f"{len(self.words)} words x {self.dimension} dimensions"
            )
        index: Dict[str, int] = {}
        for i, word in enumerate(self.words):
            if word in index:
                raise VectorFormatError(f"duplicate word '{word}' in embedding table")
            index[word] = i
        vectors.setflags(write=False)
        object.__setattr__(self, 'words', tuple(self.words))
        object.__setattr__(self, 'vectors', vectors)
        object.__setattr__(self, '_index', index)

    @classmethod
    def from_mapping(cls, mapping: Dict[str, Sequence[float]], source_label: str = "",
                     dtype=np.float32) -> 'EmbeddingTable':
        """Build a table from an in-memory word -> vector mapping"""
        words = [normalize_word(w) for w in mapping]
        rows = [np.asarray(v, dtype=dtype) for v in mapping.values()]
        if not rows:
            raise VectorFormatError("cannot build an embedding table without entries")
        dimension = rows[0].shape[0]
        for word, row in zip(words, rows):
            if row.shape != (dimension,):
                raise VectorFormatError(f"vector for '{word}' has length {row.shape[0]}, expected {dimension}")
        return cls(dimension=dimension, words=tuple(words), vectors=np.vstack(rows),
                   source_label=source_label)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self._index[word]]

    def get(self, word: str) -> Optional[np.ndarray]:
        i = self._index.get(word)
        return None if i is None else self.vectors[i]

    @property
    def entries(self) -> Mapping:
        return _EntryView(self)


@dataclass(frozen=True, eq=False)
class ResolvedWordSet:
    """Lexicon words bound to vectors; row i of `vectors` belongs to words[i]"""
    words: Tuple[str, ...]
    vectors: np.ndarray
    missing: Tuple[str, ...]
    lexicon: 'CategoryLexicon'

    @property
    def n(self) -> int:
        return len(self.words)


# ============================================================
# CATEGORIES
# ============================================================

@dataclass(frozen=True)
class CategoryLexicon:
    """
    Ordered word list with one label per level (1-3).
    Catalogs list the distinct labels of each level in first-appearance order.
    """
    words: Tuple[str, ...]
    labels: Tuple[Tuple[str, str, str], ...]
    level_catalogs: Tuple[Tuple[str, ...], Tuple[str, ...], Tuple[str, ...]]
    source: str = ""

    def __post_init__(self):
        if len(self.words) != len(self.labels):
            raise LexiconFormatError("every word needs exactly one label per level")
        if len(set(self.words)) != len(self.words):
            raise LexiconFormatError("lexicon words must be unique")
        for level_index, catalog in enumerate(self.level_catalogs):
            used = {row[level_index] for row in self.labels}
            if used != set(catalog):
                raise LexiconFormatError(
                    f"level {level_index + 1} catalog does not match the labels in use"
                )

    @classmethod
    def from_rows(cls, rows: Sequence[Tuple[str, str, str, str]], source: str = "") -> 'CategoryLexicon':
        """Rows are (word, level1, level2, level3)"""
        words = tuple(row[0] for row in rows)
        labels = tuple((row[1], row[2], row[3]) for row in rows)
        catalogs = []
        for level_index in range(3):
            seen: Dict[str, None] = {}
            for row in labels:
                seen.setdefault(row[level_index], None)
            catalogs.append(tuple(seen))
        return cls(words=words, labels=labels, level_catalogs=tuple(catalogs), source=source)

    def __len__(self) -> int:
        return len(self.words)

    def labels_at(self, level: int) -> Tuple[str, ...]:
        if level not in LEVELS:
            raise LexiconFormatError(f"level must be one of {LEVELS}, got {level}")
        return tuple(row[level - 1] for row in self.labels)

    def restrict(self, keep: Sequence[str]) -> 'CategoryLexicon':
        """Sub-lexicon with only `keep` words, lexicon order preserved"""
        keep_set = set(keep)
        rows = [(w,) + lab for w, lab in zip(self.words, self.labels) if w in keep_set]
        return CategoryLexicon.from_rows(rows, source=self.source)


@dataclass(frozen=True)
class CategoryAssignment:
    """Maps word index -> category index; `labels[c]` names category c"""
    level: Union[int, str]
    category_of: Tuple[int, ...]
    labels: Tuple[str, ...]

    def __post_init__(self):
        n_cat = len(self.labels)
        for i, c in enumerate(self.category_of):
            if not 0 <= c < n_cat:
                raise CatmodError(f"word {i} has category index {c} outside [0, {n_cat})")

    @property
    def num_categories(self) -> int:
        return len(self.labels)

    @property
    def n(self) -> int:
        return len(self.category_of)

    def members(self, category: int) -> List[int]:
        return [i for i, c in enumerate(self.category_of) if c == category]

    def indicator(self) -> np.ndarray:
        """N x C one-hot matrix"""
        onehot = np.zeros((self.n, self.num_categories))
        onehot[np.arange(self.n), np.asarray(self.category_of, dtype=int)] = 1.0
        return onehot


# ============================================================
# GRAPHS
# ============================================================

@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class KnnGraph:
    """
    Directed k-NN matrix plus its symmetric multigraph weights B = A + A^T.
    """
    k: int
    adjacency: np.ndarray
    sym_weights: np.ndarray
    words: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.adjacency.ndim != 2 or self.adjacency.shape[0] != self.adjacency.shape[1]:
            raise GraphError(f"adjacency must be square, got shape {self.adjacency.shape}")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def m(self) -> int:
        """Number of directed edges"""
        return self.n * self.k

    def union_adjacency(self) -> np.ndarray:
        """Undirected simple graph A OR A^T as a 0/1 int matrix"""
        return (self.sym_weights > 0).astype(np.int64)

    def edges(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(self.adjacency)
        return list(zip(rows.tolist(), cols.tolist()))


# ============================================================
# REPORTS
# ============================================================

@dataclass(frozen=True)
class ModularityReport:
    """Q, Q_max, Q_norm and per-category values for one (embedding, level, k)"""
    level: Union[int, str]
    k: int
    mode: ModularityMode
    categories: Tuple[str, ...]
    a: Tuple[float, ...]
    e: Tuple[float, ...]
    Q: float
    Q_max: float
    Q_norm: float
    Q_c: Tuple[float, ...]
    source_label: str = ""

    def category_value(self, label: str) -> Optional[float]:
        """Q_c of a category by name, None when the category is absent"""
        try:
            return self.Q_c[self.categories.index(label)]
        except ValueError:
            return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'level': self.level,
            'k': self.k,
            'mode': self.mode.value,
            'Q': self.Q,
            'Q_max': self.Q_max,
            'Q_norm': self.Q_norm,
            'categories': list(self.categories),
            'a': list(self.a),
            'e': list(self.e),
            'Q_c': list(self.Q_c),
            'source_label': self.source_label,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ModularityReport':
        return cls(
            level=data['level'],
            k=int(data['k']),
            mode=ModularityMode(data['mode']),
            categories=tuple(data['categories']),
            a=tuple(float(x) for x in data['a']),
            e=tuple(float(x) for x in data['e']),
            Q=float(data['Q']),
            Q_max=float(data['Q_max']),
            Q_norm=float(data['Q_norm']),
            Q_c=tuple(float(x) for x in data['Q_c']),
            source_label=data.get('source_label', ''),
        )


@dataclass(frozen=True)
class Partition:
    """Community of every node plus the modularity after each accepted merge"""
    community_of: Tuple[int, ...]
    Q_trace: Tuple[float, ...]

    @property
    def num_communities(self) -> int:
        return len(set(self.community_of))

    def communities(self) -> List[List[int]]:
        groups: List[List[int]] = [[] for _ in range(self.num_communities)]
        for node, c in enumerate(self.community_of):
            groups[c].append(node)
        return groups

    def to_dict(self) -> Dict[str, Any]:
        return {
            'communities': self.communities(),
            'num_communities': self.num_communities,
            'Q_trace': list(self.Q_trace),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Partition':
        communities = data['communities']
        n = sum(len(c) for c in communities)
        community_of = [0] * n
        for c, members in enumerate(communities):
            for node in members:
                community_of[node] = c
        return cls(community_of=tuple(community_of), Q_trace=tuple(data['Q_trace']))


# ============================================================
# STATISTICS
# ============================================================

@dataclass(frozen=True)
class PairedSample:
    x: Tuple[float, ...]
    y: Tuple[float, ...]

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise StatisticsError(f"paired sample lengths differ: {len(self.x)} vs {len(self.y)}")
        object.__setattr__(self, 'x', tuple(float(v) for v in self.x))
        object.__setattr__(self, 'y', tuple(float(v) for v in self.y))

    @property
    def n(self) -> int:
        return len(self.x)


# ============================================================
# DOWNSTREAM TASKS
# ============================================================

@dataclass(frozen=True)
class LabeledTextSet:
    items: Tuple[Tuple[int, str], ...]
    split_seed: int = 17
    train_fraction: float = 0.8

    def __post_init__(self):
        labels = {label for label, _ in self.items}
        if labels != {0, 1}:
            raise TaskDataError(f"sentiment data needs both labels 0 and 1, found {sorted(labels)}")
        if any(not text.strip() for _, text in self.items):
            raise TaskDataError("sentiment texts must be non-empty")
        if not 0.0 < self.train_fraction < 1.0:
            raise TaskDataError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


@dataclass(frozen=True)
class WordPairSet:
    pairs: Tuple[Tuple[str, str, float], ...]

    def __post_init__(self):
        for w1, w2, score in self.pairs:
            if not 0.0 <= score <= 4.0:
                raise TaskDataError(f"similarity score for ({w1}, {w2}) is {score}, outside [0, 4]")


@dataclass(frozen=True)
class BilingualDictionary:
    entries: Tuple[Tuple[str, str], ...]
    direction: Direction = Direction.GENERIC

    def __post_init__(self):
        if not self.entries:
            raise TaskDataError("bilingual dictionary is empty")


@dataclass(frozen=True)
class TaskResult:
    """Mean of a metric over independent trials"""
    task: str
    metric: str
    value: float
    trials: int
    per_trial: Tuple[float, ...]
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.trials < 1 or len(self.per_trial) != self.trials:
            raise TaskDataError(f"task result needs {self.trials} >= 1 per-trial values")

    @classmethod
    def from_trials(cls, task: str, metric: str, per_trial: Sequence[float],
                    details: Dict[str, Any] = None) -> 'TaskResult':
        values = tuple(float(v) for v in per_trial)
        return cls(task=task, metric=metric, value=float(np.mean(values)), trials=len(values),
                   per_trial=values, details=dict(details or {}))

    @property
    def column(self) -> str:
        """Correlation table column key, e.g. "wordsim:mean-MSE" """
        return f"{self.task}:{self.metric}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            'task': self.task,
            'metric': self.metric,
            'value': self.value,
            'trials': self.trials,
            'per_trial': list(self.per_trial),
            'details': self.details,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TaskResult':
        return cls(task=data['task'], metric=data['metric'], value=float(data['value']),
                   trials=int(data['trials']), per_trial=tuple(data['per_trial']),
                   details=data.get('details', {}))


# ============================================================
# SWEEP
# ============================================================

@dataclass(frozen=True)
class RunSpec:
    """One (language, model) embedding table and its optional task data"""
    id: str
    vectors: str
    model: str
    language: str
    lexicon: str
    limit: Optional[int] = None
    tasks: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RunManifest:
    runs: Tuple[RunSpec, ...]
    levels: Tuple[int, ...] = LEVELS
    ks: Tuple[int, ...] = (2, 3, 4)
    mode: ModularityMode = ModularityMode.MULTIGRAPH_SUM
    policy: MissingPolicy = MissingPolicy.SKIP_MISSING
    lexicon_mode: LexiconMode = LexiconMode.GENERIC
    seed: int = 17
    trials: int = 30

    def __post_init__(self):
        seen = set()
        for run in self.runs:
            key = (run.model, run.language)
            if key in seen:
                raise ManifestError(f"duplicate (model, language) pair {key} in manifest")
            seen.add(key)
        ids = [run.id for run in self.runs]
        if len(set(ids)) != len(ids):
            raise ManifestError("run ids must be unique")


@dataclass(frozen=True)
class RunReports:
    """All grid reports of one run, keyed by row label ("3, 2", "C, 2")"""
    run_id: str
    model: str
    language: str
    reports: Dict[str, ModularityReport]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'run': {'id': self.run_id, 'model': self.model, 'language': self.language},
            'reports': {row: report.to_dict() for row, report in sorted(self.reports.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunReports':
        run = data['run']
        return cls(run_id=run['id'], model=run['model'], language=run['language'],
                   reports={row: ModularityReport.from_dict(r) for row, r in data['reports'].items()})


@dataclass(frozen=True)
class RunTaskResults:
    """Downstream task scores of one run"""
    run_id: str
    model: str
    language: str
    results: Tuple[TaskResult, ...]

    def by_column(self) -> Dict[str, TaskResult]:
        return {result.column: result for result in self.results}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'run': {'id': self.run_id, 'model': self.model, 'language': self.language},
            'results': [result.to_dict() for result in self.results],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunTaskResults':
        run = data['run']
        return cls(run_id=run['id'], model=run['model'], language=run['language'],
                   results=tuple(TaskResult.from_dict(r) for r in data['results']))


@dataclass(frozen=True)
class CorrelationCell:
    row: str
    metric: str
    subset: str
    rho: Optional[float]
    n: int
    note: str = ""

    @property
    def available(self) -> bool:
        return self.rho is not None

    def to_dict(self) -> Dict[str, Any]:
        return {'row': self.row, 'metric': self.metric, 'subset': self.subset,
                'rho': self.rho, 'n': self.n, 'note': self.note}


@dataclass(frozen=True)
class CorrelationTable:
    """Spearman rho per (row, metric) for one model subset"""
    subset: str
    cells: Tuple[CorrelationCell, ...]

    @property
    def rows(self) -> List[str]:
        return list(dict.fromkeys(cell.row for cell in self.cells))

    @property
    def metrics(self) -> List[str]:
        return list(dict.fromkeys(cell.metric for cell in self.cells))

    def get(self, row: str, metric: str) -> Optional[CorrelationCell]:
        return next((c for c in self.cells if c.row == row and c.metric == metric), None)

    def to_dict(self) -> Dict[str, Any]:
        return {'subset': self.subset, 'cells': [cell.to_dict() for cell in self.cells]}


@dataclass(frozen=True)
class CategoryRank:
    category: str
    rho: Optional[float]
    n: int
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {'category': self.category, 'rho': self.rho, 'n': self.n, 'note': self.note}
