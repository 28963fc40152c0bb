"""
Downstream tasks scored against categorical modularity

    sentiment  - mean-of-word-vectors text features, linear SVM, accuracy and precision
    wordsim    - (euclidean, manhattan, cosine) pair features, OLS, test MSE
    bli        - source -> target vector OLS map, mean cosine to the gold target

Every task averages a metric over independent seeded trials. Trial t draws its
split from numpy's Generator seeded with (seed, t), so trials can be rerun or
parallelized without changing any per-trial value.
"""

import logging
import unicodedata
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .errors import TaskDataError
from .models import (
    BilingualDictionary,
    Direction,
    EmbeddingTable,
    LabeledTextSet,
    TaskResult,
    WordPairSet,
    normalize_word,
)
from .performance_manager import performance_monitor
from .simgraph import cosine_similarity
from .solvers import LinearSVM, fit_ols, predict

logger = logging.getLogger(__name__)

MAX_SPLIT_ATTEMPTS = 10
MIN_WORDSIM_PAIRS = 10
MIN_BLI_TEST_PAIRS = 10
DEFAULT_TEST_FRACTION = 0.2

TASK_SENTIMENT = 'sentiment'
TASK_WORDSIM = 'wordsim'
BLI_TASK_IDS = {
    Direction.TO_ENGLISH: 'bli-to-english',
    Direction.FROM_ENGLISH: 'bli-from-english',
    Direction.GENERIC: 'bli',
}


# ============================================================
# DATA FILES
# ============================================================

def _read_tsv(path: str, fields: int, kind: str) -> Iterator[Tuple[int, List[str]]]:
    """Yield (line number, fields) for each non-blank line; the last field keeps any tabs"""
    try:
        with open(path, encoding='utf-8') as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.rstrip('\r\n')
                if not line.strip():
                    continue
                parts = line.split('\t', fields - 1)
                if len(parts) != fields:
                    raise TaskDataError(f"{path}: line {line_no} is not a valid {kind} row "
                                        f"({fields} tab-separated fields expected)")
                yield line_no, parts
    except UnicodeDecodeError as e:
        raise TaskDataError(f"{path}: not valid UTF-8 ({e.reason})")
    except OSError as e:
        raise TaskDataError(f"cannot read {kind} file {path}: {e}")


def load_sentiment_tsv(path: str, split_seed: int = 17, train_fraction: float = 0.8) -> LabeledTextSet:
    """`label<TAB>text` rows, label 0 or 1"""
    items = []
    for line_no, (label, text) in _read_tsv(path, 2, 'sentiment'):
        if label.strip() not in ('0', '1'):
            raise TaskDataError(f"{path}: line {line_no} has label '{label}', expected 0 or 1")
        items.append((int(label), text))
    return LabeledTextSet(items=tuple(items), split_seed=split_seed, train_fraction=train_fraction)


def load_wordsim_tsv(path: str) -> WordPairSet:
    """`word1<TAB>word2<TAB>score` rows, score in [0, 4]"""
    pairs = []
    for line_no, (w1, w2, score) in _read_tsv(path, 3, 'word-pair'):
        try:
            value = float(score)
        except ValueError:
            raise TaskDataError(f"{path}: line {line_no} has a non-numeric score '{score}'")
        pairs.append((normalize_word(w1.strip()), normalize_word(w2.strip()), value))
    return WordPairSet(pairs=tuple(pairs))


def load_dictionary_tsv(path: str, direction: Direction = Direction.GENERIC) -> BilingualDictionary:
    """`source<TAB>target` rows"""
    entries = tuple(
        (normalize_word(source.strip()), normalize_word(target.strip()))
        for _, (source, target) in _read_tsv(path, 2, 'dictionary')
    )
    return BilingualDictionary(entries=entries, direction=Direction(direction))


# ============================================================
# FEATURES
# ============================================================

def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith('P')


def tokenize(text: str) -> List[str]:
    """Whitespace tokens with leading/trailing punctuation stripped; case is kept"""
    tokens = []
    for raw in normalize_word(text).split():
        start, end = 0, len(raw)
        while start < end and _is_punctuation(raw[start]):
            start += 1
        while end > start and _is_punctuation(raw[end - 1]):
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


def _mean_vector(table: EmbeddingTable, text: str) -> Tuple[np.ndarray, int]:
    rows = [table.vector(token) for token in tokenize(text) if token in table]
    if not rows:
        return np.zeros(table.dimension), 0
    return np.mean(np.asarray(rows, dtype=np.float64), axis=0), len(rows)


def embed_text_mean(table: EmbeddingTable, text: str) -> np.ndarray:
    """Mean vector of the in-vocabulary tokens; zero vector when there are none"""
    vector, found = _mean_vector(table, text)
    if not found:
        logger.warning(f"No in-vocabulary token in text {text[:40]!r}, using a zero vector")
    return vector


def wordsim_features(table: EmbeddingTable, w1: str, w2: str) -> Optional[np.ndarray]:
    """
    (euclidean distance, manhattan distance, cosine similarity) of two words,
    or None when either word has no vector
    """
    u, v = table.get(w1), table.get(w2)
    if u is None or v is None:
        logger.warning(f"Word pair ({w1}, {w2}) skipped: out of vocabulary")
        return None
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    diff = u - v
    return np.array([np.sqrt(np.dot(diff, diff)), np.abs(diff).sum(), cosine_similarity(u, v)])


def _trial_rng(seed: int, trial: int, attempt: int = 0) -> np.random.Generator:
    return np.random.default_rng([seed, trial, attempt])


def _split_sizes(n: int, test_fraction: float) -> Tuple[int, int]:
    n_test = int(round(n * test_fraction))
    n_test = min(max(n_test, 1), n - 1)
    return n - n_test, n_test


# ============================================================
# TASKS
# ============================================================

@performance_monitor('sentiment_task')
def sentiment_task(table: EmbeddingTable, data: LabeledTextSet, trials: int = 30,
                   seed: Optional[int] = None) -> Tuple[TaskResult, TaskResult]:
    """
    Linear SVM on mean word vectors, 80/20 split per trial.

    A split whose training part lacks a label is redrawn (up to 10 times).
    Precision of the positive class is 0 when nothing is predicted positive.

    Returns:
        (accuracy result, precision result)
    """
    if trials < 1:
        raise TaskDataError(f"trials must be >= 1, got {trials}")
    seed = data.split_seed if seed is None else seed

    embedded = [_mean_vector(table, text) for _, text in data.items]
    X = np.vstack([vector for vector, _ in embedded])
    y = np.array([label for label, _ in data.items], dtype=np.int64)
    oov_texts = sum(1 for _, found in embedded if not found)
    if oov_texts:
        logger.warning(f"{oov_texts} of {len(y)} text(s) have no in-vocabulary token, embedded as zero vectors")

    n = len(y)
    if n < 2:
        raise TaskDataError("sentiment data needs at least 2 texts")
    n_train, _ = _split_sizes(n, 1.0 - data.train_fraction)

    accuracies, precisions = [], []
    resampled, zero_division = 0, 0
    for trial in range(trials):
        for attempt in range(MAX_SPLIT_ATTEMPTS):
            rng = _trial_rng(seed, trial, attempt)
            order = rng.permutation(n)
            train, test = order[:n_train], order[n_train:]
            if len(np.unique(y[train])) == 2:
                break
            resampled += 1
        else:
            raise TaskDataError(f"trial {trial}: no split with both labels in training after "
                                f"{MAX_SPLIT_ATTEMPTS} attempts")

        model = LinearSVM(rng=rng).fit(X[train], y[train])
        predicted = model.predict(X[test])
        truth = y[test]
        accuracies.append(float(np.mean(predicted == truth)))

        predicted_positive = int(predicted.sum())
        if predicted_positive == 0:
            zero_division += 1
            precisions.append(0.0)
        else:
            precisions.append(float(np.sum((predicted == 1) & (truth == 1)) / predicted_positive))

    if zero_division:
        logger.warning(f"Precision undefined in {zero_division} trial(s) (no positive prediction), recorded as 0")
    if resampled:
        logger.warning(f"{resampled} split(s) redrawn for missing a label in training")

    details = {'texts': n, 'oov_texts': oov_texts, 'resampled_splits': resampled,
               'zero_division_trials': zero_division, 'seed': seed}
    return (TaskResult.from_trials(TASK_SENTIMENT, 'accuracy', accuracies, details),
            TaskResult.from_trials(TASK_SENTIMENT, 'precision', precisions, details))


@performance_monitor('wordsim_task')
def wordsim_task(table: EmbeddingTable, data: WordPairSet, trials: int = 30, seed: int = 17,
                 test_fraction: float = DEFAULT_TEST_FRACTION) -> TaskResult:
    """Regress similarity scores on the three pair features; mean test MSE over trials"""
    if trials < 1:
        raise TaskDataError(f"trials must be >= 1, got {trials}")

    features, targets = [], []
    skipped = 0
    for w1, w2, score in data.pairs:
        row = wordsim_features(table, w1, w2)
        if row is None:
            skipped += 1
            continue
        features.append(row)
        targets.append(score)
    if len(features) < MIN_WORDSIM_PAIRS:
        raise TaskDataError(f"word similarity needs at least {MIN_WORDSIM_PAIRS} resolvable pairs, "
                            f"got {len(features)} ({skipped} skipped)")

    X = np.vstack(features)
    y = np.asarray(targets, dtype=np.float64)
    n_train, n_test = _split_sizes(len(y), test_fraction)

    errors = []
    for trial in range(trials):
        order = _trial_rng(seed, trial).permutation(len(y))
        train, test = order[:n_train], order[n_train:]
        coef, intercept = fit_ols(X[train], y[train])
        residual = predict(coef, intercept, X[test]) - y[test]
        errors.append(float(np.mean(residual ** 2)))

    details = {'pairs': len(y), 'skipped_pairs': skipped, 'train_size': n_train,
               'test_size': n_test, 'seed': seed}
    return TaskResult.from_trials(TASK_WORDSIM, 'mean-MSE', errors, details)


def _row_cosines(predicted: np.ndarray, gold: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(predicted, axis=1) * np.linalg.norm(gold, axis=1)
    dots = np.sum(predicted * gold, axis=1)
    return np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)


@performance_monitor('bli_task')
def bli_task(src_table: EmbeddingTable, tgt_table: EmbeddingTable, dictionary: BilingualDictionary,
             trials: int = 30, seed: int = 17, train_size: Optional[int] = None,
             test_size: Optional[int] = None, test_fraction: float = DEFAULT_TEST_FRACTION) -> TaskResult:
    """
    Multi-output OLS from source to target vectors, scored by the mean cosine
    between predicted and gold target vectors on held-out pairs.

    Pairs with a word missing on either side are skipped and counted. Split
    sizes come from `train_size`/`test_size` when given, else `test_fraction`.
    """
    if trials < 1:
        raise TaskDataError(f"trials must be >= 1, got {trials}")

    sources, targets = [], []
    skipped = 0
    for source, target in dictionary.entries:
        u, v = src_table.get(source), tgt_table.get(target)
        if u is None or v is None:
            skipped += 1
            continue
        sources.append(u)
        targets.append(v)
    if skipped:
        logger.warning(f"{skipped} dictionary pair(s) skipped: word without a vector")

    n = len(sources)
    if train_size is None and test_size is None:
        if n < 2:
            raise TaskDataError(f"only {n} resolvable dictionary pair(s)")
        n_train, n_test = _split_sizes(n, test_fraction)
    else:
        n_test = test_size if test_size is not None else n - train_size
        n_train = train_size if train_size is not None else n - test_size
        if n_train < 1 or n_train + n_test > n:
            raise TaskDataError(f"split {n_train}/{n_test} needs more than the {n} resolvable pairs")
    if n_test < MIN_BLI_TEST_PAIRS:
        raise TaskDataError(f"BLI needs at least {MIN_BLI_TEST_PAIRS} test pairs, got {n_test}")

    X = np.asarray(sources, dtype=np.float64)
    Y = np.asarray(targets, dtype=np.float64)

    scores = []
    for trial in range(trials):
        order = _trial_rng(seed, trial).permutation(n)
        train, test = order[:n_train], order[n_train:n_train + n_test]
        coef, intercept = fit_ols(X[train], Y[train])
        scores.append(float(np.mean(_row_cosines(predict(coef, intercept, X[test]), Y[test]))))

    details = {'pairs': n, 'skipped_pairs': skipped, 'train_size': n_train, 'test_size': n_test,
               'direction': dictionary.direction.value, 'seed': seed}
    return TaskResult.from_trials(BLI_TASK_IDS[dictionary.direction], 'mean-cosine-similarity', scores, details)
