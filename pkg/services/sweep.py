"""
Sweep orchestration

Runs the (embedding table) x (level or control) x (k) grid, the downstream
tasks of every run, and assembles Spearman correlation tables between
Q_norm and task scores, overall ("merged") or within one model.
"""

import csv
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

from .community import greedy_modularity_communities, partition_as_assignment
from .errors import CatmodError, ManifestError, OutputError, StatisticsError
from .lexicon import assignment_at_level, load_lexicon
from .modularity import modularity_report
from .models import (
    CONTROL,
    LEVELS,
    MERGED,
    CategoryRank,
    CorrelationCell,
    CorrelationTable,
    Direction,
    EmbeddingTable,
    LexiconMode,
    MissingPolicy,
    ModularityMode,
    ModularityReport,
    PairedSample,
    RunManifest,
    RunReports,
    RunSpec,
    RunTaskResults,
    TaskResult,
    row_label,
)
from .report_cache import ReportCache, content_key, dumps_document
from .simgraph import knn_graph, similarity_matrix
from .stats import MIN_SAMPLE_SIZE, spearman
from .tasks import (
    bli_task,
    load_dictionary_tsv,
    load_sentiment_tsv,
    load_wordsim_tsv,
    sentiment_task,
    wordsim_task,
)
from .vecstore import load_word2vec_text, resolve

logger = logging.getLogger(__name__)

# Bump when the report document layout changes
CACHE_VERSION = 'modularity-report/1'

TASK_KEYS = ('sentiment', 'wordsim', 'bli_to_english', 'bli_from_english')
CSV_COLUMNS = ['row', 'metric', 'subset', 'rho', 'n']


# ============================================================
# MANIFEST
# ============================================================

def _resolve_path(base_dir: str, value: Any, what: str) -> str:
    if not isinstance(value, str) or not value:
        raise ManifestError(f"{what} must be a non-empty path string")
    return value if os.path.isabs(value) else os.path.normpath(os.path.join(base_dir, value))


def _positive_int(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ManifestError(f"{what} must be a positive integer, got {value!r}")
    return value


def _parse_tasks(raw: Any, base_dir: str, run_id: str) -> Dict[str, Any]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ManifestError(f"run {run_id}: 'tasks' must be an object")
    unknown = set(raw) - set(TASK_KEYS)
    if unknown:
        raise ManifestError(f"run {run_id}: unknown task(s) {sorted(unknown)}, expected {list(TASK_KEYS)}")

    tasks: Dict[str, Any] = {}
    for name in ('sentiment', 'wordsim'):
        if name in raw:
            tasks[name] = _resolve_path(base_dir, raw[name], f"run {run_id}: tasks.{name}")
    for name in ('bli_to_english', 'bli_from_english'):
        if name not in raw:
            continue
        entry = raw[name]
        if not isinstance(entry, dict):
            raise ManifestError(f"run {run_id}: tasks.{name} must be an object with "
                                f"'dictionary' and 'partner_vectors'")
        spec = {
            'dictionary': _resolve_path(base_dir, entry.get('dictionary'), f"run {run_id}: tasks.{name}.dictionary"),
            'partner_vectors': _resolve_path(base_dir, entry.get('partner_vectors'),
                                             f"run {run_id}: tasks.{name}.partner_vectors"),
        }
        for size in ('train_size', 'test_size', 'partner_limit'):
            if entry.get(size) is not None:
                spec[size] = _positive_int(entry[size], f"run {run_id}: tasks.{name}.{size}")
        tasks[name] = spec
    return tasks


def load_manifest(path: str) -> RunManifest:
    """
    Read a JSON sweep manifest.

    Top-level keys give defaults (`lexicon`, `lexicon_mode`, `levels`, `ks`,
    `mode`, `policy`, `seed`, `trials`, `limit`); each entry of `runs` names
    its `vectors`, `model` and `language` and may override `lexicon`/`limit`
    and declare `tasks`. Relative paths are taken from the manifest directory.
    """
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except OSError as e:
        raise ManifestError(f"cannot read manifest {path}: {e}")
    except ValueError as e:
        raise ManifestError(f"manifest {path} is not valid JSON: {e}")

    if not isinstance(data, dict) or not isinstance(data.get('runs'), list) or not data['runs']:
        raise ManifestError(f"manifest {path} needs a non-empty 'runs' list")

    base_dir = os.path.dirname(os.path.abspath(path))
    try:
        levels = tuple(int(level) for level in data.get('levels', LEVELS))
        ks = tuple(_positive_int(k, 'ks entry') for k in data.get('ks', (2, 3, 4)))
        mode = ModularityMode(data.get('mode', ModularityMode.MULTIGRAPH_SUM.value))
        policy = MissingPolicy(data.get('policy', MissingPolicy.SKIP_MISSING.value))
        lexicon_mode = LexiconMode(data.get('lexicon_mode', LexiconMode.GENERIC.value))
    except (TypeError, ValueError) as e:
        raise ManifestError(f"manifest {path}: {e}")
    if not levels or any(level not in LEVELS for level in levels):
        raise ManifestError(f"manifest levels must be drawn from {LEVELS}, got {levels}")
    if not ks:
        raise ManifestError("manifest 'ks' is empty")

    seed = data.get('seed', 17)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ManifestError(f"seed must be a non-negative integer, got {seed!r}")
    trials = _positive_int(data.get('trials', 30), 'trials')
    default_limit = data.get('limit')
    default_lexicon = data.get('lexicon')

    runs = []
    for position, raw in enumerate(data['runs']):
        if not isinstance(raw, dict):
            raise ManifestError(f"run #{position} must be an object")
        for required in ('vectors', 'model', 'language'):
            if not raw.get(required):
                raise ManifestError(f"run #{position} is missing '{required}'")
        run_id = str(raw.get('id') or f"{raw['model']}-{raw['language']}")
        lexicon = raw.get('lexicon', default_lexicon)
        if lexicon is None:
            raise ManifestError(f"run {run_id} has no lexicon and the manifest sets no default")
        limit = raw.get('limit', default_limit)
        runs.append(RunSpec(
            id=run_id,
            vectors=_resolve_path(base_dir, raw['vectors'], f"run {run_id}: vectors"),
            model=str(raw['model']),
            language=str(raw['language']),
            lexicon=_resolve_path(base_dir, lexicon, f"run {run_id}: lexicon"),
            limit=None if limit is None else _positive_int(limit, f"run {run_id}: limit"),
            tasks=_parse_tasks(raw.get('tasks'), base_dir, run_id),
        ))

    manifest = RunManifest(runs=tuple(runs), levels=levels, ks=ks, mode=mode, policy=policy,
                           lexicon_mode=lexicon_mode, seed=seed, trials=trials)
    logger.info(f"Manifest {path}: {len(runs)} run(s), levels {levels}, k {ks}, mode {mode.value}")
    return manifest


# ============================================================
# GRID
# ============================================================

@dataclass
class RunOutcome:
    run: RunSpec
    reports: Optional[RunReports] = None
    tasks: Optional[RunTaskResults] = None
    failures: List[Dict[str, Any]] = field(default_factory=list)
    cache_hits: int = 0


@dataclass
class GridResult:
    """Everything a sweep produced, in manifest run order"""
    reports: Dict[str, RunReports] = field(default_factory=dict)
    tasks: Dict[str, RunTaskResults] = field(default_factory=dict)
    failures: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    cache_hits: int = 0

    @property
    def report_count(self) -> int:
        return sum(len(run.reports) for run in self.reports.values())

    def report(self, run_id: str, level, k: int) -> Optional[ModularityReport]:
        run = self.reports.get(run_id)
        return None if run is None else run.reports.get(row_label(level, k))


def _failure(row: Optional[str], error: Exception) -> Dict[str, Any]:
    stage = error.stage if isinstance(error, CatmodError) else 'internal'
    return {'row': row, 'stage': stage, 'message': str(error)}


def _report_key(words, vectors, labels, k: int, mode: ModularityMode, level, source_label: str) -> str:
    return content_key(CACHE_VERSION, '\n'.join(words), vectors, '\n'.join('\t'.join(row) for row in labels),
                       k, mode.value, str(level), source_label)


def _grid_reports(run: RunSpec, table: EmbeddingTable, manifest: RunManifest,
                  cache: Optional[ReportCache], outcome: RunOutcome) -> RunReports:
    lexicon = load_lexicon(run.lexicon, manifest.lexicon_mode)
    ws = resolve(table, lexicon, manifest.policy)
    source_label = f"{run.model}:{run.language}"
    sim = None
    reports: Dict[str, ModularityReport] = {}

    for k in manifest.ks:
        graph = None
        for level in list(manifest.levels) + [CONTROL]:
            row = row_label(level, k)

            def compute() -> Dict[str, Any]:
                nonlocal sim, graph
                if sim is None:
                    sim = similarity_matrix(ws)
                if graph is None:
                    graph = knn_graph(sim, k, ws.words)
                if level == CONTROL:
                    assign = partition_as_assignment(greedy_modularity_communities(graph))
                else:
                    assign = assignment_at_level(ws.lexicon, level)
                return modularity_report(graph, assign, manifest.mode, source_label).to_dict()

            try:
                if cache is None:
                    document, hit = compute(), False
                else:
                    key = _report_key(ws.words, ws.vectors, ws.lexicon.labels, k, manifest.mode, level, source_label)
                    document, hit = cache.get_or_compute(key, compute)
                reports[row] = ModularityReport.from_dict(document)
                outcome.cache_hits += int(hit)
            except CatmodError as e:
                if e.exit_code != 1:
                    raise
                logger.warning(f"Run {run.id}, row '{row}' failed at {e.stage}: {e.message}")
                outcome.failures.append(_failure(row, e))

    return RunReports(run_id=run.id, model=run.model, language=run.language, reports=reports)


def _run_task_suite(run: RunSpec, table: EmbeddingTable, manifest: RunManifest,
                    outcome: RunOutcome) -> RunTaskResults:
    results: List[TaskResult] = []
    for name, spec in run.tasks.items():
        try:
            if name == 'sentiment':
                data = load_sentiment_tsv(spec, split_seed=manifest.seed)
                results.extend(sentiment_task(table, data, manifest.trials, manifest.seed))
            elif name == 'wordsim':
                results.append(wordsim_task(table, load_wordsim_tsv(spec), manifest.trials, manifest.seed))
            else:
                direction = Direction.TO_ENGLISH if name == 'bli_to_english' else Direction.FROM_ENGLISH
                partner = load_word2vec_text(spec['partner_vectors'], spec.get('partner_limit', run.limit))
                dictionary = load_dictionary_tsv(spec['dictionary'], direction)
                source, target = (table, partner) if direction is Direction.TO_ENGLISH else (partner, table)
                results.append(bli_task(source, target, dictionary, manifest.trials, manifest.seed,
                                        train_size=spec.get('train_size'), test_size=spec.get('test_size')))
        except CatmodError as e:
            if e.exit_code != 1:
                raise
            logger.warning(f"Run {run.id}, task {name} failed at {e.stage}: {e.message}")
            outcome.failures.append(_failure(f"task:{name}", e))
    return RunTaskResults(run_id=run.id, model=run.model, language=run.language, results=tuple(results))


def _execute_run(run: RunSpec, manifest: RunManifest, cache: Optional[ReportCache],
                 with_grid: bool, with_tasks: bool) -> RunOutcome:
    outcome = RunOutcome(run=run)
    try:
        table = load_word2vec_text(run.vectors, run.limit, source_label=f"{run.model}:{run.language}")
        if with_grid:
            outcome.reports = _grid_reports(run, table, manifest, cache, outcome)
        if with_tasks and run.tasks:
            outcome.tasks = _run_task_suite(run, table, manifest, outcome)
    except Exception as e:
        # one broken run must not stop the grid
        logger.error(f"Run {run.id} failed: {e}")
        outcome.failures.append(_failure(None, e))
    return outcome


def run_sweep(manifest: RunManifest, cache: Optional[ReportCache] = None, jobs: int = 1,
              with_grid: bool = True, with_tasks: bool = True) -> GridResult:
    """
    Execute every run of the manifest, `jobs` runs at a time.

    Failures are collected per run (and per row or task inside a run);
    results are keyed in manifest order whatever order the runs finish in.
    """
    jobs = max(1, int(jobs))
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        outcomes = list(pool.map(
            lambda run: _execute_run(run, manifest, cache, with_grid, with_tasks), manifest.runs
        ))

    result = GridResult()
    for outcome in outcomes:
        run_id = outcome.run.id
        if outcome.reports is not None:
            result.reports[run_id] = outcome.reports
        if outcome.tasks is not None:
            result.tasks[run_id] = outcome.tasks
        if outcome.failures:
            result.failures[run_id] = outcome.failures
        result.cache_hits += outcome.cache_hits

    logger.info(f"Sweep finished: {result.report_count} report(s), {result.cache_hits} from cache, "
                f"{len(result.failures)} run(s) with failures")
    return result


def run_modularity_grid(manifest: RunManifest, cache: Optional[ReportCache] = None, jobs: int = 1) -> GridResult:
    return run_sweep(manifest, cache, jobs, with_grid=True, with_tasks=False)


def run_tasks(manifest: RunManifest, jobs: int = 1) -> GridResult:
    return run_sweep(manifest, None, jobs, with_grid=False, with_tasks=True)


# ============================================================
# REPORT AND TASK DIRECTORIES
# ============================================================

def _write_documents(documents: Iterable[Tuple[str, Dict[str, Any]]], out_dir: str) -> List[str]:
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create {out_dir}: {e.strerror or e}", path=out_dir) from e
    paths = []
    for run_id, document in documents:
        path = os.path.join(out_dir, f"{run_id}.json")
        _write_text(path, dumps_document(document))
        paths.append(path)
    return paths


def _write_text(path: str, text: str, newline: str = '\n'):
    try:
        with open(path, 'w', encoding='utf-8', newline=newline) as handle:
            handle.write(text)
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e.strerror or e}", path=path) from e


def _read_documents(in_dir: str, what: str) -> List[Dict[str, Any]]:
    if not os.path.isdir(in_dir):
        raise ManifestError(f"{what} directory not found: {in_dir}")
    documents = []
    for name in sorted(os.listdir(in_dir)):
        if not name.endswith('.json'):
            continue
        path = os.path.join(in_dir, name)
        try:
            with open(path, encoding='utf-8') as handle:
                documents.append(json.load(handle))
        except (OSError, ValueError) as e:
            raise ManifestError(f"cannot read {what} file {path}: {e}")
    return documents


def write_reports_dir(reports: Dict[str, RunReports], out_dir: str) -> List[str]:
    return _write_documents(((run_id, run.to_dict()) for run_id, run in reports.items()), out_dir)


def load_reports_dir(in_dir: str) -> Dict[str, RunReports]:
    try:
        runs = [RunReports.from_dict(doc) for doc in _read_documents(in_dir, 'reports')]
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"malformed report file in {in_dir}: {e}")
    return {run.run_id: run for run in runs}


def write_tasks_dir(tasks: Dict[str, RunTaskResults], out_dir: str) -> List[str]:
    return _write_documents(((run_id, run.to_dict()) for run_id, run in tasks.items()), out_dir)


def load_tasks_dir(in_dir: str) -> Dict[str, RunTaskResults]:
    try:
        runs = [RunTaskResults.from_dict(doc) for doc in _read_documents(in_dir, 'tasks')]
    except (KeyError, TypeError, ValueError) as e:
        raise ManifestError(f"malformed task file in {in_dir}: {e}")
    return {run.run_id: run for run in runs}


# ============================================================
# CORRELATIONS
# ============================================================

def is_loss_metric(column: str) -> bool:
    """Loss metrics are negated before correlating so that higher always means better"""
    return column.endswith('MSE')


def oriented_score(column: str, value: float) -> float:
    return -value if is_loss_metric(column) else value


def _row_sort_key(row: str):
    level, k = row.split(', ')
    return (level == CONTROL, level, int(k))


def _in_subset(run, subset: str) -> bool:
    return subset == MERGED or run.model == subset


def _correlate(x: List[float], y: List[float]) -> Tuple[Optional[float], str]:
    if len(x) < MIN_SAMPLE_SIZE:
        return None, f"n < {MIN_SAMPLE_SIZE}"
    try:
        return spearman(PairedSample(x=tuple(x), y=tuple(y))), ""
    except StatisticsError as e:
        return None, str(e)


def correlate_grid(reports: Dict[str, RunReports], task_results: Dict[str, RunTaskResults],
                   subset: str = MERGED) -> CorrelationTable:
    """
    Spearman rho between Q_norm of each grid row and each task metric.

    The sample of a cell is every run of the subset with both a report for
    that row and a score for that metric; fewer than 3 runs leaves the cell
    unavailable.
    """
    run_ids = sorted(run_id for run_id, run in reports.items() if _in_subset(run, subset))
    rows = sorted({row for run_id in run_ids for row in reports[run_id].reports}, key=_row_sort_key)
    columns = sorted({column for run_id in run_ids if run_id in task_results
                      for column in task_results[run_id].by_column()})

    cells = []
    for row in rows:
        for column in columns:
            x, y = [], []
            for run_id in run_ids:
                report = reports[run_id].reports.get(row)
                result = task_results.get(run_id, None)
                result = result.by_column().get(column) if result is not None else None
                if report is None or result is None:
                    continue
                x.append(report.Q_norm)
                y.append(oriented_score(column, result.value))
            rho, note = _correlate(x, y)
            cells.append(CorrelationCell(row=row, metric=column, subset=subset, rho=rho, n=len(x), note=note))

    available = sum(1 for cell in cells if cell.available)
    logger.info(f"Correlation table '{subset}': {len(run_ids)} run(s), {available}/{len(cells)} cell(s) available")
    return CorrelationTable(subset=subset, cells=tuple(cells))


def rank_single_categories(reports: Dict[str, RunReports], task_results: Dict[str, RunTaskResults],
                           row: str, column: str, subset: str = MERGED) -> List[CategoryRank]:
    """
    Spearman rho of each category's Q_c against one task metric across runs.

    Ranked categories come first, highest rho first; categories without a
    usable sample follow with a note.
    """
    samples: Dict[str, Tuple[List[float], List[float]]] = {}
    for run_id in sorted(reports):
        run = reports[run_id]
        report = run.reports.get(row)
        tasks = task_results.get(run_id)
        result = tasks.by_column().get(column) if tasks is not None else None
        if not _in_subset(run, subset) or report is None or result is None:
            continue
        for category, value in zip(report.categories, report.Q_c):
            x, y = samples.setdefault(category, ([], []))
            x.append(value)
            y.append(oriented_score(column, result.value))

    ranked, omitted = [], []
    for category, (x, y) in samples.items():
        rho, note = _correlate(x, y)
        if rho is None:
            omitted.append(CategoryRank(category=category, rho=None, n=len(x), note=note))
        else:
            ranked.append(CategoryRank(category=category, rho=rho, n=len(x)))

    ranked.sort(key=lambda rank: (-rank.rho, rank.category))
    omitted.sort(key=lambda rank: rank.category)
    return ranked + omitted


def ranking_ends(ranking: List[CategoryRank], count: int = 5) -> Tuple[List[CategoryRank], List[CategoryRank]]:
    """(most predictive, least predictive) categories among the ranked ones"""
    ranked = [rank for rank in ranking if rank.rho is not None]
    return ranked[:count], list(reversed(ranked[-count:])) if ranked else []


def select_optimal_rows(table: CorrelationTable) -> List[Dict[str, Any]]:
    """Per metric, the level row with the highest rho next to the control row of the same k"""
    selections = []
    for metric in table.metrics:
        candidates = [cell for cell in table.cells
                      if cell.metric == metric and cell.available and not cell.row.startswith(CONTROL)]
        if not candidates:
            continue
        # max keeps the first of equal values, i.e. the earliest row
        best = max(candidates, key=lambda cell: cell.rho)
        k = best.row.split(', ')[1]
        control = table.get(row_label(CONTROL, int(k)), metric)
        selections.append({
            'metric': metric,
            'row': best.row,
            'rho': best.rho,
            'n': best.n,
            'control_row': row_label(CONTROL, int(k)),
            'control_rho': control.rho if control is not None else None,
        })
    return selections


def best_model_counts(reports: Dict[str, RunReports], row: str) -> Tuple[Dict[str, str], Dict[str, int]]:
    """
    For each language, the model with the highest Q_norm at `row`
    (ties go to the alphabetically first model), and how often each model wins
    """
    by_language: Dict[str, List[Tuple[float, str]]] = {}
    for run in reports.values():
        report = run.reports.get(row)
        if report is not None:
            by_language.setdefault(run.language, []).append((report.Q_norm, run.model))

    winners = {}
    counts: Dict[str, int] = {}
    for language in sorted(by_language):
        best_value = max(value for value, _ in by_language[language])
        model = min(model for value, model in by_language[language] if value == best_value)
        winners[language] = model
        counts[model] = counts.get(model, 0) + 1
    return winners, dict(sorted(counts.items(), key=lambda item: (-item[1], item[0])))


def rank_languages(reports: Dict[str, RunReports], model: str, row: str) -> List[Tuple[str, float]]:
    """Languages of one model sorted by Q_norm at `row`, highest first"""
    scored = [(run.language, run.reports[row].Q_norm) for run in reports.values()
              if run.model == model and row in run.reports]
    return sorted(scored, key=lambda item: (-item[1], item[0]))


# ============================================================
# OUTPUT
# ============================================================

def write_correlation_json(table: CorrelationTable, path: str):
    _write_text(path, dumps_document(table.to_dict()))


def correlation_csv_text(table: CorrelationTable) -> str:
    """Columns row,metric,subset,rho,n; an unavailable rho is left empty"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator='\n')
    writer.writeheader()
    for cell in table.cells:
        writer.writerow({
            'row': cell.row,
            'metric': cell.metric,
            'subset': cell.subset,
            'rho': '' if cell.rho is None else f"{cell.rho:.12g}",
            'n': cell.n,
        })
    return buffer.getvalue()


def write_correlation_csv(table: CorrelationTable, path: str):
    _write_text(path, correlation_csv_text(table), newline='')
