"""
Tests for sweep orchestration, correlation tables and rankings
"""

import csv
import io
import json
import os

import numpy as np
import pytest

from services import (
    ManifestError,
    ModularityMode,
    ModularityReport,
    ReportCache,
    RunReports,
    RunTaskResults,
    TaskResult,
    best_model_counts,
    correlate_grid,
    load_manifest,
    load_reports_dir,
    load_tasks_dir,
    rank_languages,
    rank_single_categories,
    ranking_ends,
    run_modularity_grid,
    run_sweep,
    select_optimal_rows,
    write_reports_dir,
    write_tasks_dir,
)
from services.sweep import correlation_csv_text, is_loss_metric, oriented_score
from tests.conftest import cluster_lexicon_rows, make_clusters


def _write_manifest(directory, data, name='manifest.json'):
    path = os.path.join(directory, name)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(data, handle)
    return path


@pytest.fixture
def sweep_files(temp_data_dir, rng, write_vectors, write_lexicon_rows, write_text):
    """Two runs (ft/en, m/en) over 4 clusters of 6 words, plus a word-pair file"""
    words, X, groups = make_clusters(rng, 4, 6, 16, 0.05)
    write_lexicon_rows(cluster_lexicon_rows(words, groups), name='lexicon.tsv')
    for model in ('ft', 'm'):
        write_vectors(words=words, matrix=X + 0.05 * rng.normal(size=X.shape), name=f"{model}.vec")

    lines = []
    for _ in range(40):
        i, j = rng.choice(len(words), size=2, replace=False)
        score = 4.0 if groups[i] == groups[j] else 0.5
        lines.append(f"{words[i]}\t{words[j]}\t{score}")
    write_text('pairs.tsv', '\n'.join(lines) + '\n')

    def _manifest(**overrides):
        data = {
            'lexicon': 'lexicon.tsv',
            'ks': [2, 3, 4],
            'trials': 3,
            'runs': [
                {'vectors': 'ft.vec', 'model': 'ft', 'language': 'en', 'tasks': {'wordsim': 'pairs.tsv'}},
                {'vectors': 'm.vec', 'model': 'm', 'language': 'en', 'tasks': {'wordsim': 'pairs.tsv'}},
            ],
        }
        data.update(overrides)
        return _write_manifest(temp_data_dir, data)
    return _manifest


class TestManifest:

    def test_defaults_and_relative_paths(self, sweep_files, temp_data_dir):
        manifest = load_manifest(sweep_files())

        assert [run.id for run in manifest.runs] == ['ft-en', 'm-en']
        assert manifest.levels == (1, 2, 3)
        assert manifest.ks == (2, 3, 4)
        assert manifest.mode is ModularityMode.MULTIGRAPH_SUM
        assert manifest.trials == 3
        assert manifest.runs[0].vectors == os.path.join(temp_data_dir, 'ft.vec')
        assert manifest.runs[0].tasks == {'wordsim': os.path.join(temp_data_dir, 'pairs.tsv')}

    def test_bli_task_entry(self, temp_data_dir):
        path = _write_manifest(temp_data_dir, {'lexicon': 'lex.tsv', 'runs': [{
            'vectors': 'nl.vec', 'model': 'ft', 'language': 'nl',
            'tasks': {'bli_to_english': {'dictionary': 'nl-en.tsv', 'partner_vectors': 'en.vec',
                                         'train_size': 50, 'test_size': 20}},
        }]})

        spec = load_manifest(path).runs[0].tasks['bli_to_english']

        assert spec['train_size'] == 50 and spec['test_size'] == 20
        assert spec['partner_vectors'] == os.path.join(temp_data_dir, 'en.vec')

    @pytest.mark.parametrize('data', [
        {'lexicon': 'l.tsv', 'runs': []},
        {'lexicon': 'l.tsv', 'runs': [{'vectors': 'a', 'model': 'ft', 'language': 'en'},
                                      {'vectors': 'b', 'model': 'ft', 'language': 'en'}]},
        {'lexicon': 'l.tsv', 'ks': [0], 'runs': [{'vectors': 'a', 'model': 'ft', 'language': 'en'}]},
        {'lexicon': 'l.tsv', 'levels': [4], 'runs': [{'vectors': 'a', 'model': 'ft', 'language': 'en'}]},
        {'lexicon': 'l.tsv', 'mode': 'directed', 'runs': [{'vectors': 'a', 'model': 'ft', 'language': 'en'}]},
        {'runs': [{'vectors': 'a', 'model': 'ft', 'language': 'en'}]},
        {'lexicon': 'l.tsv', 'runs': [{'vectors': 'a', 'model': 'ft'}]},
        {'lexicon': 'l.tsv', 'runs': [{'vectors': 'a', 'model': 'ft', 'language': 'en', 'tasks': {'pos': 'x'}}]},
        {'lexicon': 'l.tsv', 'runs': [{'vectors': 'a', 'model': 'ft', 'language': 'en',
                                       'tasks': {'bli_from_english': 'x.tsv'}}]},
    ])
    def test_invalid_manifests(self, temp_data_dir, data):
        with pytest.raises(ManifestError):
            load_manifest(_write_manifest(temp_data_dir, data))

    def test_not_json(self, write_text):
        with pytest.raises(ManifestError):
            load_manifest(write_text('bad.json', '{"runs": ['))


class TestGrid:

    def test_every_row_is_reported(self, sweep_files):
        result = run_modularity_grid(load_manifest(sweep_files()))

        assert result.report_count == 24
        assert not result.failures
        assert set(result.reports['ft-en'].reports) == {
            f"{level}, {k}" for level in ('1', '2', '3', 'C') for k in (2, 3, 4)
        }
        assert result.report('ft-en', 3, 2).Q_norm == pytest.approx(1.0, abs=1e-9)
        control = result.report('m-en', 'C', 2)
        assert control.level == 'custom'
        assert len(control.categories) >= 4
        assert control.source_label == 'm:en'

    def test_cache_is_reused(self, sweep_files, temp_data_dir):
        manifest = load_manifest(sweep_files())
        cache = ReportCache(os.path.join(temp_data_dir, 'cache'))

        first = run_modularity_grid(manifest, cache)
        second = run_modularity_grid(manifest, cache)

        assert first.cache_hits == 0
        assert cache.stats()['entries'] == 24
        assert second.cache_hits == 24
        assert second.reports == first.reports

    def test_cache_key_depends_on_k_and_mode(self, sweep_files, temp_data_dir):
        cache = ReportCache(os.path.join(temp_data_dir, 'cache'))
        run_modularity_grid(load_manifest(sweep_files(ks=[2])), cache)

        result = run_modularity_grid(load_manifest(sweep_files(ks=[2], mode='union-simple')), cache)

        assert result.cache_hits == 0
        assert cache.stats()['entries'] == 16

    def test_parallel_runs_match_serial(self, sweep_files):
        manifest = load_manifest(sweep_files())

        serial = run_modularity_grid(manifest, jobs=1)
        parallel = run_modularity_grid(manifest, jobs=2)

        assert list(parallel.reports) == ['ft-en', 'm-en']
        assert parallel.reports == serial.reports

    def test_broken_run_does_not_stop_others(self, sweep_files):
        path = sweep_files(runs=[
            {'vectors': 'ft.vec', 'model': 'ft', 'language': 'en'},
            {'vectors': 'missing.vec', 'model': 'm', 'language': 'en'},
        ])

        result = run_sweep(load_manifest(path), with_tasks=False)

        assert list(result.reports) == ['ft-en']
        assert result.failures['m-en'][0]['stage'] == 'vectors'
        assert result.failures['m-en'][0]['row'] is None

    def test_degenerate_rows_are_isolated(self, sweep_files, write_lexicon_rows, temp_data_dir):
        lexicon = load_manifest(sweep_files()).runs[0].lexicon
        with open(lexicon, encoding='utf-8') as handle:
            rows = [line.rstrip('\n').split('\t') for line in handle]
        write_lexicon_rows([(w, 'everything', l2, l3) for w, _, l2, l3 in rows], name='flat.tsv')

        result = run_modularity_grid(load_manifest(sweep_files(lexicon='flat.tsv', ks=[2])))

        failed_rows = [failure['row'] for failure in result.failures['ft-en']]
        assert failed_rows == ['1, 2']
        assert result.failures['ft-en'][0]['stage'] == 'modularity'
        assert set(result.reports['ft-en'].reports) == {'2, 2', '3, 2', 'C, 2'}

    def test_tasks_run_per_run(self, sweep_files):
        result = run_sweep(load_manifest(sweep_files(ks=[2])))

        columns = result.tasks['ft-en'].by_column()
        assert list(columns) == ['wordsim:mean-MSE']
        assert columns['wordsim:mean-MSE'].trials == 3

    def test_failed_task_is_recorded(self, sweep_files, write_text):
        write_text('tiny.tsv', "w0_0\tw0_1\t4\n")
        runs = [{'vectors': 'ft.vec', 'model': 'ft', 'language': 'en', 'tasks': {'wordsim': 'tiny.tsv'}}]

        result = run_sweep(load_manifest(sweep_files(runs=runs, ks=[2])))

        assert result.failures['ft-en'] == [
            {'row': 'task:wordsim', 'stage': 'tasks', 'message': result.failures['ft-en'][0]['message']}
        ]
        assert result.tasks['ft-en'].results == ()
        assert result.report_count == 4

    def test_directories_round_trip(self, sweep_files, temp_data_dir):
        result = run_sweep(load_manifest(sweep_files(ks=[2])))
        out = os.path.join(temp_data_dir, 'out')

        write_reports_dir(result.reports, os.path.join(out, 'reports'))
        write_tasks_dir(result.tasks, os.path.join(out, 'tasks'))

        assert sorted(os.listdir(os.path.join(out, 'reports'))) == ['ft-en.json', 'm-en.json']
        assert load_reports_dir(os.path.join(out, 'reports')) == result.reports
        assert load_tasks_dir(os.path.join(out, 'tasks')) == result.tasks

    def test_missing_reports_dir(self, temp_data_dir):
        with pytest.raises(ManifestError):
            load_reports_dir(os.path.join(temp_data_dir, 'nope'))


# ============================================================
# CORRELATIONS
# ============================================================

def _report(q_norm, level=3, k=2, categories=('x', 'y'), q_c=None):
    size = len(categories)
    return ModularityReport(
        level=level, k=k, mode=ModularityMode.MULTIGRAPH_SUM, categories=tuple(categories),
        a=tuple(1.0 / size for _ in categories), e=tuple(0.0 for _ in categories),
        Q=q_norm / 2, Q_max=0.5, Q_norm=q_norm,
        Q_c=tuple(q_c) if q_c is not None else tuple(q_norm / size for _ in categories),
    )


def _results(run_id, model, language, **scores):
    results = []
    for key, value in scores.items():
        task, metric = {'mse': ('wordsim', 'mean-MSE'), 'acc': ('sentiment', 'accuracy')}[key]
        results.append(TaskResult.from_trials(task, metric, [value]))
    return RunTaskResults(run_id=run_id, model=model, language=language, results=tuple(results))


@pytest.fixture
def table_inputs():
    q = [0.1, 0.2, 0.3, 0.4, 0.5]
    mse = [0.5, 0.4, 0.3, 0.2, 0.1]
    acc = [0.6, 0.5, 0.7, 0.8, 0.9]
    reports, tasks = {}, {}
    for i in range(5):
        run_id = f"r{i}"
        model = 'ft' if i % 2 == 0 else 'm'
        reports[run_id] = RunReports(run_id=run_id, model=model, language=f"l{i}", reports={
            '3, 2': _report(q[i]),
            '1, 2': _report(q[4 - i] if i in (0, 4) else q[i], level=1),
            'C, 2': _report(0.7, level='custom'),
        })
        tasks[run_id] = _results(run_id, model, f"l{i}", mse=mse[i], acc=acc[i])
    return reports, tasks


class TestCorrelate:

    def test_loss_metrics_are_negated(self):
        assert is_loss_metric('wordsim:mean-MSE')
        assert not is_loss_metric('sentiment:accuracy')
        assert oriented_score('wordsim:mean-MSE', 0.25) == -0.25
        assert oriented_score('bli:mean-cosine-similarity', 0.25) == 0.25

    def test_merged_table(self, table_inputs):
        table = correlate_grid(*table_inputs)

        assert table.rows == ['1, 2', '3, 2', 'C, 2']
        assert table.metrics == ['sentiment:accuracy', 'wordsim:mean-MSE']
        cell = table.get('3, 2', 'wordsim:mean-MSE')
        assert cell.rho == pytest.approx(1.0)
        assert cell.n == 5
        assert table.get('3, 2', 'sentiment:accuracy').rho == pytest.approx(0.9)

    def test_constant_row_is_unavailable(self, table_inputs):
        cell = correlate_grid(*table_inputs).get('C, 2', 'wordsim:mean-MSE')

        assert cell.rho is None
        assert 'constant' in cell.note

    def test_model_subsets(self, table_inputs):
        ft = correlate_grid(*table_inputs, subset='ft')
        m = correlate_grid(*table_inputs, subset='m')

        assert ft.get('3, 2', 'wordsim:mean-MSE').n == 3
        assert ft.get('3, 2', 'wordsim:mean-MSE').rho == pytest.approx(1.0)
        assert m.get('3, 2', 'wordsim:mean-MSE').rho is None
        assert m.get('3, 2', 'wordsim:mean-MSE').note == 'n < 3'

    def test_runs_without_scores_are_left_out(self, table_inputs):
        reports, tasks = table_inputs
        del tasks['r2']

        cell = correlate_grid(reports, tasks).get('3, 2', 'wordsim:mean-MSE')

        assert cell.n == 4

    def test_csv_leaves_unavailable_rho_empty(self, table_inputs):
        text = correlation_csv_text(correlate_grid(*table_inputs))

        rows = list(csv.DictReader(io.StringIO(text)))
        assert text.splitlines()[0] == 'row,metric,subset,rho,n'
        assert len(rows) == 6
        control = next(r for r in rows if r['row'] == 'C, 2' and r['metric'] == 'wordsim:mean-MSE')
        assert control['rho'] == ''
        assert control['subset'] == 'merged'
        best = next(r for r in rows if r['row'] == '3, 2' and r['metric'] == 'wordsim:mean-MSE')
        assert float(best['rho']) == pytest.approx(1.0)

    def test_optimal_rows(self, table_inputs):
        selections = select_optimal_rows(correlate_grid(*table_inputs))

        wordsim = next(s for s in selections if s['metric'] == 'wordsim:mean-MSE')
        assert wordsim['row'] == '3, 2'
        assert wordsim['control_row'] == 'C, 2'
        assert wordsim['control_rho'] is None


class TestRankings:

    def _inputs(self):
        reports, tasks = {}, {}
        scores = [0.1, 0.2, 0.3, 0.4]
        for i, score in enumerate(scores):
            run_id = f"r{i}"
            categories = ('Animals', 'Tools', 'Weather') + (('Rare',) if i < 2 else ())
            q_c = (score, -score, 0.3) + ((score,) if i < 2 else ())
            reports[run_id] = RunReports(run_id=run_id, model='ft', language=f"l{i}", reports={
                '3, 2': _report(0.5, categories=categories, q_c=q_c),
            })
            tasks[run_id] = _results(run_id, 'ft', f"l{i}", acc=score)
        return reports, tasks

    def test_single_categories_ranked(self):
        ranking = rank_single_categories(*self._inputs(), row='3, 2', column='sentiment:accuracy')

        assert [rank.category for rank in ranking] == ['Animals', 'Tools', 'Rare', 'Weather']
        assert ranking[0].rho == pytest.approx(1.0)
        assert ranking[1].rho == pytest.approx(-1.0)
        assert ranking[2].rho is None and ranking[2].note == 'n < 3'
        assert ranking[3].rho is None and ranking[3].n == 4

    def test_ranking_ends(self):
        ranking = rank_single_categories(*self._inputs(), row='3, 2', column='sentiment:accuracy')

        most, least = ranking_ends(ranking, count=1)

        assert [rank.category for rank in most] == ['Animals']
        assert [rank.category for rank in least] == ['Tools']

    def test_loss_column_flips_order(self):
        reports, _ = self._inputs()
        tasks = {run_id: _results(run_id, 'ft', run.language, mse=0.1 * i)
                 for i, (run_id, run) in enumerate(reports.items())}

        ranking = rank_single_categories(reports, tasks, row='3, 2', column='wordsim:mean-MSE')

        assert ranking[0].category == 'Tools'

    def test_best_model_per_language(self):
        reports = {}
        for model, language, q in (('ft', 'en', 0.8), ('m', 'en', 0.9), ('ft', 'nl', 0.7), ('m', 'nl', 0.7),
                                   ('s', 'nl', 0.6)):
            run_id = f"{model}-{language}"
            reports[run_id] = RunReports(run_id=run_id, model=model, language=language,
                                         reports={'2, 2': _report(q, level=2)})

        winners, counts = best_model_counts(reports, '2, 2')

        assert winners == {'en': 'm', 'nl': 'ft'}
        assert list(counts.items()) == [('ft', 1), ('m', 1)]
        assert rank_languages(reports, 'ft', '2, 2') == [('en', 0.8), ('nl', 0.7)]
        assert rank_languages(reports, 'ft', '3, 2') == []


@pytest.mark.acceptance
@pytest.mark.slow
def test_synthetic_languages_correlate_with_wordsim(temp_data_dir, write_vectors, write_lexicon_rows, write_text):
    """Noisier embeddings have lower modularity and worse similarity regression"""
    rng = np.random.default_rng(7)
    clusters, per_cluster, dim = 5, 10, 20
    centers = rng.normal(size=(clusters, dim))
    groups = [c for c in range(clusters) for _ in range(per_cluster)]
    words = [f"w{c}_{i}" for c in range(clusters) for i in range(per_cluster)]
    write_lexicon_rows(cluster_lexicon_rows(words, groups), name='lexicon.tsv')

    unit = centers / np.linalg.norm(centers, axis=1, keepdims=True)
    lines = []
    for _ in range(300):
        i, j = rng.choice(len(words), size=2, replace=False)
        score = 2.0 * (1.0 + float(unit[groups[i]] @ unit[groups[j]]))
        lines.append(f"{words[i]}\t{words[j]}\t{min(max(score, 0.0), 4.0):.6f}")
    write_text('pairs.tsv', '\n'.join(lines) + '\n')

    base_noise = rng.normal(size=(len(words), dim))
    runs = []
    for index, noise in enumerate(np.linspace(0.05, 1.2, 20)):
        language = f"l{index:02d}"
        write_vectors(words=words, matrix=centers[groups] + noise * base_noise, name=f"{language}.vec")
        runs.append({'vectors': f"{language}.vec", 'model': 'syn', 'language': language,
                     'tasks': {'wordsim': 'pairs.tsv'}})
    manifest = _write_manifest(temp_data_dir, {'lexicon': 'lexicon.tsv', 'levels': [3], 'ks': [2],
                                               'trials': 10, 'runs': runs})

    result = run_sweep(load_manifest(manifest), jobs=2)
    table = correlate_grid(result.reports, result.tasks)

    assert not result.failures
    cell = table.get('3, 2', 'wordsim:mean-MSE')
    assert cell.n == 20
    assert cell.rho >= 0.8
