"""
Ablation and sweep runners. The directional checks on the default
benchmark are marked slow.
"""
import csv
import time

import pytest

from src.data.synth import SceneSpec, gen_dataset
from src.errors import ConfigError
from src.experiments import RunScore, run_ablation, run_sweep, summarize
from src.learning.train_config import AblationMode, TrainConfig


def _read(path):
    with open(path, newline='') as fh:
        return list(csv.DictReader(fh))


def _splits(root):
    return (root / 'source', root / 'target', root / 'target', root / 'target_eval' / 'labels')


@pytest.fixture
def quick_config():
    return TrainConfig(hidden_dim=6, batch=2, max_iters=2, warmup_iters=0)


def test_summarize_means():
    scores = [RunScore('a', 0, 0.2, 0.1), RunScore('a', 1, 0.4, 0.3), RunScore('b', 0, 0.5, 0.0)]
    summary = summarize(scores)
    assert summary['a'] == pytest.approx((2, 0.3, 0.2))
    assert summary['b'] == (1, 0.5, 0.0)


def test_ablation_tables(tiny_dataset, tmp_path, quick_config):
    modes = [AblationMode.SOURCE_ONLY, AblationMode.VBLC]
    scores = run_ablation(*_splits(tiny_dataset), tmp_path / 'abl', quick_config, [0, 1], modes)
    assert [(s.label, s.seed) for s in scores] == [
        ('source-only', 0), ('source-only', 1), ('vblc', 0), ('vblc', 1)]
    assert len(_read(tmp_path / 'abl' / 'ablation.csv')) == 4
    summary = _read(tmp_path / 'abl' / 'ablation_summary.csv')
    assert [r['mode'] for r in summary] == ['source-only', 'vblc']
    assert (tmp_path / 'abl' / 'vblc' / 'seed1' / 'checkpoint.bin').is_file()


def test_pool_matches_inline_runs(tiny_dataset, tmp_path, quick_config):
    modes = [AblationMode.CE_ST, AblationMode.VBLC]
    inline = run_ablation(*_splits(tiny_dataset), tmp_path / 'inline', quick_config, [0], modes,
                          workers=1)
    pooled = run_ablation(*_splits(tiny_dataset), tmp_path / 'pooled', quick_config, [0], modes,
                          workers=2)
    assert pooled == inline


def test_sweep_table(tiny_dataset, tmp_path, quick_config):
    scores = run_sweep(*_splits(tiny_dataset), tmp_path / 'sweep', quick_config, 'delta',
                       [0.8, 0.95])
    assert [s.label for s in scores] == ['delta=0.8', 'delta=0.95']
    rows = _read(tmp_path / 'sweep' / 'sweep.csv')
    assert [float(r['value']) for r in rows] == [0.8, 0.95]


def test_sweep_rejects_unknown_parameter(tiny_dataset, tmp_path, quick_config):
    with pytest.raises(ConfigError):
        run_sweep(*_splits(tiny_dataset), tmp_path, quick_config, 'lr', [0.1])


def test_sweep_rejects_out_of_range_value(tiny_dataset, tmp_path, quick_config):
    with pytest.raises(ConfigError):
        run_sweep(*_splits(tiny_dataset), tmp_path, quick_config, 'alpha', [1.5])


@pytest.fixture(scope='module')
def benchmark(tmp_path_factory):
    root = tmp_path_factory.mktemp('benchmark')
    gen_dataset(SceneSpec(), 200, 200, root, seed=7)
    return root


ABLATION_BUDGET_SECONDS = 900.0


@pytest.fixture(scope='module')
def default_ablation(benchmark, tmp_path_factory):
    modes = [AblationMode.SOURCE_ONLY, AblationMode.CE_ST, AblationMode.VBM_CE, AblationMode.VBLC]
    start = time.perf_counter()
    scores = run_ablation(*_splits(benchmark), tmp_path_factory.mktemp('ablation'),
                          TrainConfig(), [0, 1, 2], modes)
    return summarize(scores), time.perf_counter() - start


@pytest.mark.slow
def test_each_component_adds_accuracy(default_ablation):
    summary, _ = default_ablation
    means = [summary[m][1] for m in ('source-only', 'ce-st', 'vbm-ce', 'vblc')]
    assert means == sorted(means) and len(set(means)) == 4, means


@pytest.mark.slow
def test_full_method_beats_source_only(default_ablation):
    summary, _ = default_ablation
    assert summary['vblc'][1] >= summary['source-only'][1] + 0.05


@pytest.mark.slow
def test_constraint_reduces_overconfident_errors(default_ablation):
    summary, _ = default_ablation
    assert summary['vblc'][2] < summary['vbm-ce'][2]


@pytest.mark.slow
def test_ablation_fits_time_budget(default_ablation):
    _, elapsed = default_ablation
    assert elapsed < ABLATION_BUDGET_SECONDS
