import json

import numpy as np
import pytest

from structcs.bench import (
    ExperimentConfig,
    desk_preset,
    full_preset,
    generate_sparse_signal,
    run_trial,
    spec_template,
    success_curve,
    wilson_interval,
    write_plot_script,
)
from structcs.bench import _derive_seed
from structcs.matrices import MatrixKind


def tiny_config(**overrides):
    base = dict(
        N=48, m=3, kinds=("iid", "toeplitz"), n_grid=(8, 24, 48),
        trials=6, distribution="bernoulli", solver="bp", master_seed=7,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestSignals:
    def test_zero_sparsity_gives_zero_signal(self):
        sig = generate_sparse_signal(10, 0, seed=1)
        np.testing.assert_array_equal(sig.to_dense(), np.zeros(10))

    def test_full_sparsity_gives_dense_vector(self):
        sig = generate_sparse_signal(10, 10, seed=2)
        assert (sig.to_dense() != 0).all()

    def test_seed_determinism(self):
        a = generate_sparse_signal(50, 5, seed=3)
        b = generate_sparse_signal(50, 5, seed=3)
        assert a.support == b.support
        np.testing.assert_array_equal(a.values, b.values)


class TestWilson:
    def test_all_failures_closed_form(self):
        z = 1.959963984540054
        lo, hi = wilson_interval(0, 40)
        assert lo == 0.0
        assert hi == pytest.approx(z * z / (40 + z * z), abs=1e-12)

    def test_all_successes_closed_form(self):
        z = 1.959963984540054
        lo, hi = wilson_interval(40, 40)
        assert hi == 1.0
        assert lo == pytest.approx(40 / (40 + z * z), abs=1e-12)

    def test_contains_point_estimate(self):
        for s in range(0, 21):
            lo, hi = wilson_interval(s, 20)
            assert lo <= s / 20 <= hi

    def test_validation(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(6, 5)


class TestTemplates:
    def test_iid_template(self):
        spec = spec_template("iid", 512, 10, "bernoulli", 64, seed=1)
        assert spec.kind is MatrixKind.IID
        assert spec.shape == (64, 512)

    def test_scalar_band_template(self):
        spec = spec_template("toeplitz", 512, 10, "bernoulli", 100, seed=1)
        assert spec.kind is MatrixKind.TOEPLITZ_BLOCK
        assert (spec.d, spec.e, spec.l, spec.k) == (1, 1, 100, 512)

    def test_block_template_divisor_rule(self):
        # l = largest divisor of n with l <= 3m(3m-1) and n/l >= 8
        spec = spec_template("toeplitz-block", 512, 10, "bernoulli", 60, seed=1)
        assert spec.l == 6 and spec.d == 10
        assert spec.e == 8 and spec.k == 64  # largest divisor of 512 <= d
        assert spec.shape == (60, 512)
        spec = spec_template("toeplitz-block", 512, 10, "bernoulli", 256, seed=1)
        assert spec.l == 32 and spec.d == 8 and spec.e == 8

    def test_block_template_small_n_degenerates_to_single_band(self):
        spec = spec_template("toeplitz-block", 64, 2, "gaussian", 8, seed=0)
        assert spec.l == 1

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            spec_template("hadamard", 64, 2, "gaussian", 8, seed=0)


class TestRunTrial:
    def test_square_iid_recovers(self):
        cfg = tiny_config(N=32, n_grid=(32,), m=3)
        assert run_trial(cfg, "iid", 32, 0) is True

    def test_fewer_measurements_than_sparsity_fails(self):
        cfg = tiny_config(N=12, m=5, n_grid=(3,), trials=5)
        for t in range(5):
            assert run_trial(cfg, "iid", 3, t) is False

    def test_replay_is_identical(self):
        cfg = tiny_config()
        runs = [run_trial(cfg, "toeplitz", 24, 4) for _ in range(3)]
        assert len(set(runs)) == 1

    def test_signals_paired_across_kinds(self):
        cfg = tiny_config()
        a = _derive_seed(cfg.master_seed, "signal", 24, 3)
        b = _derive_seed(cfg.master_seed, "signal", 24, 3)
        assert a == b
        ma = _derive_seed(cfg.master_seed, "matrix", "iid", 24, 3)
        mb = _derive_seed(cfg.master_seed, "matrix", "toeplitz", 24, 3)
        assert ma != mb


class TestSuccessCurve:
    def test_single_trial_fraction_is_binary(self):
        cfg = tiny_config(trials=1, kinds=("iid",), n_grid=(24,))
        curve = success_curve(cfg)
        assert curve.cells[0].fraction in (0.0, 1.0)

    def test_rises_with_measurements(self):
        cfg = tiny_config(trials=8)
        curve = success_curve(cfg)
        for kind in cfg.kinds:
            fr = curve.fractions(kind)
            assert fr[0] <= 0.5
            assert fr[-1] >= 0.75

    def test_csv_shape_and_determinism(self):
        cfg = tiny_config(trials=3)
        text1 = success_curve(cfg).to_csv_text()
        text2 = success_curve(cfg).to_csv_text()
        assert text1 == text2
        lines = text1.strip().split("\n")
        assert lines[0] == "kind,n,successes,trials,fraction,ci_lo,ci_hi"
        assert len(lines) == 1 + len(cfg.kinds) * len(cfg.n_grid)

    def test_cache_resume(self, tmp_path):
        cfg = tiny_config(trials=3)
        cache = tmp_path / "cache.json"
        first = success_curve(cfg, cache_path=cache)
        assert cache.exists()
        stored = json.loads(cache.read_text())
        assert len(stored) == len(cfg.kinds) * len(cfg.n_grid)
        # resumed run recomputes nothing and reproduces the curve
        again = success_curve(cfg, cache_path=cache)
        assert again.to_csv_text() == first.to_csv_text()
        # a different config never collides in the same cache file
        other = tiny_config(trials=3, master_seed=8)
        success_curve(other, cache_path=cache)
        assert len(json.loads(cache.read_text())) == 2 * len(stored)

    def test_thread_count_does_not_change_results(self):
        cfg = tiny_config(trials=4, n_grid=(8, 48))
        serial = success_curve(cfg, threads=1)
        parallel = success_curve(cfg, threads=2)
        assert serial.to_csv_text() == parallel.to_csv_text()


class TestConfigsAndOutputs:
    def test_grid_must_increase(self):
        with pytest.raises(ValueError):
            tiny_config(n_grid=(24, 8))
        with pytest.raises(ValueError):
            tiny_config(n_grid=(8, 64))  # n > N

    def test_presets(self):
        desk = desk_preset()
        assert desk.N == 512 and desk.m == 10 and desk.trials == 200
        assert desk.n_grid[0] == 40 and desk.n_grid[-1] == 256
        full = full_preset()
        assert full.N == 2048 and full.m == 20 and full.trials == 1000

    def test_plot_script_mentions_every_kind(self, tmp_path):
        path = tmp_path / "plot.gp"
        write_plot_script(path, kinds=("iid", "toeplitz"))
        text = path.read_text()
        assert '"iid"' in text and '"toeplitz"' in text and "curve.csv" in text
