"""Tests for the Monte-Carlo harness, export machinery, and config handling."""

import json

import numpy as np
import pytest

from qlms import metrics, rng, signals
from qlms.bench import (
    ExperimentSpec,
    ProtocolSuite,
    experiment_from_dict,
    experiment_to_dict,
    export_results,
    read_curve_csv,
    replay_manifest,
    run_monte_carlo,
    run_protocol_suite,
    run_single,
    suite_from_dict,
    suite_to_dict,
)
from qlms.exceptions import ConfigError, DivergenceError, ParameterError
from qlms.filters import AlgorithmSpec, FilterState, initial_q_vector, step
from qlms.signals import DEFAULT_CHANNEL_H, ChannelModel

CHANNEL10 = ChannelModel(h=DEFAULT_CHANNEL_H, snr_db=10.0)


def make_spec(kind="lms", mu=0.044, n_iterations=500, n_runs=3, snr=10.0, **algo_kw):
    if kind in ("tvqlms", "eqlms"):
        algo_kw.setdefault("lambda_max", 1.0)
    if kind == "tvqlms":
        algo_kw.setdefault("beta", 0.9)
        algo_kw.setdefault("gamma", 1e-3)
    if kind in ("qlms", "qnlms"):
        algo_kw.setdefault("q_fixed", 2.0)
    return ExperimentSpec(
        algorithm=AlgorithmSpec(kind=kind, mu=mu, **algo_kw),
        channel=ChannelModel(h=DEFAULT_CHANNEL_H, snr_db=snr),
        n_iterations=n_iterations,
        n_runs=n_runs,
        base_seed=99,
    )


def reference_trajectory(spec: ExperimentSpec, run_index: int):
    """Re-run one run through the pure-Python step functions."""
    n = spec.n_iterations
    channel = spec.channel
    x = rng.gaussian_stream(rng.derive_stream_seed(spec.base_seed, run_index, rng.STREAM_INPUT), n)
    y = signals.channel_output(channel, x)
    ref_power = float(np.mean(x**2)) if spec.snr_reference == "input" else None
    d = signals.add_noise_at_snr(
        y, channel.snr_db,
        rng.derive_stream_seed(spec.base_seed, run_index, rng.STREAM_NOISE),
        ref_power=ref_power,
    )
    q0 = initial_q_vector(
        channel.taps, spec.algorithm, spec.q_init_policy,
        seed=rng.derive_stream_seed(spec.base_seed, run_index, rng.STREAM_QINIT),
    )
    state = FilterState(weights=np.zeros(channel.taps), q_vector=q0)
    curve = np.empty(n)
    curve[0] = metrics.nwd(channel.h, state.weights)
    for i in range(n):
        out = step(state, signals.regressor_at(x, i, channel.taps), d[i], spec.algorithm)
        state = out.new_state
        if i < n - 1:
            curve[i + 1] = metrics.nwd(channel.h, state.weights)
    return curve, state


class TestRunSingle:
    def test_deterministic(self):
        spec = make_spec()
        a = run_single(spec, 0)
        b = run_single(spec, 0)
        np.testing.assert_array_equal(a.nwd_per_iteration, b.nwd_per_iteration)
        np.testing.assert_array_equal(a.final_weights, b.final_weights)
        assert a.seed_used == b.seed_used

    def test_curve_starts_at_one(self):
        for kind in ("lms", "nlms", "qlms", "qnlms", "tvqlms", "eqlms"):
            mu = 0.05
            spec = make_spec(kind=kind, mu=mu, zeta=1e-3 if "nlms" in kind else 0.0)
            res = run_single(spec, 0)
            assert res.nwd_per_iteration[0] == 1.0

    def test_zero_mu_keeps_nwd_at_one(self):
        spec = make_spec(mu=0.0, n_iterations=200)
        res = run_single(spec, 0)
        np.testing.assert_array_equal(res.nwd_per_iteration, np.ones(200))
        np.testing.assert_array_equal(res.final_weights, np.zeros(5))

    def test_stable_run_drops_more_than_10db(self):
        spec = make_spec(mu=0.044, n_iterations=10_000, n_runs=1)
        res = run_single(spec, 0)
        drop = 20 * np.log10(res.nwd_per_iteration[-1] / res.nwd_per_iteration[0])
        assert drop < -10.0

    def test_divergence_carries_iteration_index(self):
        spec = make_spec(mu=5.0, n_iterations=2000)
        with pytest.raises(DivergenceError) as excinfo:
            run_single(spec, 0)
        assert excinfo.value.iteration is not None
        assert 0 <= excinfo.value.iteration < 2000

    def test_matches_step_functions_per_algorithm(self):
        # the compiled kernels must reproduce the reference step functions
        for kind, kw in [
            ("lms", {}),
            ("nlms", {"zeta": 1e-3, "mu": 0.4}),
            ("qlms", {"q_fixed": 2.5}),
            ("qnlms", {"q_fixed": 2.5, "zeta": 1e-3, "mu": 0.4}),
            ("tvqlms", {"beta": 0.95, "gamma": 0.05}),
            ("eqlms", {}),
        ]:
            spec = make_spec(kind=kind, n_iterations=300, **kw)
            fast = run_single(spec, 1)
            slow_curve, slow_state = reference_trajectory(spec, 1)
            # weights must agree bit for bit; the recorded NWD may differ by
            # one ulp (np.linalg.norm rounds differently than the kernel's
            # fixed-order accumulation)
            np.testing.assert_array_equal(
                fast.final_weights, slow_state.weights, err_msg=f"weights mismatch for {kind}"
            )
            np.testing.assert_allclose(
                fast.nwd_per_iteration, slow_curve, rtol=5e-16, atol=0,
                err_msg=f"curve mismatch for {kind}",
            )

    def test_seeded_uniform_q_init_changes_eqlms_start(self):
        base = make_spec(kind="eqlms", n_iterations=50)
        seeded = ExperimentSpec(
            algorithm=base.algorithm, channel=base.channel,
            n_iterations=50, n_runs=1, base_seed=99, q_init_policy="seeded-uniform",
        )
        a = run_single(base, 0)
        b = run_single(seeded, 0)
        assert not np.array_equal(a.nwd_per_iteration, b.nwd_per_iteration)

    def test_lambda_estimate_resolution(self):
        spec = make_spec(kind="eqlms", lambda_max="estimate", n_iterations=400)
        res = run_single(spec, 0)
        assert np.all(np.isfinite(res.final_weights))


class TestMonteCarlo:
    def test_single_run_ensemble_equals_run_single(self):
        spec = make_spec(n_runs=1)
        curve = run_monte_carlo(spec)
        np.testing.assert_array_equal(curve.values, run_single(spec, 0).nwd_per_iteration)

    def test_doubling_runs_reuses_prefix(self):
        few = make_spec(n_runs=2, n_iterations=200)
        many = make_spec(n_runs=4, n_iterations=200)
        # per-run seeds depend only on (base_seed, run_index)
        for idx in range(2):
            np.testing.assert_array_equal(
                run_single(few, idx).nwd_per_iteration,
                run_single(many, idx).nwd_per_iteration,
            )

    def test_ensemble_is_mean_of_runs(self):
        spec = make_spec(n_runs=4, n_iterations=150)
        curve = run_monte_carlo(spec)
        runs = [run_single(spec, i).nwd_per_iteration for i in range(4)]
        np.testing.assert_allclose(curve.values, np.mean(runs, axis=0), rtol=1e-12)

    def test_workers_do_not_change_result(self):
        spec = make_spec(n_runs=6, n_iterations=200)
        np.testing.assert_array_equal(
            run_monte_carlo(spec, workers=1).values,
            run_monte_carlo(spec, workers=4).values,
        )

    def test_aggregate_divergence_lists_runs(self):
        spec = make_spec(mu=5.0, n_runs=3, n_iterations=500)
        with pytest.raises(DivergenceError) as excinfo:
            run_monte_carlo(spec)
        assert excinfo.value.run_indices == [0, 1, 2]

    def test_iteration_zero_is_exactly_one(self):
        spec = make_spec(n_runs=5, n_iterations=100)
        assert run_monte_carlo(spec).values[0] == 1.0


class TestSuite:
    def make_suite(self, n_iterations=300, n_runs=2):
        entries = tuple(
            (kind, make_spec(kind=kind, mu=0.03, n_iterations=n_iterations, n_runs=n_runs,
                             zeta=1e-3 if kind == "nlms" else 0.0))
            for kind in ("lms", "nlms", "eqlms")
        )
        return ProtocolSuite(entries=entries, mode="equal-convergence")

    def test_rows_match_direct_measurement(self):
        suite = self.make_suite()
        result = run_protocol_suite(suite)
        assert [row.label for row in result.rows] == ["lms", "nlms", "eqlms"]
        for label, spec in suite.entries:
            curve = run_monte_carlo(spec)
            row = next(r for r in result.rows if r.label == label)
            assert row.steady_state_db == pytest.approx(metrics.steady_state_db(curve), abs=1e-12)
            assert row.convergence_point == metrics.convergence_point(curve)
            assert row.mu == spec.algorithm.mu
            assert row.snr_db == spec.channel.snr_db

    def test_duplicate_labels_rejected(self):
        spec = make_spec()
        with pytest.raises(ParameterError):
            ProtocolSuite(entries=(("a", spec), ("a", spec)), mode="equal-convergence")

    def test_unknown_mode_rejected(self):
        with pytest.raises(ParameterError):
            ProtocolSuite(entries=(("a", make_spec()),), mode="freestyle")

    def test_mixed_channels_rejected(self):
        a = make_spec(snr=10.0)
        b = make_spec(snr=20.0)
        with pytest.raises(ParameterError):
            ProtocolSuite(entries=(("a", a), ("b", b)), mode="equal-convergence")


class TestExport:
    def test_round_trip_and_determinism(self, tmp_path):
        suite = TestSuite().make_suite(n_iterations=120)
        result = run_protocol_suite(suite)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        export_results(result, out1)
        export_results(result, out2)
        for name in ("summary.csv", "manifest.json", "lms_curve.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        # csv reproduces the in-memory linear values exactly (17 digits)
        back = read_curve_csv(out1 / "lms_curve.csv")
        np.testing.assert_array_equal(back, result.curves["lms"].values)

    def test_manifest_replay_reproduces_summary(self, tmp_path):
        suite = TestSuite().make_suite(n_iterations=120)
        result = run_protocol_suite(suite)
        first = tmp_path / "first"
        export_results(result, first)
        replayed = tmp_path / "replayed"
        replay_manifest(first / "manifest.json", replayed)
        assert (first / "summary.csv").read_bytes() == (replayed / "summary.csv").read_bytes()
        assert (first / "manifest.json").read_bytes() == (replayed / "manifest.json").read_bytes()

    def test_empty_results_write_manifest_and_summary_only(self, tmp_path):
        export_results([], tmp_path)
        names = sorted(p.name for p in tmp_path.iterdir())
        assert names == ["manifest.json", "summary.csv"]
        assert (tmp_path / "summary.csv").read_text().startswith("label,")
        assert json.loads((tmp_path / "manifest.json").read_text())["suites"] == []

    def test_not_converged_written_as_sentinel(self, tmp_path):
        # a curve that ends above its own tail band: monotone rising tail
        spec = make_spec(mu=1e-9, n_iterations=120, n_runs=1)
        result = run_protocol_suite(ProtocolSuite(entries=(("flat", spec),), mode="equal-convergence"))
        export_results(result, tmp_path)
        summary = (tmp_path / "summary.csv").read_text()
        assert "flat" in summary


class TestConfig:
    def test_experiment_round_trip(self):
        spec = make_spec(kind="tvqlms", mu=0.05)
        again = experiment_from_dict(experiment_to_dict(spec))
        assert again.algorithm == spec.algorithm
        np.testing.assert_array_equal(again.channel.h, spec.channel.h)
        assert again.channel.snr_db == spec.channel.snr_db
        assert (again.n_iterations, again.n_runs, again.base_seed) == (
            spec.n_iterations, spec.n_runs, spec.base_seed,
        )
        assert (again.q_init_policy, again.snr_reference) == (
            spec.q_init_policy, spec.snr_reference,
        )

    def test_suite_round_trip(self):
        suite = TestSuite().make_suite()
        data = json.loads(json.dumps(suite_to_dict(suite)))
        back = suite_from_dict(data)
        assert back.mode == suite.mode
        assert [lbl for lbl, _ in back.entries] == [lbl for lbl, _ in suite.entries]

    def test_unknown_field_rejected(self):
        data = experiment_to_dict(make_spec())
        data["typo_field"] = 1
        with pytest.raises(ConfigError, match="typo_field"):
            experiment_from_dict(data)

    def test_unknown_algorithm_field_rejected(self):
        data = experiment_to_dict(make_spec())
        data["algorithm"]["nu"] = 0.1
        with pytest.raises(ConfigError, match="nu"):
            experiment_from_dict(data)

    def test_missing_field_rejected(self):
        data = experiment_to_dict(make_spec())
        del data["n_runs"]
        with pytest.raises(ConfigError, match="n_runs"):
            experiment_from_dict(data)


class TestPresets:
    def test_suite_builder_shapes(self):
        from qlms import presets

        suite = presets.protocol_suite(1, presets.MODE_CONVERGENCE, 10.0, n_runs=2, n_iterations=50)
        labels = [label for label, _ in suite.entries]
        assert labels == [f"{a}_snr10" for a in presets.ALGORITHMS]
        # qlms2 shares the plain-LMS step size
        mus = {label: spec.algorithm.mu for label, spec in suite.entries}
        assert mus["qlms2_snr10"] == mus["lms_snr10"]

    def test_suspect_cells_can_be_skipped(self):
        from qlms import presets

        suite = presets.protocol_suite(
            1, presets.MODE_CONVERGENCE, 30.0, n_runs=2, n_iterations=50, include_suspect=False
        )
        assert [label for label, _ in suite.entries] == ["eqlms_snr30"]

    def test_preset_values_match_published_table(self):
        from qlms import presets

        assert presets.preset_mu(presets.MODE_CONVERGENCE, 1, "lms", 10.0) == 4.4e-2
        assert presets.preset_mu(presets.MODE_STEADY_STATE, 1, "nlms", 20.0) == 2.8e-2
        assert presets.preset_mu(presets.MODE_STEADY_STATE, 3, "eqlms", 30.0) == 1e-3
