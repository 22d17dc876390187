"""Monte-Carlo system-identification harness.

Runs ensembles of independent filter adaptations against a known FIR channel,
averages the per-iteration normalized weight deviation across runs, and
measures steady-state level and convergence point per configuration.

Every run is fully determined by (base_seed, run_index): input and noise
streams use the per-run, per-stream seeds derived in :mod:`qlms.rng`, so
re-running any configuration reproduces every output byte.

The per-iteration curve convention: index 0 holds the NWD of the initial
(zero) weights, exactly 1; index i >= 1 holds the NWD after the i-th update.
The weights after the final update are reported in ``RunResult.final_weights``.
"""

from __future__ import annotations


import json
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels, metrics, rng, signals
from .exceptions import (
    ConfigError,
    DivergenceError,
    ParameterError,
)
from .filters import (
    ESTIMATE,
    KIND_EQLMS,
    KIND_LMS,
    KIND_NLMS,
    KIND_QLMS,
    KIND_QNLMS,
    KIND_TVQLMS,
    AlgorithmSpec,
    estimate_lambda_max,
    initial_q_vector,
)
from .metrics import NwdCurve, ensemble_mean
from .signals import ChannelModel

# Samples used to resolve lambda_max = "estimate" before filtering.
LAMBDA_WARMUP_SAMPLES = 10_000

Q_INIT_POLICIES = ("ones", "seeded-uniform")
SNR_REFERENCES = ("input", "output")


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of one Monte-Carlo experiment.

    ``snr_reference`` selects the power the noise variance is calibrated
    against: ``"input"`` uses the excitation power (the convention that
    reproduces the published channel-estimation tables; see README),
    ``"output"`` uses the noiseless channel-output power.
    """

    algorithm: AlgorithmSpec
    channel: ChannelModel
    n_iterations: int
    n_runs: int
    base_seed: int
    q_init_policy: str = "ones"
    snr_reference: str = "input"

    def __post_init__(self):
        if self.n_runs < 1:
            raise ParameterError("n_runs must be >= 1")
        if self.n_iterations < 1:
            raise ParameterError("n_iterations must be >= 1")
        if self.q_init_policy not in Q_INIT_POLICIES:
            raise ParameterError(f"q_init_policy must be one of {Q_INIT_POLICIES}")
        if self.snr_reference not in SNR_REFERENCES:
            raise ParameterError(f"snr_reference must be one of {SNR_REFERENCES}")


@dataclass(frozen=True)
class RunResult:
    """Outcome of one independent run."""

    nwd_per_iteration: np.ndarray
    final_weights: np.ndarray
    seed_used: int


@dataclass(frozen=True)
class ProtocolSuite:
    """Labeled experiments sharing one channel and iteration count."""

    entries: tuple[tuple[str, ExperimentSpec], ...]
    mode: str  # "equal-convergence" | "equal-steady-state"

    def __post_init__(self):
        if self.mode not in ("equal-convergence", "equal-steady-state"):
            raise ParameterError(f"unknown suite mode {self.mode!r}")
        entries = tuple(self.entries)
        if not entries:
            raise ParameterError("suite must contain at least one entry")
        labels = [label for label, _ in entries]
        if len(set(labels)) != len(labels):
            raise ParameterError("suite labels must be unique")
        first = entries[0][1]
        for _, spec in entries[1:]:
            if spec.n_iterations != first.n_iterations:
                raise ParameterError("all suite entries must share n_iterations")
            if (
                not np.array_equal(spec.channel.h, first.channel.h)
                or spec.channel.snr_db != first.channel.snr_db
            ):
                raise ParameterError("all suite entries must share the channel")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class SuiteRow:
    """One summary line: configuration identifiers plus measured quantities."""

    label: str
    mu: float
    snr_db: float
    steady_state_db: float
    steady_state_se_db: float
    convergence_point: int | None


@dataclass(frozen=True)
class SuiteResult:
    suite: ProtocolSuite
    rows: tuple[SuiteRow, ...]
    curves: dict[str, NwdCurve] = field(repr=False)


def _resolve_lambda_max(spec: ExperimentSpec, x: np.ndarray) -> AlgorithmSpec:
    algo = spec.algorithm
    if algo.lambda_max == ESTIMATE:
        m = spec.channel.taps
        prefix = x[: max(10 * m, min(LAMBDA_WARMUP_SAMPLES, x.size))]
        algo = replace(algo, lambda_max=estimate_lambda_max(prefix, m))
    return algo


def _run_arrays(
    algo: AlgorithmSpec,
    x: np.ndarray,
    d: np.ndarray,
    h: np.ndarray,
    q0: np.ndarray,
    psi0: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Advance one filter over (x, d); returns (post-step NWD, weights, div)."""
    m = h.size
    w = np.zeros(m)
    out = np.empty(d.size)
    mu = float(algo.mu)
    if algo.kind == KIND_LMS:
        div = _kernels.run_lms(x, d, w, h, mu, out)
    elif algo.kind == KIND_NLMS:
        div = _kernels.run_nlms(x, d, w, h, mu, float(algo.zeta), out)
    elif algo.kind == KIND_QLMS:
        g = (algo.q_fixed_vector(m) + 1.0) / 2.0
        div = _kernels.run_qlms(x, d, w, h, mu, g, out)
    elif algo.kind == KIND_QNLMS:
        g = (algo.q_fixed_vector(m) + 1.0) / 2.0
        div = _kernels.run_qnlms(x, d, w, h, mu, float(algo.zeta), g, out)
    elif algo.kind == KIND_TVQLMS:
        lam = algo.resolved_lambda_max()
        aux = np.array([psi0, 1.0])
        q_upper = 2.0 / (mu * lam)
        div = _kernels.run_tvq(x, d, w, h, mu, float(algo.beta), float(algo.gamma), q_upper, aux, out)
    elif algo.kind == KIND_EQLMS:
        lam = algo.resolved_lambda_max()
        q = q0.copy()
        qstats = np.array([np.min(q), np.max(q)])
        div = _kernels.run_eqlms(x, d, w, q, h, mu, 1.0 / lam, qstats, out)
    else:  # pragma: no cover - AlgorithmSpec validates kinds
        raise ParameterError(f"unknown kind {algo.kind!r}")
    if div < 0:
        bad = np.nonzero(~np.isfinite(out))[0]
        if bad.size:
            div = int(bad[0])
    return out, w, div


def run_single(spec: ExperimentSpec, run_index: int) -> RunResult:
    """One independent run; deterministic in (spec, run_index)."""
    if run_index < 0:
        raise ParameterError("run_index must be nonnegative")
    n = spec.n_iterations
    channel = spec.channel
    seed_input = rng.derive_stream_seed(spec.base_seed, run_index, rng.STREAM_INPUT)
    seed_noise = rng.derive_stream_seed(spec.base_seed, run_index, rng.STREAM_NOISE)
    x = rng.gaussian_stream(seed_input, n)
    y = signals.channel_output(channel, x)
    ref_power = float(np.mean(x**2)) if spec.snr_reference == "input" else None
    d = signals.add_noise_at_snr(y, channel.snr_db, seed_noise, ref_power=ref_power)
    algo = _resolve_lambda_max(spec, x)
    q0 = initial_q_vector(
        channel.taps,
        algo,
        policy=spec.q_init_policy,
        seed=rng.derive_stream_seed(spec.base_seed, run_index, rng.STREAM_QINIT),
    )
    out, w, div = _run_arrays(algo, x, d, channel.h, q0)
    if div >= 0:
        raise DivergenceError(
            f"run {run_index} diverged at iteration {div}",
            iteration=div,
            run_indices=[run_index],
        )
    curve = np.empty(n)
    curve[0] = metrics.nwd(channel.h, np.zeros(channel.taps))
    curve[1:] = out[:-1]
    return RunResult(nwd_per_iteration=curve, final_weights=w, seed_used=seed_input)


def _default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def _monte_carlo_detail(
    spec: ExperimentSpec, workers: int | None = None
) -> tuple[NwdCurve, np.ndarray]:
    """Ensemble curve plus per-run steady-window means (for standard errors)."""
    workers = workers or _default_workers()
    window = max(1, math.ceil(0.1 * spec.n_iterations))
    results: list[RunResult | None] = [None] * spec.n_runs
    failures: list[DivergenceError] = []

    def one(idx: int):
        try:
            results[idx] = run_single(spec, idx)
        except DivergenceError as err:
            failures.append(err)

    if workers == 1 or spec.n_runs == 1:
        for idx in range(spec.n_runs):
            one(idx)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(spec.n_runs)))
    if failures:
        bad = sorted(i for err in failures for i in err.run_indices)
        raise DivergenceError(
            f"{len(bad)} of {spec.n_runs} runs diverged (run indices {bad})",
            iteration=failures[0].iteration,
            run_indices=bad,
        )
    curves = [res.nwd_per_iteration for res in results]
    tails = np.array([float(np.mean(c[-window:])) for c in curves])
    return ensemble_mean(curves), tails


def run_monte_carlo(spec: ExperimentSpec, workers: int | None = None) -> NwdCurve:
    """Ensemble-mean NWD curve over run indices 0..n_runs-1 (order-fixed)."""
    curve, _ = _monte_carlo_detail(spec, workers)
    return curve


def run_protocol_suite(suite: ProtocolSuite, workers: int | None = None) -> SuiteResult:
    """Run every entry and summarize steady state and convergence point."""
    rows = []
    curves: dict[str, NwdCurve] = {}
    for label, spec in suite.entries:
        curve, tails = _monte_carlo_detail(spec, workers)
        curves[label] = curve
        ss_db = metrics.steady_state_db(curve)
        tail_mean = float(np.mean(tails))
        if spec.n_runs > 1 and tail_mean > 0:
            se_lin = float(np.std(tails, ddof=1)) / math.sqrt(spec.n_runs)
            se_db = metrics.DB_FACTOR / math.log(10.0) * se_lin / tail_mean
        else:
            se_db = float("nan")
        rows.append(
            SuiteRow(
                label=label,
                mu=spec.algorithm.mu,
                snr_db=spec.channel.snr_db,
                steady_state_db=ss_db,
                steady_state_se_db=se_db,
                convergence_point=metrics.convergence_point(curve),
            )
        )
    return SuiteResult(suite=suite, rows=tuple(rows), curves=curves)


# --------------------------------------------------------------------------
# Config (de)serialization: JSON documents mirroring the dataclasses above.
# Unknown fields are rejected so typos fail loudly.
# --------------------------------------------------------------------------


def _take(data: dict, allowed: dict, where: str) -> dict:
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)} in {where}")
    missing = [k for k, required in allowed.items() if required and k not in data]
    if missing:
        raise ConfigError(f"missing required field(s) {missing} in {where}")
    return data


def algorithm_to_dict(algo: AlgorithmSpec) -> dict:
    out = {"kind": algo.kind, "mu": algo.mu}
    if algo.q_fixed is not None:
        q = algo.q_fixed
        out["q_fixed"] = list(np.asarray(q, dtype=float)) if not np.isscalar(q) else float(q)
    if algo.beta is not None:
        out["beta"] = algo.beta
    if algo.gamma is not None:
        out["gamma"] = algo.gamma
    if algo.zeta:
        out["zeta"] = algo.zeta
    if algo.lambda_max is not None:
        out["lambda_max"] = algo.lambda_max
    return out


def algorithm_from_dict(data: dict) -> AlgorithmSpec:
    allowed = {
        "kind": True,
        "mu": True,
        "q_fixed": False,
        "beta": False,
        "gamma": False,
        "zeta": False,
        "lambda_max": False,
    }
    data = _take(dict(data), allowed, "algorithm")
    try:
        return AlgorithmSpec(**data)
    except (TypeError, ParameterError) as err:
        raise ConfigError(f"invalid algorithm config: {err}") from err


def experiment_to_dict(spec: ExperimentSpec) -> dict:
    return {
        "algorithm": algorithm_to_dict(spec.algorithm),
        "channel": {"h": list(map(float, spec.channel.h)), "snr_db": spec.channel.snr_db},
        "n_iterations": spec.n_iterations,
        "n_runs": spec.n_runs,
        "base_seed": spec.base_seed,
        "q_init_policy": spec.q_init_policy,
        "snr_reference": spec.snr_reference,
    }


def experiment_from_dict(data: dict) -> ExperimentSpec:
    allowed = {
        "algorithm": True,
        "channel": True,
        "n_iterations": True,
        "n_runs": True,
        "base_seed": True,
        "q_init_policy": False,
        "snr_reference": False,
    }
    data = _take(dict(data), allowed, "experiment")
    chan = _take(dict(data["channel"]), {"h": True, "snr_db": True}, "channel")
    try:
        return ExperimentSpec(
            algorithm=algorithm_from_dict(data["algorithm"]),
            channel=ChannelModel(h=np.asarray(chan["h"], dtype=float), snr_db=chan["snr_db"]),
            n_iterations=int(data["n_iterations"]),
            n_runs=int(data["n_runs"]),
            base_seed=int(data["base_seed"]),
            q_init_policy=data.get("q_init_policy", "ones"),
            snr_reference=data.get("snr_reference", "input"),
        )
    except (TypeError, ParameterError) as err:
        raise ConfigError(f"invalid experiment config: {err}") from err


def suite_to_dict(suite: ProtocolSuite) -> dict:
    return {
        "mode": suite.mode,
        "entries": [
            {"label": label, "experiment": experiment_to_dict(spec)}
            for label, spec in suite.entries
        ],
    }


def suite_from_dict(data: dict) -> ProtocolSuite:
    data = _take(dict(data), {"mode": True, "entries": True}, "suite")
    entries = []
    for item in data["entries"]:
        item = _take(dict(item), {"label": True, "experiment": True}, "suite entry")
        entries.append((item["label"], experiment_from_dict(item["experiment"])))
    return ProtocolSuite(entries=tuple(entries), mode=data["mode"])


# --------------------------------------------------------------------------
# Export
# --------------------------------------------------------------------------


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label)


def _fmt(value: float) -> str:
    return format(value, ".17g")


def export_results(results: SuiteResult | Sequence[SuiteResult], out_dir: str | Path) -> list[Path]:
    """Write per-entry curve CSVs, one summary CSV, and a replayable manifest.

    The manifest echoes every experiment spec (seeds included); nothing
    time-dependent is written, so identical inputs give identical bytes.
    """
    if isinstance(results, SuiteResult):
        results = [results]
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written: list[Path] = []
        summary_lines = ["label,mu,snr_db,steady_state_db,steady_state_se_db,convergence_point"]
        manifest: dict = {"format_version": 1, "suites": []}
        for result in results:
            manifest["suites"].append(suite_to_dict(result.suite))
            for row in result.rows:
                conv = "not-converged" if row.convergence_point is None else str(row.convergence_point)
                summary_lines.append(
                    f"{row.label},{_fmt(row.mu)},{_fmt(row.snr_db)},"
                    f"{_fmt(row.steady_state_db)},{_fmt(row.steady_state_se_db)},{conv}"
                )
            for label, curve in result.curves.items():
                path = out_dir / f"{_slug(label)}_curve.csv"
                values = curve.values
                with np.errstate(divide="ignore"):
                    db = metrics.DB_FACTOR * np.log10(values)
                lines = ["iteration,nwd_mean,nwd_db"]
                lines.extend(
                    f"{i},{_fmt(values[i])},{_fmt(db[i])}" for i in range(values.size)
                )
                path.write_text("\n".join(lines) + "\n")
                written.append(path)
        summary_path = out_dir / "summary.csv"
        summary_path.write_text("\n".join(summary_lines) + "\n")
        written.append(summary_path)
        manifest_path = out_dir / "manifest.json"
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        written.append(manifest_path)
        return written
    except OSError as err:
        raise OSError(f"failed writing results under {out_dir}: {err}") from err


def read_curve_csv(path: str | Path) -> np.ndarray:
    """Linear-scale NWD column of a curve CSV written by export_results."""
    rows = Path(path).read_text().strip().splitlines()[1:]
    return np.array([float(line.split(",")[1]) for line in rows])


def replay_manifest(path: str | Path, out_dir: str | Path, workers: int | None = None) -> list[SuiteResult]:
    """Re-run every suite recorded in a manifest and re-export the results."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read manifest {path}: {err}") from err
    data = _take(dict(data), {"format_version": True, "suites": True}, "manifest")
    suites = [suite_from_dict(item) for item in data["suites"]]
    results = [run_protocol_suite(suite, workers=workers) for suite in suites]
    export_results(results, out_dir)
    return results
