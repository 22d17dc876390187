"""Built-in benchmark presets for the three evaluation protocols.

Each protocol fixes the enhanced-filter learning rate (1e-1, 1e-2, 1e-3) and
provides hand-tuned per-algorithm step sizes for two calibration modes:
``equal-convergence`` (match convergence speed, compare steady state) and
``equal-steady-state`` (match the floor, compare convergence point). The step
sizes are data, published alongside the algorithms, and are shipped verbatim
except for cells flagged below.

Suspect cells: a few published step sizes are inconsistent in magnitude with
their own row/column (orders-of-magnitude jumps) or are outright divergent
under the update equations; they are carried as printed but flagged, and the
acceptance suite does not bind to them. One cell is recalibrated:

* equal-convergence, protocol 1, tvqlms, 10 dB: printed 3.5e-1 makes the
  update mean-square unstable (every run blows up; plain LMS at that step
  already diverges for this channel). The preset carries 1.3e-1, the largest
  printed step of that row that runs stably; the entry stays flagged.

Two calibration constants the tables do not state:

* ``QLMS2_Q_FIXED = 3.0``: the published fixed-q benchmark labeled "q = 2"
  matches per-tap gain 2.0, i.e. the diag(q) gain convention of the enhanced
  filter. This artifact parameterizes the fixed-q gain as (q + 1) / 2, so the
  equivalent setting is q = 3 (gain (3 + 1) / 2 = 2.0). Reproduces the
  published steady-state values to < 0.1 dB.
* ``TVQ_PARAMS``: the time-varying-q recursion constants (beta, gamma) are
  not published; these values are calibrated so the benchmark reproduces the
  published behavior (equal-convergence: q stays at its lower clip;
  equal-steady-state: a transient q > 1 episode that delays band entry to
  about 0.6k iterations at 10 dB).
"""

from __future__ import annotations

from .bench import ExperimentSpec, ProtocolSuite
from .exceptions import ParameterError
from .filters import AlgorithmSpec, LAMBDA_MAX_WHITE_UNIT
from .signals import DEFAULT_CHANNEL_H, ChannelModel

MODE_CONVERGENCE = "equal-convergence"
MODE_STEADY_STATE = "equal-steady-state"
MODES = (MODE_CONVERGENCE, MODE_STEADY_STATE)

PROTOCOLS = (1, 2, 3)
SNRS = (10.0, 20.0, 30.0)

ALGORITHMS = ("lms", "qlms2", "nlms", "tvqlms", "eqlms")

# Fixed-q benchmark gain: see module docstring.
QLMS2_Q_FIXED = 3.0
# Normalized-update regularizer (the tables do not state one).
NLMS_ZETA = 1e-3
# (beta, gamma) of the time-varying-q recursion, per calibration mode.
TVQ_PARAMS = {
    MODE_CONVERGENCE: (0.9, 1e-4),
    MODE_STEADY_STATE: (0.997, 0.024),
}

# Iterations per protocol (run lengths of the published experiments).
PROTOCOL_ITERATIONS = {1: 10_000, 2: 100_000, 3: 1_000_000}

DESK_SCALE_RUNS = 200
FULL_SCALE_RUNS = 1000

DEFAULT_BASE_SEED = 20240 + 5

# mu[(mode, protocol)][algorithm][snr]; "lms" also covers the fixed-q run.
_MU: dict[tuple[str, int], dict[str, dict[float, float]]] = {
    (MODE_CONVERGENCE, 1): {
        "lms": {10.0: 4.4e-2, 20.0: 2.45e-2, 30.0: 2.7e-5},
        "tvqlms": {10.0: 1.3e-1, 20.0: 1.3e-1, 30.0: 3.2e-5},  # 10 dB recalibrated; printed 3.5e-1
        "nlms": {10.0: 2.45e-1, 20.0: 1.2e-1, 30.0: 8.7e-5},
        "eqlms": {10.0: 1e-1, 20.0: 1e-1, 30.0: 1e-1},
    },
    (MODE_CONVERGENCE, 2): {
        "lms": {10.0: 4e-3, 20.0: 1.5e-3, 30.0: 5.2e-4},
        "tvqlms": {10.0: 2e-2, 20.0: 1e-3, 30.0: 1.8e-3},
        "nlms": {10.0: 2e-2, 20.0: 9e-3, 30.0: 2.5e-3},
        "eqlms": {10.0: 1e-2, 20.0: 1e-2, 30.0: 1e-2},
    },
    (MODE_CONVERGENCE, 3): {
        "lms": {10.0: 3.6e-4, 20.0: 1.3e-4, 30.0: 4.5e-3},
        "tvqlms": {10.0: 1.6e-3, 20.0: 6e-4, 30.0: 1.5e-4},
        "nlms": {10.0: 1.9e-3, 20.0: 7e-4, 30.0: 2.3e-4},
        "eqlms": {10.0: 1e-3, 20.0: 1e-3, 30.0: 1e-3},
    },
    (MODE_STEADY_STATE, 1): {
        "lms": {10.0: 3e-2, 20.0: 8.9e-3, 30.0: 2.7e-3},
        "tvqlms": {10.0: 3.3e-2, 20.0: 8.8e-3, 30.0: 3.1e-3},
        "nlms": {10.0: 1e-1, 20.0: 2.8e-2, 30.0: 8.5e-3},
        "eqlms": {10.0: 1e-1, 20.0: 1e-1, 30.0: 1e-1},
    },
    (MODE_STEADY_STATE, 2): {
        "lms": {10.0: 3e-3, 20.0: 8.8e-4, 30.0: 2.7e-4},
        "tvqlms": {10.0: 3.3e-3, 20.0: 9.3e-4, 30.0: 3.1e-4},
        "nlms": {10.0: 9e-2, 20.0: 2.72e-3, 30.0: 8.5e-4},
        "eqlms": {10.0: 1e-2, 20.0: 1e-2, 30.0: 1e-2},
    },
    (MODE_STEADY_STATE, 3): {
        "lms": {10.0: 3e-4, 20.0: 8.9e-4, 30.0: 2.7e-5},
        "tvqlms": {10.0: 3.3e-4, 20.0: 9e-5, 30.0: 3.2e-5},
        "nlms": {10.0: 1e-3, 20.0: 2.8e-4, 30.0: 8.5e-5},
        "eqlms": {10.0: 1e-3, 20.0: 1e-3, 30.0: 1e-3},
    },
}

# (mode, protocol, algorithm, snr) cells excluded from acceptance binding.
# "lms" entries cover the fixed-q run sharing the row.
SUSPECT_CELLS = frozenset(
    {
        (MODE_CONVERGENCE, 1, "lms", 30.0),
        (MODE_CONVERGENCE, 1, "qlms2", 30.0),
        (MODE_CONVERGENCE, 1, "tvqlms", 10.0),  # recalibrated, see module docstring
        (MODE_CONVERGENCE, 1, "tvqlms", 30.0),
        (MODE_CONVERGENCE, 1, "nlms", 30.0),
        (MODE_CONVERGENCE, 3, "lms", 30.0),
        (MODE_CONVERGENCE, 3, "qlms2", 30.0),
        (MODE_STEADY_STATE, 2, "nlms", 10.0),
        (MODE_STEADY_STATE, 3, "lms", 20.0),
        (MODE_STEADY_STATE, 3, "qlms2", 20.0),
    }
)


def is_suspect(mode: str, protocol: int, algorithm: str, snr_db: float) -> bool:
    return (mode, protocol, algorithm, float(snr_db)) in SUSPECT_CELLS


def preset_mu(mode: str, protocol: int, algorithm: str, snr_db: float) -> float:
    """Step size for one preset cell (the fixed-q run shares the plain-LMS row)."""
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}")
    if protocol not in PROTOCOLS:
        raise ParameterError(f"protocol must be one of {PROTOCOLS}")
    table = _MU[(mode, protocol)]
    row = "lms" if algorithm == "qlms2" else algorithm
    if row not in table:
        raise ParameterError(f"no preset row for algorithm {algorithm!r}")
    snr_db = float(snr_db)
    if snr_db not in table[row]:
        raise ParameterError(f"no preset column for SNR {snr_db} dB")
    return table[row][snr_db]


def preset_algorithm(mode: str, protocol: int, algorithm: str, snr_db: float) -> AlgorithmSpec:
    """AlgorithmSpec for one preset cell."""
    mu = preset_mu(mode, protocol, algorithm, snr_db)
    if algorithm == "lms":
        return AlgorithmSpec(kind="lms", mu=mu)
    if algorithm == "qlms2":
        return AlgorithmSpec(kind="qlms", mu=mu, q_fixed=QLMS2_Q_FIXED)
    if algorithm == "nlms":
        return AlgorithmSpec(kind="nlms", mu=mu, zeta=NLMS_ZETA)
    if algorithm == "tvqlms":
        beta, gamma = TVQ_PARAMS[mode]
        return AlgorithmSpec(
            kind="tvqlms", mu=mu, beta=beta, gamma=gamma, lambda_max=LAMBDA_MAX_WHITE_UNIT
        )
    if algorithm == "eqlms":
        return AlgorithmSpec(kind="eqlms", mu=mu, lambda_max=LAMBDA_MAX_WHITE_UNIT)
    raise ParameterError(f"unknown preset algorithm {algorithm!r}")


def protocol_suite(
    protocol: int,
    mode: str,
    snr_db: float,
    n_runs: int = DESK_SCALE_RUNS,
    n_iterations: int | None = None,
    base_seed: int = DEFAULT_BASE_SEED,
    algorithms: tuple[str, ...] = ALGORITHMS,
    include_suspect: bool = True,
    snr_reference: str = "input",
) -> ProtocolSuite:
    """One-SNR suite of preset entries (all sharing channel and run length)."""
    if n_iterations is None:
        n_iterations = PROTOCOL_ITERATIONS[protocol]
    channel = ChannelModel(h=DEFAULT_CHANNEL_H.copy(), snr_db=float(snr_db))
    entries = []
    for algorithm in algorithms:
        if not include_suspect and is_suspect(mode, protocol, algorithm, snr_db):
            continue
        spec = ExperimentSpec(
            algorithm=preset_algorithm(mode, protocol, algorithm, snr_db),
            channel=channel,
            n_iterations=n_iterations,
            n_runs=n_runs,
            base_seed=base_seed,
            snr_reference=snr_reference,
        )
        entries.append((f"{algorithm}_snr{int(snr_db)}", spec))
    return ProtocolSuite(entries=tuple(entries), mode=mode)


def protocol_suites(
    protocol: int,
    mode: str,
    snrs: tuple[float, ...] = SNRS,
    **kwargs,
) -> list[ProtocolSuite]:
    """The suite for every SNR column of one protocol table."""
    return [protocol_suite(protocol, mode, snr, **kwargs) for snr in snrs]
