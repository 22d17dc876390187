"""q-calculus LMS adaptive filters and a Monte-Carlo identification benchmark.

The filter family (plain, normalized, fixed-q, time-varying-q, and the
per-tap error-driven enhanced variant) shares one per-sample step contract in
:mod:`qlms.filters`; :mod:`qlms.bench` runs seeded ensembles against a known
FIR channel and measures normalized weight deviation curves.
"""

from .bench import (
    ExperimentSpec,
    ProtocolSuite,
    RunResult,
    SuiteResult,
    export_results,
    replay_manifest,
    run_monte_carlo,
    run_protocol_suite,
    run_single,
)
from .exceptions import (
    ConfigError,
    DegenerateInputError,
    DimensionMismatchError,
    DivergenceError,
    DomainError,
    ParameterError,
    QlmsError,
)
from .filters import (
    AlgorithmSpec,
    FilterState,
    StepOutput,
    eqlms_step,
    estimate_lambda_max,
    initial_state,
    lms_step,
    nlms_step,
    predict,
    qlms_step,
    qnlms_step,
    step,
    tvq_step,
)
from .metrics import NwdCurve, convergence_point, ensemble_mean, nwd, steady_state_db, to_db
from .qcalc import q_gradient, q_power_derivative
from .signals import (
    ChannelModel,
    SignalSource,
    add_noise_at_snr,
    channel_output,
    generate_input,
    regressor_at,
)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmSpec",
    "ChannelModel",
    "ConfigError",
    "DegenerateInputError",
    "DimensionMismatchError",
    "DivergenceError",
    "DomainError",
    "ExperimentSpec",
    "FilterState",
    "NwdCurve",
    "ParameterError",
    "ProtocolSuite",
    "QlmsError",
    "RunResult",
    "SignalSource",
    "StepOutput",
    "SuiteResult",
    "add_noise_at_snr",
    "channel_output",
    "convergence_point",
    "ensemble_mean",
    "eqlms_step",
    "estimate_lambda_max",
    "export_results",
    "generate_input",
    "initial_state",
    "lms_step",
    "nlms_step",
    "nwd",
    "predict",
    "q_gradient",
    "q_power_derivative",
    "qlms_step",
    "qnlms_step",
    "regressor_at",
    "replay_manifest",
    "run_monte_carlo",
    "run_protocol_suite",
    "run_single",
    "steady_state_db",
    "step",
    "to_db",
    "tvq_step",
]
