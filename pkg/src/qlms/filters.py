"""Adaptive filter update rules: LMS, NLMS, q-LMS, q-NLMS, time-varying q-LMS,
and the enhanced q-LMS with a per-tap error-driven q vector.

All algorithms share one per-sample contract: ``step(state, x_vec, d, spec)``
consumes the regressor and desired sample at one instant and returns the
prediction, the error, and the successor state. States are immutable; a filter
instance is advanced by threading states through successive calls.

Scalar inner products are accumulated strictly left to right (see ``dot_seq``)
so that results are bit-identical to the compiled batch kernels in
``qlms._kernels`` and to the channel convolution in ``qlms.signals``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import rng
from .exceptions import (
    DegenerateInputError,
    DimensionMismatchError,
    ParameterError,
)

KIND_LMS = "lms"
KIND_NLMS = "nlms"
KIND_QLMS = "qlms"
KIND_QNLMS = "qnlms"
KIND_TVQLMS = "tvqlms"
KIND_EQLMS = "eqlms"

KINDS = (KIND_LMS, KIND_NLMS, KIND_QLMS, KIND_QNLMS, KIND_TVQLMS, KIND_EQLMS)

# Sentinel accepted by AlgorithmSpec.lambda_max: resolve from a data prefix.
ESTIMATE = "estimate"

# Dominant eigenvalue of the input autocorrelation for unit-variance white
# excitation; the analytic value used by the benchmark presets.
LAMBDA_MAX_WHITE_UNIT = 1.0


def dot_seq(a: np.ndarray, b: np.ndarray) -> float:
    """Inner product accumulated left to right (fixed floating-point order)."""
    acc = 0.0
    for k in range(a.shape[0]):
        acc += a[k] * b[k]
    return acc


@dataclass(frozen=True)
class FilterState:
    """Filter taps plus algorithm-specific auxiliary state at one instant.

    ``q_vector`` holds the per-tap q values (all ones for algorithms that do
    not adapt q); ``psi`` is the leaky error-energy accumulator of the
    time-varying q recursion.
    """

    weights: np.ndarray
    q_vector: np.ndarray
    psi: float = 1.0
    iteration: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        q = np.asarray(self.q_vector, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ParameterError("weights must be a nonempty vector")
        if q.shape != w.shape:
            raise DimensionMismatchError(
                f"q_vector length {q.size} != weights length {w.size}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "q_vector", q)

    @property
    def taps(self) -> int:
        return self.weights.size


def initial_state(m: int, q_init: np.ndarray | None = None, psi: float = 1.0) -> FilterState:
    """Zero-weight state of length m; q defaults to all ones."""
    if m < 1:
        raise ParameterError("filter length must be >= 1")
    q = np.ones(m) if q_init is None else np.asarray(q_init, dtype=np.float64).copy()
    return FilterState(weights=np.zeros(m), q_vector=q, psi=float(psi), iteration=0)


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm selector plus hyperparameters.

    ``q_fixed`` (qlms/qnlms) may be a scalar applied to every tap or a per-tap
    vector. ``lambda_max`` (tvqlms/eqlms) is either a positive number or the
    string ``"estimate"``, resolved by the harness from a data prefix before
    filtering.
    """

    kind: str
    mu: float
    q_fixed: float | np.ndarray | None = None
    beta: float | None = None
    gamma: float | None = None
    zeta: float = 0.0
    lambda_max: float | str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown algorithm kind {self.kind!r}; expected one of {KINDS}")
        # mu = 0 is a degenerate no-adaptation setting the harness accepts for
        # sanity checks; negative or non-finite step sizes are rejected.
        if not (np.isfinite(self.mu) and self.mu >= 0):
            raise ParameterError(f"mu must be a nonnegative finite real, got {self.mu!r}")
        if self.kind == KIND_TVQLMS and self.mu == 0:
            raise ParameterError("tvqlms requires mu > 0 (the q ceiling is 2 / (mu * lambda_max))")
        if self.zeta < 0:
            raise ParameterError(f"zeta must be nonnegative, got {self.zeta!r}")
        if self.kind in (KIND_QLMS, KIND_QNLMS):
            if self.q_fixed is None:
                raise ParameterError(f"{self.kind} requires q_fixed")
            q = np.atleast_1d(np.asarray(self.q_fixed, dtype=np.float64))
            if not np.all(q > 0):
                raise ParameterError("q_fixed components must be positive")
            object.__setattr__(self, "q_fixed", q if q.size > 1 else float(q[0]))
        if self.kind == KIND_TVQLMS:
            if self.beta is None or not (0.0 < self.beta < 1.0):
                raise ParameterError(f"tvqlms requires 0 < beta < 1, got {self.beta!r}")
            if self.gamma is None or not self.gamma > 0:
                raise ParameterError(f"tvqlms requires gamma > 0, got {self.gamma!r}")
        if self.kind in (KIND_TVQLMS, KIND_EQLMS):
            if self.lambda_max is None:
                raise ParameterError(f"{self.kind} requires lambda_max (number or 'estimate')")
            if isinstance(self.lambda_max, str) and self.lambda_max != ESTIMATE:
                raise ParameterError(f"lambda_max must be a number or 'estimate', got {self.lambda_max!r}")

    def resolved_lambda_max(self) -> float:
        lam = self.lambda_max
        if not isinstance(lam, (int, float)) or not lam > 0:
            raise ParameterError(f"lambda_max not resolved to a positive number: {lam!r}")
        return float(lam)

    def q_fixed_vector(self, m: int) -> np.ndarray:
        q = self.q_fixed
        if np.isscalar(q):
            return np.full(m, float(q))
        q = np.asarray(q, dtype=np.float64)
        if q.size != m:
            raise DimensionMismatchError(f"q_fixed length {q.size} != filter length {m}")
        return q


@dataclass(frozen=True)
class StepOutput:
    """Prediction y, error e = d - y (single subtraction), and the next state."""

    y: float
    e: float
    new_state: FilterState


def predict(state: FilterState, x_vec: np.ndarray) -> float:
    """Filter output: inner product of the weights with the regressor."""
    x_vec = np.asarray(x_vec, dtype=np.float64)
    if x_vec.shape != state.weights.shape:
        raise DimensionMismatchError(
            f"regressor length {x_vec.size} != filter length {state.taps}"
        )
    return dot_seq(state.weights, x_vec)


def _require_kind(spec: AlgorithmSpec, kind: str) -> None:
    if spec.kind != kind:
        raise ParameterError(f"spec.kind is {spec.kind!r}, expected {kind!r}")


def lms_step(state: FilterState, x_vec, d: float, spec: AlgorithmSpec) -> StepOutput:
    """w' = w + mu * e * x."""
    _require_kind(spec, KIND_LMS)
    x_vec = np.asarray(x_vec, dtype=np.float64)
    y = predict(state, x_vec)
    e = d - y
    w = state.weights + (spec.mu * e) * x_vec
    return StepOutput(y, e, replace(state, weights=w, iteration=state.iteration + 1))


def nlms_step(state: FilterState, x_vec, d: float, spec: AlgorithmSpec) -> StepOutput:
    """w' = w + mu * e * x / (zeta + ||x||^2)."""
    _require_kind(spec, KIND_NLMS)
    x_vec = np.asarray(x_vec, dtype=np.float64)
    y = predict(state, x_vec)
    e = d - y
    denom = spec.zeta + dot_seq(x_vec, x_vec)
    if denom == 0.0:
        raise ZeroDivisionError("zero regressor with zeta = 0 in normalized update")
    coef = spec.mu * e / denom
    w = state.weights + coef * x_vec
    return StepOutput(y, e, replace(state, weights=w, iteration=state.iteration + 1))


def qlms_step(state: FilterState, x_vec, d: float, spec: AlgorithmSpec) -> StepOutput:
    """w'_k = w_k + mu * e * g_k * x_k with per-tap gain g_k = (q_k + 1) / 2.

    With q identically 1 the gains collapse to 1 and the update is exactly the
    plain LMS recursion.
    """
    _require_kind(spec, KIND_QLMS)
    x_vec = np.asarray(x_vec, dtype=np.float64)
    y = predict(state, x_vec)
    e = d - y
    g = (spec.q_fixed_vector(state.taps) + 1.0) / 2.0
    w = state.weights + ((spec.mu * e) * g) * x_vec
    return StepOutput(y, e, replace(state, weights=w, iteration=state.iteration + 1))


def qnlms_step(state: FilterState, x_vec, d: float, spec: AlgorithmSpec) -> StepOutput:
    """w' = w + mu * e * G x / (zeta + x^T G x), G = diag((q + 1) / 2)."""
    _require_kind(spec, KIND_QNLMS)
    x_vec = np.asarray(x_vec, dtype=np.float64)
    y = predict(state, x_vec)
    e = d - y
    g = (spec.q_fixed_vector(state.taps) + 1.0) / 2.0
    gx = g * x_vec
    denom = spec.zeta + dot_seq(x_vec, gx)
    if denom == 0.0:
        raise ZeroDivisionError("zero weighted norm with zeta = 0 in normalized update")
    coef = spec.mu * e / denom
    w = state.weights + coef * gx
    return StepOutput(y, e, replace(state, weights=w, iteration=state.iteration + 1))


def tvq_step(state: FilterState, x_vec, d: float, spec: AlgorithmSpec) -> StepOutput:
    """Scalar q driven by the leaky error-energy recursion psi' = beta*psi + gamma*e^2.

    The new psi is clipped into [1, q_upper] with q_upper = 2 / (mu * lambda_max)
    and the clipped value is the q applied (gain (q + 1) / 2 on every tap) in
    this instant's weight update.
    """
    _require_kind(spec, KIND_TVQLMS)
    lam = spec.resolved_lambda_max()
    x_vec = np.asarray(x_vec, dtype=np.float64)
    y = predict(state, x_vec)
    e = d - y
    psi = spec.beta * state.psi + spec.gamma * (e * e)
    q_upper = 2.0 / (spec.mu * lam)
    if psi > q_upper:
        q_new = q_upper
    elif psi < 1.0:
        q_new = 1.0
    else:
        q_new = psi
    gain = (q_new + 1.0) / 2.0
    w = state.weights + ((spec.mu * e) * gain) * x_vec
    new_state = FilterState(
        weights=w,
        q_vector=np.full(state.taps, q_new),
        psi=psi,
        iteration=state.iteration + 1,
    )
    return StepOutput(y, e, new_state)


def eqlms_step(state: FilterState, x_vec, d: float, spec: AlgorithmSpec) -> StepOutput:
    """Per-tap q vector updated from the error magnitude and shifted tap-wise.

    Ordered semantics at instant i:

    1. y = w^T x, e = d - y;
    2. w' = w + mu * e * (x .* q)         -- uses the current q(i);
    3. q1 <- (|e| + sum_j q_j) / (M + 1);
    4. q1 <- min(q1, 1 / lambda_max)      -- whitening bound, applied to the
       fresh entry only;
    5. q'[0] = q1, q'[k] = q[k-1] for k >= 1 (delay-line shift).
    """
    _require_kind(spec, KIND_EQLMS)
    lam = spec.resolved_lambda_max()
    x_vec = np.asarray(x_vec, dtype=np.float64)
    if not np.all(state.q_vector > 0):
        raise ParameterError("eqlms requires a positive q_vector")
    y = predict(state, x_vec)
    e = d - y
    q = state.q_vector
    w = state.weights + (spec.mu * e) * (x_vec * q)
    m = state.taps
    q_sum = 0.0
    for k in range(m):
        q_sum += q[k]
    q1 = (abs(e) + q_sum) / (m + 1.0)
    bound = 1.0 / lam
    if q1 > bound:
        q1 = bound
    q_new = np.empty(m)
    q_new[0] = q1
    q_new[1:] = q[:-1]
    new_state = FilterState(
        weights=w, q_vector=q_new, psi=state.psi, iteration=state.iteration + 1
    )
    return StepOutput(y, e, new_state)


_STEP_FUNCS = {
    KIND_LMS: lms_step,
    KIND_NLMS: nlms_step,
    KIND_QLMS: qlms_step,
    KIND_QNLMS: qnlms_step,
    KIND_TVQLMS: tvq_step,
    KIND_EQLMS: eqlms_step,
}


def step(state: FilterState, x_vec, d: float, spec: AlgorithmSpec) -> StepOutput:
    """Dispatch one per-sample update to the algorithm named by spec.kind."""
    return _STEP_FUNCS[spec.kind](state, x_vec, d, spec)


def initial_q_vector(m: int, spec: AlgorithmSpec, policy: str = "ones", seed: int = 0) -> np.ndarray:
    """Starting q vector for a run.

    ``ones`` is the deterministic default (the first update then coincides
    with plain LMS); ``seeded-uniform`` draws positive values in (0, 1].
    """
    if policy == "ones":
        return np.ones(m)
    if policy == "seeded-uniform":
        return rng.uniform_stream(seed, m)
    raise ParameterError(f"unknown q_init policy {policy!r}")


def estimate_lambda_max(samples: np.ndarray, m: int, tol: float = 1e-8, max_iter: int = 1000) -> float:
    """Dominant eigenvalue of the M x M sample autocorrelation Toeplitz matrix.

    Lags use the biased estimator r(tau) = (1/N) sum_t x(t) x(t - tau); the
    eigenvalue is found by power iteration to relative tolerance ``tol``
    (capped at ``max_iter`` sweeps).
    """
    x = np.asarray(samples, dtype=np.float64)
    if m < 1:
        raise ParameterError("m must be positive")
    n = x.size
    if n < 10 * m:
        raise ParameterError(f"need at least 10*M = {10 * m} samples, got {n}")
    if not np.any(x):
        raise DegenerateInputError("all-zero input; autocorrelation is degenerate")
    r = np.empty(m)
    r[0] = np.dot(x, x) / n
    for tau in range(1, m):
        r[tau] = np.dot(x[tau:], x[:-tau]) / n
    mat = scipy.linalg.toeplitz(r)
    v = np.full(m, 1.0 / np.sqrt(m))
    lam = 0.0
    for _ in range(max_iter):
        w = mat @ v
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0:
            raise DegenerateInputError("autocorrelation matrix annihilated the iterate")
        v = w / lam_new
        if abs(lam_new - lam) <= tol * lam_new:
            return lam_new
        lam = lam_new
    return lam
