"""Normalized weight deviation, dB conversion, and curve measurements.

NWD = ||h - w|| / ||h|| is the figure of merit for identification accuracy.
Curves are aggregated in linear scale; dB conversion (20*log10, an amplitude
ratio) is applied after averaging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DegenerateInputError, DimensionMismatchError, DomainError, ParameterError

# NWD is a norm (amplitude) ratio, hence the factor 20.
DB_FACTOR = 20.0


@dataclass(frozen=True)
class NwdCurve:
    """Per-iteration ensemble-mean NWD in linear scale."""

    values: np.ndarray
    n_runs: int
    n_iterations: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size != self.n_iterations:
            raise DimensionMismatchError(
                f"curve length {v.size} != n_iterations {self.n_iterations}"
            )
        if self.n_runs < 1 or self.n_iterations < 1:
            raise ParameterError("n_runs and n_iterations must be positive")
        if np.any(v < 0):
            raise DomainError("NWD values must be nonnegative")
        object.__setattr__(self, "values", v)


def nwd(h: np.ndarray, w: np.ndarray) -> float:
    """Euclidean norm ratio ||h - w|| / ||h||."""
    h = np.asarray(h, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if h.shape != w.shape:
        raise DimensionMismatchError(f"length mismatch: {h.size} vs {w.size}")
    hn = np.linalg.norm(h)
    if not hn > 0:
        raise DegenerateInputError("reference vector has zero norm")
    return float(np.linalg.norm(h - w) / hn)


def to_db(v: float) -> float:
    """Amplitude ratio to decibels: 20 * log10(v)."""
    if not v > 0:
        raise DomainError(f"dB conversion requires a positive value, got {v!r}")
    return DB_FACTOR * math.log10(v)


def ensemble_mean(run_curves: Sequence[np.ndarray]) -> NwdCurve:
    """Element-wise mean over runs, accumulated in run order.

    Uses Kahan compensated summation so the result is independent of run
    ordering to well below 1e-12 relative.
    """
    if len(run_curves) == 0:
        raise ParameterError("need at least one run curve")
    first = np.asarray(run_curves[0], dtype=np.float64)
    total = np.zeros_like(first)
    comp = np.zeros_like(first)
    for curve in run_curves:
        curve = np.asarray(curve, dtype=np.float64)
        if curve.shape != first.shape:
            raise DimensionMismatchError(
                f"ragged run curves: {curve.size} vs {first.size}"
            )
        y = curve - comp
        t = total + y
        comp = (t - total) - y
        total = t
    mean = total / len(run_curves)
    return NwdCurve(values=mean, n_runs=len(run_curves), n_iterations=first.size)


def steady_state_db(curve: NwdCurve | np.ndarray, window_fraction: float = 0.1) -> float:
    """dB level of the mean over the final ceil(window_fraction * n) samples."""
    values = curve.values if isinstance(curve, NwdCurve) else np.asarray(curve, dtype=np.float64)
    if values.size == 0:
        raise ParameterError("curve is empty")
    if not 0.0 < window_fraction <= 1.0:
        raise ParameterError("window_fraction must be in (0, 1]")
    window = max(1, math.ceil(window_fraction * values.size))
    return to_db(float(np.mean(values[-window:])))


def convergence_point(curve: NwdCurve | np.ndarray, tol_db: float = 1.0) -> int | None:
    """First index from which the curve stays within tol_db of its steady state.

    The steady state is the final-10%-window level of the same curve. Returns
    ``None`` when the curve never permanently enters the band ("not
    converged").
    """
    values = curve.values if isinstance(curve, NwdCurve) else np.asarray(curve, dtype=np.float64)
    if values.size < 10:
        raise ParameterError("curve too short for convergence detection (need >= 10)")
    if not tol_db > 0:
        raise ParameterError("tol_db must be positive")
    ss_db = steady_state_db(values, 0.1)
    threshold = 10.0 ** ((ss_db + tol_db) / DB_FACTOR)
    above = np.nonzero(values > threshold)[0]
    if above.size == 0:
        return 0
    last = int(above[-1])
    if last == values.size - 1:
        return None
    return last + 1
