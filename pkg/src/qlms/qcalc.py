"""Jackson q-derivative and q-gradient.

The q-derivative of f is the secant quotient (f(qx) - f(x)) / ((q - 1) x); it
reduces to the ordinary derivative as q -> 1. These routines are the ground
truth used to sanity-check the filter update rules, which are derived from the
q-gradient of the squared error.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .exceptions import DomainError

# Below this distance from 1 the secant quotient loses all precision to
# cancellation, so the classical branch takes over.
Q_NEAR_ONE = 1e-12


def _check_q(q: float, name: str = "q") -> float:
    q = float(q)
    if not np.isfinite(q) or q <= 0.0:
        raise DomainError(f"{name} must be a positive finite real, got {q!r}")
    return q


def q_power_derivative(x: float, n: int, q: float) -> float:
    """q-derivative of x**n evaluated at x.

    Returns ((q**n - 1) / (q - 1)) * x**(n-1) for q != 1 and the classical
    n * x**(n-1) on the q = 1 branch (taken whenever |q - 1| < 1e-12).

    Parameters
    ----------
    x : real evaluation point.
    n : nonnegative integer exponent.
    q : positive deformation parameter.
    """
    q = _check_q(q)
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    if n == 0:
        return 0.0
    x = float(x)
    if abs(q - 1.0) < Q_NEAR_ONE:
        return n * x ** (n - 1)
    return (q**n - 1.0) / (q - 1.0) * x ** (n - 1)


def q_gradient(
    f: Callable[[np.ndarray], float],
    x: Sequence[float],
    q: Sequence[float],
) -> np.ndarray:
    """Component-wise q-gradient of a scalar function of a vector.

    Component k is the Jackson quotient
    (f(x with x_k scaled by q_k) - f(x)) / ((q_k - 1) * x_k); on the q_k = 1
    branch a central finite difference with step max(1e-6, 1e-6*|x_k|) is used
    instead, since the quotient is undefined there.

    Raises
    ------
    DomainError
        If some q_k <= 0, or x_k == 0 where q_k != 1 (the quotient divides
        by (q_k - 1) * x_k).
    """
    x = np.asarray(x, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if x.ndim != 1 or q.shape != x.shape:
        raise DomainError(
            f"x and q must be 1-d vectors of equal length, got {x.shape} and {q.shape}"
        )
    for k, qk in enumerate(q):
        _check_q(qk, name=f"q[{k}]")

    f0 = float(f(x))
    grad = np.empty_like(x)
    for k in range(x.size):
        if abs(q[k] - 1.0) < Q_NEAR_ONE:
            h = max(1e-6, 1e-6 * abs(x[k]))
            xp = x.copy()
            xm = x.copy()
            xp[k] += h
            xm[k] -= h
            grad[k] = (float(f(xp)) - float(f(xm))) / (2.0 * h)
        else:
            if x[k] == 0.0:
                raise DomainError(
                    f"x[{k}] is zero with q[{k}] != 1; the Jackson quotient "
                    "divides by (q - 1) * x"
                )
            xq = x.copy()
            xq[k] = q[k] * x[k]
            grad[k] = (float(f(xq)) - f0) / ((q[k] - 1.0) * x[k])
    return grad
