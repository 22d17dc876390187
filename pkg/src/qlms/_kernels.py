"""Compiled per-run loops for the Monte-Carlo harness.

Each kernel advances one filter over a whole input record and writes the
post-update NWD at every instant. The arithmetic (operation order included)
mirrors the reference step functions in :mod:`qlms.filters`; the equivalence
is enforced by tests. Kernels return the first instant at which the error was
non-finite, or -1 for a clean run.

All kernels release the GIL, so runs can execute on a thread pool.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

@njit(cache=True, nogil=True)
def _hnorm(h):
    acc = 0.0
    for k in range(h.shape[0]):
        acc += h[k] * h[k]
    return math.sqrt(acc)


@njit(cache=True, nogil=True)
def _record_nwd(w, h, hn, out, i):
    dev = 0.0
    for k in range(w.shape[0]):
        t = h[k] - w[k]
        dev += t * t
    out[i] = math.sqrt(dev) / hn


@njit(cache=True, nogil=True)
def run_lms(x, d, w, h, mu, out):
    n = d.shape[0]
    m = w.shape[0]
    hn = _hnorm(h)
    for i in range(n):
        y = 0.0
        for k in range(m):
            j = i - k
            if j >= 0:
                y += w[k] * x[j]
        e = d[i] - y
        if not math.isfinite(e):
            return i
        me = mu * e
        for k in range(m):
            j = i - k
            if j >= 0:
                w[k] = w[k] + me * x[j]
        _record_nwd(w, h, hn, out, i)
    return -1


@njit(cache=True, nogil=True)
def run_nlms(x, d, w, h, mu, zeta, out):
    n = d.shape[0]
    m = w.shape[0]
    hn = _hnorm(h)
    for i in range(n):
        y = 0.0
        xx = 0.0
        for k in range(m):
            j = i - k
            if j >= 0:
                y += w[k] * x[j]
                xx += x[j] * x[j]
        e = d[i] - y
        if not math.isfinite(e):
            return i
        denom = zeta + xx
        coef = mu * e / denom
        for k in range(m):
            j = i - k
            if j >= 0:
                w[k] = w[k] + coef * x[j]
        _record_nwd(w, h, hn, out, i)
    return -1


@njit(cache=True, nogil=True)
def run_qlms(x, d, w, h, mu, g, out):
    n = d.shape[0]
    m = w.shape[0]
    hn = _hnorm(h)
    for i in range(n):
        y = 0.0
        for k in range(m):
            j = i - k
            if j >= 0:
                y += w[k] * x[j]
        e = d[i] - y
        if not math.isfinite(e):
            return i
        me = mu * e
        for k in range(m):
            j = i - k
            if j >= 0:
                a = me * g[k]
                w[k] = w[k] + a * x[j]
        _record_nwd(w, h, hn, out, i)
    return -1


@njit(cache=True, nogil=True)
def run_qnlms(x, d, w, h, mu, zeta, g, out):
    n = d.shape[0]
    m = w.shape[0]
    hn = _hnorm(h)
    for i in range(n):
        y = 0.0
        wn = 0.0
        for k in range(m):
            j = i - k
            if j >= 0:
                y += w[k] * x[j]
                gxk = g[k] * x[j]
                wn += x[j] * gxk
        e = d[i] - y
        if not math.isfinite(e):
            return i
        denom = zeta + wn
        coef = mu * e / denom
        for k in range(m):
            j = i - k
            if j >= 0:
                gxk = g[k] * x[j]
                w[k] = w[k] + coef * gxk
        _record_nwd(w, h, hn, out, i)
    return -1


@njit(cache=True, nogil=True)
def run_tvq(x, d, w, h, mu, beta, gamma, q_upper, aux, out):
    # aux[0]: psi in/out; aux[1]: final q.
    n = d.shape[0]
    m = w.shape[0]
    hn = _hnorm(h)
    psi = aux[0]
    q_new = 1.0
    for i in range(n):
        y = 0.0
        for k in range(m):
            j = i - k
            if j >= 0:
                y += w[k] * x[j]
        e = d[i] - y
        if not math.isfinite(e):
            aux[0] = psi
            aux[1] = q_new
            return i
        psi = beta * psi + gamma * (e * e)
        if psi > q_upper:
            q_new = q_upper
        elif psi < 1.0:
            q_new = 1.0
        else:
            q_new = psi
        gain = (q_new + 1.0) / 2.0
        a = (mu * e) * gain
        for k in range(m):
            j = i - k
            if j >= 0:
                w[k] = w[k] + a * x[j]
        _record_nwd(w, h, hn, out, i)
    aux[0] = psi
    aux[1] = q_new
    return -1


@njit(cache=True, nogil=True)
def run_eqlms(x, d, w, q, h, mu, inv_lmax, qstats, out):
    # q is updated in place; qstats[0]/qstats[1] track the min/max of every
    # freshly inserted q entry (shifted entries were bounded on insertion).
    n = d.shape[0]
    m = w.shape[0]
    hn = _hnorm(h)
    for i in range(n):
        y = 0.0
        for k in range(m):
            j = i - k
            if j >= 0:
                y += w[k] * x[j]
        e = d[i] - y
        if not math.isfinite(e):
            return i
        me = mu * e
        for k in range(m):
            j = i - k
            if j >= 0:
                w[k] = w[k] + me * (x[j] * q[k])
        s = 0.0
        for k in range(m):
            s += q[k]
        q1 = (abs(e) + s) / (m + 1.0)
        if q1 > inv_lmax:
            q1 = inv_lmax
        for k in range(m - 1, 0, -1):
            q[k] = q[k - 1]
        q[0] = q1
        if q1 < qstats[0]:
            qstats[0] = q1
        if q1 > qstats[1]:
            qstats[1] = q1
        _record_nwd(w, h, hn, out, i)
    return -1
