"""Deterministic counter-based random number generation.

Every random quantity in this package is derived from 64-bit integers through
the same two primitives, so that identical seeds reproduce identical streams
bit-for-bit across platforms and releases:

* ``mix64`` -- the SplitMix64 finalizer (Steele, Lea & Flood), a full-avalanche
  bijection on 64-bit words.
* counter addressing -- the k-th raw word of a stream is
  ``mix64((seed + (k + 1) * GOLDEN) mod 2**64)`` with ``GOLDEN = 2**64 / phi``.

Per-run, per-stream seeds are derived as::

    run_seed    = mix64((base_seed + (run_index + 1) * GOLDEN) mod 2**64)
    stream_seed = mix64((run_seed + (stream_id + 1) * GOLDEN) mod 2**64)

with stream ids ``STREAM_INPUT = 0``, ``STREAM_NOISE = 1``, ``STREAM_QINIT = 2``.

Uniform variates map a raw word to (0, 1] via ``((word >> 11) + 1) * 2**-53``;
Gaussian variates apply the basic Box-Muller transform to consecutive uniform
pairs (counters 2j and 2j+1 produce outputs 2j and 2j+1). This layout is
stateless, so any sub-range of a stream can be generated independently.
"""

from __future__ import annotations

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = 0xFFFFFFFFFFFFFFFF

STREAM_INPUT = 0
STREAM_NOISE = 1
STREAM_QINIT = 2

_U64_GOLDEN = np.uint64(GOLDEN)
_TO_UNIT = 2.0 ** -53


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python integer (exact 64-bit semantics)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_stream_seed(base_seed: int, run_index: int, stream_id: int) -> int:
    """Seed for one (run, stream) pair; see the module docstring for the rule."""
    run_seed = mix64((base_seed + (run_index + 1) * GOLDEN) & _MASK64)
    return mix64((run_seed + (stream_id + 1) * GOLDEN) & _MASK64)


def _raw_words(seed: int, start: int, count: int) -> np.ndarray:
    """Raw mixed words for counters start..start+count-1, vectorized."""
    counters = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + counters * _U64_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def uniform_stream(seed: int, n: int, start: int = 0) -> np.ndarray:
    """n uniforms in (0, 1] from the given stream, starting at counter offset."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    words = _raw_words(seed, start, n)
    return ((words >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _TO_UNIT


def gaussian_stream(seed: int, n: int, start_pair: int = 0) -> np.ndarray:
    """n standard-normal variates via Box-Muller over uniform pairs.

    Output index 2j comes from cos, 2j+1 from sin, of the pair at uniform
    counters (2j, 2j+1). ``start_pair`` offsets in units of pairs so chunks
    of a stream can be produced independently.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    pairs = (n + 1) // 2
    u = uniform_stream(seed, 2 * pairs, start=2 * start_pair)
    u1 = u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = (2.0 * np.pi) * u2
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]
