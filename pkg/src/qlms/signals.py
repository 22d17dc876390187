"""Seedable generation of the identification experiment's signals.

White Gaussian excitation, FIR channel output with cold start (zero history
before t = 0), and observation noise calibrated to a requested SNR. All
randomness flows through :mod:`qlms.rng`, so every sequence is a pure function
of its seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng
from .exceptions import DegenerateInputError, DimensionMismatchError, ParameterError


@dataclass(frozen=True)
class ChannelModel:
    """True impulse response and observation-noise level.

    ``h`` is the ground truth the filters identify; ``snr_db`` the requested
    signal-to-noise ratio of the desired response.
    """

    h: np.ndarray
    snr_db: float

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        if h.ndim != 1 or h.size < 1:
            raise ParameterError("channel impulse response must be a nonempty vector")
        if not np.linalg.norm(h) > 0:
            raise DegenerateInputError("channel impulse response must have nonzero norm")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "snr_db", float(self.snr_db))

    @property
    def taps(self) -> int:
        return self.h.size


# The 5-tap channel used throughout the benchmark experiments.
DEFAULT_CHANNEL_H = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


@dataclass(frozen=True)
class SignalSource:
    """Description of one white Gaussian excitation stream."""

    n_samples: int
    seed: int
    variance: float = 1.0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ParameterError("n_samples must be positive")
        if not self.variance > 0:
            raise ParameterError("variance must be positive")


def generate_input(source: SignalSource) -> np.ndarray:
    """Zero-mean white Gaussian samples; deterministic in ``source.seed``."""
    x = rng.gaussian_stream(source.seed, source.n_samples)
    if source.variance != 1.0:
        x = x * np.sqrt(source.variance)
    return x


def regressor_at(x_seq: np.ndarray, i: int, m: int) -> np.ndarray:
    """Tapped-delay-line regressor [x(i), x(i-1), ..., x(i-M+1)].

    Entries before t = 0 are zero (cold start).
    """
    x_seq = np.asarray(x_seq, dtype=np.float64)
    if i < 0 or i >= x_seq.size:
        raise IndexError(f"instant {i} outside sequence of length {x_seq.size}")
    if m < 1:
        raise ParameterError("regressor length must be positive")
    r = np.zeros(m)
    k = min(m, i + 1)
    r[:k] = x_seq[i - k + 1 : i + 1][::-1]
    return r


def channel_output(model: ChannelModel, x_seq: np.ndarray) -> np.ndarray:
    """Noiseless FIR output y(t) = sum_k h[k] x(t-k), zero-padded before t=0.

    Accumulated tap by tap in ascending k so that y(t) equals the sequential
    inner product of h with the regressor at t, bit for bit.
    """
    x_seq = np.asarray(x_seq, dtype=np.float64)
    if x_seq.size < 1:
        raise ParameterError("input sequence must be nonempty")
    y = np.zeros(x_seq.size)
    for k, hk in enumerate(model.h):
        if k == 0:
            y += hk * x_seq
        else:
            y[k:] += hk * x_seq[:-k]
    return y


def add_noise_at_snr(
    y_seq: np.ndarray,
    snr_db: float,
    seed: int,
    ref_power: float | None = None,
) -> np.ndarray:
    """Add white Gaussian noise of variance ref_power * 10**(-snr_db/10).

    By default the reference is the empirical mean square of ``y_seq`` itself,
    so the realized SNR matches the request per realization. ``ref_power``
    overrides the reference (the benchmark harness passes the input power; see
    :mod:`qlms.bench`).
    """
    y_seq = np.asarray(y_seq, dtype=np.float64)
    if ref_power is None:
        ref_power = float(np.mean(y_seq**2))
    if not ref_power > 0:
        raise DegenerateInputError("reference signal has zero power")
    sigma = np.sqrt(ref_power * 10.0 ** (-float(snr_db) / 10.0))
    return y_seq + sigma * rng.gaussian_stream(seed, y_seq.size)


def desired_response(
    model: ChannelModel,
    x_seq: np.ndarray,
    noise_seed: int,
    ref_power: float | None = None,
) -> np.ndarray:
    """Channel output plus SNR-calibrated noise: the d(i) the filters track."""
    return add_noise_at_snr(channel_output(model, x_seq), model.snr_db, noise_seed, ref_power)


def dump_signal(x_seq: np.ndarray, path: str | Path, seed: int, variance: float = 1.0) -> None:
    """Write a signal as little-endian float64 with a sidecar text header."""
    path = Path(path)
    x_seq = np.asarray(x_seq, dtype=np.float64)
    x_seq.astype("<f8").tofile(path)
    header = path.with_suffix(path.suffix + ".hdr")
    header.write_text(
        f"n_samples={x_seq.size}\nseed={seed}\nvariance={variance!r}\n"
    )


def load_signal(path: str | Path) -> tuple[np.ndarray, dict]:
    """Read back a dumped signal and its header fields."""
    path = Path(path)
    x = np.fromfile(path, dtype="<f8").astype(np.float64)
    meta: dict = {}
    header = path.with_suffix(path.suffix + ".hdr")
    if header.exists():
        for line in header.read_text().splitlines():
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    if x.size != int(meta.get("n_samples", x.size)):
        raise DimensionMismatchError(
            f"{path}: header says {meta['n_samples']} samples, file holds {x.size}"
        )
    return x, meta
