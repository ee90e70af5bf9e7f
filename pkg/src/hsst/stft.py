"""Discrete STFT on the full hop-1 grid, its time marginal and exact inverse.

Phase convention: ``F[m, k] = sum_n x[n] h((k - n)/fs) exp(-j w_m n / fs) / fs``
with ``w_m = 2 pi m fs / M``. The exponential is anchored to absolute time
``n / fs`` rather than to the frame centre; the reassignment operators rely
on this.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._parallel import COLUMN_BLOCK, blocks, run_blocks
from .window import (
    H,
    DerivedWindowKind,
    WindowSpec,
    gaussian_window,
    window_zero_frequency_gain,
)

__all__ = [
    "SignalRecord",
    "TfrGrid",
    "stft_forward",
    "stft_bank",
    "stft_time_marginal",
    "stft_inverse",
    "frequency_bins",
    "inverse_from_row_sums",
    "DegenerateWindowGain",
]


class DegenerateWindowGain(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class SignalRecord:
    """Uniformly sampled real or complex time series."""

    samples: np.ndarray
    fs: float = 1.0
    start_time: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples)
        if x.ndim != 1:
            raise ValueError("signal must be one-dimensional")
        if x.size == 0:
            raise ValueError("empty signal")
        if not np.issubdtype(x.dtype, np.complexfloating):
            x = x.astype(float)
        if not np.all(np.isfinite(x)):
            raise ValueError("signal contains non-finite samples")
        if not self.fs > 0:
            raise ValueError(f"fs must be positive, got {self.fs}")
        object.__setattr__(self, "samples", x)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.samples)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self)) / self.fs

    @property
    def duration(self) -> float:
        return len(self) / self.fs


@dataclass
class TfrGrid:
    """M x ncols time-frequency matrix with its axis metadata.

    Row ``r`` holds frequency bin ``m = r - M/2 + 1`` (so rows run over
    ``[-M/2 + 1, M/2]``); column ``c`` is the frame centred on sample
    ``offset + c`` of the underlying record. ``n_samples`` is the record
    length, ``dropped`` counts cells whose squeezing target left the grid.
    """

    values: np.ndarray
    M: int
    fs: float
    kind: str = "STFT"
    offset: int = 0
    n_samples: int = 0
    start_time: float = 0.0
    real_input: bool = False
    dropped: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def ncols(self) -> int:
        return self.values.shape[1]

    @property
    def m_values(self) -> np.ndarray:
        return frequency_bins(self.M)

    @property
    def omega(self) -> np.ndarray:
        """Row angular frequencies in rad/s."""
        return 2.0 * np.pi * self.m_values * self.fs / self.M

    @property
    def freqs(self) -> np.ndarray:
        return self.m_values * self.fs / self.M

    @property
    def d_omega(self) -> float:
        return 2.0 * np.pi * self.fs / self.M

    @property
    def sample_index(self) -> np.ndarray:
        """Record sample index of every column (negative in the lead-in)."""
        return self.offset + np.arange(self.ncols)

    @property
    def times(self) -> np.ndarray:
        """Column times in seconds relative to sample 0 of the record."""
        return self.sample_index / self.fs

    def record_columns(self) -> slice:
        """Columns that sit on record samples ``0..n_samples-1``."""
        return slice(-self.offset, -self.offset + self.n_samples)

    def with_values(self, values: np.ndarray, **changes) -> "TfrGrid":
        return replace(self, values=values, meta=dict(self.meta), **changes)


def frequency_bins(M: int) -> np.ndarray:
    return np.arange(-M // 2 + 1, M // 2 + 1)


def _check_M(M: int) -> int:
    if int(M) != M or M < 2 or M % 2:
        raise ValueError(f"M must be a positive even integer, got {M}")
    return int(M)


def stft_bank(x: SignalRecord, spec: WindowSpec,
              kinds: Sequence[DerivedWindowKind], M: int, pad: int | None = None,
              workers: int | None = None) -> dict[DerivedWindowKind, TfrGrid]:
    """STFTs of ``x`` with several derived windows on one shared grid.

    ``pad`` extra frames are computed before sample 0 and after sample N-1;
    the default ``support_radius`` makes the frames cover the whole
    support, which the marginal identity and exact inversion require.
    """
    M = _check_M(M)
    if not isinstance(x, SignalRecord):
        raise TypeError("x must be a SignalRecord")
    R = spec.support_radius
    if M < 2 * R:
        warnings.warn(f"M={M} shorter than the window support {2 * R + 1}; "
                      "frames are folded modulo M", stacklevel=2)
    P = R if pad is None else int(pad)
    if P < 0:
        raise ValueError("pad must be non-negative")
    kinds = [k if isinstance(k, DerivedWindowKind) else DerivedWindowKind(*k)
             for k in kinds]
    N = len(x)
    W = 2 * R + 1
    ncols = N + 2 * P
    xp = np.zeros(N + 2 * (R + P), dtype=complex if not x.is_real else float)
    xp[R + P:R + P + N] = x.samples
    frames = sliding_window_view(xp, W)  # row c: samples c-P-R .. c-P+R
    rev = {k: gaussian_window(spec, k)[::-1].copy() for k in kinds}
    m = frequency_bins(M)
    fft_index = m % M
    first_sample = np.arange(ncols) - P - R
    outs = {k: np.empty((M, ncols), dtype=complex) for k in kinds}
    folded = W > M
    width = -(-W // M) * M

    def work(c0: int, c1: int) -> None:
        seg = frames[c0:c1]
        # exact phase: reduce (n0 * m) mod M in integers before exp
        r = np.mod(np.outer(first_sample[c0:c1], m), M)
        phase = np.exp(-2j * np.pi * r / M) / spec.fs
        for k in kinds:
            g = seg * rev[k]
            if folded:
                g = np.pad(g, ((0, 0), (0, width - W))).reshape(len(g), -1, M).sum(axis=1)
            Y = np.fft.fft(g, n=M, axis=1)[:, fft_index]
            outs[k][:, c0:c1] = (Y * phase).T

    run_blocks(work, blocks(ncols, COLUMN_BLOCK), workers)
    return {
        k: TfrGrid(values=outs[k], M=M, fs=spec.fs, kind="STFT" if k == H else f"STFT[{k}]",
                   offset=-P, n_samples=N, start_time=x.start_time,
                   real_input=x.is_real, meta={"T": spec.T})
        for k in kinds
    }


def stft_forward(x: SignalRecord, spec: WindowSpec, kind: DerivedWindowKind = H,
                 M: int = 512, pad: int | None = None,
                 workers: int | None = None) -> TfrGrid:
    """STFT of ``x`` with one derived window (see :func:`stft_bank`)."""
    if len(x) == 0:
        raise ValueError("empty signal")
    return stft_bank(x, spec, [kind], M, pad=pad, workers=workers)[
        kind if isinstance(kind, DerivedWindowKind) else DerivedWindowKind(*kind)]


def stft_time_marginal(F: TfrGrid, spec: WindowSpec) -> np.ndarray:
    """``sum_k F[m, k] / fs`` for every bin, i.e. ``F_h(0)^* X(w_m)``.

    Only meaningful when the frames cover the signal support plus the
    window radius; truncation is not detected.
    """
    return F.values.sum(axis=1) / spec.fs


def inverse_from_row_sums(row_sums: np.ndarray, M: int, n_samples: int,
                          gain: complex) -> np.ndarray:
    """``x[n] = sum_m row_sums[m] exp(j 2 pi m n / M) / (M gain^*)``.

    ``row_sums`` are the plain column sums ``sum_k S[m, k]``; the
    ``dtau * domega / 2 pi = 1 / M`` weight is folded in here.
    """
    if abs(gain) < 1e-12:
        raise DegenerateWindowGain("degenerate window gain")
    spectrum = np.zeros(M, dtype=complex)
    spectrum[frequency_bins(M) % M] = row_sums
    periodic = np.fft.ifft(spectrum)  # includes 1/M
    return periodic[np.arange(n_samples) % M] / np.conj(gain)


def stft_inverse(F: TfrGrid, spec: WindowSpec) -> SignalRecord:
    """Invert a full STFT grid by the double-sum synthesis formula.

    Real records come back as the real part of the synthesis.
    """
    gain = window_zero_frequency_gain(spec)
    xh = inverse_from_row_sums(F.values.sum(axis=1), F.M, F.n_samples, gain)
    if F.real_input:
        xh = xh.real
    return SignalRecord(xh, fs=F.fs, start_time=F.start_time)
