"""Signal reconstruction from (masked) synchrosqueezed transforms."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .stft import SignalRecord, TfrGrid, inverse_from_row_sums
from .window import WindowSpec, gaussian_window, window_zero_frequency_gain

__all__ = ["TfrMask", "tsst_inverse", "sst_inverse", "masked_reconstruct", "invert"]


@dataclass
class TfrMask:
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=bool)

    @classmethod
    def columns(cls, shape, cols, **provenance) -> "TfrMask":
        m = np.zeros(shape, dtype=bool)
        m[:, cols] = True
        return cls(m, provenance)

    def check(self, grid: TfrGrid) -> None:
        if self.values.shape != grid.shape:
            raise ValueError(f"mask shape {self.values.shape} != grid shape {grid.shape}")


def _finish(xh: np.ndarray, S: TfrGrid) -> SignalRecord:
    if S.real_input:
        xh = xh.real
    return SignalRecord(xh, fs=S.fs, start_time=S.start_time)


def tsst_inverse(S: TfrGrid, spec: WindowSpec) -> SignalRecord:
    """Synthesis ``x[n] = sum_{m,k} S[m,k] e^{j w_m n/fs} dtau domega / (2 pi F_h(0)^*)``.

    Works for the STFT and for both time-squeezed transforms, which share
    its row sums.
    """
    gain = window_zero_frequency_gain(spec)
    return _finish(inverse_from_row_sums(S.values.sum(axis=1), S.M, S.n_samples, gain), S)


def sst_inverse(S: TfrGrid, spec: WindowSpec) -> SignalRecord:
    """Per-column synthesis ``x[k] = sum_m S[m,k] domega / (2 pi h(0))`` for a
    frequency-squeezed grid in the window-relative convention. Exact for
    the unsqueezed transform when ``M`` exceeds the window support."""
    h0 = gaussian_window(spec)[spec.support_radius]
    cols = S.values[:, S.record_columns()]
    xh = cols.sum(axis=0) * S.d_omega / (2.0 * np.pi * h0)
    return _finish(xh, S)


def invert(S: TfrGrid, spec: WindowSpec) -> SignalRecord:
    """Inverse matching the grid's phase convention."""
    if S.meta.get("convention") == "window-relative":
        return sst_inverse(S, spec)
    return tsst_inverse(S, spec)


def masked_reconstruct(S: TfrGrid, mask: TfrMask, spec: WindowSpec) -> SignalRecord:
    """Invert ``S * mask`` without re-squeezing."""
    mask.check(S)
    return invert(S.with_values(np.where(mask.values, S.values, 0)), spec)
