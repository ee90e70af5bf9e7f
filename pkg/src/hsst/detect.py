"""Impulse detection from the band-limited energy of a squeezed transform."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .reconstruct import TfrMask, masked_reconstruct
from .stft import SignalRecord, TfrGrid
from .window import WindowSpec

__all__ = [
    "EmptyBand",
    "DetectionConfig",
    "ImpulseEvent",
    "Detection",
    "band_rows",
    "saliency",
    "detect_impulses",
]


class EmptyBand(ValueError):
    pass


@dataclass(frozen=True)
class DetectionConfig:
    """Band in Hz, threshold as a multiple of mean saliency, and the minimum
    spacing in seconds between picked peaks.

    With ``band_mask`` the extraction mask keeps only the band rows of the
    selected columns instead of whole columns. Peaks closer than
    ``edge_guard`` seconds to either end of the record are ignored: the
    zero extension turns the record boundaries into steps that the
    time-squeezed transforms localise like impulses. None means one window
    spread ``T``.
    """

    band: tuple[float, float] = (0.4, 1.0)
    threshold_factor: float = 5.0
    min_separation: float = 10.0
    band_mask: bool = False
    edge_guard: float | None = None

    def __post_init__(self):
        lo, hi = self.band
        if not 0 <= lo < hi:
            raise ValueError(f"band must satisfy 0 <= f_lo < f_hi, got {self.band}")
        if not self.threshold_factor > 0:
            raise ValueError("threshold_factor must be positive")
        if self.min_separation < 0:
            raise ValueError("min_separation must be non-negative")
        if self.edge_guard is not None and self.edge_guard < 0:
            raise ValueError("edge_guard must be non-negative")

    def check(self, fs: float) -> None:
        if self.band[1] > fs / 2:
            raise ValueError(f"band upper edge {self.band[1]} Hz above fs/2 = {fs / 2} Hz")


@dataclass
class ImpulseEvent:
    time: float
    saliency: float
    waveform: SignalRecord
    column: int
    run: tuple[int, int]


@dataclass
class Detection:
    events: list[ImpulseEvent]
    mask: TfrMask
    saliency: np.ndarray
    threshold: float
    times: np.ndarray = field(repr=False, default=None)


def band_rows(S: TfrGrid, band: tuple[float, float]) -> np.ndarray:
    f = S.freqs
    rows = (f >= band[0]) & (f <= band[1])
    if not rows.any():
        raise EmptyBand(f"empty band {band} Hz: no frequency bin at M={S.M}, fs={S.fs}")
    return rows


def saliency(S: TfrGrid, band: tuple[float, float]) -> np.ndarray:
    """``G[k] = sqrt(sum_{m in band} |S[m, k]|^2 domega)`` for every column."""
    rows = band_rows(S, band)
    return np.sqrt((np.abs(S.values[rows]) ** 2).sum(axis=0) * S.d_omega)


def _runs(above: np.ndarray) -> list[tuple[int, int]]:
    edges = np.diff(np.concatenate([[0], above.astype(np.int8), [0]]))
    return list(zip(np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0]))


def _peaks(G: np.ndarray, above: np.ndarray, min_gap: float) -> list[int]:
    left = np.concatenate([[-np.inf], G[:-1]])
    right = np.concatenate([G[1:], [-np.inf]])
    cand = np.nonzero(above & (G > left) & (G >= right))[0]
    # strongest first, earlier column wins ties
    order = cand[np.lexsort((cand, -G[cand]))]
    picked: list[int] = []
    for c in order:
        if all(abs(c - p) >= min_gap for p in picked):
            picked.append(int(c))
    return sorted(picked)


def detect_impulses(S: TfrGrid, config: DetectionConfig, spec: WindowSpec) -> Detection:
    """Threshold the saliency at ``threshold_factor * mean(G)`` and extract
    one event per picked peak.

    The mean is taken over the columns lying on the record. The returned
    mask covers every above-threshold column. Each event's
    waveform is reconstructed from the contiguous above-threshold run that
    contains its peak.
    """
    config.check(S.fs)
    rows = band_rows(S, config.band)
    G = saliency(S, config.band)
    gamma = config.threshold_factor * float(G[S.record_columns()].mean())
    above = G > gamma
    guard = spec.T if config.edge_guard is None else config.edge_guard
    idx = S.sample_index
    pickable = above & (idx >= guard * S.fs) & (idx <= S.n_samples - 1 - guard * S.fs)
    mask_rows = rows if config.band_mask else np.ones(S.M, dtype=bool)

    def column_mask(c0: int, c1: int) -> TfrMask:
        m = np.zeros(S.shape, dtype=bool)
        m[np.ix_(mask_rows, np.arange(c0, c1))] = True
        return TfrMask(m, {"rule": "saliency > factor * mean", "factor": config.threshold_factor,
                           "threshold": gamma, "band": config.band})

    full = np.zeros(S.shape, dtype=bool)
    full[np.ix_(mask_rows, above)] = True
    mask = TfrMask(full, {"rule": "saliency > factor * mean", "factor": config.threshold_factor,
                          "threshold": gamma, "band": config.band})

    runs = _runs(above)
    events = []
    for c in _peaks(G, pickable, config.min_separation * S.fs):
        c0, c1 = next(r for r in runs if r[0] <= c < r[1])
        wave = masked_reconstruct(S, column_mask(c0, c1), spec)
        events.append(ImpulseEvent(time=S.start_time + (S.offset + c) / S.fs,
                                   saliency=float(G[c]), waveform=wave, column=int(c),
                                   run=(int(c0), int(c1))))
    return Detection(events=events, mask=mask, saliency=G, threshold=gamma,
                     times=S.start_time + S.times)
