"""Reassignment operators and the reassigned spectrogram."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stft import SignalRecord, TfrGrid, stft_bank
from .window import DerivedWindowKind, WindowSpec

__all__ = [
    "ReassignFields",
    "compute_operators",
    "operators_from_grids",
    "magnitude_gate",
    "nearest_index",
    "reassigned_spectrogram",
    "DEFAULT_REL_GATE",
    "K_H",
    "K_TH",
    "K_DH",
]

DEFAULT_REL_GATE = 1e-6

K_H = DerivedWindowKind(0, 0)
K_TH = DerivedWindowKind(1, 0)
K_DH = DerivedWindowKind(0, 1)


@dataclass
class ReassignFields:
    """Per-cell operators aligned with an STFT grid.

    Cells failing the magnitude gate hold NaN and ``valid`` is False there.
    """

    t_tilde: np.ndarray
    omega_tilde: np.ndarray
    valid: np.ndarray

    @property
    def t_hat(self) -> np.ndarray:
        return self.t_tilde.real

    @property
    def omega_hat(self) -> np.ndarray:
        return self.omega_tilde.imag


def nearest_index(v: np.ndarray) -> np.ndarray:
    """Round to the nearest integer, halves going down (2.5 -> 2, -0.5 -> -1)."""
    return np.ceil(np.asarray(v) - 0.5).astype(np.int64)


def magnitude_gate(F: TfrGrid, gamma: float | None = None,
                   rel_gate: float = DEFAULT_REL_GATE) -> np.ndarray:
    """Boolean mask ``|F| > gamma``; gamma defaults to ``rel_gate * max|F|``."""
    mag = np.abs(F.values)
    if gamma is None:
        gamma = rel_gate * mag.max()
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return mag > gamma


def operators_from_grids(F: TfrGrid, F_th: TfrGrid, F_dh: TfrGrid,
                         valid: np.ndarray) -> ReassignFields:
    t = F.times[None, :]
    w = F.omega[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(valid, 1.0 / np.where(valid, F.values, 1.0), np.nan)
        t_tilde = t - F_th.values * inv
        omega_tilde = 1j * w + F_dh.values * inv
    return ReassignFields(t_tilde=t_tilde, omega_tilde=omega_tilde, valid=valid)


def compute_operators(x: SignalRecord, spec: WindowSpec, M: int,
                      gamma: float | None = None, rel_gate: float = DEFAULT_REL_GATE,
                      pad: int | None = None, workers: int | None = None
                      ) -> tuple[TfrGrid, ReassignFields]:
    """STFT with windows h, t h and h' and the operators

    ``t~ = t - F^{th} / F^h``, ``w~ = j w + F^{h'} / F^h``,
    ``t^ = Re t~``, ``w^ = Im w~``,

    evaluated wherever ``|F^h| > gamma``.
    """
    bank = stft_bank(x, spec, [K_H, K_TH, K_DH], M, pad=pad, workers=workers)
    F = bank[K_H]
    valid = magnitude_gate(F, gamma, rel_gate)
    return F, operators_from_grids(F, bank[K_TH], bank[K_DH], valid)


def reassigned_spectrogram(F: TfrGrid, fields: ReassignFields) -> TfrGrid:
    """Move each valid cell's energy ``|F|^2`` to the cell nearest (t^, w^).

    Targets outside the grid are dropped and counted. ``meta`` records the
    gated input energy and the retained energy.
    """
    M, ncols = F.shape
    energy = np.abs(F.values) ** 2
    valid = fields.valid
    rows = np.nonzero(valid)
    col = nearest_index(fields.t_hat[valid] * F.fs) - F.offset
    row = nearest_index(fields.omega_hat[valid] * M / (2.0 * np.pi * F.fs)) + (M // 2 - 1)
    inside = (col >= 0) & (col < ncols) & (row >= 0) & (row < M)
    e = energy[rows]
    out = np.bincount(row[inside] * ncols + col[inside], weights=e[inside],
                      minlength=M * ncols).reshape(M, ncols)
    grid = F.with_values(out, kind="REASSIGNED", dropped=int((~inside).sum()))
    grid.meta.update(input_energy=float(e.sum()), retained_energy=float(out.sum()))
    return grid
