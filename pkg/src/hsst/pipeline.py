"""One-call analysis: all operator fields of a record and any transform."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import median_filter

from .reassign import (DEFAULT_REL_GATE, K_DH, K_H, K_TH, ReassignFields,
                       magnitude_gate, operators_from_grids, reassigned_spectrogram)
from .reconstruct import invert
from .stft import SignalRecord, TfrGrid, stft_bank
from .synchro import (EstimatorChoice, default_alpha_gate, group_delay_second_order,
                      q_from_grids, required_kinds, second_order_frequency, tsst,
                      vertical_sst)
from .window import WindowSpec

__all__ = ["AnalysisConfig", "Analysis", "analyze", "TRANSFORMS", "INVERTIBLE",
           "roundtrip"]

TRANSFORMS = ("stft", "spectrogram", "reassigned", "sst1", "sst2", "tsst1", "tsst2")
INVERTIBLE = ("stft", "sst1", "sst2", "tsst1", "tsst2")


@dataclass
class AnalysisConfig:
    """Window spread ``L`` (samples), FFT length ``M`` and estimator settings.

    ``smooth_q`` > 1 median-filters the chirp-rate field over a square
    neighbourhood of that size before it is used (off by default).
    """

    L: float = 8.0
    M: int = 600
    estimator: str = "w2"
    rel_gate: float = DEFAULT_REL_GATE
    alpha_gate: float | None = None
    support_factor: float | None = None
    smooth_q: int = 0
    pad: int | None = None

    def window(self, fs: float) -> WindowSpec:
        return WindowSpec.from_L(self.L, fs, support_factor=self.support_factor)

    def choice(self) -> EstimatorChoice:
        return EstimatorChoice.parse(self.estimator, alpha_gate=self.alpha_gate)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Analysis:
    x: SignalRecord
    config: AnalysisConfig
    spec: WindowSpec
    F: TfrGrid
    fields: ReassignFields
    q: np.ndarray
    q_ok: np.ndarray
    alpha_gate: float
    workers: int | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def group_delays(self) -> tuple[np.ndarray, np.ndarray]:
        if "t2" not in self._cache:
            self._cache["t2"] = group_delay_second_order(self.fields, self.q, self.F.omega,
                                                         self.alpha_gate)
        return self._cache["t2"]

    def transform(self, name: str) -> TfrGrid:
        if name in self._cache:
            return self._cache[name]
        F, f, w = self.F, self.fields, self.workers
        if name == "stft":
            out = F
        elif name == "spectrogram":
            out = F.with_values(np.abs(F.values) ** 2, kind="SPECTROGRAM")
        elif name == "reassigned":
            out = reassigned_spectrogram(F, f)
        elif name == "tsst1":
            out = tsst(F, f.t_hat, f.valid, kind="TSST", workers=w)
        elif name == "tsst2":
            out = tsst(F, self.group_delays()[0], f.valid, kind="TSST2",
                       fallback=f.t_hat, workers=w)
        elif name == "sst1":
            out = vertical_sst(F, f.omega_hat, f.valid, kind="SST", workers=w)
        elif name == "sst2":
            omega2 = second_order_frequency(f, self.q, F.times)
            out = vertical_sst(F, omega2, f.valid, kind="SST2", workers=w)
        else:
            raise ValueError(f"unknown transform {name!r}; choose from {TRANSFORMS}")
        self._cache[name] = out
        return out

    def inverse(self, name: str) -> SignalRecord:
        if name not in INVERTIBLE:
            raise ValueError(f"{name} is not invertible")
        return invert(self.transform(name), self.spec)


def analyze(x: SignalRecord, config: AnalysisConfig | None = None,
            workers: int | None = None) -> Analysis:
    """Compute the STFT, reassignment operators and chirp-rate field of ``x``."""
    config = config or AnalysisConfig()
    spec = config.window(x.fs)
    choice = config.choice()
    kinds = list(dict.fromkeys([K_H, K_TH, K_DH] + required_kinds(choice)))
    bank = stft_bank(x, spec, kinds, config.M, pad=config.pad, workers=workers)
    F = bank[K_H]
    valid = magnitude_gate(F, rel_gate=config.rel_gate)
    fields = operators_from_grids(F, bank[K_TH], bank[K_DH], valid)
    q, ok = q_from_grids(bank, choice, valid)
    del bank
    if config.smooth_q and config.smooth_q > 1:
        q = median_filter(q.real, config.smooth_q) + 1j * median_filter(q.imag, config.smooth_q)
        q[~ok] = 0
    gate = choice.alpha_gate if choice.alpha_gate is not None else default_alpha_gate(x.fs, config.M)
    return Analysis(x=x, config=config, spec=spec, F=F, fields=fields, q=q, q_ok=ok,
                    alpha_gate=gate, workers=workers)


def roundtrip(analysis: Analysis, names=INVERTIBLE) -> list[dict]:
    """RQF of forward + inverse for each invertible transform."""
    from .signals import rqf
    rows = []
    for name in names:
        grid = analysis.transform(name)
        rows.append({"transform": name,
                     "rqf_db": rqf(analysis.x, analysis.inverse(name)),
                     "dropped": grid.dropped,
                     "out_of_grid": grid.meta.get("out_of_grid", 0)})
    return rows
