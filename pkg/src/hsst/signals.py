"""Synthetic multicomponent test signals, noise injection and the RQF metric."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stft import SignalRecord

__all__ = [
    "ComponentSpec",
    "Synthesis",
    "synthesize",
    "add_noise",
    "rqf",
    "RQF_CAP_DB",
    "CORPORA",
    "corpus",
]

RQF_CAP_DB = 320.0
KINDS = ("impulse", "tone", "linear_chirp", "sin_fm", "gaussian_chirp")


@dataclass(frozen=True)
class ComponentSpec:
    """One signal component. Times in seconds, frequencies in Hz.

    ========  =============================================================
    kind      parameters used
    ========  =============================================================
    impulse   ``time``
    tone      ``freq``
    linear_   ``f_start`` at t=0 to ``f_end`` at the last sample
    chirp
    sin_fm    ``freq`` + ``fm_depth * sin(2 pi fm_rate t)``
    gaussian  envelope ``exp(-(t - time)^2 / 2 width^2)``, frequency ``freq``
    _chirp    at ``time`` sweeping ``chirp_rate`` Hz/s (always complex)
    ========  =============================================================

    Oscillating components are real cosines unless ``analytic`` is set.
    """

    kind: str
    amplitude: float = 1.0
    time: float = 0.0
    freq: float = 0.0
    f_start: float = 0.0
    f_end: float = 0.0
    fm_depth: float = 0.0
    fm_rate: float = 0.0
    width: float = 1.0
    chirp_rate: float = 0.0
    phase: float = 0.0
    analytic: bool = False

    def frequency_extent(self, duration: float) -> tuple[float, float] | None:
        k = self.kind
        if k == "tone":
            return self.freq, self.freq
        if k == "linear_chirp":
            return min(self.f_start, self.f_end), max(self.f_start, self.f_end)
        if k == "sin_fm":
            return self.freq - abs(self.fm_depth), self.freq + abs(self.fm_depth)
        if k == "gaussian_chirp":
            # frequency range over +-4 envelope widths
            span = 4 * self.width * abs(self.chirp_rate)
            return self.freq - span, self.freq + span
        return None

    def chirp_model(self):
        """:class:`~hsst.synchro.ChirpModel` of a ``gaussian_chirp``."""
        from .synchro import ChirpModel
        if self.kind != "gaussian_chirp":
            raise ValueError("only gaussian_chirp components have a chirp model")
        return ChirpModel.gaussian(center=self.time, width=self.width,
                                   freq_at_center=2 * math.pi * self.freq,
                                   alpha=2 * math.pi * self.chirp_rate,
                                   amplitude=self.amplitude, phase=self.phase)


def _validate(c: ComponentSpec, n: int, fs: float) -> None:
    if c.kind not in KINDS:
        raise ValueError(f"unknown component kind {c.kind!r}")
    duration = n / fs
    if c.kind in ("impulse", "gaussian_chirp") and not 0 <= c.time < duration:
        raise ValueError(f"{c.kind} time {c.time} outside record [0, {duration})")
    ext = c.frequency_extent(duration)
    if ext is not None and not (0 < ext[0] and ext[1] < fs / 2):
        raise ValueError(f"{c.kind} frequencies {ext} outside (0, fs/2) = (0, {fs / 2})")


def _render(c: ComponentSpec, n: int, fs: float) -> np.ndarray:
    t = np.arange(n) / fs
    a = c.amplitude
    if c.kind == "impulse":
        x = np.zeros(n)
        x[int(round(c.time * fs))] = a
        return x
    if c.kind == "gaussian_chirp":
        return c.chirp_model()(t)
    if c.kind == "tone":
        ph = 2 * math.pi * c.freq * t
    elif c.kind == "linear_chirp":
        rate = (c.f_end - c.f_start) / ((n - 1) / fs)
        ph = 2 * math.pi * (c.f_start * t + 0.5 * rate * t * t)
    else:
        ph = 2 * math.pi * c.freq * t
        if c.fm_rate:
            ph = ph - c.fm_depth / c.fm_rate * np.cos(2 * math.pi * c.fm_rate * t)
    ph = ph + c.phase
    return a * np.exp(1j * ph) if c.analytic else a * np.cos(ph)


@dataclass
class Synthesis:
    record: SignalRecord
    components: list[SignalRecord]
    specs: list[ComponentSpec]


def synthesize(components: list[ComponentSpec], n: int, fs: float = 1.0) -> Synthesis:
    """Sum of the components, each also returned on its own."""
    if n < 1:
        raise ValueError("length must be positive")
    for c in components:
        _validate(c, n, fs)
    parts = [_render(c, n, fs) for c in components]
    dtype = complex if any(np.iscomplexobj(p) for p in parts) else float
    total = np.zeros(n, dtype=dtype)
    for p in parts:
        total = total + p
    return Synthesis(SignalRecord(total, fs), [SignalRecord(p, fs) for p in parts],
                     list(components))


def add_noise(x: SignalRecord, snr_db: float, seed: int | None = 0) -> SignalRecord:
    """Add white Gaussian noise scaled so the realised SNR is exactly ``snr_db``.

    Complex records receive circular complex noise.
    """
    p_signal = float(np.sum(np.abs(x.samples) ** 2))
    if p_signal == 0:
        raise ValueError("SNR undefined for a zero signal")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(len(x))
    if not x.is_real:
        w = w + 1j * rng.standard_normal(len(x))
    sigma = math.sqrt(p_signal / (10 ** (snr_db / 10) * float(np.sum(np.abs(w) ** 2))))
    return SignalRecord(x.samples + sigma * w, fs=x.fs, start_time=x.start_time)


def _arr(x) -> np.ndarray:
    return x.samples if isinstance(x, SignalRecord) else np.asarray(x)


def rqf(x, x_hat) -> float:
    """Reconstruction quality factor in dB, capped at 320 dB."""
    a, b = _arr(x), _arr(x_hat)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    err = float(np.sum(np.abs(a - b) ** 2))
    ref = float(np.sum(np.abs(a) ** 2))
    if err == 0:
        return RQF_CAP_DB
    if ref == 0:
        return -math.inf
    return min(10 * math.log10(ref / err), RQF_CAP_DB)


# Fixed corpora. The synthetic-experiment layout: impulses near 1/4 and 3/4 of
# the record, a low tone, a mid-band chirp and an upper-band sinusoidal FM.
CORPORA: dict[str, tuple[int, list[ComponentSpec]]] = {
    "multicomponent": (500, [
        ComponentSpec("impulse", 1.0, time=125.0),
        ComponentSpec("impulse", 1.0, time=375.0),
        ComponentSpec("tone", 0.5, freq=0.06),
        ComponentSpec("linear_chirp", 0.5, f_start=0.12, f_end=0.30),
        ComponentSpec("sin_fm", 0.5, freq=0.40, fm_depth=0.04, fm_rate=1 / 125),
    ]),
    "impulses-tone": (500, [
        ComponentSpec("impulse", 1.0, time=150.0),
        ComponentSpec("impulse", 1.0, time=350.0),
        ComponentSpec("tone", 0.5, freq=0.1),
    ]),
    "impulses": (500, [
        ComponentSpec("impulse", 1.0, time=150.0),
        ComponentSpec("impulse", 1.0, time=350.0),
    ]),
    "chirp": (500, [
        ComponentSpec("linear_chirp", 1.0, f_start=0.1, f_end=0.4),
    ]),
}


def corpus(name: str, fs: float = 1.0) -> Synthesis:
    """One of the fixed synthetic corpora (times are in samples at fs=1)."""
    try:
        n, comps = CORPORA[name]
    except KeyError:
        raise ValueError(f"unknown corpus {name!r}; choose from {sorted(CORPORA)}")
    if fs != 1.0:
        from dataclasses import replace
        comps = [replace(c, time=c.time / fs, freq=c.freq * fs, f_start=c.f_start * fs,
                         f_end=c.f_end * fs, fm_depth=c.fm_depth * fs,
                         fm_rate=c.fm_rate * fs) for c in comps]
    return synthesize(comps, n, fs)
