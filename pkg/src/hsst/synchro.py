"""Synchrosqueezing along time (horizontal) and frequency (vertical), first
and second order, with the local modulation estimators they need."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import ROW_BLOCK, blocks, run_blocks
from .reassign import ReassignFields, nearest_index
from .stft import SignalRecord, TfrGrid, stft_bank
from .window import DerivedWindowKind, WindowSpec

__all__ = [
    "ChirpModel",
    "EstimatorChoice",
    "required_kinds",
    "q_from_grids",
    "estimate_q",
    "default_alpha_gate",
    "group_delay_second_order",
    "second_order_frequency",
    "tsst",
    "vertical_sst",
    "demodulate",
]


@dataclass(frozen=True)
class ChirpModel:
    """``x(t) = exp(l + mu t + nu t^2/2 + j (phi + omega0 t + alpha t^2/2))``.

    ``p = mu + j omega0`` and ``q = nu + j alpha``; time is absolute
    (seconds from sample 0).
    """

    l: float = 0.0
    mu: float = 0.0
    nu: float = 0.0
    phi: float = 0.0
    omega0: float = 0.0
    alpha: float = 0.0

    @classmethod
    def gaussian(cls, center: float, width: float, freq_at_center: float,
                 alpha: float, amplitude: float = 1.0, phase: float = 0.0) -> "ChirpModel":
        """Chirp with envelope ``amplitude * exp(-(t - center)^2 / (2 width^2))``
        and instantaneous frequency ``freq_at_center`` (rad/s) at ``center``."""
        nu = -1.0 / width**2
        mu = center / width**2
        l = math.log(amplitude) - center**2 / (2 * width**2)
        omega0 = freq_at_center - alpha * center
        phi = phase - freq_at_center * center + 0.5 * alpha * center**2
        return cls(l=l, mu=mu, nu=nu, phi=phi, omega0=omega0, alpha=alpha)

    @property
    def p(self) -> complex:
        return complex(self.mu, self.omega0)

    @property
    def q(self) -> complex:
        return complex(self.nu, self.alpha)

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.exp(self.l + self.mu * t + 0.5 * self.nu * t * t
                      + 1j * (self.phi + self.omega0 * t + 0.5 * self.alpha * t * t))

    def instantaneous_frequency(self, t):
        return self.omega0 + self.alpha * np.asarray(t)

    def crossing_time(self, omega):
        """Time at which the instantaneous frequency equals ``omega``."""
        return (np.asarray(omega) - self.omega0) / self.alpha


@dataclass(frozen=True)
class EstimatorChoice:
    """Which chirp-rate estimator feeds the second-order transforms.

    ``family`` is ``"omega"`` (frequency-derivative family) or ``"t"``;
    ``order`` 2 or 3. ``alpha_gate`` (rad/s^2) is the ``|alpha^|`` below which
    second-order group delays fall back to first order; None picks
    :func:`default_alpha_gate` from the grid.
    """

    family: str = "omega"
    order: int = 2
    alpha_gate: float | None = None
    den_rel_gate: float = 1e-10

    def __post_init__(self):
        fam = {"omega": "omega", "w": "omega", "ω": "omega", "t": "t"}.get(self.family)
        if fam is None or self.order not in (2, 3):
            raise ValueError(f"unsupported estimator ({self.family}, {self.order})")
        object.__setattr__(self, "family", fam)

    @classmethod
    def parse(cls, text: str, **kw) -> "EstimatorChoice":
        """``'w2'``, ``'omega3'``, ``'t2'`` ..."""
        text = text.strip().lower()
        return cls(family=text[:-1], order=int(text[-1]), **kw)

    @property
    def label(self) -> str:
        return ("w" if self.family == "omega" else "t") + str(self.order)


def _k(nt: int, nd: int) -> DerivedWindowKind:
    return DerivedWindowKind(nt, nd)


def required_kinds(choice: EstimatorChoice) -> list[DerivedWindowKind]:
    n = choice.order
    if choice.family == "t":
        ks = [_k(0, n), _k(0, 0), _k(0, n - 1), _k(0, 1), _k(1, 0), _k(1, n - 1)]
    else:
        ks = [_k(n - 1, 1), _k(n - 2, 0), _k(0, 0), _k(n - 1, 0), _k(0, 1), _k(1, 0), _k(n, 0)]
    return list(dict.fromkeys(ks))


def q_from_grids(bank: dict[DerivedWindowKind, TfrGrid], choice: EstimatorChoice,
                 valid: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Cellwise ``q^ = nu^ + j alpha^`` from precomputed derived-window STFTs.

    Returns ``(q, ok)``; cells where the denominator cancels or where
    ``valid`` is False get ``q = 0`` and ``ok = False``. Cancellation is
    judged against the two denominator terms plus ``T^n |F^h|^2``, so cells
    where every odd time moment vanishes together (the centre of a symmetric
    chirp for order 3) are flagged rather than divided as roundoff.
    """
    n = choice.order
    G = lambda nt, nd: bank[_k(nt, nd)].values  # noqa: E731
    Fh = G(0, 0)
    if choice.family == "t":
        num = G(0, n) * Fh - G(0, n - 1) * G(0, 1)
        a, b = G(1, 0) * G(0, n - 1), G(1, n - 1) * Fh
    else:
        num = (G(n - 1, 1) + (n - 1) * G(n - 2, 0)) * Fh - G(n - 1, 0) * G(0, 1)
        a, b = G(n - 1, 0) * G(1, 0), G(n, 0) * Fh
    den = a - b
    scale = np.abs(a) + np.abs(b)
    T = bank[_k(0, 0)].meta.get("T")
    if T is not None:
        scale = scale + T**n * np.abs(Fh) ** 2
    ok = np.abs(den) > choice.den_rel_gate * scale
    if valid is not None:
        ok &= valid
    q = np.zeros_like(Fh)
    q[ok] = num[ok] / den[ok]
    return q, ok


def estimate_q(x: SignalRecord, spec: WindowSpec, M: int,
               choice: EstimatorChoice = EstimatorChoice(),
               pad: int | None = None, workers: int | None = None):
    """Chirp-rate field of ``x``; see :func:`q_from_grids`."""
    bank = stft_bank(x, spec, required_kinds(choice), M, pad=pad, workers=workers)
    return q_from_grids(bank, choice)


def default_alpha_gate(fs: float, M: int) -> float:
    return 2.0 * math.pi * fs**2 / M**2 / 100.0


def group_delay_second_order(fields: ReassignFields, q: np.ndarray, omega: np.ndarray,
                             alpha_gate: float) -> tuple[np.ndarray, np.ndarray]:
    """Second-order group delays ``(t2, t2b)`` in seconds.

    ``t2  = (w - w^ + Im(q^ t~)) / alpha^``
    ``t2b = t^ + (w - w^) / alpha^``

    Both fall back to ``t^`` wherever ``|alpha^| <= alpha_gate``.
    """
    if not alpha_gate > 0:
        raise ValueError("alpha_gate must be positive")
    alpha = q.imag
    use = fields.valid & (np.abs(alpha) > alpha_gate)
    w = np.broadcast_to(np.asarray(omega, dtype=float).reshape(-1, 1), q.shape)
    t_hat = fields.t_hat
    t2 = t_hat.copy()
    t2b = t_hat.copy()
    dw = w[use] - fields.omega_hat[use]
    t2[use] = (dw + (q[use] * fields.t_tilde[use]).imag) / alpha[use]
    t2b[use] = t_hat[use] + dw / alpha[use]
    return t2, t2b


def second_order_frequency(fields: ReassignFields, q: np.ndarray,
                           times: np.ndarray) -> np.ndarray:
    """Instantaneous frequency ``w^ - Im(q^ t~) + alpha^ t`` (rad/s)."""
    t = np.asarray(times, dtype=float).reshape(1, -1)
    with np.errstate(invalid="ignore"):
        return fields.omega_hat - (q * fields.t_tilde).imag + q.imag * t


OUT_OF_GRID = ("keep", "drop")


def _squeeze_rows(values: np.ndarray, targets: list[np.ndarray], moved: np.ndarray,
                  policy: str, workers: int | None) -> tuple[np.ndarray, int, int]:
    """Sum ``values[r, c]`` into ``out[r, target[r, c]]`` row by row.

    ``targets`` is a list of candidate target-index arrays tried in order;
    the first one inside ``[0, ncols)`` wins. Cells with ``moved`` False
    stay where they are. Cells with no in-grid candidate stay in place
    (``policy="keep"``) or are discarded (``"drop"``). Returns the output,
    the number of such cells, and the number actually discarded.
    """
    if policy not in OUT_OF_GRID:
        raise ValueError(f"out_of_grid policy must be one of {OUT_OF_GRID}")
    nrows, ncols = values.shape
    out = np.empty_like(values)
    stray = np.zeros(nrows, dtype=np.int64)
    cols = np.arange(ncols)

    def work(r0: int, r1: int) -> None:
        mv = moved[r0:r1]
        tgt = np.where(mv, targets[0][r0:r1], cols[None, :])
        for alt in targets[1:]:
            bad = (tgt < 0) | (tgt >= ncols)
            tgt = np.where(bad & mv, alt[r0:r1], tgt)
        outside = (tgt < 0) | (tgt >= ncols)
        stray[r0:r1] = outside.sum(axis=1)
        if policy == "keep":
            tgt = np.where(outside, cols[None, :], tgt)
            inside = np.ones_like(outside)
        else:
            inside = ~outside
        flat = (np.arange(r1 - r0)[:, None] * ncols + tgt)[inside]
        v = values[r0:r1][inside]
        n = (r1 - r0) * ncols
        acc = np.bincount(flat, weights=v.real, minlength=n) \
            + 1j * np.bincount(flat, weights=v.imag, minlength=n)
        out[r0:r1] = acc.reshape(r1 - r0, ncols)

    run_blocks(work, blocks(nrows, ROW_BLOCK), workers)
    n_stray = int(stray.sum())
    return out, n_stray, n_stray if policy == "drop" else 0


def _time_target(t_field, valid, F: TfrGrid) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        t = np.where(valid & np.isfinite(t_field), t_field, np.inf) * F.fs
        return nearest_index(np.clip(t, -2.0**52, 2.0**52)) - F.offset


def tsst(F: TfrGrid, t_field: np.ndarray, valid: np.ndarray | None = None,
         kind: str = "TSST", fallback: np.ndarray | None = None,
         out_of_grid: str = "keep", workers: int | None = None) -> TfrGrid:
    """Time-reassigned synchrosqueezing: each valid cell's complex value moves
    along its row to the column nearest ``t_field`` (seconds).

    A cell whose target is off the grid tries ``fallback`` (e.g. the
    first-order group delay) next; if that is off the grid too it stays
    put (``out_of_grid="keep"``, row sums exactly preserved) or is
    discarded (``"drop"``). ``meta['out_of_grid']`` counts such cells and
    ``dropped`` counts the discarded ones.
    """
    if valid is None:
        valid = np.isfinite(t_field)
    targets = [_time_target(t_field, valid, F)]
    if fallback is not None:
        targets.append(_time_target(fallback, valid, F))
    out, stray, dropped = _squeeze_rows(F.values, targets, valid, out_of_grid, workers)
    grid = F.with_values(out, kind=kind, dropped=dropped)
    grid.meta["out_of_grid"] = stray
    return grid


def demodulate(F: TfrGrid) -> np.ndarray:
    """Window-relative STFT ``F[m, k] exp(j w_m k / fs)``."""
    r = np.mod(np.outer(F.m_values, F.sample_index), F.M)
    return F.values * np.exp(2j * np.pi * r / F.M)


def vertical_sst(F: TfrGrid, omega_field: np.ndarray, valid: np.ndarray | None = None,
                 kind: str = "SST", out_of_grid: str = "drop",
                 workers: int | None = None) -> TfrGrid:
    """Classical synchrosqueezing along frequency.

    Squeezes the window-relative STFT (see :func:`demodulate`) to the bin
    nearest ``omega_field``; column sums are preserved except for targets
    beyond the frequency range, which are dropped by default. The output keeps the
    window-relative phase convention (``meta['convention']``).
    """
    if valid is None:
        valid = np.isfinite(omega_field)
    M = F.M
    with np.errstate(invalid="ignore"):
        b = np.where(valid & np.isfinite(omega_field), omega_field, np.inf) * M / (2 * np.pi * F.fs)
        target = nearest_index(np.clip(b, -2.0**52, 2.0**52)) + (M // 2 - 1)
    out, stray, dropped = _squeeze_rows(demodulate(F).T.copy(), [target.T.copy()],
                                        valid.T.copy(), out_of_grid, workers)
    grid = F.with_values(np.ascontiguousarray(out.T), kind=kind, dropped=dropped)
    grid.meta.update(convention="window-relative", out_of_grid=stray)
    return grid
