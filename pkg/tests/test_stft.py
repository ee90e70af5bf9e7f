import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from conftest import dft_oracle
from hsst.signals import rqf
from hsst.stft import (SignalRecord, stft_bank, stft_forward, stft_inverse,
                       stft_time_marginal)
from hsst.window import DerivedWindowKind, WindowSpec, gaussian_window, window_zero_frequency_gain


def test_impulse_sifting():
    spec = WindowSpec.from_L(4, 2.0)
    x = np.zeros(60)
    k0 = 23
    x[k0] = 1
    F = stft_forward(SignalRecord(x, fs=2.0), spec, M=96)
    h = gaussian_window(spec)
    R = spec.support_radius
    k = F.sample_index
    lag = k - k0
    hk = np.where(np.abs(lag) <= R, h[np.clip(lag + R, 0, 2 * R)], 0.0)
    expected = hk[None, :] * np.exp(-1j * F.omega[:, None] * k0 / F.fs) / F.fs
    np.testing.assert_allclose(F.values, expected, atol=1e-15)


def test_tone_peaks_at_its_bin():
    M, fs = 128, 1.0
    m0 = 17
    n = np.arange(1000)
    x = SignalRecord(np.exp(2j * np.pi * m0 * n / M), fs)
    F = stft_forward(x, WindowSpec.from_L(8, fs), M=M)
    col = F.values[:, 500 - F.offset]
    assert F.m_values[np.argmax(np.abs(col))] == m0


def test_noise_roundtrip(rng):
    x = SignalRecord(rng.standard_normal(500))
    spec = WindowSpec.from_L(8)
    assert rqf(x, stft_inverse(stft_forward(x, spec, M=600), spec)) > 180


def test_impulse_roundtrip_leakage():
    x = np.zeros(300)
    x[140] = 1
    spec = WindowSpec.from_L(8)
    xh = stft_inverse(stft_forward(SignalRecord(x), spec, M=320), spec).samples
    assert xh[140] == pytest.approx(1, abs=1e-12)
    assert np.abs(np.delete(xh, 140)).max() < 1e-8


def test_zero_grid_inverts_to_zero():
    spec = WindowSpec.from_L(4)
    F = stft_forward(SignalRecord(np.ones(50)), spec, M=64)
    F.values[:] = 0
    assert not np.any(stft_inverse(F, spec).samples)


def test_marginal_of_impulse():
    spec = WindowSpec.from_L(5)
    x = np.zeros(80)
    x[31] = 2.0
    F = stft_forward(SignalRecord(x), spec, M=100)
    marg = stft_time_marginal(F, spec)
    gain = window_zero_frequency_gain(spec)
    np.testing.assert_allclose(marg, 2 * np.conj(gain) * np.exp(-1j * F.omega * 31), atol=1e-13)
    assert np.ptp(np.abs(marg)) < 1e-12


def test_marginal_against_dft(rng):
    x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    spec = WindowSpec.from_L(6)
    F = stft_forward(SignalRecord(x), spec, M=512)
    ref = np.conj(window_zero_frequency_gain(spec)) * dft_oracle(x, 512, 1.0)
    marg = stft_time_marginal(F, spec)
    assert np.linalg.norm(marg - ref) / np.linalg.norm(ref) < 1e-8


def test_zero_signal_zero_marginal():
    spec = WindowSpec.from_L(4)
    F = stft_forward(SignalRecord(np.zeros(40)), spec, M=64)
    assert not np.any(stft_time_marginal(F, spec))


def test_errors():
    spec = WindowSpec.from_L(4)
    with pytest.raises(ValueError, match="even"):
        stft_forward(SignalRecord(np.ones(10)), spec, M=63)
    with pytest.raises(ValueError, match="empty"):
        SignalRecord(np.array([]))
    with pytest.raises(ValueError):
        SignalRecord(np.array([1.0, np.nan]))


def test_short_fft_folds_and_warns(rng):
    # M below the window support: frames fold modulo M, which is still exact
    x = rng.standard_normal(40)
    spec = WindowSpec.from_L(6)
    with pytest.warns(UserWarning, match="folded"):
        F = stft_forward(SignalRecord(x), spec, M=32)
    ref = np.conj(window_zero_frequency_gain(spec)) * dft_oracle(x, 32, 1.0)
    np.testing.assert_allclose(stft_time_marginal(F, spec), ref, atol=1e-12)


def test_workers_do_not_change_bits(rng):
    x = SignalRecord(rng.standard_normal(700))
    spec = WindowSpec.from_L(8)
    grids = [stft_forward(x, spec, M=600, workers=w).values for w in (1, 2, 8)]
    for g in grids[1:]:
        np.testing.assert_array_equal(g, grids[0])


def test_bank_matches_single_calls(rng):
    x = SignalRecord(rng.standard_normal(120))
    spec = WindowSpec.from_L(5)
    kinds = [DerivedWindowKind(0, 0), DerivedWindowKind(1, 1), DerivedWindowKind(2, 0)]
    bank = stft_bank(x, spec, kinds, 128)
    for k in kinds:
        np.testing.assert_array_equal(bank[k].values, stft_forward(x, spec, k, M=128).values)


signals = hnp.arrays(np.float64, 64, elements=st.floats(-10, 10))


@settings(max_examples=25, deadline=None)
@given(x=signals, y=signals, a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_linearity(x, y, a, b):
    spec = WindowSpec.from_L(4)
    F = lambda s: stft_forward(SignalRecord(s), spec, M=80).values  # noqa: E731
    lhs = F(a * x + b * y)
    rhs = a * F(x) + b * F(y)
    scale = max(1.0, np.abs(lhs).max(), np.abs(rhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


@settings(max_examples=20, deadline=None)
@given(x=hnp.arrays(np.float64, 50, elements=st.floats(-1, 1)), d=st.integers(1, 30))
def test_delay_covariance(x, d):
    spec = WindowSpec.from_L(3)
    M = 96
    y = np.concatenate([np.zeros(d), x])
    xp = np.concatenate([x, np.zeros(d)])
    Fx = stft_forward(SignalRecord(xp), spec, M=M)
    Fy = stft_forward(SignalRecord(y), spec, M=M)
    # column c of Fx is sample c+offset; same sample shifted by d is column c+d of Fy
    n = Fx.ncols - d
    phase = np.exp(-1j * Fx.omega * d)[:, None]
    np.testing.assert_allclose(Fy.values[:, d:d + n], phase * Fx.values[:, :n], atol=1e-13)


@pytest.mark.filterwarnings("ignore:M=.*folded")
@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(20, 300))
def test_roundtrip_when_M_covers_record(seed, n):
    x = np.random.default_rng(seed).standard_normal(n)
    spec = WindowSpec.from_L(4)
    M = n + (n % 2)
    assert rqf(x, stft_inverse(stft_forward(SignalRecord(x), spec, M=M), spec)) > 180
