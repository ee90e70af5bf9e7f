import numpy as np
import pytest

from hsst.stft import SignalRecord

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[str, tuple[str, str]] = {}


def dft_oracle(x: np.ndarray, M: int, fs: float) -> np.ndarray:
    """Direct O(N M) evaluation of ``sum_n x[n] exp(-j w_m n / fs) / fs``."""
    m = np.arange(-M // 2 + 1, M // 2 + 1)
    n = np.arange(len(x))
    return np.exp(-2j * np.pi * np.outer(m, n) / M) @ x / fs


def chirp_t_tilde(model, t, omega, T):
    """Closed-form complex group delay of a Gaussian-window STFT of
    ``exp(l + p tau + q tau^2 / 2)``: the first moment of a complex
    Gaussian, ``-B / 2A``."""
    return (model.p + t / T**2 - 1j * omega) / (1 / T**2 - model.q)


def gaussian_chirp_record(model, n, fs=1.0):
    return SignalRecord(model(np.arange(n) / fs), fs=fs)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split(".")[0]), k)):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:<4} {status:<4} {detail}")
