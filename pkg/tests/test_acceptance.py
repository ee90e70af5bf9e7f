"""Acceptance criteria, one test each (criterion 2 and 7 split into parts).

Each test records a ``criterion N PASS|FAIL detail`` line printed at the end
of the session. The ``run_cN(workers)`` helpers return the measured numbers
plus the raw arrays, so the determinism criterion can replay them.
"""
import hashlib
import os
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE, dft_oracle, gaussian_chirp_record
from hsst.detect import DetectionConfig, detect_impulses
from hsst.gridio import read_record
from hsst.pipeline import AnalysisConfig, analyze
from hsst.signals import add_noise, corpus, rqf
from hsst.stft import SignalRecord, stft_forward, stft_time_marginal
from hsst.synchro import ChirpModel, EstimatorChoice, estimate_q
from hsst.window import WindowSpec, window_zero_frequency_gain

CHIRP = ChirpModel.gaussian(center=300, width=60, freq_at_center=2 * np.pi * 0.25,
                            alpha=2 * np.pi * 1e-3)
FLAT_CHIRP = ChirpModel(omega0=2 * np.pi * 0.1, alpha=2 * np.pi * 0.3 / 600)
N_CHIRP = 600


def record(key, ok, detail):
    ACCEPTANCE[key] = ("PASS" if ok else "FAIL", detail)
    assert ok, f"criterion {key}: {detail}"


def strong(F, db=20.0):
    A = np.abs(F.values)
    return A > 10 ** (-db / 20) * A.max()


# ---------------------------------------------------------------- runners

def run_c1(workers=None):
    rng = np.random.default_rng(1)
    spec = WindowSpec.from_L(8)
    gain = np.conj(window_zero_frequency_gain(spec))
    errs, arrays = [], []
    elapsed = 0.0
    for _ in range(50):
        x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        t0 = time.perf_counter()
        marg = stft_time_marginal(stft_forward(SignalRecord(x), spec, M=512, workers=workers), spec)
        elapsed += time.perf_counter() - t0
        ref = gain * dft_oracle(x, 512, 1.0)
        errs.append(np.linalg.norm(marg - ref) / np.linalg.norm(ref))
        arrays.append(marg)
    return {"max_err": max(errs), "seconds": elapsed, "arrays": arrays}


def run_c2(workers=None):
    x = add_noise(corpus("multicomponent").record, 25, seed=1)
    a = analyze(x, AnalysisConfig(L=8, M=600), workers=workers)
    out = {"arrays": []}
    for name in ("stft", "tsst1", "tsst2", "sst1", "sst2"):
        xh = a.inverse(name)
        out[name] = rqf(x, xh)
        out[name + "_dropped"] = a.transform(name).dropped
        out[name + "_x"] = xh.samples
        out["arrays"] += [a.transform(name).values, xh.samples]
    return out


def run_c3(workers=None):
    out = {"arrays": []}
    for L in (4, 8, 16):
        x = np.zeros(400)
        x[173] = 1.0
        a = analyze(SignalRecord(x), AnalysisConfig(L=L, M=600), workers=workers)
        S = a.transform("tsst2")
        band = S.freqs > 0
        col_energy = (np.abs(S.values[band]) ** 2).sum(axis=0)
        det = detect_impulses(S, DetectionConfig(band=(0.01, 0.5), min_separation=400), a.spec)
        strongest = max(det.events, key=lambda e: e.saliency)
        out[L] = {"fraction": col_energy.max() / col_energy.sum(), "time": strongest.time}
        out["arrays"] += [S.values, det.saliency]
    return out


def run_c4(workers=None):
    spec = WindowSpec.from_L(8)
    x = gaussian_chirp_record(CHIRP, N_CHIRP)
    q, ok = estimate_q(x, spec, 512, EstimatorChoice("omega", 2), workers=workers)
    cells = strong(stft_forward(x, spec, M=512, workers=workers))
    err = np.abs(q[cells] - CHIRP.q) / abs(CHIRP.q)
    return {"max_rel": float(err.max()), "all_ok": bool(ok[cells].all()), "arrays": [q]}


def run_c5(workers=None):
    a = analyze(gaussian_chirp_record(CHIRP, N_CHIRP), AnalysisConfig(L=8, M=512), workers=workers)
    t2, t2b = a.group_delays()
    truth = CHIRP.crossing_time(np.broadcast_to(a.F.omega[:, None], a.F.shape))
    cells = strong(a.F)
    med2 = float(np.median(np.abs(t2 - truth)[cells]))
    med2b = float(np.median(np.abs(t2b - truth)[cells]))

    b = analyze(gaussian_chirp_record(FLAT_CHIRP, N_CHIRP), AnalysisConfig(L=8, M=512),
                workers=workers)
    u2, u2b = b.group_delays()
    R = b.spec.support_radius
    k = b.F.sample_index
    # frames entirely inside the record: the flat chirp has nu = 0 only there
    inner = strong(b.F) & ((k >= R) & (k <= N_CHIRP - 1 - R))[None, :]
    agree = float(np.abs(u2 - u2b)[inner].max())
    return {"med2": med2, "med2b": med2b, "agree": agree, "arrays": [t2, t2b, u2, u2b]}


def _row_variance(E, k, rows):
    v = []
    for r in np.nonzero(rows)[0]:
        w = E[r]
        mu = (w * k).sum() / w.sum()
        v.append((w * (k - mu) ** 2).sum() / w.sum())
    return float(np.mean(v))


def run_c6(workers=None):
    a = analyze(gaussian_chirp_record(CHIRP, N_CHIRP), AnalysisConfig(L=8, M=512), workers=workers)
    k = a.F.sample_index.astype(float)
    spec_E = np.abs(a.F.values) ** 2
    row_E = spec_E.sum(axis=1)
    rows = row_E > 0.01 * row_E.max()
    out = {"arrays": []}
    for name in ("spectrogram", "tsst1", "tsst2"):
        E = spec_E if name == "spectrogram" else np.abs(a.transform(name).values) ** 2
        out[name] = _row_variance(E, k, rows)
        out["arrays"].append(E)
    return out


def run_c7(workers=None):
    synth = corpus("impulses-tone")
    x = add_noise(synth.record, 25, seed=1)
    a = analyze(x, AnalysisConfig(L=8, M=600), workers=workers)
    S = a.transform("tsst2")
    det = detect_impulses(S, DetectionConfig(band=(0.2, 0.5), threshold_factor=5,
                                             min_separation=5), a.spec)
    truth = synth.components[0].samples + synth.components[1].samples
    est = sum((e.waveform.samples for e in det.events), np.zeros(len(x)))
    corr = float(np.corrcoef(est, truth)[0, 1])
    return {"times": [e.time for e in det.events], "corr": corr,
            "arrays": [S.values, est, det.saliency]}


# ---------------------------------------------------------------- criteria

def test_c1_marginal_identity():
    r = run_c1()
    record("1", r["max_err"] < 1e-8 and r["seconds"] < 5,
           f"max rel err {r['max_err']:.2e} (< 1e-8), {r['seconds']:.2f} s (< 5 s)")


@pytest.fixture(scope="module")
def c2():
    return run_c2()


def test_c2a_stft_roundtrip(c2):
    record("2.a", c2["stft"] > 180, f"STFT RQF {c2['stft']:.2f} dB (> 180)")


def test_c2b_tsst_roundtrip(c2):
    zero = c2["tsst1_dropped"] == 0 and c2["tsst2_dropped"] == 0
    # both are exact to roundoff, so equality is judged on the reconstructions
    diff = np.max(np.abs(c2["tsst1_x"] - c2["tsst2_x"])) / np.max(np.abs(c2["tsst1_x"]))
    ok = c2["tsst1"] > 100 and c2["tsst2"] > 100 and (not zero or diff < 1e-12)
    record("2.b", ok, f"TSST1 {c2['tsst1']:.2f} dB, TSST2 {c2['tsst2']:.2f} dB (> 100), "
           f"dropped {c2['tsst1_dropped']}/{c2['tsst2_dropped']}, rel diff {diff:.1e}")


def test_c2c_vertical_sst(c2):
    record("2.c", 20 <= c2["sst1"] <= 50, f"SST1 RQF {c2['sst1']:.2f} dB (in [20, 50])")


def test_c2d_second_order_vertical_sst(c2):
    record("2.d", 15 <= c2["sst2"] <= 40, f"SST2 RQF {c2['sst2']:.2f} dB (in [15, 40])")


def test_c2e_ordering(c2):
    tsst = min(c2["tsst1"], c2["tsst2"])
    vert = max(c2["sst1"], c2["sst2"])
    # STFT and TSST both sit at the float64 floor; 1 dB absorbs roundoff jitter
    ok = c2["stft"] >= max(c2["tsst1"], c2["tsst2"]) - 1.0 and tsst - vert >= 20
    record("2.e", ok, f"STFT {c2['stft']:.2f} >= TSST {tsst:.2f} (1 dB roundoff) "
           f">> vertical {vert:.2f} (by >= 20 dB)")


def test_c3_impulse_localization():
    r = run_c3()
    ok = all(r[L]["fraction"] >= 0.99 and r[L]["time"] == 173 for L in (4, 8, 16))
    detail = ", ".join(f"L={L}: {r[L]['fraction']:.6f} at t={r[L]['time']:g}" for L in (4, 8, 16))
    record("3", ok, detail + " (>= 0.99, t = 173)")


def test_c4_unbiased_chirp_rate():
    r = run_c4()
    record("4", r["all_ok"] and r["max_rel"] < 1e-5, f"max rel err of q {r['max_rel']:.2e} (< 1e-5)")


def test_c5_bias_separation():
    r = run_c5()
    ok = r["med2b"] > 3 * r["med2"] and r["agree"] < 1e-9
    record("5", ok, f"median |t2b err| {r['med2b']:.3g} vs |t2 err| {r['med2']:.3g} (> 3x); "
           f"nu=0 max |t2 - t2b| {r['agree']:.1e} s (< 1e-9)")


def test_c6_sharpening():
    r = run_c6()
    ok = r["tsst2"] < r["tsst1"] < r["spectrogram"]
    record("6", ok, f"row time variance TSST2 {r['tsst2']:.3g} < TSST1 {r['tsst1']:.3g} "
           f"< spectrogram {r['spectrogram']:.3g}")


@pytest.fixture(scope="module")
def c7():
    return run_c7()


def test_c7a_detection(c7):
    t = c7["times"]
    ok = len(t) == 2 and np.allclose(t, [150, 350], atol=2)
    record("7.a", ok, f"events at {[round(v, 1) for v in t]} (2 events, 150/350 +-2)")


def test_c7b_extraction(c7):
    record("7.b", c7["corr"] > 0.99, f"impulse extraction correlation {c7['corr']:.4f} (> 0.99)")


DRAUPNER = os.environ.get("HSST_DRAUPNER")


@pytest.mark.draupner
@pytest.mark.skipif(not DRAUPNER, reason="set HSST_DRAUPNER to the 2.13 Hz record")
def test_c8_draupner():
    x = read_record(DRAUPNER, fs=2.13)
    a = analyze(x, AnalysisConfig(L=25, M=2660))
    det = detect_impulses(a.transform("tsst2"), DetectionConfig(band=(0.4, 1.0),
                                                                threshold_factor=5), a.spec)
    minutes = [(e.time - x.start_time) / 60 for e in det.events]
    ok = len(minutes) == 4 and np.allclose(minutes, [4.39, 7.72, 13.36, 19.47], atol=0.1)
    record("8", ok, f"events at {[round(m, 2) for m in minutes]} min")


def _digest(result):
    h = hashlib.sha256()
    for arr in result["arrays"]:
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()


@pytest.mark.slow
def test_c9_determinism(monkeypatch):
    runners = [run_c1, run_c2, run_c3, run_c4, run_c5, run_c6, run_c7]
    mismatched = []
    for i, run in enumerate(runners, 1):
        ref = _digest(run(1))
        others = [_digest(run(1)), _digest(run(2)), _digest(run(8))]
        monkeypatch.setenv("TFSS_THREADS", "3")
        others.append(_digest(run(None)))
        monkeypatch.delenv("TFSS_THREADS")
        if any(d != ref for d in others):
            mismatched.append(i)
    record("9", not mismatched, "bitwise identical across repeats and workers 1/2/8/env=3"
           if not mismatched else f"criteria {mismatched} differ across runs")
