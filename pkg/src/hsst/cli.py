"""Command-line front end: ``hsst analyze | roundtrip | detect``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import ENV_THREADS
from .detect import DetectionConfig, EmptyBand, detect_impulses
from .gridio import log_magnitude_image, read_record, write_grid, write_metadata, write_pgm
from .pipeline import INVERTIBLE, TRANSFORMS, AnalysisConfig, analyze, roundtrip
from .signals import CORPORA, add_noise, corpus

log = logging.getLogger("hsst")

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like LO:HI, got {text!r}")
    return lo, hi


def _common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="CSV/text record (1 or 2 columns) or raw float64")
    src.add_argument("--synthetic", choices=sorted(CORPORA), help="built-in synthetic corpus")
    p.add_argument("--fs", type=float, help="sampling rate in Hz (needed for 1-column and raw input)")
    p.add_argument("--raw", action="store_true", help="input is raw little-endian float64")
    p.add_argument("--snr", type=float, help="add white Gaussian noise at this SNR (dB)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--M", type=int, default=600, help="FFT length (even)")
    p.add_argument("--L", type=float, default=8.0, help="window spread in samples")
    p.add_argument("--estimator", default="w2", help="chirp-rate estimator: w2, w3, t2, t3")
    p.add_argument("--rel-gate", type=float, default=1e-6)
    p.add_argument("--alpha-gate", type=float)
    p.add_argument("--support-factor", type=float)
    p.add_argument("--smooth-q", type=int, default=0)
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--threads", type=int, help=f"worker count (default ${ENV_THREADS} or all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsst", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="compute a transform; write grid, image and metadata")
    _common(a)
    a.add_argument("--transform", choices=TRANSFORMS, default="tsst2")
    a.add_argument("--band", type=_band, help="display band LO:HI in Hz")
    a.add_argument("--floor-db", type=float, default=-60.0)
    a.add_argument("--csv-magnitude", action="store_true", help="also write |grid| as CSV")

    r = sub.add_parser("roundtrip", help="reconstruction quality of every invertible transform")
    _common(r)

    d = sub.add_parser("detect", help="saliency-based impulse detection and extraction")
    _common(d)
    d.add_argument("--band", type=_band, help="saliency band LO:HI in Hz "
                   "(default 0.4:1.0, or 0.2fs:0.5fs for synthetic corpora)")
    d.add_argument("--factor", type=float, default=5.0, help="threshold / mean saliency")
    d.add_argument("--min-sep", type=float, help="minimum peak spacing in seconds "
                   "(default 10 s, or 5 samples for synthetic corpora)")
    d.add_argument("--edge-guard", type=float, help="ignore peaks this close (s) to the record ends")
    d.add_argument("--band-mask", action="store_true", help="mask only the band rows")
    return parser


def _load(args):
    if args.synthetic:
        fs = args.fs or 1.0
        synth = corpus(args.synthetic, fs=fs)
        x = synth.record
    else:
        if not args.input.exists():
            raise UsageError(f"input file not found: {args.input}")
        try:
            x = read_record(args.input, fs=args.fs, raw=args.raw)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read {args.input}: {exc}")
    if args.snr is not None:
        x = add_noise(x, args.snr, seed=args.seed)
    return x


def _config(args) -> AnalysisConfig:
    if args.M < 2 or args.M % 2:
        raise UsageError(f"--M must be a positive even integer, got {args.M}")
    return AnalysisConfig(L=args.L, M=args.M, estimator=args.estimator, rel_gate=args.rel_gate,
                          alpha_gate=args.alpha_gate, support_factor=args.support_factor,
                          smooth_q=args.smooth_q)


def _manifest(args, x, config: AnalysisConfig) -> dict:
    items = {k: v for k, v in vars(args).items() if v is not None and k not in ("verbose",)}
    items.update({f"config.{k}": v for k, v in config.as_dict().items()})
    items.update(fs=x.fs, n_samples=len(x), start_time=x.start_time)
    return {k: str(v) for k, v in items.items()}


def _outdir(path: Path) -> Path:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {path}: {exc}")
    return path


def cmd_analyze(args) -> int:
    x = _load(args)
    config = _config(args)
    out = _outdir(args.out)
    an = analyze(x, config, workers=args.threads)
    grid = an.transform(args.transform)
    stem = out / args.transform
    write_grid(stem.with_suffix(".tfss"), grid)
    write_pgm(stem.with_suffix(".pgm"), log_magnitude_image(grid, args.floor_db, args.band))
    if args.csv_magnitude:
        np.savetxt(stem.with_suffix(".csv"), np.abs(grid.values), delimiter=",", fmt="%.9g")
    meta = _manifest(args, x, config)
    meta.update(kind=grid.kind, columns=grid.ncols, first_column_sample=grid.offset,
                dropped=grid.dropped, out_of_grid=grid.meta.get("out_of_grid", 0))
    write_metadata(out / "metadata.txt", meta)
    log.info("wrote %s.{tfss,pgm}", stem)
    return EXIT_OK


def format_table(rows: list[dict]) -> str:
    lines = [f"{'transform':<10} {'RQF (dB)':>10} {'dropped':>8} {'out_of_grid':>12}"]
    for r in rows:
        lines.append(f"{r['transform']:<10} {r['rqf_db']:>10.2f} {r['dropped']:>8d} "
                     f"{r['out_of_grid']:>12d}")
    return "\n".join(lines)


def cmd_roundtrip(args) -> int:
    x = _load(args)
    config = _config(args)
    out = _outdir(args.out)
    rows = roundtrip(analyze(x, config, workers=args.threads), INVERTIBLE)
    with open(out / "rqf.csv", "w") as fh:
        fh.write("transform,rqf_db,dropped,out_of_grid\n")
        for r in rows:
            fh.write(f"{r['transform']},{r['rqf_db']:.6f},{r['dropped']},{r['out_of_grid']}\n")
    table = format_table(rows)
    (out / "rqf.txt").write_text(table + "\n")
    write_metadata(out / "metadata.txt", _manifest(args, x, config))
    print(table)
    return EXIT_OK


def cmd_detect(args) -> int:
    x = _load(args)
    config = _config(args)
    synthetic = args.synthetic is not None
    band = args.band or ((0.2 * x.fs, 0.5 * x.fs) if synthetic else (0.4, 1.0))
    min_sep = args.min_sep if args.min_sep is not None else (5 / x.fs if synthetic else 10.0)
    try:
        dcfg = DetectionConfig(band=band, threshold_factor=args.factor, min_separation=min_sep,
                               band_mask=args.band_mask, edge_guard=args.edge_guard)
        dcfg.check(x.fs)
    except ValueError as exc:
        raise UsageError(str(exc))
    out = _outdir(args.out)
    an = analyze(x, config, workers=args.threads)
    S = an.transform("tsst2")
    try:
        det = detect_impulses(S, dcfg, an.spec)
    except EmptyBand as exc:
        raise UsageError(str(exc))
    with open(out / "events.csv", "w") as fh:
        fh.write("time_s,saliency\n")
        for e in det.events:
            fh.write(f"{e.time:.6f},{e.saliency:.9g}\n")
    for i, e in enumerate(det.events, 1):
        np.savetxt(out / f"event_{i:02d}.csv",
                   np.column_stack([e.waveform.times, e.waveform.samples.real]),
                   delimiter=",", header="time_s,value", comments="", fmt="%.9g")
    np.savetxt(out / "saliency.csv", np.column_stack([det.times, det.saliency]),
               delimiter=",", header="time_s,saliency", comments="", fmt="%.9g")
    meta = _manifest(args, x, config)
    meta.update(threshold=repr(det.threshold), n_events=len(det.events),
                band=f"{band[0]}:{band[1]}", min_separation=min_sep)
    write_metadata(out / "metadata.txt", meta)
    for e in det.events:
        print(f"{e.time:12.3f} s  ({e.time / 60:8.3f} min)  G={e.saliency:.4g}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "roundtrip": cmd_roundtrip, "detect": cmd_detect}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"hsst: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hsst: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, MemoryError) as exc:
        print(f"hsst: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
