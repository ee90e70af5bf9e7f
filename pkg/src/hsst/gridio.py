"""Binary grid files, grayscale images, metadata and record ingestion."""
from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np

from .stft import SignalRecord, TfrGrid

__all__ = [
    "KIND_CODES",
    "write_grid",
    "read_grid",
    "write_pgm",
    "log_magnitude_image",
    "write_metadata",
    "read_metadata",
    "read_record",
]

MAGIC = b"TFSS"
VERSION = 1
HEADER = struct.Struct("<4sIIIdB")

KIND_CODES = {
    "STFT": 0,
    "SPECTROGRAM": 1,
    "REASSIGNED": 2,
    "SST": 3,
    "SST2": 4,
    "TSST": 5,
    "TSST2": 6,
}
CODE_KINDS = {v: k for k, v in KIND_CODES.items()}


def write_grid(path, grid: TfrGrid) -> None:
    """Header ``{"TFSS", version u32, M u32, N u32, fs f64, kind u8}`` then
    ``M x N`` little-endian complex64 values, rows in bin order
    ``-M/2+1 .. M/2``."""
    M, N = grid.shape
    kind = KIND_CODES.get(grid.kind.upper())
    if kind is None:
        raise ValueError(f"no file code for grid kind {grid.kind!r}")
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, M, N, float(grid.fs), kind))
        fh.write(np.ascontiguousarray(grid.values, dtype="<c8").tobytes())


def read_grid(path) -> TfrGrid:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, M, N, fs, kind = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    body = np.frombuffer(data, dtype="<c8", offset=HEADER.size)
    if body.size != M * N:
        raise ValueError(f"{path}: expected {M * N} values, found {body.size}")
    return TfrGrid(values=body.reshape(M, N).copy(), M=M, fs=fs,
                   kind=CODE_KINDS.get(kind, str(kind)), n_samples=N)


def log_magnitude_image(grid: TfrGrid, floor_db: float = -60.0,
                        band: tuple[float, float] | None = None,
                        positive_only: bool | None = None) -> np.ndarray:
    """8-bit image of ``20 log10 |S|`` (``10 log10`` for energy grids) relative
    to its maximum, clipped at ``floor_db``; highest frequency on top."""
    values = grid.values
    energy = grid.kind.upper() in ("SPECTROGRAM", "REASSIGNED")
    mag = np.abs(values)
    f = grid.freqs
    rows = np.ones(grid.M, dtype=bool)
    if positive_only is None:
        positive_only = grid.real_input
    if positive_only:
        rows &= f >= 0
    if band is not None:
        rows &= (f >= band[0]) & (f <= band[1])
    mag = mag[rows][::-1]
    with np.errstate(divide="ignore"):
        db = (10.0 if energy else 20.0) * np.log10(mag)
    top = db.max() if mag.size and np.isfinite(db.max()) else 0.0
    scaled = (np.clip(db - top, floor_db, 0.0) - floor_db) / -floor_db
    return np.round(scaled * 255).astype(np.uint8)


def write_pgm(path, image: np.ndarray) -> None:
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def write_metadata(path, items: dict) -> None:
    lines = [f"{k}={items[k]}" for k in sorted(items)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_metadata(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


_SPLIT = re.compile(r"[,;\s]+")


def read_record(path, fs: float | None = None, raw: bool = False) -> SignalRecord:
    """Load a record from CSV / whitespace text or raw little-endian float64.

    Text files hold one column (values, ``fs`` required) or two columns
    (time in seconds, value); lines that do not parse as numbers are
    skipped as headers or comments.
    """
    path = Path(path)
    if raw:
        if fs is None:
            raise ValueError("raw input needs a sampling rate (--fs)")
        return SignalRecord(np.fromfile(path, dtype="<f8"), fs=fs)
    rows = []
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in _SPLIT.split(line) if v])
        except ValueError:
            continue
    if not rows:
        raise ValueError(f"{path}: no numeric rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows) or width not in (1, 2):
        raise ValueError(f"{path}: expected one or two numeric columns")
    data = np.asarray(rows)
    if width == 1:
        if fs is None:
            raise ValueError(f"{path}: single-column input needs a sampling rate (--fs)")
        return SignalRecord(data[:, 0], fs=fs)
    t = data[:, 0]
    if fs is None:
        if len(t) < 2:
            raise ValueError(f"{path}: cannot infer fs from one sample")
        fs = 1.0 / float(np.median(np.diff(t)))
    return SignalRecord(data[:, 1], fs=fs, start_time=float(t[0]))
