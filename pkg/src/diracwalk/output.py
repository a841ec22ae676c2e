"""Artifact writers: CSV tables, 16-bit PGM heatmaps and JSON reports.

All writers produce byte-identical files for identical inputs: numbers are
printed with 9 significant digits, lines end with LF and JSON keys are sorted.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DIGITS = 9
ZERO_CUTOFF = 1e-12


def fmt(value) -> str:
    """Number with 9 significant digits; magnitudes below 1e-12 print as ``0``."""
    v = float(value)
    if math.isnan(v):
        return "nan"
    if abs(v) < ZERO_CUTOFF:
        return "0"
    return f"{v:.{DIGITS}g}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else fmt(c) for c in row))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def write_dispersion_csv(path, result) -> None:
    """Rows ``kx,ky,omega_minus``, ``ky`` outer and ``kx`` inner."""
    om = np.asarray(result.omega_minus)
    rows = ((kx, ky, om[j, i]) for j, ky in enumerate(result.ky) for i, kx in enumerate(result.kx))
    write_csv(path, ("kx", "ky", "omega_minus"), rows)


def zitter_rows(mass: float, report) -> list[tuple]:
    """One row per minimizer; a degenerate line prints ``*`` for its free coordinate."""
    rows = [(mass, report.omega_min, report.gap, p.kx, p.ky) for p in report.minimizers]
    for axis, fixed in report.degenerate_lines:
        if axis == "kx":
            rows.append((mass, report.omega_min, report.gap, fixed, "*"))
        else:
            rows.append((mass, report.omega_min, report.gap, "*", fixed))
    return rows


def write_zitter_csv(path, reports: Iterable[tuple[float, object]]) -> None:
    rows = [r for mass, rep in reports for r in zitter_rows(mass, rep)]
    write_csv(path, ("m", "omega_min", "gap", "kx", "ky"), rows)


def write_density_csv(path, times: np.ndarray, x: np.ndarray, density: np.ndarray,
                      stride: int = 1) -> None:
    """Rows ``t,x,rho`` for every ``stride``-th time and every column."""
    density = np.asarray(density)
    xs = [fmt(v) for v in x]
    lines = ["t,x,rho"]
    for n in range(0, len(times), stride):
        t = fmt(times[n])
        lines.extend(f"{t},{xv},{fmt(r)}" for xv, r in zip(xs, density[n]))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def pgm_bytes(image: np.ndarray) -> bytes:
    """Binary 16-bit PGM; row 0 first, linear scale with the global maximum at 65535."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise ValueError("heatmap must be two-dimensional")
    peak = float(img.max()) if img.size else 0.0
    scaled = np.zeros(img.shape) if peak <= 0 else np.clip(img, 0, None) / peak * 65535.0
    data = np.rint(scaled).astype(">u2")
    h, w = img.shape
    return f"P5\n{w} {h}\n65535\n".encode("ascii") + data.tobytes()


def write_pgm(path, image: np.ndarray) -> None:
    Path(path).write_bytes(pgm_bytes(image))


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    w, h = map(int, parts[1].split())
    maxval = int(parts[2])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(parts[3], dtype=dtype).reshape(h, w)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)
    Path(path).write_bytes((text + "\n").encode("utf-8"))
