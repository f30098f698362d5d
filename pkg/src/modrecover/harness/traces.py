"""Captured-trace files: ``time_s,input_v,folded_v`` CSV plus a JSON sidecar.

The sidecar (same stem, ``.json``) holds ``{"lambda": ..., "fs": ...}``.
``input_v`` is optional. Folded values may overshoot ``[-lam, lam)`` by
``slack * lam`` to allow for measurement noise.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import numpy as np

from ..signals import SampledSignal, SamplingGrid

DEFAULT_SLACK = 0.1
_COLUMNS = ("time_s", "input_v", "folded_v")


class TraceError(ValueError):
    pass


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def emit_trace(path, times, folded, lam: float, fs: float, reference=None) -> None:
    path = Path(path)
    times = np.asarray(times, dtype=float)
    folded = np.asarray(folded, dtype=float)
    cols = ["time_s", "folded_v"] if reference is None else list(_COLUMNS)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for i in range(times.size):
            row = [repr(float(times[i]))]
            if reference is not None:
                row.append(repr(float(reference[i])))
            row.append(repr(float(folded[i])))
            w.writerow(row)
    sidecar_path(path).write_text(
        json.dumps({"lambda": lam, "fs": fs}, indent=2) + "\n", encoding="utf-8"
    )


def read_trace_columns(path) -> dict:
    """Parse the CSV into float lists keyed by column name."""
    path = Path(path)
    try:
        fh = path.open(encoding="utf-8", newline="")
    except OSError as exc:
        raise TraceError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise TraceError(f"{path}: empty file") from None
        unknown = set(header) - set(_COLUMNS)
        if unknown or "time_s" not in header or "folded_v" not in header:
            raise TraceError(
                f"{path}:1: header must be time_s,[input_v,]folded_v, got {','.join(header)}"
            )
        cols = {h: [] for h in header}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise TraceError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            for h, cell in zip(header, row):
                try:
                    cols[h].append(float(cell))
                except ValueError:
                    raise TraceError(f"{path}:{lineno}: bad number {cell!r} in {h}") from None
    if not cols["time_s"]:
        raise TraceError(f"{path}: no data rows")
    return cols


def _grid_from_times(times: np.ndarray, fs: float) -> SamplingGrid:
    T = 1.0 / fs
    k = T * np.arange(times.size)
    # least-squares origin, so a jittered first instant does not bias it
    t0 = float(np.mean(times - k))
    offsets = times - (t0 + k)
    worst = float(np.max(np.abs(offsets))) / T
    if worst <= 1e-6:
        return SamplingGrid(t0, T, times)
    nu = worst * (1 + 1e-9)
    if nu >= 0.5:
        raise TraceError(
            f"sampling instants stray {worst:.3f} periods from the nominal grid; check fs"
        )
    return SamplingGrid(t0, T, times, nu=nu)


def ingest_trace(
    path,
    lam: Optional[float] = None,
    fs: Optional[float] = None,
    slack: float = DEFAULT_SLACK,
) -> tuple[SampledSignal, Optional[SampledSignal]]:
    """Read and validate a trace; returns (folded, reference or None)."""
    path = Path(path)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        try:
            meta = json.loads(side.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise TraceError(f"{side}: invalid JSON ({exc})") from exc
    lam = meta.get("lambda") if lam is None else lam
    fs = meta.get("fs") if fs is None else fs
    if lam is None or fs is None:
        raise TraceError(f"{path}: lambda and fs must come from a sidecar or flags")
    lam, fs = float(lam), float(fs)
    if not lam > 0 or not fs > 0:
        raise TraceError(f"{path}: lambda and fs must be positive")

    cols = read_trace_columns(path)
    times = np.asarray(cols["time_s"])
    bad = np.flatnonzero(np.diff(times) <= 0)
    if bad.size:
        row = int(bad[0]) + 1
        raise TraceError(
            f"{path}:{row + 2}: time {float(times[row])!r} does not increase past "
            f"{float(times[row - 1])!r}"
        )
    folded = np.asarray(cols["folded_v"])
    eps = slack * lam
    out = np.flatnonzero((folded < -lam - eps) | (folded >= lam + eps))
    if out.size:
        row = int(out[0])
        raise TraceError(
            f"{path}:{row + 2}: folded value {float(folded[row])!r} outside "
            f"[-{lam}, {lam}) beyond slack {eps:g}"
        )
    grid = _grid_from_times(times, fs)
    folded_sig = SampledSignal(folded, grid, lam=lam)
    ref = None
    if "input_v" in cols:
        ref = SampledSignal(np.asarray(cols["input_v"]), grid, lam=lam)
    return folded_sig, ref
