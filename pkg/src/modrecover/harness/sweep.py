"""Monte-Carlo sweeps over one or two parameter axes.

Trial seeds depend only on ``(base_seed, cell, trial)``, and results are
sorted by cell before aggregation, so the output table does not depend on
the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from .. import bounds
from ..channel import GaussianNoise, UniformNoise
from ..metrics import INF_DB_SENTINEL
from .config import SweepSpec
from .trial import run_trial

RESULT_COLUMNS = (
    "mean_snr_r_db",
    "success_rate",
    "theory_of_eq19",
    "theory_of_eq20",
    "theory_of_eq24",
    "trials",
    "failures",
)


def trial_seed(base_seed: int, cell: int, trial: int) -> int:
    """63-bit seed for one trial, hashed from its coordinates."""
    words = np.random.SeedSequence([base_seed, cell, trial]).generate_state(2, np.uint32)
    return (int(words[0]) << 31) ^ int(words[1])


def cell_settings(spec: SweepSpec, point: dict):
    """Apply one grid point's axis values to the templates."""
    signal, channel, recovery = spec.signal, spec.channel, spec.recovery
    for name, v in point.items():
        if name == "rho":
            signal = replace(signal, peak_scale=v * channel.lam)
        elif name == "of":
            channel = replace(channel, oversampling=v)
        elif name == "rho_eta":
            channel = replace(channel, noise=UniformNoise(v))
        elif name == "nu":
            channel = replace(channel, jitter=v)
        elif name == "bits":
            channel = replace(channel, bits=int(v))
        elif name == "input_snr_db":
            channel = replace(channel, noise=GaussianNoise(snr_db=v))
    return signal, channel, recovery


def grid_points(spec: SweepSpec) -> list[dict]:
    names = [a.name for a in spec.axes]
    return [dict(zip(names, combo)) for combo in itertools.product(*(a.values for a in spec.axes))]


def _run_cell_trials(args):
    spec, cell, point, trials = args
    signal, channel, recovery = cell_settings(spec, point)
    out = []
    for trial in trials:
        seed = trial_seed(spec.base_seed, cell, trial)
        try:
            rep = run_trial(signal, channel, recovery, seed, spec.success_rule)
            snr = None if rep.metrics is None else rep.metrics.snr_r
            out.append((cell, trial, rep.success, snr))
        except ValueError:
            out.append((cell, trial, False, None))
    return out


def _theory(spec: SweepSpec, point: dict) -> tuple:
    """(generic second-order, sinc second-order, jitter) OF thresholds."""
    signal, channel, _ = cell_settings(spec, point)
    if signal.peak_scale is None:
        return (None, None, None)
    rho = signal.peak_scale / channel.lam
    rho_eta = channel.rho_eta
    if rho_eta is None:
        return (None, None, None)
    vals = []
    for fn in (
        lambda: bounds.of_required(rho, rho_eta, variant=bounds.OFVariant.RSOD),
        lambda: bounds.of_required(rho, rho_eta, variant=bounds.OFVariant.RSOD_SINC),
        lambda: bounds.of_jitter(rho, rho_eta, channel.jitter),
    ):
        try:
            vals.append(fn())
        except bounds.InfeasibleBound:
            vals.append(None)
    return tuple(vals)


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> list[dict]:
    """One row per grid cell, in grid order."""
    points = grid_points(spec)
    trials = range(spec.trials_per_cell)
    tasks = [(spec, cell, point, trials) for cell, point in enumerate(points)]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            chunks = list(pool.map(_run_cell_trials, tasks))
    else:
        chunks = [_run_cell_trials(t) for t in tasks]
    results = sorted(itertools.chain.from_iterable(chunks), key=lambda r: (r[0], r[1]))

    rows = []
    for cell, point in enumerate(points):
        mine = [r for r in results if r[0] == cell]
        snrs = [min(r[3], INF_DB_SENTINEL) for r in mine if r[3] is not None]
        succ = sum(1 for r in mine if r[2])
        generic, sinc, jitter = _theory(spec, point)
        rows.append(
            {
                **point,
                "mean_snr_r_db": math.fsum(snrs) / len(snrs) if snrs else None,
                "success_rate": succ / len(mine),
                "theory_of_eq19": generic,
                "theory_of_eq20": sinc,
                "theory_of_eq24": jitter,
                "trials": len(mine),
                "failures": len(mine) - succ,
            }
        )
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def rows_to_csv(rows: list[dict], axis_names) -> str:
    cols = list(axis_names) + list(RESULT_COLUMNS)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def summary_json(spec: SweepSpec, rows: list[dict]) -> str:
    return json.dumps(
        {
            "axes": {a.name: list(a.values) for a in spec.axes},
            "trials_per_cell": spec.trials_per_cell,
            "base_seed": spec.base_seed,
            "success_rule": type(spec.success_rule).__name__,
            "cells": rows,
            "overall_success_rate": sum(r["success_rate"] for r in rows) / len(rows),
        },
        indent=2,
        sort_keys=True,
    ) + "\n"


def frontier(rows: list[dict], x_axis: str, of_axis: str = "of", threshold: float = 0.9) -> dict:
    """Per ``x`` value, the smallest OF from which every larger grid OF reaches
    ``threshold`` success; ``None`` when even the largest OF falls short.

    Returns ``{x: (of_below, of_frontier)}`` where ``of_below`` is the next
    smaller grid OF (``None`` at the bottom of the grid).
    """
    out = {}
    for x in sorted({r[x_axis] for r in rows}):
        col = sorted((r[of_axis], r["success_rate"]) for r in rows if r[x_axis] == x)
        ofs = [c[0] for c in col]
        idx = None
        for i in range(len(col) - 1, -1, -1):
            if col[i][1] >= threshold:
                idx = i
            else:
                break
        if idx is None:
            out[x] = (ofs[-1], None)
        else:
            out[x] = (ofs[idx - 1] if idx > 0 else None, ofs[idx])
    return out
