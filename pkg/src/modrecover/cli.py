"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 recovery
contract violation under ``recover --strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bounds
from .harness.config import ConfigError, load_experiment
from .harness.sweep import rows_to_csv, run_sweep, summary_json
from .harness.traces import DEFAULT_SLACK, TraceError, ingest_trace
from .harness.trial import run_trial
from .metrics import db_for_output, psnr, snr_r
from .recovery import (
    BlockPolicy,
    RecoveryConfig,
    align_2lambda,
    recover_fixed_order,
    recover_jitter_n2,
)
from .diffcalc import Seq

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_STRICT = 4

BOUND_KINDS = ("noisy", "quantized", "rsod", "rsod_sinc", "baseline", "jitter", "jitter_sinc", "nmin")


class StrictViolation(Exception):
    pass


def _write_table(rows: list[dict], cols: list[str], fmt: str, out) -> None:
    def cell(v):
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v) if fmt == "csv" else f"{v:.4f}"
        return str(v)

    body = [[cell(r.get(c)) for c in cols] for r in rows]
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        w.writerows(body)
        return
    widths = [max(len(c), *(len(b[i]) for b in body)) if body else len(c) for i, c in enumerate(cols)]
    out.write("  ".join(c.rjust(w) for c, w in zip(cols, widths)) + "\n")
    for b in body:
        out.write("  ".join((v or "-").rjust(w) for v, w in zip(b, widths)) + "\n")


def _bound_value(kind: str, rho: float, rho_eta: float, args) -> float:
    if kind in ("noisy", "quantized", "rsod", "rsod_sinc"):
        return bounds.of_required(rho, rho_eta, args.order, kind, args.bits)
    if kind == "baseline":
        return bounds.of_baseline_noisy(rho, rho_eta, with_e=not args.no_e)[1]
    if kind in ("jitter", "jitter_sinc"):
        mode = bounds.JitterMode.SINC if kind == "jitter_sinc" else bounds.JitterMode.GENERIC
        return bounds.of_jitter(rho, rho_eta, args.nu, mode)
    if args.of is None:
        raise ConfigError("nmin needs --of")
    return bounds.nmin(rho, args.of, args.order_mode)


def cmd_bounds(args) -> int:
    if args.preset == "noisy":
        rows = bounds.noisy_table_rows()
        cols = ["rho_eta", "of_n2", "of_n3", "alpha", "of_baseline", "of_baseline_no_e"]
    elif args.preset == "hardware":
        rows = bounds.hardware_table_rows(args.rho_eta[0] if args.rho_eta else 0.0)
        cols = ["bandwidth_khz", "rho", "of_rsod", "of_rsod_sinc"]
    else:
        if not args.rho:
            raise ConfigError("give --rho values or a --preset")
        rows = []
        for rho, re_ in itertools.product(args.rho, args.rho_eta or [0.0]):
            try:
                value = _bound_value(args.kind, rho, re_, args)
            except bounds.InfeasibleBound:
                value = None
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            rows.append({"rho": rho, "rho_eta": re_, args.kind: value})
        cols = ["rho", "rho_eta", args.kind]
    _write_table(rows, cols, args.format, sys.stdout)
    return EXIT_OK


def cmd_simulate(args) -> int:
    exp = load_experiment(args.config)
    if exp.signal is None or exp.channel is None or exp.recovery is None:
        raise ConfigError("simulate needs signal, channel and recovery sections")
    seed = exp.channel.seed if args.seed is None else args.seed
    try:
        rep = run_trial(exp.signal, exp.channel, exp.recovery, seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    json.dump(rep.to_dict(), sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    exp = load_experiment(args.config)
    if exp.sweep is None:
        raise ConfigError("config has no sweep section")
    spec = exp.sweep
    rows = run_sweep(spec, parallelism=args.parallelism)
    table = rows_to_csv(rows, [a.name for a in spec.axes])
    if args.out is None:
        sys.stdout.write(table)
    else:
        Path(args.out).write_text(table, encoding="utf-8")
    if args.summary is not None:
        Path(args.summary).write_text(summary_json(spec, rows), encoding="utf-8")
    return EXIT_OK


def _recovery_config(args, lam: float) -> RecoveryConfig:
    order, policy, beta = args.order, args.block_policy, args.beta
    if args.config is not None:
        exp = load_experiment(args.config)
        if exp.recovery is None:
            raise ConfigError("config has no recovery section")
        t = exp.recovery
        if t.lam is not None and not math.isclose(t.lam, lam, rel_tol=1e-12):
            raise ConfigError(f"recovery lambda {t.lam} differs from trace lambda {lam}")
        order, policy = t.order, t.block_policy.value
        beta = t.beta_g if beta is None else beta
    if beta is None:
        raise ConfigError("an amplitude prior is required: --beta or recovery.beta_g")
    try:
        return RecoveryConfig(order, lam, beta, BlockPolicy(policy))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_recover(args) -> int:
    folded, ref = ingest_trace(args.trace, args.lam, args.fs, args.slack)
    lam = folded.lam
    cfg = _recovery_config(args, lam)
    grid = folded.grid
    if grid.uniform:
        res = recover_fixed_order(folded.values, cfg)
    else:
        if cfg.order != 2:
            raise ConfigError("a jittered trace needs order 2")
        res = recover_jitter_n2(folded.values, grid, cfg)
    start, stop = res.valid_window
    unfolded = res.unfolded
    summary = {
        "samples": len(folded),
        "valid_window": [start, stop],
        "block_length": res.block_length,
        "kappa_trace": list(res.kappa_trace),
        "kappa_guard_ok": res.kappa_guard_ok,
    }
    if ref is not None:
        target = Seq(ref.values[start:stop], start)
        unfolded, m = align_2lambda(unfolded, target, lam)
        rec = unfolded.window(start, stop)
        summary["global_m"] = m
        summary["snr_r_db"] = db_for_output(snr_r(target.values, rec))
        summary["psnr_db"] = db_for_output(psnr(target.values, rec, cfg.beta_g))
        summary["max_abs_err"] = float(np.max(np.abs(rec - target.values)))
    values = unfolded.window(start, stop)
    times = grid.instants[start:stop]

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_s", "recovered_v"])
    for t, v in zip(times, values):
        w.writerow([repr(float(t)), repr(float(v))])
    if args.out is None:
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")

    problems = []
    if not res.kappa_guard_ok:
        problems.append("block-slope estimate missed the integer guard")
    spread = float(np.ptp(values))
    if spread > 2.0 * cfg.beta_g + 2.0 * lam:
        problems.append(f"recovered span {spread:g} exceeds the amplitude prior")
    summary["violations"] = problems
    json.dump(summary, sys.stderr if args.out is None else sys.stdout, indent=2, sort_keys=True)
    (sys.stderr if args.out is None else sys.stdout).write("\n")
    if args.strict and problems:
        raise StrictViolation("; ".join(problems))
    return EXIT_OK


def cmd_ingest(args) -> int:
    folded, ref = ingest_trace(args.trace, args.lam, args.fs, args.slack)
    grid = folded.grid
    json.dump(
        {
            "samples": len(folded),
            "lambda": folded.lam,
            "fs": 1.0 / grid.T,
            "uniform": grid.uniform,
            "nu": grid.nu,
            "has_reference": ref is not None,
        },
        sys.stdout,
        indent=2,
        sort_keys=True,
    )
    sys.stdout.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="modrecover", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="tabulate oversampling and order conditions")
    b.add_argument("--preset", choices=("noisy", "hardware"))
    b.add_argument("--kind", choices=BOUND_KINDS, default="noisy")
    b.add_argument("--rho", type=float, nargs="+")
    b.add_argument("--rho-eta", type=float, nargs="+")
    b.add_argument("--order", type=int, default=2)
    b.add_argument("--bits", type=int)
    b.add_argument("--nu", type=float, default=0.0)
    b.add_argument("--of", type=float, help="oversampling factor for --kind nmin")
    b.add_argument("--order-mode", choices=("revised", "baseline"), default="revised")
    b.add_argument("--no-e", action="store_true", help="baseline OF without the factor e")
    b.add_argument("--format", choices=("text", "csv"), default="text")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("simulate", help="run one seeded trial")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="run a Monte-Carlo sweep")
    w.add_argument("config")
    w.add_argument("--out", help="results CSV (default stdout)")
    w.add_argument("--summary", help="JSON summary path")
    w.add_argument("--parallelism", type=int, default=1)
    w.set_defaults(func=cmd_sweep)

    def trace_args(sp):
        sp.add_argument("trace")
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--fs", type=float)
        sp.add_argument("--slack", type=float, default=DEFAULT_SLACK)

    r = sub.add_parser("recover", help="unfold a captured trace")
    trace_args(r)
    r.add_argument("--config", help="JSON document with a recovery section")
    r.add_argument("--order", type=int, default=2)
    r.add_argument("--block-policy", choices=[m.value for m in BlockPolicy], default="revised")
    r.add_argument("--beta", type=float, help="amplitude prior in volts")
    r.add_argument("--out", help="recovered CSV (default stdout)")
    r.add_argument("--strict", action="store_true")
    r.set_defaults(func=cmd_recover)

    i = sub.add_parser("ingest", help="validate a trace file")
    trace_args(i)
    i.set_defaults(func=cmd_ingest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "parallelism", 1) < 1:
        print("error: --parallelism must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StrictViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_STRICT
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
