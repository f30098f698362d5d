"""One end-to-end trial: generate, sample, transmit, recover, score."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import bounds
from ..channel import ChannelConfig, transmit
from ..diffcalc import Seq
from ..metrics import MetricsReport, enob, psnr, sinad_single_tone, snr_r
from ..recovery import (
    NonUniformLS,
    RecoveryResult,
    SincInterp,
    align_2lambda,
    nonuniform_ls_reconstruct,
    recover_fixed_order,
    recover_jitter_n2,
    sinc_interpolate_grid,
)
from ..signals import (
    BandlimitedSignal,
    SignalSpec,
    Tone,
    gen_signal,
    grid_for,
    make_jitter_grid,
    make_uniform_grid,
    sample,
)
from .config import ExactResidual, RecoveryTemplate, SnrThreshold, SuccessRule

# ExactResidual tolerance, in units of lambda
EXACT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TrialReport:
    seed: int
    success: bool
    metrics: Optional[MetricsReport]
    unwrap_error: float  # max |gamma~ - 2m lam - gamma - eta| / lam on the valid window
    condition_holds: Optional[bool]
    kappa_trace: tuple = ()
    global_m: Optional[int] = None
    valid_window: Optional[tuple] = None
    recon_snr_db: Optional[float] = None
    error: Optional[str] = None
    recovered: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        from ..metrics import db_for_output

        return {
            "seed": self.seed,
            "success": self.success,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "unwrap_error": self.unwrap_error,
            "condition_holds": self.condition_holds,
            "kappa_trace": list(self.kappa_trace),
            "global_m": self.global_m,
            "valid_window": None if self.valid_window is None else list(self.valid_window),
            "recon_snr_db": db_for_output(self.recon_snr_db),
            "error": self.error,
        }


def theory_condition(g: BandlimitedSignal, channel: ChannelConfig, order: int, T: float) -> Optional[bool]:
    """Whether the sufficient recovery condition holds for this trial."""
    rho_eta = channel.rho_eta
    if rho_eta is None:
        return None
    rho = g.peak / channel.lam
    t_omega = T * g.omega
    if channel.jitter > 0:
        if order != 2:
            return None
        return bounds.jitter_condition_holds(rho, rho_eta, channel.jitter, t_omega)
    return rho * t_omega**order + 2.0**order * rho_eta < 1.0


def _reconstruct(res: RecoveryResult, aligned, grid, g: BandlimitedSignal, method) -> Optional[float]:
    """SNR of the continuous-time reconstruction against ``g`` on the central
    half of the valid window, probed between sample instants."""
    start, stop = res.valid_window
    inst = grid.instants[start:stop]
    vals = aligned.window(start, stop)
    lo, hi = inst[0], inst[-1]
    quarter = (hi - lo) / 4
    q = inst[(inst > lo + quarter) & (inst < hi - quarter)]
    q = 0.5 * (q[:-1] + q[1:])
    if q.size < 2:
        return None
    if isinstance(method, SincInterp):
        est = sinc_interpolate_grid(aligned, grid, q)
    else:
        est = nonuniform_ls_reconstruct(vals, inst, method.bandwidth, q, ridge=method.ridge)
    return snr_r(g(q), est)


def run_trial(
    signal: SignalSpec,
    channel: ChannelConfig,
    recovery: RecoveryTemplate,
    seed: Optional[int] = None,
    success_rule: SuccessRule = ExactResidual(),
) -> TrialReport:
    """Deterministic given ``seed`` (defaults to ``channel.seed``); recovery
    failures come back as unsuccessful reports rather than exceptions."""
    seed = channel.seed if seed is None else seed
    g = gen_signal(signal, seed)
    t0, T, count = grid_for(g, channel.oversampling)
    if channel.jitter > 0:
        grid = make_jitter_grid(T, count, channel.jitter, seed, t0=t0)
    else:
        grid = make_uniform_grid(t0, T, count)
    samples = sample(g, grid)
    tx = transmit(samples, channel, seed)
    cond = theory_condition(g, channel, recovery.order, T)

    try:
        cfg = recovery.resolve(channel.lam, g.peak)
        if channel.jitter > 0:
            res = recover_jitter_n2(tx.y, grid, cfg)
        else:
            res = recover_fixed_order(tx.y, cfg)
    except ValueError as exc:
        return TrialReport(seed, False, None, math.inf, cond, error=str(exc))

    lam = channel.lam
    start, stop = res.valid_window
    gamma = samples.values[start:stop]
    target = gamma + tx.eta[start:stop]
    aligned, m = align_2lambda(res.unfolded, Seq(target, start), lam)
    rec = aligned.window(start, stop)
    unwrap_err = float(np.max(np.abs(rec - target))) / lam
    exact = unwrap_err <= EXACT_TOL

    s = snr_r(gamma, rec) if np.any(gamma) else math.inf
    p = psnr(gamma, rec, g.peak)
    sinad = enob_v = None
    if isinstance(signal.kind, Tone) and channel.jitter == 0:
        try:
            sinad = sinad_single_tone(rec, signal.kind.freq, 1.0 / T)
            enob_v = enob(sinad) if math.isfinite(sinad) else None
        except ValueError:
            sinad = None
    max_abs = unwrap_err * lam
    if isinstance(success_rule, SnrThreshold):
        success = s >= success_rule.db and max_abs < lam / 2
    else:
        success = exact
    report = MetricsReport(s, p, max_abs, success, sinad, enob_v)

    recon = None
    method = cfg.reconstruction
    if isinstance(method, (SincInterp, NonUniformLS)):
        if isinstance(method, SincInterp) and channel.jitter > 0:
            raise ValueError("sinc reconstruction needs a uniform grid")
        recon = _reconstruct(res, aligned, grid, g, method)

    return TrialReport(
        seed=seed,
        success=success,
        metrics=report,
        unwrap_error=unwrap_err,
        condition_holds=cond,
        kappa_trace=res.kappa_trace,
        global_m=m,
        valid_window=res.valid_window,
        recon_snr_db=recon,
        recovered=rec,
    )
