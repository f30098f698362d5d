"""Reconstruction and converter quality metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

# stand-in for +inf dB in serialised output so CSV columns stay numeric
INF_DB_SENTINEL = 400.0


def _pair(ref, est) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(ref, dtype=float)
    e = np.asarray(est, dtype=float)
    if r.shape != e.shape or r.ndim != 1:
        raise ValueError(f"need equal-length 1-D windows, got {r.shape} and {e.shape}")
    if r.size == 0:
        raise ValueError("empty window")
    return r, e


def snr_r(ref, est) -> float:
    """``10 log10(sum ref**2 / sum (ref - est)**2)``; ``inf`` for a perfect match."""
    r, e = _pair(ref, est)
    signal = float(np.sum(r * r))
    if signal == 0:
        raise ValueError("reference has zero energy")
    err = float(np.sum((r - e) ** 2))
    if err == 0:
        return math.inf
    return 10.0 * math.log10(signal / err)


def psnr(ref, est, peak: float) -> float:
    """``10 log10(peak**2 / mean (ref - est)**2)``."""
    r, e = _pair(ref, est)
    if not peak > 0:
        raise ValueError(f"peak must be positive, got {peak}")
    mse = float(np.mean((r - e) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def sinad_single_tone(samples, f0: float, fs: float, times=None) -> float:
    """SINAD of a record holding one tone at known ``f0``.

    The tone and a DC term are fitted by least squares; everything left
    over counts as noise plus distortion.
    """
    x = np.asarray(samples, dtype=float)
    if not 0 < f0 < fs / 2:
        raise ValueError(f"tone frequency {f0} must lie in (0, fs/2 = {fs / 2})")
    if x.size * f0 / fs < 10:
        raise ValueError("record must span at least ten tone periods")
    t = np.arange(x.size) / fs if times is None else np.asarray(times, dtype=float)
    w = 2.0 * math.pi * f0 * t
    A = np.column_stack([np.cos(w), np.sin(w), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    tone = A[:, :2] @ coef[:2]
    resid = x - A @ coef
    p_tone = float(np.mean(tone**2))
    p_res = float(np.mean(resid**2))
    # residual at rounding level means a clean tone
    if p_res <= (64 * np.finfo(float).eps) ** 2 * max(p_tone, np.max(np.abs(x)) ** 2):
        return math.inf
    return 10.0 * math.log10(p_tone / p_res)


def enob(sinad_db: float) -> float:
    if not math.isfinite(sinad_db):
        raise ValueError("ENOB needs a finite SINAD")
    return (sinad_db - 1.76) / 6.02


def db_for_output(x: Optional[float]) -> Optional[float]:
    """Cap infinities at the documented sentinel for serialisation."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return x
    if x == math.inf:
        return INF_DB_SENTINEL
    if x == -math.inf:
        return -INF_DB_SENTINEL
    return x


@dataclass(frozen=True)
class MetricsReport:
    snr_r: float
    psnr: float
    max_abs_err: float
    success: bool
    sinad: Optional[float] = None
    enob: Optional[float] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("snr_r", "psnr", "sinad"):
            d[key] = db_for_output(d[key])
        if self.sinad is not None and not math.isfinite(self.sinad):
            d["enob"] = enob(INF_DB_SENTINEL)
        return d
