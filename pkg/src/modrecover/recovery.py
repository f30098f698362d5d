"""Unwrapping modulo samples by repeated differencing and summation.

The core routine lifts ``Delta^N y`` back to ``Delta^N eps`` (the residual
``eps = gamma - M(gamma)`` lives on the ``2*lam`` lattice), then sums back
down one order at a time. Each summation loses a lattice constant, which
is resolved from the slope of a second summation over a block of ``J``
samples.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import linalg

from .channel import fold
from .diffcalc import Seq, antidiff, as_seq, diff_n, round_half_up, round_to_lattice
from .signals import SamplingGrid


class BlockPolicy(str, enum.Enum):
    REVISED = "revised"  # ceil(4 (beta/lam + 2**(N-2)))
    BASELINE = "baseline"  # ceil(6 beta/lam)
    JITTER = "jitter"  # ceil(4 beta/lam + 2)


@dataclass(frozen=True)
class NoReconstruction:
    pass


@dataclass(frozen=True)
class SincInterp:
    pass


@dataclass(frozen=True)
class NonUniformLS:
    bandwidth: float
    ridge: float = 1e-8


Reconstruction = Union[NoReconstruction, SincInterp, NonUniformLS]


@dataclass(frozen=True)
class RecoveryConfig:
    order: int
    lam: float
    beta_g: float
    block_policy: BlockPolicy = BlockPolicy.REVISED
    reconstruction: Reconstruction = NoReconstruction()

    def __post_init__(self):
        object.__setattr__(self, "block_policy", BlockPolicy(self.block_policy))
        if self.order < 1:
            raise ValueError(f"difference order must be >= 1, got {self.order}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.beta_g > 0:
            raise ValueError(f"amplitude prior must be positive, got {self.beta_g}")

    @property
    def block_length(self) -> int:
        return block_length(self.order, self.beta_g, self.lam, self.block_policy)


def _ceil(x: float) -> int:
    # guard ceil against representation error, e.g. 4*(12+1) = 52.000000000000007
    return int(math.ceil(round(x, 9)))


def block_length(order: int, beta_g: float, lam: float, policy=BlockPolicy.REVISED) -> int:
    ratio = beta_g / lam
    policy = BlockPolicy(policy)
    if policy is BlockPolicy.REVISED:
        J = _ceil(4.0 * (ratio + 2.0 ** (order - 2)))
    elif policy is BlockPolicy.BASELINE:
        J = _ceil(6.0 * ratio)
    else:
        J = _ceil(4.0 * ratio + 2.0)
    return max(J, 2)


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Unfolded samples, defined up to one global multiple of ``2*lam``.

    ``valid_window`` is a half-open range of absolute sample indices.
    ``kappa_residuals`` holds, per summation stage, the distance of the
    block-slope estimate from the integer it was rounded to; values above
    1/4 mean the block-length guard was not met.
    """

    unfolded: Seq
    valid_window: tuple
    kappa_trace: tuple
    kappa_residuals: tuple
    block_length: int
    lam: float
    global_m: Optional[int] = None
    instants: Optional[Seq] = field(default=None, repr=False)

    def valid_values(self) -> np.ndarray:
        return self.unfolded.window(*self.valid_window)

    def valid_instants(self) -> np.ndarray:
        if self.instants is None:
            raise ValueError("result carries no sampling instants")
        return self.instants.window(*self.valid_window)

    @property
    def kappa_guard_ok(self) -> bool:
        return all(r <= 0.25 + 1e-12 for r in self.kappa_residuals)


def _kappa_ratio(s: Seq, J: int, lam: float) -> float:
    if len(s) < J + 1:
        raise ValueError(
            f"kappa probe needs {J + 1} values, sequence has {len(s)}"
        )
    ss = np.cumsum(s.values[: J + 1])
    return (ss[0] - ss[J]) / (2.0 * J * lam)


def estimate_kappa(s, J: int, lam: float) -> int:
    """Lattice constant lost by the last summation.

    ``s`` is the once-summed, lattice-rounded stage output; it is summed
    again and probed at its first and ``(J+1)``-th entries.
    """
    if J < 1:
        raise ValueError(f"block length must be >= 1, got {J}")
    return int(round_half_up(_kappa_ratio(as_seq(s), J, lam)))


def _check_lengths(n_samples: int, order: int, J: int) -> None:
    if n_samples < J + order + 2:
        raise ValueError(
            f"{n_samples} samples too few: order {order} with block length {J} "
            f"needs at least {J + order + 2}"
        )


def recover_fixed_order(y, cfg: RecoveryConfig) -> RecoveryResult:
    """Fixed-order difference unwrapping of noisy modulo samples."""
    y = as_seq(y)
    N, lam = cfg.order, cfg.lam
    J = cfg.block_length
    _check_lengths(len(y), N, J)

    d = diff_n(y, N)
    s = round_to_lattice(fold(d.values, lam) - d.values, lam)
    s = Seq(s.values, y.origin)

    kappas, residuals = [], []
    for _ in range(N - 1):
        # S(Delta^n eps)[k] = Delta^(n-1) eps[k+1] - const
        s = round_to_lattice(antidiff(s), lam).shifted(1)
        ratio = _kappa_ratio(s, J, lam)
        kappa = int(round_half_up(ratio))
        kappas.append(kappa)
        residuals.append(abs(ratio - kappa))
        s = Seq(s.values + 2.0 * lam * kappa, s.origin)

    eps = antidiff(s).shifted(1)
    unfolded = Seq(eps.values + y.window(eps.origin, eps.stop), eps.origin)
    start = y.origin + N + J + 1
    stop = y.stop - N
    if start >= stop:
        raise ValueError(
            f"{len(y)} samples leave an empty valid window (order {N}, block length {J})"
        )
    return RecoveryResult(
        unfolded=unfolded,
        valid_window=(start, stop),
        kappa_trace=tuple(kappas),
        kappa_residuals=tuple(residuals),
        block_length=J,
        lam=lam,
    )


def recover_jitter_n2(y, grid: SamplingGrid, cfg: RecoveryConfig) -> RecoveryResult:
    """Second-order unwrapping on a (possibly jittered) grid.

    The unwrapping itself never looks at the instants; they are attached
    to the result for non-uniform reconstruction.
    """
    if cfg.order != 2:
        raise ValueError(f"jitter pipeline is second order, got order {cfg.order}")
    y = as_seq(y)
    if len(y) != len(grid):
        raise ValueError(f"{len(y)} samples for {len(grid)} instants")
    res = recover_fixed_order(y, cfg)
    return RecoveryResult(
        unfolded=res.unfolded,
        valid_window=res.valid_window,
        kappa_trace=res.kappa_trace,
        kappa_residuals=res.kappa_residuals,
        block_length=res.block_length,
        lam=res.lam,
        instants=Seq(grid.instants, y.origin),
    )


def align_2lambda(unfolded, reference, lam: float) -> tuple[Seq, int]:
    """Remove the global ``2*lam*m`` ambiguity against ``reference``.

    ``m`` is the rounded median offset over the overlapping indices.
    """
    u, r = as_seq(unfolded), as_seq(reference)
    start, stop = max(u.origin, r.origin), min(u.stop, r.stop)
    if start >= stop:
        raise ValueError("sequences do not overlap")
    offset = np.median(u.window(start, stop) - r.window(start, stop))
    m = int(round_half_up(offset / (2.0 * lam)))
    return Seq(u.values - 2.0 * lam * m, u.origin), m


def sinc_interpolate(values, T: float, query_times, t0: float = 0.0) -> np.ndarray:
    """Whittaker-Shannon sum ``sum_k v[k] sinc((t - t0)/T - k)`` over the
    available samples; sample ``k`` of a :class:`Seq` sits at ``t0 + k*T``."""
    v = as_seq(values)
    if isinstance(values, SamplingGrid):
        raise TypeError("pass sample values, not a grid")
    k = np.arange(v.origin, v.stop)
    tq = np.asarray(query_times, dtype=float)
    u = (tq[..., None] - t0) / T - k
    return np.sinc(u) @ v.values


def sinc_interpolate_grid(values, grid: SamplingGrid, query_times) -> np.ndarray:
    if not grid.uniform:
        raise ValueError("sinc interpolation needs a uniform grid; use nonuniform_ls_reconstruct")
    return sinc_interpolate(values, grid.T, query_times, grid.t0)


class RankDeficientError(np.linalg.LinAlgError):
    pass


def nonuniform_ls_reconstruct(
    values,
    instants,
    bandwidth: float,
    query_times,
    ridge: float = 1e-8,
    period: Optional[float] = None,
) -> np.ndarray:
    """Least-squares fit of a real trigonometric basis to scattered samples.

    Frequencies are ``j/period`` with ``|j/period| <= bandwidth``; ``period``
    defaults to ``2*L*T`` for ``L`` samples at mean spacing ``T``, so the
    basis is not forced to wrap the record end onto its start. The fit is
    Tikhonov-regularised with ``ridge`` relative to the mean diagonal of
    the normal matrix.
    """
    v = np.asarray(values, dtype=float)
    t = np.asarray(instants, dtype=float)
    if v.shape != t.shape or v.ndim != 1:
        raise ValueError("values and instants must be 1-D and equally long")
    if v.size < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("instants must be strictly increasing")
    span = t[-1] - t[0]
    mean_T = span / (t.size - 1)
    if 1.0 / mean_T <= 2.0 * bandwidth:
        raise ValueError(
            f"average rate {1 / mean_T:g} Hz is not above Nyquist {2 * bandwidth:g} Hz"
        )
    if period is None:
        period = 2.0 * t.size * mean_T
    centre = 0.5 * (t[0] + t[-1])
    n_freq = int(math.floor(bandwidth * period + 1e-9))
    freqs = np.arange(1, n_freq + 1) / period

    def design(times):
        phase = 2.0 * math.pi * np.outer(np.asarray(times, dtype=float) - centre, freqs)
        return np.hstack([np.ones((np.size(times), 1)), np.cos(phase), np.sin(phase)])

    A = design(t)
    G = A.T @ A
    scale = float(np.trace(G)) / G.shape[0]
    G[np.diag_indices_from(G)] += ridge * scale
    try:
        c, low = linalg.cho_factor(G, check_finite=False)
    except linalg.LinAlgError as exc:
        raise RankDeficientError(f"normal equations singular at ridge {ridge:g}") from exc
    diag = np.abs(np.diag(c))
    if diag.min() <= 1e-7 * diag.max():
        raise RankDeficientError(f"normal equations rank deficient at ridge {ridge:g}")
    coef = linalg.cho_solve((c, low), A.T @ v, check_finite=False)
    return design(query_times) @ coef
