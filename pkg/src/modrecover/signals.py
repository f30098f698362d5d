"""Bandlimited test signals and sampling grids.

A :class:`SignalSpec` is a declarative description; :func:`gen_signal`
turns it into an immutable :class:`BandlimitedSignal` evaluator that
knows its bandwidth and peak magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.optimize import minimize_scalar

from . import _rng

# dense peak search runs at this multiple of the Nyquist rate 2B
PEAK_SEARCH_FACTOR = 256


@dataclass(frozen=True)
class SincMixture:
    """``sum_i a_i * sinc(2B (t - s_i))``; ``coeffs=None`` draws ``a_i ~ U[-1, 1]``."""

    shifts: tuple
    bandwidth: float
    coeffs: Optional[tuple] = None


@dataclass(frozen=True)
class Tone:
    freq: float
    amplitude: float
    phase: float = 0.0

    @property
    def bandwidth(self) -> float:
        return self.freq


@dataclass(frozen=True)
class Tabulated:
    """Uniformly tabulated trace, evaluated by Whittaker-Shannon interpolation."""

    times: tuple
    values: tuple
    bandwidth: float


SignalKind = Union[SincMixture, Tone, Tabulated]


@dataclass(frozen=True)
class SignalSpec:
    """Test signal on the window ``[start, start + duration]``.

    ``peak_scale`` is the requested peak magnitude in volts (rho * lambda);
    ``None`` keeps the natural amplitude.
    """

    kind: SignalKind
    duration: float
    start: float = 0.0
    peak_scale: Optional[float] = None

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if not self.kind.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.kind.bandwidth}")
        if self.peak_scale is not None and not self.peak_scale > 0:
            raise ValueError(f"peak_scale must be positive, got {self.peak_scale}")
        k = self.kind
        if isinstance(k, SincMixture):
            if len(k.shifts) == 0:
                raise ValueError("sinc mixture needs at least one term")
            if k.coeffs is not None and len(k.coeffs) != len(k.shifts):
                raise ValueError("sinc mixture coeffs and shifts differ in length")
        if isinstance(k, Tabulated) and len(k.times) != len(k.values):
            raise ValueError("tabulated times and values differ in length")

    @property
    def bandwidth(self) -> float:
        return self.kind.bandwidth


def six_sinc_spec(peak: Optional[float] = None, duration: float = 25.0) -> SignalSpec:
    """Six unit-spaced sincs at t = 1..6 with random weights, B = 0.5 Hz,
    observed on a window centred on the mixture."""
    return SignalSpec(
        SincMixture(shifts=(1.0, 2.0, 3.0, 4.0, 5.0, 6.0), bandwidth=0.5),
        duration=duration,
        start=3.5 - duration / 2,
        peak_scale=peak,
    )


@dataclass(frozen=True, eq=False)
class BandlimitedSignal:
    """Immutable evaluator ``g(t)`` with bandwidth ``B`` (Hz) on a finite window."""

    bandwidth: float
    start: float
    duration: float
    _terms: tuple = field(repr=False)  # (kind tag, params...)
    peak: float = field(default=math.nan)

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.bandwidth

    @property
    def stop(self) -> float:
        return self.start + self.duration

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tag = self._terms[0]
        if tag == "sinc":
            _, coeffs, shifts = self._terms
            two_b = 2.0 * self.bandwidth
            out = np.zeros_like(t)
            for a, s in zip(coeffs, shifts):
                out += a * np.sinc(two_b * (t - s))
            return out
        if tag == "tone":
            _, amp, freq, phase = self._terms
            return amp * np.cos(2.0 * math.pi * freq * t + phase)
        _, scale, times, values, period = self._terms
        u = (t[..., None] - times[0]) / period - np.arange(values.size)
        return scale * (np.sinc(u) @ values)

    def bernstein_bound(self, order: int, variant: str = "generic") -> float:
        return bernstein_bound(self.omega, self.peak, order, variant)


def _find_peak(g, start: float, stop: float, bandwidth: float) -> float:
    step = 1.0 / (PEAK_SEARCH_FACTOR * 2.0 * bandwidth)
    n = max(int(math.ceil((stop - start) / step)), 2) + 1
    t = np.linspace(start, stop, n)
    mag = np.abs(g(t))
    h = t[1] - t[0]
    best = float(mag.max())
    # refine local maxima close enough to the grid peak to overtake it;
    # the grid misses the true peak by far less than 1e-3 relative
    interior = np.flatnonzero(
        (mag[1:-1] >= mag[:-2]) & (mag[1:-1] >= mag[2:])
    ) + 1
    interior = interior[mag[interior] >= best * (1.0 - 1e-3)]
    candidates = interior[np.argsort(mag[interior])[::-1][:8]]
    for i in candidates:
        lo, hi = max(t[i] - h, start), min(t[i] + h, stop)
        res = minimize_scalar(
            lambda x: -abs(float(g(np.array([x]))[0])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(1.0, abs(t[i]))},
        )
        best = max(best, -float(res.fun))
    return best


def gen_signal(spec: SignalSpec, seed: int = 0) -> BandlimitedSignal:
    """Build the evaluator for ``spec``; ``seed`` only feeds random coefficients."""
    k = spec.kind
    if isinstance(k, SincMixture):
        if k.coeffs is None:
            rng = _rng.philox(seed, _rng.SIGNAL_STREAM)
            coeffs = rng.uniform(-1.0, 1.0, len(k.shifts))
        else:
            coeffs = np.asarray(k.coeffs, dtype=float)
        terms = ("sinc", coeffs, np.asarray(k.shifts, dtype=float))
    elif isinstance(k, Tone):
        terms = ("tone", float(k.amplitude), float(k.freq), float(k.phase))
    else:
        times = np.asarray(k.times, dtype=float)
        values = np.asarray(k.values, dtype=float)
        period = _uniform_period(times)
        terms = ("table", 1.0, times, values, period)

    g = BandlimitedSignal(k.bandwidth, spec.start, spec.duration, terms)
    if isinstance(k, Tone):
        peak = abs(k.amplitude)
    else:
        peak = _find_peak(g, spec.start, g.stop, k.bandwidth)
    if spec.peak_scale is None:
        return BandlimitedSignal(k.bandwidth, spec.start, spec.duration, terms, peak)
    if peak == 0:
        raise ValueError("cannot rescale an identically zero signal")
    factor = spec.peak_scale / peak
    if terms[0] == "sinc":
        terms = ("sinc", terms[1] * factor, terms[2])
    elif terms[0] == "tone":
        terms = ("tone", terms[1] * factor, terms[2], terms[3])
    else:
        terms = ("table", terms[1] * factor, *terms[2:])
    return BandlimitedSignal(
        k.bandwidth, spec.start, spec.duration, terms, float(spec.peak_scale)
    )


def _uniform_period(times: np.ndarray) -> float:
    if times.size < 2:
        raise ValueError("tabulated signal needs at least two samples")
    steps = np.diff(times)
    period = float(steps.mean())
    if not np.allclose(steps, period, rtol=1e-6, atol=0):
        raise ValueError("tabulated signal must be uniformly sampled")
    return period


def bernstein_bound(omega: float, peak: float, order: int, variant: str = "generic") -> float:
    """Bound on ``||g^(order)||_inf`` for an ``omega``-bandlimited signal.

    ``generic`` is Bernstein's ``omega**N * peak``; ``sinc`` divides by ``N+1``.
    """
    if order < 1:
        raise ValueError(f"derivative order must be >= 1, got {order}")
    base = omega**order * peak
    if variant == "generic":
        return base
    if variant == "sinc":
        return base / (order + 1)
    raise ValueError(f"unknown variant {variant!r}")


# -- sampling grids ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SamplingGrid:
    """Instants ``t_k = t0 + k*T + mu_k``; ``nu is None`` marks a uniform grid."""

    t0: float
    T: float
    instants: np.ndarray
    nu: Optional[float] = None

    def __post_init__(self):
        inst = np.asarray(self.instants, dtype=float)
        inst.setflags(write=False)
        object.__setattr__(self, "instants", inst)
        if not self.T > 0:
            raise ValueError(f"sampling period must be positive, got {self.T}")

    @property
    def uniform(self) -> bool:
        return self.nu is None

    @property
    def offsets(self) -> np.ndarray:
        return self.instants - (self.t0 + self.T * np.arange(self.instants.size))

    def __len__(self) -> int:
        return self.instants.size


def make_uniform_grid(t0: float, T: float, count: int) -> SamplingGrid:
    return SamplingGrid(t0, T, t0 + T * np.arange(count))


def make_jitter_grid(
    T: float, count: int, nu: float, seed: int, t0: float = 0.0
) -> SamplingGrid:
    """Grid with offsets ``mu_k`` i.i.d. uniform on the open interval ``(-nu*T, nu*T)``."""
    if not 0.0 <= nu < 0.5:
        raise ValueError(f"jitter level must satisfy 0 <= nu < 1/2, got {nu}")
    if nu == 0.0:
        return make_uniform_grid(t0, T, count)
    rng = _rng.philox(seed, _rng.JITTER_STREAM)
    mu = nu * T * (2.0 * _rng.open_unit(rng, count) - 1.0)
    return SamplingGrid(t0, T, t0 + T * np.arange(count) + mu, nu=nu)


def grid_for(g: BandlimitedSignal, oversampling: float) -> tuple[float, float, int]:
    """(t0, T, count) for a grid at ``oversampling`` x Nyquist that stays one
    period inside the signal window on both ends."""
    if not oversampling > 0:
        raise ValueError(f"oversampling must be positive, got {oversampling}")
    T = 1.0 / (2.0 * g.bandwidth * oversampling)
    count = int(math.floor((g.duration - 2.0 * T) / T + 1e-9)) + 1
    if count < 2:
        raise ValueError("signal window too short for the requested sampling rate")
    return g.start + T, T, count


@dataclass(frozen=True, eq=False)
class SampledSignal:
    values: np.ndarray
    grid: SamplingGrid
    bandwidth: Optional[float] = None
    lam: Optional[float] = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if vals.size != len(self.grid):
            raise ValueError(
                f"{vals.size} values for a grid of {len(self.grid)} instants"
            )

    def __len__(self) -> int:
        return self.values.size


def sample(g: BandlimitedSignal, grid: SamplingGrid) -> SampledSignal:
    """Exact point evaluation ``gamma[k] = g(t_k)``."""
    t = grid.instants
    slack = 1e-9 * g.duration
    if t.size and (t.min() < g.start - slack or t.max() > g.stop + slack):
        raise ValueError(
            f"sampling instants [{t.min()}, {t.max()}] leave the signal window "
            f"[{g.start}, {g.stop}]"
        )
    return SampledSignal(g(t), grid, bandwidth=g.bandwidth)
