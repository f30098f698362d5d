"""Closed-form difference-order and oversampling conditions.

All oversampling values are open thresholds: recovery is guaranteed for
rates strictly above the returned value.
"""

from __future__ import annotations

import enum
import math

PI_E = math.pi * math.e
ALPHA_CAP = 64


class InfeasibleBound(ValueError):
    """The noise level is outside the region where the condition can hold."""


class OrderMode(str, enum.Enum):
    BASELINE = "baseline"
    REVISED = "revised"


class OFVariant(str, enum.Enum):
    NOISY_FIXED_N = "noisy"
    QUANTIZED = "quantized"
    RSOD = "rsod"
    RSOD_SINC = "rsod_sinc"


class JitterMode(str, enum.Enum):
    GENERIC = "generic"
    SINC = "sinc"


def _check_rho(rho: float) -> None:
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")


def nmin(rho: float, oversampling: float, mode=OrderMode.REVISED) -> int:
    """Smallest difference order for noiseless recovery at ``oversampling``."""
    _check_rho(rho)
    mode = OrderMode(mode)
    floor_of = math.pi * (math.e if mode is OrderMode.BASELINE else 1.0)
    if not oversampling > floor_of:
        raise InfeasibleBound(
            f"{mode.value} order formula needs OF > {floor_of:.4f}, got {oversampling}"
        )
    if rho <= 1:
        return 1
    return max(1, math.ceil(math.log(rho) / math.log(oversampling / floor_of)))


def of_required(rho: float, rho_eta: float = 0.0, order: int = 2, variant=OFVariant.NOISY_FIXED_N, bits: int | None = None) -> float:
    """Oversampling threshold for the fixed-order recovery conditions.

    ``noisy``      pi * (rho / (1 - 2**N rho_eta))**(1/N)
    ``quantized``  pi * (rho / (1 - 2**(N-b)))**(1/N)
    ``rsod``       pi * sqrt(rho / (1 - 4 rho_eta))
    ``rsod_sinc``  pi * sqrt(rho / (3 (1 - 4 rho_eta)))
    """
    _check_rho(rho)
    if rho_eta < 0:
        raise ValueError(f"rho_eta must be >= 0, got {rho_eta}")
    variant = OFVariant(variant)
    if variant is OFVariant.NOISY_FIXED_N:
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        slack = 1.0 - 2.0**order * rho_eta
        if slack <= 0:
            raise InfeasibleBound(f"2**{order} * rho_eta = {2.0**order * rho_eta:g} >= 1")
        return math.pi * (rho / slack) ** (1.0 / order)
    if variant is OFVariant.QUANTIZED:
        if bits is None:
            raise ValueError("quantized variant needs bits")
        if bits <= order:
            raise InfeasibleBound(f"quantized bound needs bits > order ({bits} <= {order})")
        return math.pi * (rho / (1.0 - 2.0 ** (order - bits))) ** (1.0 / order)
    if rho_eta >= 0.25:
        raise InfeasibleBound(f"second-order bounds need rho_eta < 1/4, got {rho_eta}")
    slack = 1.0 - 4.0 * rho_eta
    if variant is OFVariant.RSOD:
        return math.pi * math.sqrt(rho / slack)
    return math.pi * math.sqrt(rho / (3.0 * slack))


def of_baseline_noisy(rho: float, rho_eta: float, with_e: bool = True, alpha_cap: int = ALPHA_CAP) -> tuple[int, float]:
    """Classical noisy condition: smallest ``alpha`` with
    ``rho_eta < (2 rho)**(-1/alpha) / 4`` and ``OF = 2**alpha * pi (* e)``."""
    _check_rho(rho)
    for alpha in range(1, alpha_cap + 1):
        if rho_eta < 0.25 * (2.0 * rho) ** (-1.0 / alpha):
            of = 2.0**alpha * math.pi
            return alpha, of * math.e if with_e else of
    raise InfeasibleBound(f"no alpha <= {alpha_cap} admits rho_eta = {rho_eta}")


def of_jitter(rho: float, rho_eta: float, nu: float, mode=JitterMode.GENERIC) -> float:
    """Oversampling threshold for second-order recovery under jitter ``nu``."""
    _check_rho(rho)
    if nu < 0:
        raise ValueError(f"nu must be >= 0, got {nu}")
    if not 0 <= rho_eta < 0.25:
        raise InfeasibleBound(f"jitter bounds need 0 <= rho_eta < 1/4, got {rho_eta}")
    budget = (1.0 - 4.0 * rho_eta) / rho
    if JitterMode(mode) is JitterMode.GENERIC:
        x = -2.0 * nu + math.sqrt(4.0 * nu * nu + budget)
    else:
        x = -3.0 * nu + math.sqrt(3.0) * math.sqrt(3.0 * nu * nu + budget)
    return math.pi / x


def jitter_condition_holds(rho: float, rho_eta: float, nu: float, t_omega: float) -> bool:
    """``rho ((T Omega)**2 + 4 nu T Omega) + 4 rho_eta < 1``."""
    for name, v in (("rho", rho), ("rho_eta", rho_eta), ("nu", nu), ("t_omega", t_omega)):
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")
    return rho * (t_omega**2 + 4.0 * nu * t_omega) + 4.0 * rho_eta < 1.0


def sinad_gain_theory(rho: float) -> tuple[float, float]:
    """SINAD (dB) and ENOB (bits) gained by folding a ``rho``-times larger input."""
    if rho < 1:
        raise ValueError(f"rho must be >= 1, got {rho}")
    return 20.0 * math.log10(rho), math.log2(rho)


# reproduction grids for the two published bound tables
NOISY_TABLE_RHO = 10.0
NOISY_TABLE_RHO_ETA = (0.10, 0.12, 0.14, 0.16, 0.18, 0.20)
HARDWARE_TABLE_ROWS = ((1, 20.50), (10, 7.15), (20, 7.20), (20, 17.28), (100, 5.92))


def noisy_table_rows(rho: float = NOISY_TABLE_RHO, rho_etas=NOISY_TABLE_RHO_ETA) -> list[dict]:
    rows = []
    for re_ in rho_etas:
        row = {"rho_eta": re_}
        for n in (2, 3):
            try:
                row[f"of_n{n}"] = of_required(rho, re_, n)
            except InfeasibleBound:
                row[f"of_n{n}"] = None
        alpha, row["of_baseline"] = of_baseline_noisy(rho, re_, with_e=True)
        row["alpha"] = alpha
        row["of_baseline_no_e"] = of_baseline_noisy(rho, re_, with_e=False)[1]
        rows.append(row)
    return rows


def hardware_table_rows(rho_eta: float = 0.0) -> list[dict]:
    return [
        {
            "bandwidth_khz": b,
            "rho": rho,
            "of_rsod": of_required(rho, rho_eta, variant=OFVariant.RSOD),
            "of_rsod_sinc": of_required(rho, rho_eta, variant=OFVariant.RSOD_SINC),
        }
        for b, rho in HARDWARE_TABLE_ROWS
    ]
