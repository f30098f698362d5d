"""Finite differences, anti-differences and rounding onto the 2*lambda lattice.

Sequences carry an ``origin`` so that repeated differencing and summation
keep track of which sample index the first element refers to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Seq:
    """A finite real sequence whose first element sits at sample ``origin``."""

    values: np.ndarray
    origin: int = 0

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("sequences are one-dimensional")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def stop(self) -> int:
        """One past the last sample index covered."""
        return self.origin + self.values.size

    def window(self, start: int, stop: int) -> np.ndarray:
        """Values on absolute sample indices ``[start, stop)``."""
        if start < self.origin or stop > self.stop or start > stop:
            raise IndexError(
                f"window [{start}, {stop}) outside [{self.origin}, {self.stop})"
            )
        return self.values[start - self.origin : stop - self.origin]

    def shifted(self, by: int) -> "Seq":
        return Seq(self.values, self.origin + by)


def as_seq(x) -> Seq:
    return x if isinstance(x, Seq) else Seq(np.asarray(x, dtype=float))


def diff_n(x, order: int) -> Seq:
    """``order``-th forward difference; ``(dx)[k] = x[k+1] - x[k]``."""
    x = as_seq(x)
    if order < 1:
        raise ValueError(f"difference order must be >= 1, got {order}")
    if len(x) <= order:
        raise ValueError(
            f"sequence of length {len(x)} too short for order-{order} difference"
        )
    return Seq(np.diff(x.values, n=order), x.origin)


def antidiff(x) -> Seq:
    """Running sum: ``out[k] = x[first] + ... + x[k]``."""
    x = as_seq(x)
    if len(x) == 0:
        raise ValueError("anti-difference of an empty sequence")
    return Seq(np.cumsum(x.values), x.origin)


def round_half_up(x):
    """Nearest integer with ties going up, i.e. ``floor(x + 1/2)``."""
    return np.floor(np.asarray(x, dtype=float) + 0.5)


def round_to_lattice(s, lam: float) -> Seq:
    """Snap every value to the nearest multiple of ``2*lam`` (ties round up)."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    s = as_seq(s)
    return Seq(2.0 * lam * round_half_up(s.values / (2.0 * lam)), s.origin)
