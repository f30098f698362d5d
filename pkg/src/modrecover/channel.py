"""Modulo folding, mid-rise quantization and additive noise."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _rng
from .signals import SampledSignal


def fold(x, lam: float):
    """Centred modulo ``x - 2*lam*floor((x + lam) / (2*lam))``, range ``[-lam, lam)``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("fold input must be finite")
    two = 2.0 * lam
    out = arr - two * np.floor((arr + lam) / two)
    # subtraction can round onto the open end; keep the documented range
    out = np.where(out >= lam, out - two, out)
    out = np.where(out < -lam, out + two, out)
    return out if out.ndim else float(out)


def quantize(y, lam: float, bits: int):
    """Snap to the nearest of the ``2**bits`` mid-rise levels in ``[-lam, lam)``."""
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    arr = np.asarray(y, dtype=float)
    if np.any(arr < -lam) or np.any(arr >= lam):
        raise ValueError(f"quantizer input outside [-{lam}, {lam})")
    levels = 2**bits
    q = 2.0 * lam / levels
    idx = np.clip(np.floor((arr + lam) / q), 0, levels - 1)
    out = -lam + q / 2 + idx * q
    return out if out.ndim else float(out)


def clip_to_range(y, lam: float) -> np.ndarray:
    """Saturate into ``[-lam, lam)`` as an ADC front end would."""
    return np.clip(np.asarray(y, dtype=float), -lam, np.nextafter(lam, -np.inf))


@dataclass(frozen=True)
class NoNoise:
    pass


@dataclass(frozen=True)
class UniformNoise:
    """``eta ~ U[-rho_eta*lam, rho_eta*lam)``."""

    rho_eta: float


@dataclass(frozen=True)
class GaussianNoise:
    """White Gaussian noise given either as ``sigma`` (volts) or as an input SNR
    in dB relative to the mean power of the folded samples."""

    sigma: Optional[float] = None
    snr_db: Optional[float] = None

    def __post_init__(self):
        if (self.sigma is None) == (self.snr_db is None):
            raise ValueError("give exactly one of sigma or snr_db")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


Noise = Union[NoNoise, UniformNoise, GaussianNoise]


class Insertion(str, enum.Enum):
    POST_FOLD = "post_fold"  # y = M(gamma) + eta
    PRE_FOLD = "pre_fold"  # y = M(gamma + eta)


@dataclass(frozen=True)
class ChannelConfig:
    lam: float
    bits: Optional[int] = None
    noise: Noise = NoNoise()
    insertion: Insertion = Insertion.POST_FOLD
    oversampling: float = 10.0
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "insertion", Insertion(self.insertion))
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.bits is not None and self.bits < 1:
            raise ValueError(f"bits must be >= 1, got {self.bits}")
        if isinstance(self.noise, UniformNoise) and self.noise.rho_eta < 0:
            raise ValueError(f"rho_eta must be >= 0, got {self.noise.rho_eta}")
        if not 0.0 <= self.jitter < 0.5:
            raise ValueError(f"jitter must satisfy 0 <= nu < 1/2, got {self.jitter}")
        if not self.oversampling > 0:
            raise ValueError(f"oversampling must be positive, got {self.oversampling}")

    @property
    def rho_eta(self) -> Optional[float]:
        """Worst-case normalised noise level, or None when it is unbounded."""
        level = 0.0
        if isinstance(self.noise, GaussianNoise):
            return None
        if isinstance(self.noise, UniformNoise):
            level += self.noise.rho_eta
        if self.bits is not None:
            level += 2.0**-self.bits
        return level


@dataclass(frozen=True, eq=False)
class Transmission:
    """Noisy modulo samples together with the realised noise ``eta``."""

    y: np.ndarray
    eta: np.ndarray
    lam: float


def _draw_noise(noise: Noise, lam: float, folded: np.ndarray, rng) -> np.ndarray:
    n = folded.size
    if isinstance(noise, NoNoise):
        return np.zeros(n)
    if isinstance(noise, UniformNoise):
        a = noise.rho_eta * lam
        return rng.uniform(-a, a, n)
    sigma = noise.sigma
    if sigma is None:
        power = float(np.mean(folded**2))
        sigma = np.sqrt(power / 10.0 ** (noise.snr_db / 10.0))
    return rng.normal(0.0, sigma, n)


def transmit(samples: SampledSignal, cfg: ChannelConfig, seed: Optional[int] = None) -> Transmission:
    """Apply noise, folding and optional quantization to ``samples``.

    ``eta`` is returned so that ``y`` relates to ground truth exactly:
    post-fold ``y = M(gamma) + eta``; pre-fold ``y = M(gamma + eta)``.
    """
    seed = cfg.seed if seed is None else seed
    rng = _rng.philox(seed, _rng.NOISE_STREAM)
    gamma = samples.values
    lam = cfg.lam
    clean = fold(gamma, lam)
    raw = _draw_noise(cfg.noise, lam, clean, rng)

    if cfg.insertion is Insertion.POST_FOLD:
        y = clean + raw
        if cfg.bits is not None:
            y = quantize(clip_to_range(y, lam), lam, cfg.bits)
        eta = y - clean
    else:
        y = fold(gamma + raw, lam)
        pre = y
        if cfg.bits is not None:
            y = quantize(y, lam, cfg.bits)
        eta = raw + (y - pre)
    return Transmission(np.asarray(y, dtype=float), np.asarray(eta, dtype=float), lam)
