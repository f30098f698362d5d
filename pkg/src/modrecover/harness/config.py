"""JSON experiment configuration.

One document with optional sections ``signal``, ``channel``, ``recovery``
and ``sweep``. Every section is parsed strictly: unknown keys are errors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..channel import ChannelConfig, GaussianNoise, Insertion, NoNoise, UniformNoise
from ..recovery import BlockPolicy, NonUniformLS, NoReconstruction, Reconstruction, RecoveryConfig, SincInterp
from ..signals import SignalSpec, SincMixture, Tabulated, Tone


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RecoveryTemplate:
    """Recovery settings before lambda and the amplitude prior are known.

    ``beta_g=None`` uses the realised signal peak as the prior.
    """

    order: int = 2
    block_policy: BlockPolicy = BlockPolicy.REVISED
    beta_g: Optional[float] = None
    lam: Optional[float] = None
    reconstruction: Reconstruction = NoReconstruction()

    def __post_init__(self):
        object.__setattr__(self, "block_policy", BlockPolicy(self.block_policy))
        if self.order < 1:
            raise ValueError(f"difference order must be >= 1, got {self.order}")

    def resolve(self, lam: float, peak: float) -> RecoveryConfig:
        if self.lam is not None and not math.isclose(self.lam, lam, rel_tol=1e-12):
            raise ConfigError(f"recovery lambda {self.lam} differs from channel lambda {lam}")
        beta = peak if self.beta_g is None else self.beta_g
        return RecoveryConfig(self.order, lam, beta, self.block_policy, self.reconstruction)


@dataclass(frozen=True)
class ExactResidual:
    pass


@dataclass(frozen=True)
class SnrThreshold:
    db: float


SuccessRule = Union[ExactResidual, SnrThreshold]

AXIS_NAMES = ("rho", "of", "rho_eta", "nu", "bits", "input_snr_db")


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"unknown sweep axis {self.name!r}; expected one of {AXIS_NAMES}")
        if len(self.values) == 0:
            raise ConfigError(f"axis {self.name!r} has no values")


def axis_range(name: str, start: float, stop: float, step: float) -> Axis:
    """Inclusive arithmetic range."""
    if not step > 0 or stop < start:
        raise ConfigError(f"bad range for axis {name!r}: {start}..{stop} step {step}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return Axis(name, tuple(round(start + i * step, 12) for i in range(n + 1)))


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    trials_per_cell: int
    signal: SignalSpec
    channel: ChannelConfig
    recovery: RecoveryTemplate
    success_rule: SuccessRule = ExactResidual()
    base_seed: int = 0

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep has one or two axes")
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be >= 0")


@dataclass(frozen=True)
class Experiment:
    signal: Optional[SignalSpec] = None
    channel: Optional[ChannelConfig] = None
    recovery: Optional[RecoveryTemplate] = None
    sweep: Optional[SweepSpec] = None


# -- parsing -----------------------------------------------------------------


def _keys(d, required: set, optional: set, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    unknown = set(d) - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(d)
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")
    return d


def parse_signal(d: dict, base_dir: Path = Path(".")) -> SignalSpec:
    kind = d.get("kind") if isinstance(d, dict) else None
    common = {"duration", "start", "peak_scale"}
    try:
        if kind == "sinc_mixture":
            _keys(d, {"kind", "shifts", "bandwidth", "duration"}, common | {"coeffs"}, "signal")
            coeffs = d.get("coeffs")
            k = SincMixture(
                tuple(float(s) for s in d["shifts"]),
                float(d["bandwidth"]),
                None if coeffs is None else tuple(float(c) for c in coeffs),
            )
        elif kind == "tone":
            _keys(d, {"kind", "freq", "amplitude", "duration"}, common | {"phase"}, "signal")
            k = Tone(float(d["freq"]), float(d["amplitude"]), float(d.get("phase", 0.0)))
        elif kind == "tabulated":
            _keys(d, {"kind", "path", "bandwidth"}, common | {"column"}, "signal")
            from .traces import read_trace_columns

            cols = read_trace_columns(base_dir / d["path"])
            column = d.get("column", "input_v")
            if column not in cols:
                raise ConfigError(f"signal: trace has no column {column!r}")
            times = tuple(cols["time_s"])
            k = Tabulated(times, tuple(cols[column]), float(d["bandwidth"]))
            d = {"duration": times[-1] - times[0], "start": times[0], **d}
        else:
            raise ConfigError(f"signal: unknown kind {kind!r}")
        return SignalSpec(
            k,
            duration=float(d["duration"]),
            start=float(d.get("start", 0.0)),
            peak_scale=None if d.get("peak_scale") is None else float(d["peak_scale"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"signal: {exc}") from exc


def parse_noise(d) -> object:
    if d is None:
        return NoNoise()
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "none":
        _keys(d, {"kind"}, set(), "channel.noise")
        return NoNoise()
    if kind == "uniform":
        _keys(d, {"kind", "rho_eta"}, set(), "channel.noise")
        return UniformNoise(float(d["rho_eta"]))
    if kind == "gaussian":
        _keys(d, {"kind"}, {"sigma", "snr_db"}, "channel.noise")
        sigma, snr = d.get("sigma"), d.get("snr_db")
        return GaussianNoise(
            None if sigma is None else float(sigma), None if snr is None else float(snr)
        )
    raise ConfigError(f"channel.noise: unknown kind {kind!r}")


def parse_channel(d: dict) -> ChannelConfig:
    _keys(d, {"lambda"}, {"bits", "noise", "insertion", "oversampling", "jitter", "seed"}, "channel")
    try:
        return ChannelConfig(
            lam=float(d["lambda"]),
            bits=None if d.get("bits") is None else int(d["bits"]),
            noise=parse_noise(d.get("noise")),
            insertion=Insertion(d.get("insertion", "post_fold")),
            oversampling=float(d.get("oversampling", 10.0)),
            jitter=float(d.get("jitter", 0.0)),
            seed=int(d.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"channel: {exc}") from exc


def parse_reconstruction(d) -> Reconstruction:
    if d is None:
        return NoReconstruction()
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "none":
        _keys(d, {"kind"}, set(), "recovery.reconstruction")
        return NoReconstruction()
    if kind == "sinc":
        _keys(d, {"kind"}, set(), "recovery.reconstruction")
        return SincInterp()
    if kind == "nonuniform_ls":
        _keys(d, {"kind", "bandwidth"}, {"ridge"}, "recovery.reconstruction")
        return NonUniformLS(float(d["bandwidth"]), float(d.get("ridge", 1e-8)))
    raise ConfigError(f"recovery.reconstruction: unknown kind {kind!r}")


def parse_recovery(d: dict) -> RecoveryTemplate:
    _keys(d, set(), {"order", "lambda", "beta_g", "block_policy", "reconstruction"}, "recovery")
    try:
        return RecoveryTemplate(
            order=int(d.get("order", 2)),
            block_policy=BlockPolicy(d.get("block_policy", "revised")),
            beta_g=None if d.get("beta_g") is None else float(d["beta_g"]),
            lam=None if d.get("lambda") is None else float(d["lambda"]),
            reconstruction=parse_reconstruction(d.get("reconstruction")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"recovery: {exc}") from exc


def parse_success_rule(d) -> SuccessRule:
    if d is None:
        return ExactResidual()
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "exact_residual":
        _keys(d, {"kind"}, set(), "sweep.success_rule")
        return ExactResidual()
    if kind == "snr_threshold":
        _keys(d, {"kind", "db"}, set(), "sweep.success_rule")
        return SnrThreshold(float(d["db"]))
    raise ConfigError(f"sweep.success_rule: unknown kind {kind!r}")


def parse_axis(d: dict) -> Axis:
    if isinstance(d, dict) and "values" in d:
        _keys(d, {"name", "values"}, set(), "sweep.axes[]")
        return Axis(d["name"], tuple(float(v) for v in d["values"]))
    _keys(d, {"name", "start", "stop", "step"}, set(), "sweep.axes[]")
    return axis_range(d["name"], float(d["start"]), float(d["stop"]), float(d["step"]))


def parse_sweep(d: dict, signal, channel, recovery) -> SweepSpec:
    _keys(d, {"axes", "trials_per_cell"}, {"success_rule", "base_seed"}, "sweep")
    if signal is None or channel is None or recovery is None:
        raise ConfigError("sweep needs signal, channel and recovery sections")
    return SweepSpec(
        axes=tuple(parse_axis(a) for a in d["axes"]),
        trials_per_cell=int(d["trials_per_cell"]),
        signal=signal,
        channel=channel,
        recovery=recovery,
        success_rule=parse_success_rule(d.get("success_rule")),
        base_seed=int(d.get("base_seed", 0)),
    )


def parse_experiment(doc: dict, base_dir: Path = Path(".")) -> Experiment:
    _keys(doc, set(), {"signal", "channel", "recovery", "sweep"}, "config")
    signal = parse_signal(doc["signal"], base_dir) if "signal" in doc else None
    channel = parse_channel(doc["channel"]) if "channel" in doc else None
    recovery = parse_recovery(doc["recovery"]) if "recovery" in doc else None
    sweep = parse_sweep(doc["sweep"], signal, channel, recovery) if "sweep" in doc else None
    return Experiment(signal, channel, recovery, sweep)


def load_experiment(path) -> Experiment:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_experiment(doc, path.parent)
