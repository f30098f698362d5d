"""Recovery of bandlimited signals from modulo (folded) samples by
finite-difference unwrapping."""

from .channel import ChannelConfig, fold, quantize, transmit
from .diffcalc import Seq, antidiff, diff_n, round_to_lattice
from .recovery import (
    BlockPolicy,
    RecoveryConfig,
    RecoveryResult,
    align_2lambda,
    estimate_kappa,
    nonuniform_ls_reconstruct,
    recover_fixed_order,
    recover_jitter_n2,
    sinc_interpolate,
)
from .signals import SignalSpec, gen_signal, make_jitter_grid, make_uniform_grid, sample

__version__ = "0.1.0"

__all__ = [
    "BlockPolicy",
    "ChannelConfig",
    "RecoveryConfig",
    "RecoveryResult",
    "Seq",
    "SignalSpec",
    "align_2lambda",
    "antidiff",
    "diff_n",
    "estimate_kappa",
    "fold",
    "gen_signal",
    "make_jitter_grid",
    "make_uniform_grid",
    "nonuniform_ls_reconstruct",
    "quantize",
    "recover_fixed_order",
    "recover_jitter_n2",
    "round_to_lattice",
    "sample",
    "sinc_interpolate",
    "transmit",
]
