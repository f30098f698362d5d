import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modrecover.channel import ChannelConfig, UniformNoise, fold, transmit
from modrecover.diffcalc import Seq, diff_n
from modrecover.recovery import (
    BlockPolicy,
    RankDeficientError,
    RecoveryConfig,
    align_2lambda,
    block_length,
    estimate_kappa,
    nonuniform_ls_reconstruct,
    recover_fixed_order,
    recover_jitter_n2,
    sinc_interpolate,
    sinc_interpolate_grid,
)
from modrecover.signals import (
    SignalSpec,
    SincMixture,
    gen_signal,
    grid_for,
    make_jitter_grid,
    make_uniform_grid,
    sample,
    six_sinc_spec,
)


def _residual_contract(res, gamma, eta, lam):
    start, stop = res.valid_window
    err = res.unfolded.window(start, stop) - gamma[start:stop] - eta[start:stop]
    k = err / (2 * lam)
    assert np.ptp(err) <= 1e-9 * lam
    assert abs(k[0] - round(k[0])) <= 1e-9


@pytest.mark.parametrize(
    "order, beta, policy, expected",
    [
        (2, 10.0, "revised", 44),
        (3, 10.0, "revised", 48),
        (1, 10.0, "revised", 42),
        (4, 10.0, "baseline", 60),
        (2, 10.0, "jitter", 42),
        (2, 0.1, "revised", 5),
        (2, 0.0, "baseline", 2),
    ],
)
def test_block_length_formulas(order, beta, policy, expected):
    assert block_length(order, beta, 1.0, policy) == expected


def test_block_length_scales_with_lambda_ratio():
    assert block_length(2, 20.0, 2.0, BlockPolicy.REVISED) == block_length(2, 10.0, 1.0, BlockPolicy.REVISED)


def test_recovery_noiseless_sinc_point():
    # desk point: B = 0.5 Hz, rho = 12, OF = 18, second order
    spec = SignalSpec(SincMixture((0.0,), 0.5, (1.0,)), duration=25, start=-12.5, peak_scale=12.0)
    g = gen_signal(spec, 0)
    t0, T, n = grid_for(g, 18.0)
    gamma = sample(g, make_uniform_grid(t0, T, n)).values
    res = recover_fixed_order(fold(gamma, 1.0), RecoveryConfig(2, 1.0, g.peak))
    _residual_contract(res, gamma, np.zeros_like(gamma), 1.0)
    assert res.kappa_guard_ok


def test_no_folding_is_identity():
    g = gen_signal(six_sinc_spec(peak=0.8), 3)
    t0, T, n = grid_for(g, 5.0)
    gamma = sample(g, make_uniform_grid(t0, T, n)).values
    res = recover_fixed_order(fold(gamma, 1.0), RecoveryConfig(2, 1.0, 0.8))
    aligned, m = align_2lambda(res.unfolded, Seq(gamma[res.valid_window[0]:res.valid_window[1]], res.valid_window[0]), 1.0)
    start, stop = res.valid_window
    np.testing.assert_allclose(aligned.window(start, stop), gamma[start:stop], atol=1e-12)


@given(
    seed=st.integers(0, 2**31),
    order=st.integers(1, 4),
    rho=st.floats(1.5, 20),
    rho_eta_frac=st.floats(0.0, 0.9),
)
def test_exact_recovery_under_sufficient_condition(seed, order, rho, rho_eta_frac):
    rho_eta = rho_eta_frac / 2**order * 0.95
    # oversampling with margin above the fixed-order condition
    of = 1.1 * math.pi * (rho / (1 - 2**order * rho_eta)) ** (1 / order)
    g = gen_signal(six_sinc_spec(peak=rho), seed)
    t0, T, n = grid_for(g, of)
    samples = sample(g, make_uniform_grid(t0, T, n))
    tx = transmit(samples, ChannelConfig(lam=1.0, noise=UniformNoise(rho_eta)), seed)
    cfg = RecoveryConfig(order, 1.0, g.peak)
    if n < cfg.block_length + 2 * order + 3:
        return
    res = recover_fixed_order(tx.y, cfg)
    _residual_contract(res, samples.values, tx.eta, 1.0)


@given(seed=st.integers(0, 2**31), kappa=st.integers(-50, 50), beta=st.floats(0.5, 30), order=st.integers(2, 4))
def test_kappa_plant_and_recover(seed, kappa, beta, order):
    """A constant 2*lam*kappa lost from a stage output is found again."""
    rng = np.random.default_rng(seed)
    lam = 1.0
    J = block_length(order, beta, lam)
    gamma = rng.uniform(-beta, beta, J + 10)
    eps = fold(gamma, lam) - gamma
    true_stage = diff_n(eps, 1).values
    planted = Seq(true_stage - 2 * lam * kappa)
    assert estimate_kappa(planted, J, lam) == kappa


def test_kappa_rejects_short_or_bad_block():
    with pytest.raises(ValueError):
        estimate_kappa(np.zeros(3), 5, 1.0)
    with pytest.raises(ValueError):
        estimate_kappa(np.zeros(3), 0, 1.0)


def test_recovery_rejects_short_records():
    with pytest.raises(ValueError, match="too few"):
        recover_fixed_order(np.zeros(10), RecoveryConfig(2, 1.0, 10.0))


def test_config_validation():
    with pytest.raises(ValueError):
        RecoveryConfig(0, 1.0, 1.0)
    with pytest.raises(ValueError):
        RecoveryConfig(2, 0.0, 1.0)
    with pytest.raises(ValueError):
        RecoveryConfig(2, 1.0, -1.0)


def test_align_removes_global_multiple():
    ref = np.linspace(-3, 3, 50)
    shifted = Seq(ref + 2.0 * 1.5 * 4, origin=7)
    aligned, m = align_2lambda(shifted, Seq(ref, 7), 1.5)
    assert m == 4
    np.testing.assert_allclose(aligned.values, ref)
    with pytest.raises(ValueError):
        align_2lambda(Seq(ref, 0), Seq(ref, 100), 1.0)


def test_jitter_pipeline_keeps_instants_aligned():
    g = gen_signal(six_sinc_spec(peak=5.92), 4)
    t0, T, n = grid_for(g, 20.0)
    grid = make_jitter_grid(T, n, 0.09, 4, t0)
    samples = sample(g, grid)
    res = recover_jitter_n2(fold(samples.values, 1.0), grid, RecoveryConfig(2, 1.0, g.peak, "jitter"))
    _residual_contract(res, samples.values, np.zeros(n), 1.0)
    start, stop = res.valid_window
    np.testing.assert_array_equal(res.valid_instants(), grid.instants[start:stop])
    with pytest.raises(ValueError):
        recover_jitter_n2(np.zeros(n), grid, RecoveryConfig(3, 1.0, 1.0))
    with pytest.raises(ValueError):
        recover_jitter_n2(np.zeros(n - 1), grid, RecoveryConfig(2, 1.0, 1.0))


def test_sinc_interpolation_reproduces_samples_and_tones():
    T = 0.1
    k = np.arange(2000)
    x = np.cos(2 * np.pi * 0.7 * k * T)
    np.testing.assert_allclose(sinc_interpolate(x, T, k[:5] * T), x[:5], atol=1e-12)
    q = (1000.5 + np.arange(10)) * T
    np.testing.assert_allclose(sinc_interpolate(x, T, q), np.cos(2 * np.pi * 0.7 * q), atol=2e-3)


def test_sinc_grid_rejects_jitter():
    grid = make_jitter_grid(0.1, 50, 0.1, 1)
    with pytest.raises(ValueError):
        sinc_interpolate_grid(np.zeros(50), grid, [0.5])


def test_nonuniform_ls_recovers_bandlimited_mixture():
    g = gen_signal(six_sinc_spec(peak=3.0), 8)
    t0, T, n = grid_for(g, 8.0)
    grid = make_jitter_grid(T, n, 0.3, 8, t0)
    vals = sample(g, grid).values
    inst = grid.instants
    q = np.linspace(inst[n // 4], inst[3 * n // 4], 300)
    est = nonuniform_ls_reconstruct(vals, inst, 0.5, q)
    err = np.max(np.abs(est - g(q)))
    assert err < 1e-3 * g.peak


def test_nonuniform_ls_errors():
    t = np.arange(10.0)
    with pytest.raises(ValueError, match="Nyquist"):
        nonuniform_ls_reconstruct(np.zeros(10), t, 0.5, [1.0])
    with pytest.raises(ValueError, match="increasing"):
        nonuniform_ls_reconstruct(np.zeros(3), [0.0, 0.0, 0.1], 0.5, [0.0])
    # clustered instants leave the basis under-determined
    t = np.concatenate([np.linspace(0, 0.01, 40), [100.0]])
    with pytest.raises(RankDeficientError):
        nonuniform_ls_reconstruct(np.zeros(41), t, 0.1, [1.0], ridge=0.0, period=100.0)
