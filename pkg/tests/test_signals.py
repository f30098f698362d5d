import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modrecover.diffcalc import diff_n
from modrecover.signals import (
    SamplingGrid,
    SignalSpec,
    SincMixture,
    Tabulated,
    Tone,
    bernstein_bound,
    gen_signal,
    grid_for,
    make_jitter_grid,
    make_uniform_grid,
    sample,
    six_sinc_spec,
)


def test_single_sinc_peak_is_its_weight():
    g = gen_signal(SignalSpec(SincMixture((0.0,), 0.5, (-2.5,)), duration=20, start=-10), 0)
    assert g.peak == pytest.approx(2.5, rel=1e-12)
    assert g(0.0) == pytest.approx(-2.5)


@given(st.integers(0, 2**32), st.floats(0.5, 50))
def test_peak_scaling_hits_target(seed, peak):
    g = gen_signal(six_sinc_spec(peak=peak), seed)
    assert g.peak == peak
    t = np.linspace(g.start, g.stop, 20001)
    assert np.max(np.abs(g(t))) <= peak * (1 + 1e-12)
    assert np.max(np.abs(g(t))) >= peak * (1 - 1e-4)


def test_signal_is_deterministic_per_seed():
    a = gen_signal(six_sinc_spec(peak=4.0), 11)
    b = gen_signal(six_sinc_spec(peak=4.0), 11)
    c = gen_signal(six_sinc_spec(peak=4.0), 12)
    t = np.linspace(-5, 10, 50)
    np.testing.assert_array_equal(a(t), b(t))
    assert not np.allclose(a(t), c(t))


def test_tone_and_tabulated():
    g = gen_signal(SignalSpec(Tone(0.25, 3.0, 0.5), duration=10), 0)
    assert g.peak == 3.0 and g.bandwidth == 0.25
    assert g(0.0) == pytest.approx(3.0 * math.cos(0.5))

    t = np.arange(200) * 0.1
    x = np.cos(2 * np.pi * 0.5 * t)
    tab = gen_signal(SignalSpec(Tabulated(tuple(t), tuple(x), 1.0), duration=19.9), 0)
    np.testing.assert_allclose(tab(t[50:55]), x[50:55], atol=1e-12)
    with pytest.raises(ValueError, match="uniformly"):
        gen_signal(SignalSpec(Tabulated((0.0, 0.1, 0.3), (0.0, 1.0, 0.0), 1.0), duration=1), 0)


def test_spec_validation():
    with pytest.raises(ValueError):
        SignalSpec(Tone(0.5, 1.0), duration=0)
    with pytest.raises(ValueError):
        SignalSpec(SincMixture((), 0.5), duration=1)
    with pytest.raises(ValueError):
        SignalSpec(SincMixture((1.0, 2.0), 0.5, (1.0,)), duration=1)
    with pytest.raises(ValueError):
        SignalSpec(Tone(0.5, 1.0), duration=1, peak_scale=-1)


def test_bernstein_bound_values():
    assert bernstein_bound(2.0, 3.0, 2) == 12.0
    assert bernstein_bound(2.0, 3.0, 2, "sinc") == 4.0
    with pytest.raises(ValueError):
        bernstein_bound(1.0, 1.0, 0)
    with pytest.raises(ValueError):
        bernstein_bound(1.0, 1.0, 1, "other")


@given(st.integers(0, 2**32), st.floats(1.1, 30), st.integers(1, 4))
def test_difference_energy_bound(seed, of, order):
    """||Delta^N gamma|| <= (T Omega)^N ||g||."""
    g = gen_signal(six_sinc_spec(peak=1.0), seed)
    t0, T, n = grid_for(g, of)
    gamma = sample(g, make_uniform_grid(t0, T, n)).values
    lhs = np.max(np.abs(diff_n(gamma, order).values))
    assert lhs <= (T * g.omega) ** order * g.peak * (1 + 1e-9)


def test_grid_for_stays_inside_window():
    g = gen_signal(six_sinc_spec(), 0)
    t0, T, n = grid_for(g, 10.0)
    assert T == pytest.approx(0.1)
    assert t0 > g.start and t0 + (n - 1) * T <= g.stop
    with pytest.raises(ValueError):
        grid_for(g, 0.0)


@given(st.integers(0, 2**32), st.floats(0.0, 0.499))
def test_jitter_offsets_are_bounded(seed, nu):
    grid = make_jitter_grid(0.2, 500, nu, seed, t0=1.0)
    assert np.all(np.abs(grid.offsets) < nu * 0.2 + 1e-15) or nu == 0.0
    assert np.all(np.diff(grid.instants) > 0)


def test_jitter_grid_validation():
    with pytest.raises(ValueError):
        make_jitter_grid(0.1, 10, 0.5, 0)
    assert make_jitter_grid(0.1, 10, 0.0, 0).uniform
    with pytest.raises(ValueError):
        SamplingGrid(0.0, 0.0, np.zeros(3))


def test_sample_rejects_points_outside_window():
    g = gen_signal(six_sinc_spec(), 0)
    with pytest.raises(ValueError, match="window"):
        sample(g, make_uniform_grid(g.stop + 1, 0.1, 3))
