import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.signal import lfilter

from warpmesh.errors import ConfigError, NumericalDomainError
from warpmesh.warp import (
    AllpassSpec,
    AllpassState,
    WarpedDelayState,
    allpass_filter,
    allpass_step,
    dc_realignment,
    phase_delay,
    warp_frequency,
    warp_frequency_inverse,
    warped_delay_step,
)

alphas = st.floats(min_value=-0.99, max_value=0.0)


def direct_warp(omega, alpha):
    """Oracle: unwrapped phase lag of e^{-jw} A(e^{jw})."""
    w = np.linspace(0, omega, 4097)
    h = np.exp(-1j * w) * AllpassSpec(alpha).response(w)
    return -np.unwrap(np.angle(h))[-1]


@pytest.mark.parametrize("alpha", [0.0, -0.25, -0.45, -0.9])
def test_allpass_matches_lfilter(alpha):
    x = np.random.default_rng(1).standard_normal(500)
    y = allpass_filter(AllpassSpec(alpha), x)
    assert np.allclose(y, lfilter([alpha, 1.0], [1.0, alpha], x), atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(alphas, st.floats(min_value=0.0, max_value=math.pi))
def test_unit_magnitude(alpha, w):
    assert abs(abs(AllpassSpec(alpha).response(w)) - 1.0) < 1e-12


def test_impulse_energy_preserved():
    h = allpass_filter(AllpassSpec(-0.45), np.r_[1.0, np.zeros(4000)])
    assert np.sum(h**2) == pytest.approx(1.0, abs=1e-12)


def test_alpha_zero_is_unit_delay():
    y = allpass_filter(AllpassSpec(0.0), [1.0, 2.0, 3.0])
    assert y.tolist() == [0.0, 1.0, 2.0]


def test_step_example():
    y, st1 = allpass_step(AllpassSpec(-0.45), AllpassState(), 1.0)
    assert y == pytest.approx(-0.45)
    assert st1.s == pytest.approx(1.0 - 0.2025)


def test_warped_delay_is_delay_then_allpass():
    spec = AllpassSpec(-0.3)
    x = np.random.default_rng(2).standard_normal(64)
    state = WarpedDelayState()
    out = []
    for v in x:
        y, state = warped_delay_step(spec, state, v)
        out.append(y)
    ref = lfilter([0.0, -0.3, 1.0], [1.0, -0.3], x)
    assert np.allclose(out, ref, atol=1e-13)


@pytest.mark.parametrize("bad", [0.3, -1.0, 1.0, float("nan")])
def test_alpha_domain(bad):
    with pytest.raises(ConfigError):
        AllpassSpec(bad)


@pytest.mark.parametrize("alpha", [0.0, -0.25, -0.45, -0.9])
def test_warp_matches_direct_phase(alpha):
    for w in (0.1, 1.0, math.pi / 2, 2.5, 3.1):
        assert warp_frequency(w, alpha) == pytest.approx(direct_warp(w, alpha), abs=1e-9)


def test_warp_endpoints_and_alpha_zero():
    assert warp_frequency(0.0, -0.45) == 0.0
    assert warp_frequency(math.pi, -0.45) == pytest.approx(2 * math.pi)
    w = np.linspace(0, math.pi, 50)
    assert np.allclose(warp_frequency(w, 0.0), 2 * w, atol=1e-14)


def test_warp_monotone():
    w = np.linspace(0, math.pi, 2001)
    assert np.all(np.diff(warp_frequency(w, -0.9)) > 0)


@settings(max_examples=100, deadline=None)
@given(alphas, st.floats(min_value=0.0, max_value=math.pi))
def test_round_trip(alpha, w):
    assert warp_frequency_inverse(warp_frequency(w, alpha), alpha) == pytest.approx(w, abs=1e-10)


@pytest.mark.parametrize("alpha", [-0.1, -0.45, -0.8])
def test_inverse_against_brentq(alpha):
    for wt in (0.05, 1.3, 3.0, 5.5, 6.2):
        ref = brentq(lambda w: warp_frequency(w, alpha) - wt, 0.0, math.pi, xtol=1e-14)
        assert warp_frequency_inverse(wt, alpha) == pytest.approx(ref, abs=1e-10)


def test_domain_errors():
    with pytest.raises(NumericalDomainError):
        warp_frequency(3.5, -0.45)
    with pytest.raises(NumericalDomainError):
        warp_frequency_inverse(7.0, -0.45)
    with pytest.raises(NumericalDomainError):
        warp_frequency(-0.1, -0.45)


def test_phase_delay():
    spec = AllpassSpec(-0.45)
    assert phase_delay(0.0, spec) == pytest.approx(1.45 / 0.55)
    assert phase_delay(1e-6, spec) == pytest.approx(1.45 / 0.55, rel=1e-9)
    w = 1.2
    assert phase_delay(w, spec) == pytest.approx(-np.angle(spec.response(w)) / w, abs=1e-12)
    assert phase_delay(1.0, 0.0) == pytest.approx(1.0)


def test_dc_realignment():
    assert dc_realignment(0.0) == pytest.approx(2.0)
    assert dc_realignment(-0.45) == pytest.approx(2.0 / 0.55)
    # small-frequency slope of the inverse map is 1/rho
    assert warp_frequency_inverse(1e-7, -0.45) * dc_realignment(-0.45) == pytest.approx(1e-7, rel=1e-9)
