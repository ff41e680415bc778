import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from bzwave.bessel import j0, j1
from bzwave.profiles import (Bump, Constant, Gaussian, Linear, ScaledDerivative, Sech2,
                             Tabulated, Zero, make_profile, profile_to_dict)

SMOOTH = [Gaussian(0.3, 1.7, 0.4), Sech2(0.2, 1.3, -0.5), Bump(0.7, 2.0, 0.3)]


@pytest.mark.parametrize("p", SMOOTH, ids=lambda p: p.name)
def test_derivatives_match_finite_differences(p):
    s = np.linspace(-3, 3, 41)
    h = 1e-4
    for n in range(3):
        lower, upper = p.derivative(n, s - h), p.derivative(n, s + h)
        fd = (upper - lower) / (2 * h)
        assert np.allclose(p.derivative(n + 1, s), fd, atol=1e-6 * max(1.0, np.abs(fd).max()))


@pytest.mark.parametrize("p", SMOOTH, ids=lambda p: p.name)
def test_antiderivative_against_quadrature(p):
    for s in (-2.5, -0.3, 0.0, 1.1, 2.4):
        ref, _ = integrate.quad(lambda u: float(p.value(u)), 0.0, s, epsabs=1e-14, epsrel=1e-13)
        assert float(p.antiderivative(s)) == pytest.approx(ref, abs=1e-12)


def test_bump_is_compact():
    b = Bump(1.0, 1.5, 0.5)
    assert b.value(0.5) == pytest.approx(1.0)
    assert np.all(b.value(np.array([-1.0, 2.0, 5.0])) == 0)
    total, _ = integrate.quad(lambda u: float(b.value(u)), -1.0, 2.0, epsabs=1e-14)
    assert float(b.antiderivative(10.0) - b.antiderivative(-10.0)) == pytest.approx(total, abs=1e-13)


def test_simple_families():
    s = np.array([-1.0, 0.0, 2.0])
    assert np.all(Zero().value(s) == 0) and np.all(Zero().antiderivative(s) == 0)
    assert np.allclose(Constant(0.3).antiderivative(s), 0.3 * s)
    assert np.allclose(Linear(2.0, 1.0).antiderivative(s), s**2 + s)
    sd = ScaledDerivative(Gaussian(0.1, 2.0), -1.0)
    assert np.allclose(sd.value(s), -Gaussian(0.1, 2.0).d1(s))


def test_tabulated_spline_reproduces_cubic():
    s = np.linspace(-2, 2, 21)
    t = Tabulated(tuple(s), tuple(s**3 - s))
    assert float(t.value(0.7)) == pytest.approx(0.7**3 - 0.7, abs=1e-2)
    assert float(t.value(3.0)) == 0.0


@pytest.mark.parametrize("p", SMOOTH + [Zero(), Constant(0.2), Linear(1.0, 0.5)], ids=lambda p: p.name)
def test_profile_dict_round_trip(p):
    assert make_profile(profile_to_dict(p)) == p


def test_unknown_family():
    with pytest.raises(KeyError):
        make_profile({"family": "spline9"})


@pytest.mark.parametrize("r", [0.0, 0.5, 2.404825557695773, 7.9, 8.0, 8.1, 15.0, 24.9, 25.0, 40.0, 50.0])
def test_bessel_against_scipy(r):
    assert j0(r) == pytest.approx(special.j0(r), abs=1e-14)
    assert j1(r) == pytest.approx(special.j1(r), abs=1e-14)


@given(st.floats(1e-3, 50.0))
def test_bessel_accuracy_and_wronskian_like_identity(r):
    assert abs(j0(r) - special.j0(r)) < 1e-14
    assert abs(j1(r) - special.j1(r)) < 1e-14
    assert abs(j1(-r) + j1(r)) == 0


def test_bessel_first_zero():
    assert abs(j0(2.404825557695773)) < 1e-14
