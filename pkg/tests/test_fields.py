import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bzwave.alpha import AlphaData
from bzwave.errors import (LambdaDegenerate, NonPositiveAlpha, NonPositiveF,
                           NonPositiveScale, NotPositiveDefinite)
from bzwave.fields import (FieldState, FirstJet, Grid1D, MetricBlock, SpacetimePoint,
                           fields_from_metric, gauge_transform, metric_from_fields,
                           null_coords, null_derivatives, null_form_q0)
from bzwave.profiles import Gaussian

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize("t,x,u,ub", [(0, 0, 0, 0), (2, 0, 1, 1), (3, 1, 2, 1)])
def test_null_coords(t, x, u, ub):
    n = null_coords(SpacetimePoint(t, x))
    assert (n.u, n.ubar) == (u, ub)


@given(finite, finite)
def test_null_coords_round_trip(t, x):
    n = null_coords(SpacetimePoint(t, x))
    assert n.u + n.ubar == pytest.approx(t, abs=1e-12 * (1 + abs(t) + abs(x)))
    assert n.u - n.ubar == pytest.approx(x, abs=1e-12 * (1 + abs(t) + abs(x)))


@pytest.mark.parametrize("dt,dx,L,Lb", [(1, 0, 1, 1), (1, 1, 2, 0), (2, -3, -1, 5)])
def test_null_derivatives(dt, dx, L, Lb):
    assert null_derivatives(FirstJet(0.0, dt, dx)) == (L, Lb)


def test_null_derivatives_on_null_coordinates():
    # u = (t + x)/2 has (dt, dx) = (1/2, 1/2); ubar = (t - x)/2 has (1/2, -1/2)
    assert null_derivatives(FirstJet(0.0, 0.5, 0.5)) == (1.0, 0.0)
    assert null_derivatives(FirstJet(0.0, 0.5, -0.5)) == (0.0, 1.0)


def test_q0_examples():
    assert null_form_q0(FirstJet(0, 1, 0), FirstJet(0, 1, 0)) == -1
    assert null_form_q0(FirstJet(0, 1, 1), FirstJet(0, 1, 1)) == 0
    assert null_form_q0(FirstJet(0, 1, 2), FirstJet(0, 3, 4)) == 5


small_ints = st.integers(-20, 20)


@given(small_ints, small_ints, small_ints, small_ints, small_ints, small_ints, small_ints, small_ints)
def test_q0_bilinear_symmetric(a, b, f1, f2, g1, g2, h1, h2):
    f, g, h = FirstJet(0, f1, f2), FirstJet(0, g1, g2), FirstJet(0, h1, h2)
    comb = FirstJet(0, a * f1 + b * g1, a * f2 + b * g2)
    assert null_form_q0(comb, h) == a * null_form_q0(f, h) + b * null_form_q0(g, h)
    assert null_form_q0(f, g) == null_form_q0(g, f)


def test_metric_examples():
    m = metric_from_fields(0.0, 0.7, 1.0)
    assert np.allclose([m.g11, m.g12, m.g22], [1, 0, 1])
    m = metric_from_fields(np.log(2), 0.0, 1.0)
    assert np.allclose([m.g11, m.g12, m.g22], [2, 0, 0.5], rtol=1e-15)
    m = metric_from_fields(np.log(2), np.pi / 4, 1.0)
    assert np.allclose([m.g11, m.g12, m.g22], [1.25, 0.75, 1.25], rtol=1e-15, atol=1e-15)
    assert m.det == pytest.approx(1.0, rel=1e-14)


def test_metric_errors():
    with pytest.raises(NonPositiveAlpha):
        metric_from_fields(0.1, 0.2, 0.0)
    with pytest.raises(NonPositiveF):
        metric_from_fields(0.1, 0.2, 1.0, f=-1.0)


@given(st.floats(-4, 4), st.floats(0, 2 * np.pi), st.floats(1e-3, 1e3))
def test_det_equals_alpha_squared(lam, phi, alpha):
    # entries cancel: relative error ~ 2 eps cosh^2(Lambda), below 1e-12 for |Lambda| <= 4
    m = metric_from_fields(lam, phi, alpha)
    assert m.det == pytest.approx(alpha**2, rel=1e-12)


def test_fields_from_metric_examples():
    ex = fields_from_metric(MetricBlock(1.0, 0.0, 1.0))
    assert (ex.lam, ex.phi, ex.alpha) == (0.0, 0.0, 1.0)
    assert ex.degenerate
    ex = fields_from_metric(MetricBlock(2.0, 0.0, 0.5))
    assert ex.lam == pytest.approx(np.log(2), rel=1e-14)
    assert ex.phi == 0.0 and ex.alpha == pytest.approx(1.0)
    ex = fields_from_metric(MetricBlock(3.5, np.sqrt(3) / 2, 0.5))
    assert ex.lam == pytest.approx(np.arccosh(2), rel=1e-13)
    assert ex.lam == pytest.approx(1.31696, abs=1e-5)
    assert ex.phi == pytest.approx(np.pi / 12, rel=1e-13)
    assert ex.alpha == pytest.approx(1.0, rel=1e-14)


def test_fields_from_metric_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        fields_from_metric(MetricBlock(1.0, 2.0, 1.0))
    with pytest.raises(NotPositiveDefinite):
        fields_from_metric(MetricBlock(-1.0, 0.0, -1.0))


@given(st.floats(1e-3, 6), st.floats(0, 2 * np.pi), st.floats(1e-2, 1e3))
def test_round_trip(lam, phi, alpha):
    ex = fields_from_metric(metric_from_fields(lam, phi, alpha))
    assert ex.lam == pytest.approx(lam, rel=1e-10)
    assert ex.alpha == pytest.approx(alpha, rel=1e-10)
    dphi = (ex.phi - phi) % np.pi
    assert min(dphi, np.pi - dphi) < 1e-10 * max(1.0, 1 / np.sinh(lam))
    assert 0 <= ex.phi < np.pi


def _state(alpha=None):
    g = Grid1D(-5, 5, 41)
    x = g.x
    return FieldState(0.0, g, 0.1 * np.exp(-x**2), 0 * x, 0.2 * np.exp(-x**2), 0 * x,
                      0.05 * x, 0 * x, 1.0, alpha)


def test_field_state_is_read_only_and_guarded():
    s = _state()
    with pytest.raises(ValueError):
        s.phi[0] = 1.0
    s.check_guard(0.5)
    bad = s.replace(lambda_tilde=s.lambda_tilde - 0.9)
    with pytest.raises(LambdaDegenerate):
        bad.check_guard(0.5)


def test_gauge_identity_and_shift():
    d = AlphaData(alpha1=Gaussian(0.2, 3.0))
    s = _state(d)
    same = gauge_transform(s, 0, 1.0, 1.0)
    assert np.array_equal(same.phi, s.phi) and same.alpha == s.alpha
    moved = gauge_transform(s, 2, 3.0, 2.0)
    assert np.allclose(moved.phi, s.phi + 2 * np.pi)
    assert np.allclose(moved.v, s.v + np.log(2.0))
    assert moved.alpha.scale == 3.0
    with pytest.raises(NonPositiveScale):
        gauge_transform(s, 0, 0.0, 1.0)
    with pytest.raises(NonPositiveScale):
        gauge_transform(s, 0, 1.0, -2.0)


def test_grid_invariants():
    g = Grid1D(-1.0, 3.0, 9)
    assert g.dx == 0.5 and len(g.x) == 9 and g.x[-1] == 3.0
    with pytest.raises(ValueError):
        Grid1D(0, 1, 7)
    with pytest.raises(ValueError):
        Grid1D(0, 1, 10)
    with pytest.raises(ValueError):
        Grid1D(1, 0, 11)
