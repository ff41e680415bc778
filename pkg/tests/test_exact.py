import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bzwave.alpha import AlphaData, classify_gradient
from bzwave.diagnostics import density_sample
from bzwave.errors import ComplexPole, NonPositiveRadius
from bzwave.evolution import pde_residual
from bzwave.exact import (ERSolitonParams, KasnerParams, SolitonParams, er_alpha,
                          er_cylindrical_residual, er_rho, er_rho_gradient, eval_er_bessel,
                          eval_er_soliton, eval_kasner_background, eval_kasner_soliton,
                          eval_minkowski, eval_traveling, sample_family)
from bzwave.fields import FieldState, Grid1D, metric_from_fields
from bzwave.profiles import Constant, Gaussian, Zero

SOLITON_ALPHA = AlphaData(alpha1=Gaussian(0.3, 6.0))
SOLITON = SolitonParams(2.0, 3.5, 0.0)


def test_minkowski():
    ev = eval_minkowski(0.5, np.array([0.0, 1.0]), shift=1.0)
    assert np.all(ev.lam == 1.0) and np.all(ev.phi == 0)
    assert np.all(ev.alpha.alpha == 1.0)


def test_traveling_crest():
    h = Gaussian(0.3, 1.0)
    ev = eval_traveling(h, Zero(), Zero(), Zero(), -1, 1.0, 1.0)
    assert float(ev.lam) == pytest.approx(0.3)
    ev = eval_traveling(Zero(), Zero(), Zero(), Zero(), -1, 0.3, np.linspace(-1, 1, 5))
    assert np.all(ev.lam == 0) and np.all(ev.alpha.alpha == 1)


def test_traveling_alpha_moves_with_profile():
    ell = Gaussian(0.2, 1.5)
    ev = eval_traveling(Zero(), Zero(), ell, Zero(), -1, 0.7, np.array([0.7, 2.0]))
    assert np.allclose(ev.alpha.alpha, 1 + ell.value(np.array([0.0, 1.3])), rtol=1e-14)


def test_kasner_background():
    ev = eval_kasner_background(KasnerParams(1.0), AlphaData(), 0.0, np.array([0.0, 1.0]))
    assert np.all(ev.lam == 0)
    d = AlphaData(alpha1=Constant(1.0))
    ev = eval_kasner_background(KasnerParams(2.0), d, 0.0, 0.0)
    assert float(ev.extras["e_hat"]) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        KasnerParams(0.5)


@given(st.floats(0, 3), st.floats(-8, 8), st.floats(1, 4))
def test_kasner_densities_match_closed_form(t, x, dk):
    d = AlphaData(Gaussian(0.05, 2.0), Gaussian(0.2, 4.0))
    ev = eval_kasner_background(KasnerParams(dk), d, t, x, shift=1.0)
    ds = density_sample(ev.lam, ev.lam_t, ev.lam_x, ev.phi_t, ev.phi_x, ev.alpha)
    assert ds.grad_class == -1
    ref_e, ref_p = float(ev.extras["e_hat"]), float(ev.extras["p_hat"])
    assert ds.e_hat == pytest.approx(ref_e, rel=1e-12, abs=1e-12 * abs(ref_e))
    assert ds.p_hat == pytest.approx(ref_p, abs=1e-12 * abs(ref_e))


def test_soliton_reference_point():
    ev = eval_kasner_soliton(SolitonParams(1.0, 2.0, 0.0), AlphaData(), 0.0, 0.0)
    mu = ev.extras["mu"]
    assert mu == pytest.approx(2 - np.sqrt(3), rel=1e-14)
    assert mu * ev.extras["mu_bar"] == pytest.approx(1.0, rel=1e-14)
    raw = ev.extras["raw"]
    assert [raw.g11, raw.g12, raw.g22] == pytest.approx([7.0, np.sqrt(3), 1.0], rel=1e-14)
    assert ev.extras["det_ratio_raw"] == pytest.approx(4.0, rel=1e-14)
    assert ev.extras["cosh_lambda_raw"] == pytest.approx(4.0, rel=1e-14)
    assert float(ev.lam) == pytest.approx(np.arccosh(2), rel=1e-13)
    assert float(ev.phi) == pytest.approx(np.pi / 12, rel=1e-13)
    assert [ev.g.g11, ev.g.g12, ev.g.g22] == pytest.approx([3.5, np.sqrt(3) / 2, 0.5], rel=1e-14)


def test_soliton_degenerates_toward_background():
    offdiag = []
    for gap in (1e-2, 1e-4, 1e-6):
        ev = eval_kasner_soliton(SolitonParams(1.0, 1.0 + gap, 0.0), AlphaData(), 0.0, 0.0)
        offdiag.append(abs(float(ev.extras["raw"].g12)))
    assert offdiag[0] > offdiag[1] > offdiag[2]
    assert offdiag[2] < 1e-2


def test_soliton_complex_pole():
    with pytest.raises(ComplexPole):
        eval_kasner_soliton(SolitonParams(1.0, 1.0, 0.0), AlphaData(), 0.0, 0.0)


@given(st.floats(0, 1.5), st.floats(-10, 10), st.sampled_from([1.0, 2.0, 3.0]))
def test_soliton_invariants(t, x, dk):
    sp = SolitonParams(dk, 3.5, 0.0)
    ev = eval_kasner_soliton(sp, SOLITON_ALPHA, t, x)
    a = float(ev.alpha.alpha)
    assert float(ev.extras["mu"] * ev.extras["mu_bar"]) == pytest.approx(a * a, rel=1e-12)
    assert float(ev.extras["det_ratio_raw"]) == pytest.approx(4.0, rel=1e-10)
    assert np.cosh(float(ev.lam)) >= 1.0
    m = metric_from_fields(float(ev.lam), float(ev.phi), a)
    for got, want in zip((ev.g.g11, ev.g.g12, ev.g.g22), (m.g11, m.g12, m.g22)):
        assert float(got) == pytest.approx(float(want), rel=1e-10, abs=1e-10 * a)


@given(st.floats(0.2, 1.5), st.floats(-8, 8))
def test_soliton_derivatives_match_finite_differences(t, x):
    h = 1e-5
    ev = eval_kasner_soliton(SOLITON, SOLITON_ALPHA, t, x)

    def at(tt, xx):
        e = eval_kasner_soliton(SOLITON, SOLITON_ALPHA, tt, xx)
        return np.array([float(e.lam), float(e.phi)])

    dt = (at(t + h, x) - at(t - h, x)) / (2 * h)
    dx = (at(t, x + h) - at(t, x - h)) / (2 * h)
    assert [float(ev.lam_t), float(ev.phi_t)] == pytest.approx(dt, abs=1e-7)
    assert [float(ev.lam_x), float(ev.phi_x)] == pytest.approx(dx, abs=1e-7)


def _kasner_soliton_triple(n, t=1.0):
    g = Grid1D(-10, 10, n)
    dt = 0.5 * g.dx
    return [sample_family("kasner_soliton", g, t + k * dt, 1.0, alpha=SOLITON_ALPHA,
                          soliton=SOLITON)[0] for k in (-1, 0, 1)]


def test_soliton_solves_the_equations():
    vals = np.array([[r.linf_lambda, r.linf_phi] for r in
                     (pde_residual(_kasner_soliton_triple(n)) for n in (401, 801, 1601))])
    assert np.all(np.log2(vals[:-1] / vals[1:]) > 1.8)


def test_er_bessel_background():
    r = np.array([0.5, 1.0, 5.0, 12.0, 30.0])
    assert np.all(eval_er_bessel(0.0, r).lam == 0)
    assert float(eval_er_bessel(np.pi / 2, 1e-8).lam) == pytest.approx(1.0, abs=1e-14)
    for t in (0.3, 1.0, 2.5):
        assert np.max(np.abs(er_cylindrical_residual(t, np.linspace(0.1, 50, 500)))) <= 1e-10
    ev = eval_er_bessel(0.7, r)
    assert np.all(classify_gradient(ev.alpha) == 1)
    assert np.all(ev.alpha.dx**2 - ev.alpha.dt**2 == 1.0)
    with pytest.raises(NonPositiveRadius):
        eval_er_bessel(0.0, np.array([0.0, 1.0]))


def test_er_alpha_is_r():
    from bzwave.alpha import alpha_eval
    j = alpha_eval(er_alpha(), 1.3, np.array([0.5, 2.0]))
    assert np.array_equal(j.alpha, [0.5, 2.0]) and np.all(j.dx == 1) and np.all(j.dt == 0)


ER = ERSolitonParams(w=10.0, C=0.7, shift=2.0, base=(0.0, 2.0))


@pytest.mark.parametrize("t,r", [(0.5, 1.5), (1.0, 3.0), (2.0, 2.2)])
def test_er_rho_path_independence(t, r):
    assert er_rho(ER, t, r, "tr") == pytest.approx(er_rho(ER, t, r, "rt"), abs=1e-8)


def test_er_rho_gradient_is_closed():
    h = 1e-4
    for t, r in [(0.5, 1.7), (1.2, 2.9)]:
        dr_of_t = (er_rho_gradient(ER, t, r + h)[0] - er_rho_gradient(ER, t, r - h)[0]) / (2 * h)
        dt_of_r = (er_rho_gradient(ER, t + h, r)[1] - er_rho_gradient(ER, t - h, r)[1]) / (2 * h)
        assert dr_of_t == pytest.approx(dt_of_r, abs=1e-7)


def test_er_soliton_block():
    assert er_rho(ER, *ER.base) == 0.0
    ev = eval_er_soliton(ER, 0.5, 2.0)
    g = ev.g
    assert g.g11 * g.g22 - g.g12**2 == pytest.approx(4.0, rel=1e-12)
    assert g.g11 > 0 and g.g22 > 0
    raw = ev.extras["raw"]
    assert ev.extras["det_ratio_raw"] == pytest.approx(2.0**2 / ev.extras["mu"] ** 2, rel=1e-10)
    assert raw.g11 > 0


def _er_state(grid, t):
    lam, phi = [], []
    for r in grid.x:
        ev = eval_er_soliton(ER, t, float(r))
        lam.append(float(ev.lam))
        phi.append(float(ev.phi))
    z = np.zeros(grid.n)
    phi = np.unwrap(np.array(phi), period=np.pi)
    return FieldState(t, grid, np.array(lam) - 1.0, z, phi, z, None, None, 1.0, er_alpha())


def test_er_soliton_solves_the_equations():
    vals = []
    for n in (51, 101, 201):
        g = Grid1D(1.5, 3.5, n)
        dt = 0.5 * g.dx
        r = pde_residual([_er_state(g, 0.5 + k * dt) for k in (-1, 0, 1)])
        vals.append([r.linf_lambda, r.linf_phi])
    vals = np.array(vals)
    assert np.all(np.log2(vals[:-1] / vals[1:]) > 1.8)
