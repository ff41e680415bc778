"""
Closed-form solutions: Minkowski, traveling waves, the generalized Kasner
background, the Kasner 1-soliton, the Einstein-Rosen Bessel background and
the Einstein-Rosen 1-soliton.
"""

from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np
from scipy.integrate import quad

from .alpha import AlphaData, AlphaJet2, alpha_eval, beta_eval
from .bessel import j0, j1
from .errors import (ComplexPole, NonPositiveAlpha, NonPositiveF,
                     NonPositiveRadius, NotPositiveDefinite, PoleCrossing)
from .fields import FieldState, MetricBlock, fields_from_metric, metric_from_fields
from .profiles import Linear, ScaledDerivative, Zero

_H = 1e-30  # complex-step increment


class ExactEval(NamedTuple):
    lam: Any
    lam_t: Any
    lam_x: Any
    phi: Any
    phi_t: Any
    phi_x: Any
    alpha: AlphaJet2
    g: MetricBlock
    family: str
    extras: dict


@dataclass(frozen=True)
class KasnerParams:
    d: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"Kasner parameter must be >= 1, got {self.d}")


@dataclass(frozen=True)
class SolitonParams:
    d: float = 1.0
    w: float = 3.0
    C_beta: float = 0.0
    C_rho: float = 0.0


def _positive_alpha(jet):
    if np.any(np.asarray(jet.alpha) <= 0):
        raise NonPositiveAlpha("alpha must be positive")


def minkowski_alpha():
    return AlphaData()


def traveling_alpha(g_profile, direction=-1):
    """AlphaData whose alpha equals 1 + g(x + direction * t)."""
    return AlphaData(alpha0_tilde=g_profile, alpha1=ScaledDerivative(g_profile, float(direction)))


def er_alpha():
    """alpha = r, written as alpha0_tilde(s) = s - 1 (x plays the role of r)."""
    return AlphaData(alpha0_tilde=Linear(1.0, -1.0), alpha1=Zero())


def eval_minkowski(t, x, shift=0.0):
    """Flat data: Lambda = shift, phi = 0, alpha = 1."""
    z = np.zeros(np.broadcast(np.asarray(t), np.asarray(x)).shape)
    jet = alpha_eval(AlphaData(), t, x)
    return ExactEval(z + shift, z, z, z, z, z, jet, metric_from_fields(z + shift, z, jet.alpha),
                     "minkowski", {})


def eval_traveling(h, k, l_profile, m_profile, direction, t, x, shift=0.0):
    """
    Lambda = shift + h(s), phi = k(s), alpha = 1 + l(s), f = 1 + m(s) with
    s = x + direction t. `l_profile`, `m_profile` are the deviations of alpha
    and f from 1.
    """
    s = np.asarray(x, dtype=float) + direction * np.asarray(t, dtype=float)
    d = traveling_alpha(l_profile, direction)
    jet = alpha_eval(d, t, x)
    _positive_alpha(jet)
    f = 1.0 + m_profile.value(s)
    if np.any(f <= 0):
        raise NonPositiveF("f must be positive")
    lam, phi = shift + h.value(s), k.value(s)
    hp, kp = h.d1(s), k.d1(s)
    g = metric_from_fields(lam, phi, jet.alpha, f)
    return ExactEval(lam, direction * hp, hp, phi, direction * kp, kp, jet, g, "traveling",
                     {"alpha_data": d})


def eval_kasner_background(kp, d, t, x, shift=0.0):
    """Lambda = shift + d ln alpha, phi = 0 (shift = 0 is the Kasner solution)."""
    jet = alpha_eval(d, t, x)
    _positive_alpha(jet)
    a = jet.alpha
    lam = shift + kp.d * np.log(a)
    z = np.zeros_like(lam)
    g = metric_from_fields(lam, z, a)
    return ExactEval(lam, kp.d * jet.dt / a, kp.d * jet.dx / a, z, z, z, jet, g, "kasner",
                     {"e_hat": kp.d**2 * jet.dt / a, "p_hat": kp.d**2 * jet.dx / a})


def _soliton_block(sp, a, b):
    """Raw 1-soliton block and mu for (possibly complex) alpha and beta."""
    wb = sp.w - b
    root = np.sqrt(wb * wb - a * a)
    mu = wb - root
    m = mu / a
    rho = sp.d * np.log(m) + sp.C_rho
    ep, em = np.exp(rho), np.exp(-rho)
    pre = 1.0 / (mu * np.cosh(rho))
    ad = a**sp.d
    g11 = pre * ad * (mu * mu * ep + a * a * em)
    g12 = pre * (a * a - mu * mu)
    g22 = pre / ad * (a * a * ep + mu * mu * em)
    return g11, g12, g22, mu, wb + root


def _normalized(a, g11, g12, g22):
    """Block rescaled to det = alpha^2 and its (A, B, trace) invariants per unit alpha."""
    det = g11 * g22 - g12 * g12
    s = np.sqrt(det)
    n11, n12, n22 = g11 / s, g12 / s, g22 / s
    return n11, n12, n22, det


def eval_kasner_soliton(sp, d, t, x):
    """
    Kasner 1-soliton. The published block has det = 4 alpha^2; it is rescaled
    to det = alpha^2 before extraction. extras records the raw determinant
    ratio, the unnormalized cosh(Lambda) = trace / (2 alpha), mu and its
    conjugate mu_bar, whose product equals alpha^2.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    jet = alpha_eval(d, t, x)
    _positive_alpha(jet)
    beta, bt, bx = beta_eval(d, sp.C_beta, t, x)
    a = jet.alpha
    wb = sp.w - beta
    if np.any(wb <= a):
        raise ComplexPole("requires w - beta > alpha for a real positive pole")

    g11, g12, g22, mu, mu_bar = _soliton_block(sp, a, beta)
    n11, n12, n22, det = _normalized(a, g11, g12, g22)
    A, B = 0.5 * (n11 - n22), n12
    sh = np.hypot(A, B)
    lam = np.arcsinh(sh)
    phi = np.mod(0.5 * np.arctan2(B, A), np.pi)

    def deriv(da, db):
        c = _soliton_block(sp, a + 1j * _H * da, beta + 1j * _H * db)
        m11, m12, m22, _ = _normalized(None, *c[:3])
        At = np.imag(0.5 * (m11 - m22)) / _H
        Bt = np.imag(m12) / _H
        trt = np.imag(m11 + m22) / _H
        with np.errstate(divide="ignore", invalid="ignore"):
            lam_d = np.where(sh > 0, 0.5 * trt / np.where(sh > 0, sh, 1.0), 0.0)
            phi_d = np.where(sh > 0, 0.5 * (A * Bt - B * At) / np.where(sh > 0, sh * sh, 1.0), 0.0)
        return lam_d, phi_d

    lam_t, phi_t = deriv(jet.dt, bt)
    lam_x, phi_x = deriv(jet.dx, bx)
    g = MetricBlock(n11 * a, n12 * a, n22 * a, 1.0)
    extras = {
        "mu": mu, "mu_bar": mu_bar, "beta": beta,
        "det_ratio_raw": det / a**2,
        "cosh_lambda_raw": 0.5 * (g11 + g22) / a,
        "raw": MetricBlock(g11, g12, g22, 1.0),
    }
    return ExactEval(lam, lam_t, lam_x, phi, phi_t, phi_x, jet, g, "kasner_soliton", extras)


def _er_jet(r):
    one = np.ones_like(r)
    z = np.zeros_like(r)
    return AlphaJet2(r, z, one, z, z, z)


def er_bessel_fields(t, r):
    """Lambda0 = J0(r) sin t and its first and second derivatives."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise NonPositiveRadius("r must be positive")
    t = np.asarray(t, dtype=float)
    J0, J1 = j0(r), j1(r)
    st, ct = np.sin(t), np.cos(t)
    lam = J0 * st
    lam_t = J0 * ct
    lam_r = -J1 * st
    lam_tt = -J0 * st
    lam_rr = (-J0 + J1 / r) * st
    return lam, lam_t, lam_r, lam_tt, lam_rr


def eval_er_bessel(t, r, shift=0.0):
    """Lambda = shift + J0(r) sin t, phi = 0, alpha = r."""
    r = np.asarray(r, dtype=float)
    lam, lam_t, lam_r, _, _ = er_bessel_fields(t, r)
    lam = lam + shift
    jet = _er_jet(r + 0 * lam)
    z = np.zeros_like(lam)
    g = metric_from_fields(lam, z, jet.alpha)
    return ExactEval(lam, lam_t, lam_r, z, z, z, jet, g, "er_bessel",
                     {"e0": r * (lam_t**2 + lam_r**2), "p0": -2 * r * lam_t * lam_r})


def er_cylindrical_residual(t, r):
    """Lambda_tt - (1/r) d_r (r Lambda_r) from the Bessel derivative identities."""
    _, _, lam_r, lam_tt, lam_rr = er_bessel_fields(t, r)
    return lam_tt - lam_rr - lam_r / np.asarray(r, dtype=float)


@dataclass(frozen=True)
class ERSolitonParams:
    w: float = 10.0
    C: float = 1.0
    branch: int = 1
    base: tuple = (0.0, 1.0)
    C0: float = 1.0
    shift: float = 0.0


def _er_mu(sp, t, r):
    s = (sp.w - t) ** 2 - r * r
    if s < 0:
        raise ComplexPole(f"(w - t)^2 < r^2 at (t, r) = ({t}, {r})")
    return sp.w - t + sp.branch * np.sqrt(s)


def er_rho_gradient(sp, t, r):
    """(d_t rho, d_r rho) from the u0 = Lambda0 - ln r background."""
    _, lt, lr, _, _ = er_bessel_fields(t, r)
    u_t, u_r = lt, lr - 1.0 / r
    mu = _er_mu(sp, t, r)
    den = mu * mu - r * r
    if abs(den) < 1e-12 * max(1.0, r * r):
        raise PoleCrossing(f"mu^2 = r^2 at (t, r) = ({t}, {r})")
    c = r / den
    return float(c * (r * u_t + mu * u_r)), float(c * (r * u_r + mu * u_t))


def er_rho(sp, t, r, path="tr", tol=1e-12):
    """
    Line integral of the rho gradient from sp.base to (t, r) along an
    axis-aligned path: "tr" moves in t first, "rt" in r first.
    """
    t0, r0 = sp.base
    legs = [("t", t0, t, r0), ("r", r0, r, t)] if path == "tr" else \
           [("r", r0, r, t0), ("t", t0, t, r)]
    total = 0.0
    for axis, a, b, fixed in legs:
        if a == b:
            continue
        if axis == "t":
            fn = lambda s: er_rho_gradient(sp, s, fixed)[0]
        else:
            fn = lambda s: er_rho_gradient(sp, fixed, s)[1]
        val, err = quad(fn, a, b, epsabs=tol, epsrel=tol, limit=200)
        total += val
    return total


def eval_er_soliton(sp, t, r, path="tr"):
    """
    Einstein-Rosen 1-soliton dressed onto the background
    Lambda0 = shift + J0(r) sin t, i.e. g0 = diag(r^2 e^u0, e^-u0) with
    u0 = Lambda0 - ln r. With m0 = (1, C) the dressing vector is
    m = (e^rho / mu, C e^-rho) and

        g1 = g0 - (1 - r^2/mu^2) (g0 m)(g0 m)^T / (m^T g0 m).

    The block is rescaled to det = r^2 before extraction; extras records
    the raw determinant ratio.
    """
    if r <= 0:
        raise NonPositiveRadius("r must be positive")
    lam0 = sp.shift + float(er_bessel_fields(t, r)[0])
    u0 = lam0 - np.log(r)
    mu = _er_mu(sp, t, r)
    rho = er_rho(sp, t, r, path)
    g0 = np.array([r * r * np.exp(u0), np.exp(-u0)])
    m = np.array([np.exp(rho) / mu, sp.C * np.exp(-rho)])
    gm = g0 * m
    norm = float(np.sum(g0 * m * m))
    fac = 1.0 - r * r / (mu * mu)
    g11 = g0[0] - fac * gm[0] ** 2 / norm
    g22 = g0[1] - fac * gm[1] ** 2 / norm
    g12 = -fac * gm[0] * gm[1] / norm
    det = g11 * g22 - g12 * g12
    if det <= 0:
        raise NotPositiveDefinite(f"ER soliton block has det = {det:.3e}")
    s = r / np.sqrt(det)
    g = MetricBlock(g11 * s, g12 * s, g22 * s, 1.0)
    ex = fields_from_metric(g)
    # gamma: the log-ratio of the two terms of m^T g0 m
    gam = u0 + 2 * rho + np.log(r / (sp.C * abs(mu)))
    return ExactEval(ex.lam, np.nan, np.nan, ex.phi, np.nan, np.nan, _er_jet(np.asarray(r, float)),
                     g, "er_soliton",
                     {"mu": mu, "rho": rho, "gamma": gam, "background_lambda": lam0,
                      "det_ratio_raw": det / r**2, "raw": MetricBlock(g11, g12, g22, 1.0)})


def sample_state(ev, grid, t, lambda0=1.0, alpha=None):
    """FieldState from an ExactEval evaluated on the grid at time t."""
    phi = np.unwrap(np.asarray(ev.phi, dtype=float) + 0 * grid.x, period=np.pi)
    return FieldState(t, grid, np.asarray(ev.lam, float) - lambda0 + 0 * grid.x,
                      np.asarray(ev.lam_t, float) + 0 * grid.x, phi,
                      np.asarray(ev.phi_t, float) + 0 * grid.x, None, None, lambda0, alpha)


def sample_family(family, grid, t, lambda0=1.0, **kw):
    """Sample a named exact family on a grid; returns (FieldState, ExactEval)."""
    x = grid.x
    if family == "minkowski":
        ev = eval_minkowski(t, x, kw.get("shift", 0.0))
        alpha = AlphaData()
    elif family == "traveling":
        ev = eval_traveling(kw["h"], kw["k"], kw.get("l", Zero()), kw.get("m", Zero()),
                            kw.get("direction", -1), t, x, kw.get("shift", 0.0))
        alpha = ev.extras["alpha_data"]
    elif family == "kasner":
        alpha = kw["alpha"]
        ev = eval_kasner_background(kw["kasner"], alpha, t, x, kw.get("shift", 0.0))
    elif family == "kasner_soliton":
        alpha = kw["alpha"]
        ev = eval_kasner_soliton(kw["soliton"], alpha, t, x)
    elif family == "er_bessel":
        alpha = er_alpha()
        ev = eval_er_bessel(t, x, kw.get("shift", 0.0))
    else:
        raise KeyError(f"unknown exact family {family!r}")
    return sample_state(ev, grid, t, lambda0, alpha), ev
