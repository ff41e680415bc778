"""
Closed-form background alpha (a solution of the 1D wave equation), its
conjugate beta, gradient classification, kappa, and data validation.

alpha(t, x) = scale * (1 + (a0(x+t) + a0(x-t) + A1(x+t) - A1(x-t)) / 2)

with a0 = alpha0_tilde, A1 the antiderivative of alpha1 from 0.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, NamedTuple

import numpy as np

from .errors import NullGradient
from .profiles import Profile, Zero, make_profile, profile_to_dict


@dataclass(frozen=True)
class AlphaData:
    alpha0_tilde: Profile = field(default_factory=Zero)
    alpha1: Profile = field(default_factory=Zero)
    gamma: float = 0.05
    K1: float = 10.0
    K2: float = 10.0
    delta: float = 0.1
    scale: float = 1.0
    cosmological: bool = False

    def __post_init__(self):
        if not 0 < self.delta < 1 / 3:
            raise ValueError(f"delta must lie in (0, 1/3), got {self.delta}")

    @classmethod
    def from_dict(cls, spec):
        spec = dict(spec)
        spec["alpha0_tilde"] = make_profile(spec.get("alpha0_tilde"))
        spec["alpha1"] = make_profile(spec.get("alpha1"))
        return cls(**spec)

    def to_dict(self):
        return {
            "alpha0_tilde": profile_to_dict(self.alpha0_tilde),
            "alpha1": profile_to_dict(self.alpha1),
            "gamma": self.gamma, "K1": self.K1, "K2": self.K2,
            "delta": self.delta, "scale": self.scale, "cosmological": self.cosmological,
        }


class AlphaJet2(NamedTuple):
    """alpha and its derivatives through order two."""

    alpha: Any
    dt: Any
    dx: Any
    dtt: Any
    dtx: Any
    dxx: Any


class GradientClass(IntEnum):
    TIMELIKE = -1
    NULL = 0
    SPACELIKE = 1


def alpha_eval(d, t, x):
    """Evaluate the alpha jet at (t, x) (scalars or broadcastable arrays)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    sp, sm = x + t, x - t
    a0, a1 = d.alpha0_tilde, d.alpha1
    c = 0.5 * d.scale
    alpha = d.scale + c * (a0.value(sp) + a0.value(sm) + a1.antiderivative(sp) - a1.antiderivative(sm))
    at = c * (a0.d1(sp) - a0.d1(sm) + a1.value(sp) + a1.value(sm))
    ax = c * (a0.d1(sp) + a0.d1(sm) + a1.value(sp) - a1.value(sm))
    axx = c * (a0.d2(sp) + a0.d2(sm) + a1.d1(sp) - a1.d1(sm))
    atx = c * (a0.d2(sp) - a0.d2(sm) + a1.d1(sp) + a1.d1(sm))
    return AlphaJet2(alpha, at, ax, axx, atx, axx)


def beta_eval(d, C, t, x):
    """Conjugate beta with beta_t = alpha_x, beta_x = alpha_t. Returns (beta, beta_t, beta_x)."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    sp, sm = x + t, x - t
    a0, a1 = d.alpha0_tilde, d.alpha1
    c = 0.5 * d.scale
    beta = C + c * (a0.value(sp) - a0.value(sm) + a1.antiderivative(sp) + a1.antiderivative(sm))
    bt = c * (a0.d1(sp) + a0.d1(sm) + a1.value(sp) - a1.value(sm))
    bx = c * (a0.d1(sp) - a0.d1(sm) + a1.value(sp) + a1.value(sm))
    return beta, bt, bx


def null_tolerance(jet):
    return 1e-10 * (jet.dx**2 + jet.dt**2 + 1.0)


def gradient_norm(jet):
    """(d_x alpha)^2 - (d_t alpha)^2."""
    return jet.dx**2 - jet.dt**2


def classify_gradient(jet, tol=None):
    """
    Timelike / Spacelike / Null from the sign of (d_x alpha)^2 - (d_t alpha)^2.
    Scalars give a GradientClass; arrays give an int array of class values.
    """
    if tol is None:
        tol = null_tolerance(jet)
    q = gradient_norm(jet)
    codes = np.where(q < -tol, -1, np.where(q > tol, 1, 0))
    if np.ndim(codes) == 0:
        return GradientClass(int(codes))
    return codes


def kappa(jet, tol=None):
    """kappa = alpha / ((d_x alpha)^2 - (d_t alpha)^2); raises NullGradient at null points."""
    if tol is None:
        tol = null_tolerance(jet)
    q = gradient_norm(jet)
    if np.any(np.abs(q) <= tol):
        raise NullGradient("null alpha gradient: kappa undefined")
    return jet.alpha / q


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    def add(self, name, passed, detail=""):
        self.checks.append((name, passed, detail))

    @property
    def ok(self):
        return all(p is not False for _, p, _ in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if c[1] is False]

    def lines(self):
        tag = {True: "PASS", False: "FAIL", None: "UNCHECKED"}
        return [f"{tag[p]:9s} {name}: {detail}" for name, p, detail in self.checks]


def _envelope(u, delta):
    return (1 + u * u) ** (1 + delta)


def validate_alpha_data(d, s_max=None, n=20001):
    """
    Check the smallness hypotheses on (alpha0_tilde, alpha1) on a sample grid.

    Positivity of alpha1 is a hard requirement only for cosmological data;
    otherwise its failure is still reported.
    """
    if s_max is None:
        r = max(d.alpha0_tilde.support_radius(), d.alpha1.support_radius())
        s_max = 50.0 if not np.isfinite(r) else max(10.0, 2 * r)
    s = np.linspace(-s_max, s_max, n)
    a0, a1 = d.alpha0_tilde, d.alpha1
    rep = ValidationReport()

    a1v = a1.value(s)
    rep.add("alpha1 positive", bool(np.all(a1v > 0)), f"min alpha1 = {a1v.min():.3e}")

    sup = max(np.max(np.abs(a0.derivative(k, s))) + np.max(np.abs(a1.derivative(k, s)))
              for k in range(2))
    sup = max(sup, np.max(np.abs(a0.d2(s))))
    rep.add("sup bound < gamma/2", bool(sup < d.gamma / 2),
            f"sup = {sup:.3e}, gamma/2 = {d.gamma / 2:.3e}")

    weight = _envelope(0.5 * s, d.delta) ** 0.75
    env0 = max(np.max(np.abs(a0.derivative(k, s)) * weight) for k in (1, 2))
    env1 = max(np.max(np.abs(a1.derivative(k, s)) * weight) for k in (0, 1))
    rep.add("alpha0 envelope", bool(env0 <= d.K1 * d.gamma),
            f"max |a0^(n)| phi^(3/4) = {env0:.3e}, K1 gamma = {d.K1 * d.gamma:.3e}")
    rep.add("alpha1 envelope", bool(env1 <= d.K2 * d.gamma),
            f"max |a1^(n)| phi^(3/4) = {env1:.3e}, K2 gamma = {d.K2 * d.gamma:.3e}")

    margin = a1v - np.abs(a0.d1(s))
    rep.add("timelike sufficient condition |a0'| < alpha1", bool(np.all(margin > 0)),
            f"min alpha1 - |a0'| = {margin.min():.3e}")
    rep.add("compatibility conditions", None, "not formalized")
    return rep


def check_cosmological(d, grid, t_values, c0=None):
    """Sampled check of alpha > 0, d_t alpha > 0, timelike gradient and alpha > c0."""
    rep = ValidationReport()
    x = grid.x
    amin, atmin, worst = np.inf, np.inf, -np.inf
    timelike = True
    for t in np.atleast_1d(t_values):
        jet = alpha_eval(d, t, x)
        amin = min(amin, float(np.min(jet.alpha)))
        atmin = min(atmin, float(np.min(jet.dt)))
        cls = classify_gradient(jet)
        timelike &= bool(np.all(cls == GradientClass.TIMELIKE))
        worst = max(worst, float(np.max(gradient_norm(jet))))
    rep.add("alpha > 0", amin > 0, f"min alpha = {amin:.6g}")
    rep.add("d_t alpha > 0", atmin > 0, f"min alpha_t = {atmin:.3e}")
    rep.add("timelike gradient", timelike, f"max (a_x^2 - a_t^2) = {worst:.3e}")
    if c0 is not None:
        rep.add("alpha > c0", amin > c0, f"min alpha = {amin:.6g}, c0 = {c0}")
    return rep
