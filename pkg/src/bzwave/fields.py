"""
Domain types for fields and grids, null-frame calculus, and the
dictionary between the metric block g and the fields (Lambda, phi, alpha).

All functions accept scalars or numpy arrays and broadcast.
"""

import dataclasses
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

import numpy as np

from .errors import (LambdaDegenerate, NonPositiveAlpha, NonPositiveF,
                     NonPositiveScale, NotPositiveDefinite)


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float


@dataclass(frozen=True)
class NullCoords:
    u: float
    ubar: float


@dataclass(frozen=True)
class FirstJet:
    """A scalar value and its first derivatives at a point."""

    value: Any
    dt: Any
    dx: Any


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid on [x_min, x_max] with n nodes."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 nodes, got {self.n}")
        if self.n % 2 == 0:
            raise ValueError(f"composite Simpson needs an odd node count, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n)


def _frozen(a):
    if a is None:
        return None
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class FieldState:
    """
    Grid samples of the dynamical fields at one time level.

    Lambda = lambda0 + lambda_tilde. `v`, `w` hold ln f and its time
    derivative and may be None when f is not tracked. `alpha` is the
    analytic background handle (an AlphaData) or None.
    """

    time: float
    grid: Grid1D
    lambda_tilde: np.ndarray
    pi: np.ndarray
    phi: np.ndarray
    xi: np.ndarray
    v: Optional[np.ndarray] = None
    w: Optional[np.ndarray] = None
    lambda0: float = 1.0
    alpha: Any = None

    def __post_init__(self):
        for name in ("lambda_tilde", "pi", "phi", "xi", "v", "w"):
            arr = _frozen(getattr(self, name))
            if arr is not None and arr.shape != (self.grid.n,):
                raise ValueError(f"{name} has shape {arr.shape}, grid has {self.grid.n} nodes")
            object.__setattr__(self, name, arr)
        if not self.lambda0 > 0:
            raise ValueError("lambda0 must be positive")

    @property
    def lam(self):
        """Full Lambda = lambda0 + lambda_tilde."""
        return self.lambda0 + self.lambda_tilde

    def check_guard(self, fraction=0.5):
        """Raise LambdaDegenerate if |Lambda| < fraction * lambda0 anywhere."""
        low = np.abs(self.lam) < fraction * self.lambda0
        if np.any(low):
            i = int(np.argmax(low))
            raise LambdaDegenerate(
                f"|Lambda| = {abs(self.lam[i]):.3e} < {fraction * self.lambda0:.3e} "
                f"at x = {self.grid.x[i]:.6g}, t = {self.time:.6g}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


class MetricBlock(NamedTuple):
    """Symmetric 2x2 block [[g11, g12], [g12, g22]] and conformal factor f."""

    g11: Any
    g12: Any
    g22: Any
    f: Any = 1.0

    @property
    def det(self):
        return self.g11 * self.g22 - self.g12 * self.g12

    @property
    def trace(self):
        return self.g11 + self.g22


class ExtractedFields(NamedTuple):
    lam: Any
    phi: Any
    alpha: Any
    degenerate: Any


def null_coords(p):
    """(t, x) -> (u, ubar) = ((t + x)/2, (t - x)/2)."""
    return NullCoords(0.5 * (p.t + p.x), 0.5 * (p.t - p.x))


def null_derivatives(j):
    """Return (L f, Lbar f) with L = d_t + d_x and Lbar = d_t - d_x."""
    return j.dt + j.dx, j.dt - j.dx


def null_form_q0(jf, jg):
    """Q0(f, g) = f_x g_x - f_t g_t (signature (-, +))."""
    return jf.dx * jg.dx - jf.dt * jg.dt


def metric_from_fields(lam, phi, alpha, f=1.0):
    """Assemble g = alpha R(phi) diag(e^L, e^-L) R(phi)^T."""
    alpha = np.asarray(alpha, dtype=float)
    f = np.asarray(f, dtype=float)
    if np.any(alpha <= 0):
        raise NonPositiveAlpha("alpha must be positive")
    if np.any(f <= 0):
        raise NonPositiveF("f must be positive")
    ch, sh = np.cosh(lam), np.sinh(lam)
    c2, s2 = np.cos(2 * phi), np.sin(2 * phi)
    big = ch + np.abs(c2 * sh)
    # the small diagonal entry cancels; take it from the product 1 + s2^2 sh^2
    small = (1.0 + (s2 * sh) ** 2) / big
    pos = c2 * sh >= 0
    g11 = alpha * np.where(pos, big, small)
    g22 = alpha * np.where(pos, small, big)
    if g11.ndim == 0:
        g11, g22 = float(g11), float(g22)
    return MetricBlock(g11, alpha * s2 * sh, g22, f)


def fields_from_metric(m, tol=0.0):
    """
    Invert metric_from_fields. Returns Lambda >= 0, phi in [0, pi), alpha > 0
    and a flag marking points with Lambda <= tol, where phi is undefined and
    set to 0.
    """
    g11, g12, g22 = (np.asarray(c, dtype=float) for c in m[:3])
    det = g11 * g22 - g12 * g12
    if np.any(det <= 0) or np.any(g11 + g22 <= 0):
        raise NotPositiveDefinite("metric block is not positive definite")
    alpha = np.sqrt(det)
    a = 0.5 * (g11 - g22) / alpha
    b = g12 / alpha
    # sinh(L) = |(a, b)| is better conditioned than arccosh of the trace
    lam = np.arcsinh(np.hypot(a, b))
    two_phi = np.mod(np.arctan2(b, a), 2 * np.pi)
    phi = np.mod(0.5 * two_phi, np.pi)
    degenerate = lam <= tol
    phi = np.where(degenerate, 0.0, phi)
    if phi.ndim == 0:
        return ExtractedFields(float(lam), float(phi), float(alpha), bool(degenerate))
    return ExtractedFields(lam, phi, alpha, degenerate)


def gauge_transform(state, k=0, c1=1.0, c2=1.0):
    """
    Apply phi -> phi + k pi, alpha -> c1 alpha, f -> c2 f. Lambda is unchanged.
    The state's alpha handle must be an AlphaData (or None when c1 == 1).
    """
    if not (c1 > 0 and c2 > 0):
        raise NonPositiveScale(f"gauge scales must be positive, got c1={c1}, c2={c2}")
    changes = {"phi": state.phi + k * np.pi}
    if state.v is not None:
        changes["v"] = state.v + np.log(c2)
    if c1 != 1.0:
        if state.alpha is None:
            raise ValueError("state carries no alpha handle to rescale")
        changes["alpha"] = dataclasses.replace(state.alpha, scale=state.alpha.scale * c1)
    return state.replace(**changes)
