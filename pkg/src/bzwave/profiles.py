"""
One-variable profile functions used as initial data.

Every profile exposes value, d1, d2, d3 and `antiderivative(s)` = int_0^s.
Profiles are immutable; any precomputed tables are built at construction
and only read afterwards, so evaluation is safe from several threads.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf

from .errors import QuadratureFailure


class Profile:
    name = "profile"

    def value(self, s):
        raise NotImplementedError

    def d1(self, s):
        raise NotImplementedError

    def d2(self, s):
        raise NotImplementedError

    def d3(self, s):
        raise NotImplementedError

    def antiderivative(self, s):
        raise NotImplementedError

    def derivative(self, n, s):
        return (self.value, self.d1, self.d2, self.d3)[n](s)

    def support_radius(self):
        """Radius about the origin outside which the profile is negligible."""
        return np.inf

    def __call__(self, s):
        return self.value(s)


def _zeros(s):
    return np.zeros_like(np.asarray(s, dtype=float))


@dataclass(frozen=True)
class Zero(Profile):
    name = "zero"

    def value(self, s):
        return _zeros(s)

    d1 = d2 = d3 = antiderivative = value

    def support_radius(self):
        return 0.0


@dataclass(frozen=True)
class Constant(Profile):
    """Constant c. Not decaying; admitted for exactly solvable tests only."""

    c: float = 0.0
    name = "constant"

    def value(self, s):
        return self.c + _zeros(s)

    def d1(self, s):
        return _zeros(s)

    d2 = d3 = d1

    def antiderivative(self, s):
        return self.c * np.asarray(s, dtype=float)


@dataclass(frozen=True)
class Linear(Profile):
    """a s + b. Not decaying; used to express alpha = r."""

    a: float = 1.0
    b: float = 0.0
    name = "linear"

    def value(self, s):
        return self.a * np.asarray(s, dtype=float) + self.b

    def d1(self, s):
        return self.a + _zeros(s)

    def d2(self, s):
        return _zeros(s)

    d3 = d2

    def antiderivative(self, s):
        s = np.asarray(s, dtype=float)
        return 0.5 * self.a * s * s + self.b * s


@dataclass(frozen=True)
class Gaussian(Profile):
    """amp * exp(-((s - center)/width)^2)."""

    amp: float = 1.0
    width: float = 1.0
    center: float = 0.0
    name = "gaussian"

    def _y(self, s):
        return (np.asarray(s, dtype=float) - self.center) / self.width

    def value(self, s):
        y = self._y(s)
        return self.amp * np.exp(-y * y)

    def d1(self, s):
        y = self._y(s)
        return self.amp * np.exp(-y * y) * (-2 * y) / self.width

    def d2(self, s):
        y = self._y(s)
        return self.amp * np.exp(-y * y) * (4 * y * y - 2) / self.width**2

    def d3(self, s):
        y = self._y(s)
        return self.amp * np.exp(-y * y) * (12 * y - 8 * y**3) / self.width**3

    def antiderivative(self, s):
        c = 0.5 * np.sqrt(np.pi) * self.amp * self.width
        return c * (erf(self._y(s)) - erf(-self.center / self.width))

    def support_radius(self):
        return abs(self.center) + 6.5 * self.width


@dataclass(frozen=True)
class Sech2(Profile):
    """amp * sech^2((s - center)/width)."""

    amp: float = 1.0
    width: float = 1.0
    center: float = 0.0
    name = "sech2"

    def _y(self, s):
        return (np.asarray(s, dtype=float) - self.center) / self.width

    def value(self, s):
        return self.amp / np.cosh(self._y(s)) ** 2

    def d1(self, s):
        y = self._y(s)
        return -2 * self.amp * np.tanh(y) / np.cosh(y) ** 2 / self.width

    def d2(self, s):
        y = self._y(s)
        sech2 = 1 / np.cosh(y) ** 2
        return self.amp * (4 * sech2 - 6 * sech2 * sech2) / self.width**2

    def d3(self, s):
        y = self._y(s)
        th = np.tanh(y)
        sech2 = 1 / np.cosh(y) ** 2
        return self.amp * (-8 * th * sech2 + 24 * th * sech2 * sech2) / self.width**3

    def antiderivative(self, s):
        return self.amp * self.width * (np.tanh(self._y(s)) - np.tanh(-self.center / self.width))

    def support_radius(self):
        return abs(self.center) + 20 * self.width


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _bump_terms(y):
    """exp(1 - q) with q = 1/(1 - y^2) and the y-derivatives of E = 1 - q."""
    y = np.asarray(y, dtype=float)
    inside = np.abs(y) < 1
    yi = np.where(inside, y, 0.0)
    q = 1.0 / (1.0 - yi * yi)
    psi = np.where(inside, np.exp(1.0 - q), 0.0)
    e1 = -2 * yi * q**2
    e2 = -(2 * q**2 + 8 * yi**2 * q**3)
    e3 = -(24 * yi * q**3 + 48 * yi**3 * q**4)
    return psi, e1, e2, e3


@dataclass(frozen=True)
class Bump(Profile):
    """
    Compactly supported amp * exp(1 - 1/(1 - y^2)), y = (s - center)/radius.
    Peak value amp at s = center.
    """

    amp: float = 1.0
    radius: float = 1.0
    center: float = 0.0
    panels: int = 64
    name = "bump"
    _edges: np.ndarray = field(init=False, repr=False, compare=False)
    _cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges, cum = self._table(self.panels)
        _, fine = self._table(2 * self.panels)
        err = abs(cum[-1] - fine[-1])
        if err > 1e-13 * max(1.0, abs(self.amp) * self.radius):
            raise QuadratureFailure(f"bump antiderivative self-check failed: {err:.3e}")
        edges.flags.writeable = False
        cum.flags.writeable = False
        object.__setattr__(self, "_edges", edges)
        object.__setattr__(self, "_cumulative", cum)

    def _y(self, s):
        return (np.asarray(s, dtype=float) - self.center) / self.radius

    def value(self, s):
        return self.amp * _bump_terms(self._y(s))[0]

    def d1(self, s):
        psi, e1, _, _ = _bump_terms(self._y(s))
        return self.amp * psi * e1 / self.radius

    def d2(self, s):
        psi, e1, e2, _ = _bump_terms(self._y(s))
        return self.amp * psi * (e2 + e1 * e1) / self.radius**2

    def d3(self, s):
        psi, e1, e2, e3 = _bump_terms(self._y(s))
        return self.amp * psi * (e3 + 3 * e1 * e2 + e1**3) / self.radius**3

    def _panel(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = mid[..., None] + half[..., None] * _GL_NODES
        return half * np.sum(_GL_WEIGHTS * self.value(nodes), axis=-1)

    def _table(self, panels):
        edges = np.linspace(self.center - self.radius, self.center + self.radius, panels + 1)
        cum = np.concatenate([[0.0], np.cumsum(self._panel(edges[:-1], edges[1:]))])
        return edges, cum

    def _from_left(self, s):
        s = np.clip(np.asarray(s, dtype=float), self._edges[0], self._edges[-1])
        k = np.clip(np.searchsorted(self._edges, s, side="right") - 1, 0, len(self._edges) - 2)
        return self._cumulative[k] + self._panel(self._edges[k], s)

    def antiderivative(self, s):
        return self._from_left(s) - self._from_left(0.0)

    def support_radius(self):
        return abs(self.center) + self.radius


@dataclass(frozen=True)
class Tabulated(Profile):
    """Cubic spline through (s, y) samples; zero outside the sampled range."""

    s: tuple
    y: tuple
    name = "tabulated"
    _spline: CubicSpline = field(init=False, repr=False, compare=False)
    _anti: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        spline = CubicSpline(np.asarray(self.s, float), np.asarray(self.y, float))
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_anti", spline.antiderivative())

    @classmethod
    def from_csv(cls, path):
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        return cls(tuple(data[:, 0]), tuple(data[:, 1]))

    def _eval(self, s, nu):
        s = np.asarray(s, dtype=float)
        lo, hi = self.s[0], self.s[-1]
        inside = (s >= lo) & (s <= hi)
        return np.where(inside, self._spline(np.clip(s, lo, hi), nu), 0.0)

    def value(self, s):
        return self._eval(s, 0)

    def d1(self, s):
        return self._eval(s, 1)

    def d2(self, s):
        return self._eval(s, 2)

    def d3(self, s):
        return self._eval(s, 3)

    def antiderivative(self, s):
        lo, hi = self.s[0], self.s[-1]
        clipped = np.clip(np.asarray(s, dtype=float), lo, hi)
        return self._anti(clipped) - self._anti(np.clip(0.0, lo, hi))

    def support_radius(self):
        return max(abs(self.s[0]), abs(self.s[-1]))


@dataclass(frozen=True)
class ScaledDerivative(Profile):
    """sigma * g'. With alpha0 = g, alpha1 = sigma g' the wave is g(x + sigma t)."""

    base: Profile
    sigma: float = 1.0
    name = "derivative"

    def value(self, s):
        return self.sigma * self.base.d1(s)

    def d1(self, s):
        return self.sigma * self.base.d2(s)

    def d2(self, s):
        return self.sigma * self.base.d3(s)

    def d3(self, s):
        raise NotImplementedError("third derivative of a derivative profile")

    def antiderivative(self, s):
        return self.sigma * (self.base.value(s) - self.base.value(0.0))

    def support_radius(self):
        return self.base.support_radius()


FAMILIES = {
    "zero": Zero,
    "constant": Constant,
    "linear": Linear,
    "gaussian": Gaussian,
    "sech2": Sech2,
    "bump": Bump,
}


def make_profile(spec):
    """Build a profile from a dict such as {"family": "gaussian", "amp": 0.1}."""
    if spec is None:
        return Zero()
    if isinstance(spec, Profile):
        return spec
    spec = dict(spec)
    family = spec.pop("family", None)
    if family == "tabulated":
        if "path" in spec:
            return Tabulated.from_csv(spec["path"])
        return Tabulated(tuple(spec["s"]), tuple(spec["y"]))
    if family == "derivative":
        return ScaledDerivative(make_profile(spec["base"]), float(spec.get("sigma", 1.0)))
    if family not in FAMILIES:
        raise KeyError(f"unknown profile family {family!r}")
    return FAMILIES[family](**spec)


def profile_to_dict(p):
    """Inverse of make_profile for the built-in families."""
    if isinstance(p, Tabulated):
        return {"family": "tabulated", "s": list(p.s), "y": list(p.y)}
    if isinstance(p, ScaledDerivative):
        return {"family": "derivative", "base": profile_to_dict(p.base), "sigma": p.sigma}
    out = {"family": p.name}
    for f in getattr(p, "__dataclass_fields__", {}).values():
        if f.init and f.name != "panels":
            out[f.name] = getattr(p, f.name)
    return out
