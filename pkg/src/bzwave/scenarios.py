"""
Scenario documents: one JSON file per scenario describing the background
alpha, the initial data (or an exact family), the evolution grid and the
diagnostics to compute.
"""

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .alpha import AlphaData
from .diagnostics import ORIENTATIONS, VirialConfig
from .errors import ScenarioError
from .evolution import EvolutionConfig, initial_state
from .exact import (KasnerParams, SolitonParams, er_alpha, sample_family,
                    traveling_alpha)
from .fields import Grid1D
from .profiles import make_profile

SHIPPED = ("minkowski", "traveling_wave", "smalldata_gaussian", "kasner_background",
           "kasner_soliton", "kasner_soliton_perturbed", "er_bessel")

EXACT_FAMILIES = ("minkowski", "traveling", "kasner", "kasner_soliton", "er_bessel")
_TOP_KEYS = {"name", "description", "alpha", "initial", "exact", "evolution",
             "diagnostics", "convergence", "outputs", "small_data"}
_PROFILE_KEYS = ("lambda_tilde0", "lambda_tilde1", "phi0", "phi1", "f0", "f1")


@dataclass
class Scenario:
    name: str
    raw: dict
    alpha: AlphaData
    evolution: EvolutionConfig
    epsilon: float = 0.0
    lambda0: float = 1.0
    c1: float = 1.0
    profiles: dict = field(default_factory=dict)
    exact: dict = None
    virial: list = field(default_factory=list)
    orientation: str = "timelike"
    delta: float = 0.1
    convergence: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    small_data: bool = False

    @property
    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def with_grid(self, n, t_end=None, output_stride=None):
        """Copy of the evolution config on a grid with n nodes."""
        g = self.evolution.grid
        ev = self.evolution
        return EvolutionConfig(Grid1D(g.x_min, g.x_max, n), ev.t_end if t_end is None else t_end,
                               ev.cfl, ev.lambda0, ev.guard_fraction,
                               ev.output_stride if output_stride is None else output_stride,
                               ev.contamination_tol)

    def exact_kwargs(self):
        """Keyword arguments for exact.sample_family, or None."""
        if self.exact is None:
            return None
        e = dict(self.exact)
        fam = e.pop("family")
        kw = {"family": fam}
        if fam == "traveling":
            kw.update(h=make_profile(e.get("h")), k=make_profile(e.get("k")),
                      l=make_profile(e.get("l")), m=make_profile(e.get("m")),
                      direction=int(e.get("direction", -1)), shift=float(e.get("shift", 0.0)))
        elif fam == "kasner":
            kw.update(alpha=self.alpha, kasner=KasnerParams(float(e.get("d", 1.0))),
                      shift=float(e.get("shift", 0.0)))
        elif fam == "kasner_soliton":
            kw.update(alpha=self.alpha, soliton=SolitonParams(
                float(e.get("d", 1.0)), float(e["w"]), float(e.get("C_beta", 0.0)),
                float(e.get("C_rho", 0.0))))
        elif fam in ("er_bessel", "minkowski"):
            kw.update(shift=float(e.get("shift", 0.0)))
        return kw

    def exact_state(self, grid, t):
        kw = self.exact_kwargs()
        state, ev = sample_family(grid=grid, t=t, lambda0=self.lambda0, **kw)
        return state, ev

    def background(self):
        """Exact background callable for edge values, or None."""
        if self.exact is None:
            return None

        def bg(t, grid):
            return self.exact_state(grid, t)[0]
        return bg

    def initial(self, config=None):
        """Initial FieldState: exact family data plus epsilon-scaled perturbations."""
        config = config or self.evolution
        grid = config.grid
        eps = self.epsilon
        prof = {k: make_profile(self.profiles.get(k)) for k in _PROFILE_KEYS}
        base = initial_state(grid, self.alpha, self.lambda0,
                             lambda x_: eps * prof["lambda_tilde0"].value(x_),
                             lambda x_: eps * prof["lambda_tilde1"].value(x_),
                             lambda x_: eps * prof["phi0"].value(x_),
                             lambda x_: eps * prof["phi1"].value(x_),
                             prof["f0"].value, prof["f1"].value, self.c1, 0.0, True)
        if self.exact is None:
            return base
        ex, _ = self.exact_state(grid, 0.0)
        return base.replace(lambda_tilde=base.lambda_tilde + ex.lambda_tilde,
                            pi=base.pi + ex.pi, phi=base.phi + ex.phi, xi=base.xi + ex.xi,
                            alpha=ex.alpha)

    def f_profiles(self):
        return make_profile(self.profiles.get("f0")), make_profile(self.profiles.get("f1"))


def _require(cond, msg):
    if not cond:
        raise ScenarioError(msg)


def _number(d, key, default=None, positive=False, integer=False):
    v = d.get(key, default)
    _require(v is not None, f"missing required key {key!r}")
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"{key!r} must be a number")
    _require(np.isfinite(v), f"{key!r} must be finite")
    if positive:
        _require(v > 0, f"{key!r} must be positive")
    if integer:
        _require(float(v).is_integer(), f"{key!r} must be an integer")
        return int(v)
    return float(v)


def _profile(spec, where):
    try:
        return make_profile(spec)
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def parse_scenario(doc, base_dir=None):
    """Validate a scenario document and build the Scenario object."""
    _require(isinstance(doc, dict), "scenario must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"unknown top-level keys: {sorted(unknown)}")
    name = doc.get("name")
    _require(isinstance(name, str) and name, "scenario needs a non-empty 'name'")

    exact = doc.get("exact")
    if exact is not None:
        _require(isinstance(exact, dict) and exact.get("family") in EXACT_FAMILIES,
                 f"exact.family must be one of {EXACT_FAMILIES}")

    a = dict(doc.get("alpha", {}))
    if exact is not None and exact["family"] == "er_bessel":
        alpha = er_alpha()
    elif exact is not None and exact["family"] in ("minkowski",):
        alpha = AlphaData()
    elif exact is not None and exact["family"] == "traveling":
        alpha = traveling_alpha(_profile(exact.get("l"), "exact.l"), int(exact.get("direction", -1)))
    else:
        for key in ("alpha0_tilde", "alpha1"):
            spec = a.get(key)
            if isinstance(spec, dict) and spec.get("family") == "tabulated" and "path" in spec \
                    and base_dir is not None and not Path(spec["path"]).is_absolute():
                spec = dict(spec, path=str(Path(base_dir) / spec["path"]))
            a[key] = _profile(spec, f"alpha.{key}")
        try:
            alpha = AlphaData(**{k: v for k, v in a.items()})
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"alpha: {exc}") from None
    # smallness parameters apply to every alpha
    extra = {k: float(a[k]) for k in ("gamma", "K1", "K2") if k in a}
    if extra:
        alpha = dataclasses.replace(alpha, **extra)
    if "cosmological" in a:
        alpha = dataclasses.replace(alpha, cosmological=bool(a["cosmological"]))

    ini = doc.get("initial", {})
    _require(isinstance(ini, dict), "'initial' must be an object")
    eps = _number(ini, "epsilon", 0.0)
    _require(eps >= 0, "epsilon must be >= 0")
    lam0 = _number(ini, "lambda0", 1.0, positive=True)
    c1 = _number(ini, "c1", 1.0, positive=True)
    profiles = {}
    for k in _PROFILE_KEYS:
        if k in ini:
            _profile(ini[k], f"initial.{k}")
            profiles[k] = ini[k]

    ev = doc.get("evolution")
    _require(isinstance(ev, dict), "missing 'evolution' object")
    try:
        grid = Grid1D(_number(ev, "x_min"), _number(ev, "x_max"), _number(ev, "n", integer=True))
        cfg = EvolutionConfig(grid, _number(ev, "t_end", positive=True), _number(ev, "cfl", 0.5),
                              lam0, _number(ev, "guard_fraction", 0.5),
                              _number(ev, "output_stride", 1, integer=True),
                              _number(ev, "contamination_tol", 1e-8))
    except ValueError as exc:
        raise ScenarioError(f"evolution: {exc}") from None

    dg = doc.get("diagnostics", {})
    orientation = dg.get("orientation", "timelike")
    _require(orientation in ORIENTATIONS, f"orientation must be one of {ORIENTATIONS}")
    vels = dg.get("velocities", [0.0])
    _require(isinstance(vels, list) and vels, "diagnostics.velocities must be a non-empty list")
    try:
        virial = [VirialConfig(float(v), dg.get("weight_mode", "log"), float(dg.get("omega0", 1.0)))
                  for v in vels]
    except ValueError as exc:
        raise ScenarioError(f"diagnostics: {exc}") from None
    delta = _number(dg, "delta", alpha.delta)
    _require(0 < delta < 1 / 3, "delta must lie in (0, 1/3)")

    return Scenario(name, doc, alpha, cfg, eps, lam0, c1, profiles, exact, virial, orientation,
                    delta, dict(doc.get("convergence", {})), dict(doc.get("outputs", {})),
                    bool(doc.get("small_data", False)))


def load_scenario(path):
    """Load a scenario from a file path or the name of a shipped scenario."""
    p = Path(path)
    if not p.exists() and str(path) in SHIPPED:
        text = resources.files("bzwave").joinpath("scenarios", f"{path}.json").read_text()
        base = None
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read {path}: {exc}") from None
        base = p.parent
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    return parse_scenario(doc, base)


def shipped_path(name):
    return resources.files("bzwave").joinpath("scenarios", f"{name}.json")
