"""
Energy and momentum densities, modified energy, weighted null-frame norms,
virial functional and its rate identity, windowed decay integrals and
continuity-law residuals.
"""

import csv
import json
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
from scipy.integrate import simpson

from .alpha import alpha_eval, gradient_norm, null_tolerance
from .errors import GridMismatch
from .evolution import _check_triple, d1

ORIENTATIONS = ("raw", "tilde", "timelike", "spacelike")


class DensitySample(NamedTuple):
    h1: Any
    h2: Any
    e: Any
    p: Any
    e_tilde: Any
    p_tilde: Any
    e_hat: Any
    p_hat: Any
    kappa: Any
    grad_class: Any
    applicable: Any


def density_sample(lam, lam_t, lam_x, phi_t, phi_x, jet, tol=None):
    """
    All densities at one point or an array of points. Where the alpha
    gradient is null the densities are NaN and `applicable` is False.
    Hat densities follow the local gradient class.
    """
    if tol is None:
        tol = null_tolerance(jet)
    a, at, ax = jet.alpha, jet.dt, jet.dx
    q = gradient_norm(jet)
    cls = np.where(q < -tol, -1, np.where(q > tol, 1, 0))
    ok = cls != 0
    kap = np.where(ok, a / np.where(ok, q, 1.0), np.nan)

    s2 = np.sinh(lam) ** 2
    h1 = lam_t**2 + lam_x**2 + 4 * s2 * (phi_t**2 + phi_x**2)
    h2 = lam_t * lam_x + 4 * s2 * phi_t * phi_x
    e_t = kap * (at * h1 - 2 * ax * h2)
    p_t = kap * (ax * h1 - 2 * at * h2)
    qa = (ax**2 + at**2) / a**2
    ra = ax * at / a**2
    e = kap * (at * (qa + h1) - 2 * ax * (ra + h2))
    p = kap * (ax * (qa + h1) - 2 * at * (ra + h2))
    e_hat = np.where(cls < 0, -e_t, p_t)
    p_hat = np.where(cls < 0, p_t, e_t)
    if np.ndim(cls) == 0:
        cls, ok = int(cls), bool(ok)
        e_hat, p_hat = float(e_hat), float(p_hat)
    return DensitySample(h1, h2, e, p, e_t, p_t, e_hat, p_hat, kap, cls, ok)


def hat_pair(ds, orientation):
    """(energy, momentum) densities for a declared orientation."""
    if orientation == "raw":
        return ds.e, ds.p
    if orientation == "tilde":
        return ds.e_tilde, ds.p_tilde
    if orientation == "timelike":
        return -ds.e_tilde, ds.p_tilde
    if orientation == "spacelike":
        return ds.p_tilde, ds.e_tilde
    raise ValueError(f"unknown orientation {orientation!r}")


def snapshot_jets(state, d=None):
    """(Lambda, Lambda_t, Lambda_x, phi_t, phi_x, alpha jet) on the state's grid."""
    d = d if d is not None else state.alpha
    g = state.grid
    jet = alpha_eval(d, state.time, g.x)
    return (state.lam, state.pi, d1(state.lambda_tilde, g.dx), state.xi,
            d1(state.phi, g.dx), jet)


def snapshot_densities(state, d=None):
    return density_sample(*snapshot_jets(state, d))


def _integrate(f, h):
    return float(simpson(f, dx=h))


class EnergyValue(NamedTuple):
    E: float
    E_hat: float
    cosmological: bool
    null_measure: float


def modified_energy(state, d=None):
    """
    E = -int kappa alpha_t (h1 - 2 h2) dx and int e_hat dx (timelike
    orientation). `cosmological` flags whether alpha > 0, alpha_t > 0 and
    the gradient is timelike on the whole snapshot.
    """
    lam, lt, lx, pt, px, jet = snapshot_jets(state, d)
    ds = density_sample(lam, lt, lx, pt, px, jet)
    h = state.grid.dx
    ok = ds.applicable
    integrand = np.where(ok, -ds.kappa * jet.dt * (ds.h1 - 2 * ds.h2), 0.0)
    e_hat = np.where(ok, -ds.e_tilde, 0.0)
    cosmo = bool(np.all(jet.alpha > 0) and np.all(jet.dt > 0) and np.all(ds.grad_class == -1))
    null = float(h * np.count_nonzero(~ok))
    return EnergyValue(_integrate(integrand, h), _integrate(e_hat, h), cosmo, null)


class ContinuityReport(NamedTuple):
    linf_first: float
    l2_first: float
    linf_second: float
    l2_second: float
    null_measure: float

    @property
    def linf(self):
        return max(self.linf_first, self.linf_second)

    @property
    def l2(self):
        return float(np.hypot(self.l2_first, self.l2_second))


def _erode(mask, width=2):
    out = mask.copy()
    for k in range(1, width + 1):
        out[k:] &= mask[:-k]
        out[:-k] &= mask[k:]
    out[:width] = False
    out[-width:] = False
    return out


def continuity_residuals(snaps, d=None, orientation="raw"):
    """
    Residuals of the continuity identities at the middle snapshot, with time
    derivatives from centered differences of the stored snapshots.

    raw:       d_t p + d_x e = 0,  d_t e + d_x p = S + d_x(a_x/a) - d_t(a_t/a)
    tilde:     d_t p~ + d_x e~ = 0, d_t e~ + d_x p~ = S
    timelike:  d_t p^ - d_x e^ = 0, d_t e^ - d_x p^ = -S
    spacelike: d_t e^ + d_x p^ = 0, d_t p^ + d_x e^ = S
    with S = 4 sinh^2(L)(phi_t^2 - phi_x^2) + L_t^2 - L_x^2.
    """
    dt = _check_triple(snaps)
    s0, s1, s2 = snaps
    d = d if d is not None else s1.alpha
    h = s1.grid.dx
    ds = [snapshot_densities(s, d) for s in snaps]
    pairs = [hat_pair(x, orientation) for x in ds]
    (e0, p0), (e1, p1), (e2, p2) = pairs
    ok = ds[0].applicable & ds[1].applicable & ds[2].applicable
    mask = _erode(ok, 2)

    lam, lt, lx, pt, px, jet = snapshot_jets(s1, d)
    S = 4 * np.sinh(lam) ** 2 * (pt**2 - px**2) + lt**2 - lx**2
    e1z, p1z = np.where(ok, e1, 0.0), np.where(ok, p1, 0.0)
    et, pt_ = (e2 - e0) / (2 * dt), (p2 - p0) / (2 * dt)
    ex, px_ = d1(e1z, h), d1(p1z, h)

    if orientation == "raw":
        a, at, ax = jet.alpha, jet.dt, jet.dx
        extra = (jet.dxx * a - ax**2) / a**2 - (jet.dtt * a - at**2) / a**2
        r1, r2 = pt_ + ex, et + px_ - S - extra
    elif orientation == "tilde":
        r1, r2 = pt_ + ex, et + px_ - S
    elif orientation == "timelike":
        r1, r2 = pt_ - ex, et - px_ + S
    elif orientation == "spacelike":
        r1, r2 = et + px_, pt_ + ex - S
    else:
        raise ValueError(f"unknown orientation {orientation!r}")

    r1 = np.where(mask, r1, 0.0)
    r2 = np.where(mask, r2, 0.0)
    null = float(h * np.count_nonzero(~ok))
    return ContinuityReport(float(np.max(np.abs(r1))), float(np.sqrt(h * np.sum(r1**2))),
                            float(np.max(np.abs(r2))), float(np.sqrt(h * np.sum(r2**2))), null)


class WeightedNorms(NamedTuple):
    energy_k0: float
    energy_k1: float
    energy_bar_k0: float
    energy_bar_k1: float


def _null_weights(t, x, delta):
    u, ub = 0.5 * (t + x), 0.5 * (t - x)
    return (1 + u * u) ** (1 + delta), (1 + ub * ub) ** (1 + delta)


def _null_derivs(state):
    """L and Lbar applied to (Lambda_tilde, d_x Lambda_tilde, phi, d_x phi)."""
    h = state.grid.dx
    out = []
    for f, ft in ((state.lambda_tilde, state.pi), (state.phi, state.xi)):
        fx = d1(f, h)
        fxx = d1(fx, h)
        ftx = d1(ft, h)
        out.append(((ft + fx, ft - fx), (ftx + fxx, ftx - fxx)))
    return out


def weighted_norms(state, delta):
    """Space-time weighted energies for k = 0, 1 of Lambda_tilde and phi."""
    g = state.grid
    wu, wub = _null_weights(state.time, g.x, delta)
    vals = []
    for field_terms in _null_derivs(state):
        for lf, lbf in field_terms:
            vals.append(_integrate(wub * lbf**2 + wu * lf**2, g.dx))
    return WeightedNorms(vals[0], vals[1], vals[2], vals[3])


class FluxNorms(NamedTuple):
    times: np.ndarray
    flux: np.ndarray
    flux_bar: np.ndarray


def flux_norms(trajectory, delta):
    """
    F(t) and Fbar(t) (k = 0 and 1 summed) at every snapshot time. The sup over
    null lines is replaced by the max over the lines through each grid node at
    the first snapshot; line integrals use the trapezoid rule in time and
    linear interpolation in space, with zero outside the grid.
    """
    snaps = trajectory.snapshots
    g = snaps[0].grid
    x = g.x
    t0 = snaps[0].time
    taus = np.array([s.time for s in snaps])
    # integrands along u = const lines (x = x_j - (tau - t0)) use Lbar,
    # along ubar = const lines (x = x_j + (tau - t0)) use L
    acc = np.zeros((2, 2, g.n))
    prev = None
    flux = np.zeros((2, len(snaps)))
    for i, s in enumerate(snaps):
        wu, wub = _null_weights(s.time, x, delta)
        cur = np.zeros((2, 2, g.n))
        shift = s.time - t0
        for fi, field_terms in enumerate(_null_derivs(s)):
            dens_u = sum(wub * lbf**2 for _, lbf in field_terms)
            dens_ub = sum(wu * lf**2 for lf, _ in field_terms)
            cur[fi, 0] = np.interp(x - shift, x, dens_u, left=0.0, right=0.0)
            cur[fi, 1] = np.interp(x + shift, x, dens_ub, left=0.0, right=0.0)
        if prev is not None:
            acc += 0.5 * (taus[i] - taus[i - 1]) * (cur + prev)
        prev = cur
        flux[:, i] = acc[:, 0].max(axis=1) + acc[:, 1].max(axis=1)
    return FluxNorms(taus, flux[0], flux[1])


@dataclass(frozen=True)
class VirialConfig:
    v: float = 0.0
    weight_mode: str = "log"
    omega0: float = 1.0

    def __post_init__(self):
        if not abs(self.v) < 1:
            raise ValueError(f"|v| must be < 1, got {self.v}")
        if self.weight_mode not in ("constant", "log"):
            raise ValueError(f"unknown weight_mode {self.weight_mode!r}")

    def omega(self, t):
        if self.weight_mode == "constant":
            return self.omega0
        t = max(t, 2.0)
        return t / np.log(t) ** 2

    def omega_rate(self, t):
        """omega'(t) / omega(t)."""
        if self.weight_mode == "constant" or t <= 2.0:
            return 0.0
        return (1 - 2 / np.log(t)) / t


def _window(state, cfg):
    om = cfg.omega(state.time)
    z = (state.grid.x - cfg.v * state.time) / om
    return z, om


def virial(state, cfg, d=None, orientation="timelike"):
    """I = -int tanh((x - v t)/omega) p_hat dx."""
    ds = snapshot_densities(state, d)
    _, p_hat = hat_pair(ds, orientation)
    z, _ = _window(state, cfg)
    return _integrate(np.where(ds.applicable, -np.tanh(z) * p_hat, 0.0), state.grid.dx)


def virial_rhs(state, cfg, d=None, orientation="timelike", boundary=True):
    """
    (omega'/omega) int z rho' p^ + (v/omega) int rho' p^ + (1/omega) int rho' e^.

    On a finite grid the integration by parts leaves the flux
    -[tanh(z) e^] between the end points; it is added when `boundary` is
    set and vanishes for perturbations that stay away from the edges.
    """
    if orientation != "timelike":
        raise ValueError("the virial rate identity uses the timelike orientation")
    ds = snapshot_densities(state, d)
    e_hat, p_hat = hat_pair(ds, orientation)
    ok = ds.applicable
    e_hat, p_hat = np.where(ok, e_hat, 0.0), np.where(ok, p_hat, 0.0)
    z, om = _window(state, cfg)
    rp = 1 / np.cosh(z) ** 2
    h = state.grid.dx
    out = (cfg.omega_rate(state.time) * _integrate(z * rp * p_hat, h)
           + cfg.v / om * _integrate(rp * p_hat, h)
           + 1 / om * _integrate(rp * e_hat, h))
    if boundary:
        out -= np.tanh(z[-1]) * e_hat[-1] - np.tanh(z[0]) * e_hat[0]
    return out


class VirialRate(NamedTuple):
    measured: float
    rhs: float
    mismatch: float


def virial_rate_check(snaps, cfg, d=None, orientation="timelike", boundary=True):
    """Centered-difference dI/dt against the rate identity at the middle snapshot."""
    dt = _check_triple(snaps)
    measured = (virial(snaps[2], cfg, d, orientation) - virial(snaps[0], cfg, d, orientation)) / (2 * dt)
    r = virial_rhs(snaps[1], cfg, d, orientation, boundary)
    return VirialRate(measured, r, abs(measured - r))


def windowed_decay(state, cfg, d=None):
    """Window sech^2((x - v t)/omega) applied to the field and det g forms."""
    lam, lt, lx, pt, px, jet = snapshot_jets(state, d)
    z, _ = _window(state, cfg)
    w = 1 / np.cosh(z) ** 2
    h = state.grid.dx
    field_form = _integrate(w * (lt**2 + lx**2 + np.sinh(lam) ** 2 * (pt**2 + px**2)), h)
    detg_form = _integrate(w * 4 * jet.alpha**2 * (jet.dt**2 + jet.dx**2), h)
    return field_form, detg_form


def averaged_window(state, cfg, d=None, orientation="timelike"):
    """(1/omega) int sech^2((x - v t)/omega) e_hat dx."""
    ds = snapshot_densities(state, d)
    e_hat, _ = hat_pair(ds, orientation)
    z, om = _window(state, cfg)
    return _integrate(np.where(ds.applicable, e_hat / np.cosh(z) ** 2, 0.0), state.grid.dx) / om


SERIES_COLUMNS = ("t", "E", "E_hat", "I", "windowed_field", "windowed_detg",
                  "energy_k0", "energy_k1", "energy_bar_k0", "energy_bar_k1",
                  "flux", "flux_bar", "cont_linf", "cont_l2", "virial_rhs",
                  "virial_mismatch", "averaged_window", "null_measure")


@dataclass
class DiagnosticsSeries:
    columns: dict
    meta: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.columns["t"]

    def __getitem__(self, key):
        return self.columns[key]

    def write_csv(self, path):
        write_columns(path, self.columns)

    def write_sidecar(self, path):
        with open(path, "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def format_value(v):
    return format(float(v), ".17g")


def write_columns(path, columns):
    """Comma-separated, header row, 17 significant digits."""
    names = list(columns)
    rows = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r in rows:
            w.writerow([format_value(v) for v in r])


def compute_series(trajectory, cfg=None, orientation="timelike", delta=0.1, d=None):
    """Evaluate every diagnostic at each snapshot of a trajectory."""
    cfg = cfg if cfg is not None else VirialConfig()
    d = d if d is not None else trajectory.alpha
    snaps = trajectory.snapshots
    n = len(snaps)
    cols = {k: np.full(n, np.nan) for k in SERIES_COLUMNS}
    fl = flux_norms(trajectory, delta)
    timelike = orientation == "timelike"
    cols["flux"], cols["flux_bar"] = fl.flux, fl.flux_bar
    for i, s in enumerate(snaps):
        cols["t"][i] = s.time
        en = modified_energy(s, d)
        cols["E"][i], cols["E_hat"][i], cols["null_measure"][i] = en.E, en.E_hat, en.null_measure
        cols["I"][i] = virial(s, cfg, d, orientation)
        cols["windowed_field"][i], cols["windowed_detg"][i] = windowed_decay(s, cfg, d)
        wn = weighted_norms(s, delta)
        for k in WeightedNorms._fields:
            cols[k][i] = getattr(wn, k)
        if timelike:
            cols["virial_rhs"][i] = virial_rhs(s, cfg, d, orientation)
        cols["averaged_window"][i] = averaged_window(s, cfg, d, orientation)
        if 0 < i < n - 1:
            try:
                cr = continuity_residuals(snaps[i - 1:i + 2], d, orientation)
                cols["cont_linf"][i], cols["cont_l2"][i] = cr.linf, cr.l2
                if timelike:
                    cols["virial_mismatch"][i] = virial_rate_check(
                        snaps[i - 1:i + 2], cfg, d, orientation).mismatch
            except GridMismatch:
                pass
    meta = {"v": cfg.v, "weight_mode": cfg.weight_mode, "omega0": cfg.omega0,
            "delta": delta, "orientation": orientation}
    return DiagnosticsSeries(cols, meta)


def decay_summary(times, values, t_start=5.0, ripple=0.02, t_final=None):
    """
    Monotone-tail check: after t_start each value must stay below
    (1 + ripple) times the running minimum (plus 1e-10 of the maximum).
    Also returns the ratio value(t_final) / max.
    """
    times = np.asarray(times)
    values = np.asarray(values)
    vmax = float(np.max(values))
    tail = values[times >= t_start]
    running = np.minimum.accumulate(tail)
    slack = 1e-10 * vmax
    violations = int(np.count_nonzero(tail > (1 + ripple) * running + slack))
    k = -1 if t_final is None else int(np.argmin(np.abs(times - t_final)))
    ratio = float(values[k] / vmax) if vmax > 0 else 0.0
    return {"non_increasing": violations == 0, "violations": violations,
            "final_over_max": ratio, "max": vmax, "final": float(values[k])}


def time_average(times, values):
    """Trapezoid integral of a series over its time axis."""
    return float(np.trapezoid(values, times))

