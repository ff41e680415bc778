"""
Method-of-lines evolution of (Lambda_tilde, phi, ln f) on the closed-form
background alpha, discrete PDE residuals, and the ln f quadrature oracle.

Space: 4th-order centered differences, 4th-order one-sided stencils at the
two outermost nodes. Time: classical RK4.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .alpha import alpha_eval
from .errors import (BoundaryContamination, CflViolation, GridMismatch,
                     LambdaDegenerate, NonPositiveAlpha, NonPositiveF,
                     OutsideDomain)
from .fields import FieldState, Grid1D

# one-sided 4th-order stencils at nodes 0 and 1 (mirrored at the right end)
_D1_EDGE = np.array([[-25, 48, -36, 16, -3, 0], [-3, -10, 18, -6, 1, 0]]) / 12.0
_D2_EDGE = np.array([[45, -154, 214, -156, 61, -10], [10, -15, -4, 14, -6, 1]]) / 12.0


def d1(f, h):
    """First derivative, 4th order."""
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    out[:2] = _D1_EDGE @ f[:6] / h
    out[-2:] = -(_D1_EDGE @ f[:-7:-1])[::-1] / h
    return out


def d2(f, h):
    """Second derivative, 4th order."""
    out = np.empty_like(f)
    out[2:-2] = (-f[:-4] + 16 * f[1:-3] - 30 * f[2:-2] + 16 * f[3:-1] - f[4:]) / (12 * h * h)
    out[:2] = _D2_EDGE @ f[:6] / (h * h)
    out[-2:] = (_D2_EDGE @ f[:-7:-1])[::-1] / (h * h)
    return out


@dataclass(frozen=True)
class EvolutionConfig:
    grid: Grid1D
    t_end: float
    cfl: float = 0.5
    lambda0: float = 1.0
    guard_fraction: float = 0.5
    output_stride: int = 1
    contamination_tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.cfl <= 0.9:
            raise ValueError(f"cfl must lie in (0, 0.9], got {self.cfl}")
        if self.output_stride < 1:
            raise ValueError("output_stride must be >= 1")

    @property
    def dt(self):
        return self.cfl * self.grid.dx

    @property
    def steps(self):
        return int(round(self.t_end / self.dt))


class StateRate(NamedTuple):
    """Time derivative of a FieldState."""

    lambda_t: np.ndarray
    pi_t: np.ndarray
    phi_t: np.ndarray
    xi_t: np.ndarray
    v_t: Optional[np.ndarray]
    w_t: Optional[np.ndarray]


class ResidualReport(NamedTuple):
    linf_lambda: float
    l2_lambda: float
    linf_phi: float
    l2_phi: float
    linf_alpha: float
    linf_f: float


def _alpha_on(d, t, x):
    jet = alpha_eval(d, t, x)
    if np.any(jet.alpha <= 0):
        raise NonPositiveAlpha(f"alpha <= 0 at t = {t}")
    return jet


def _g_terms(lam, lt, lx, pt, px, jet):
    q = jet.dt**2 - jet.dx**2
    return (q / (2 * jet.alpha**2) - 0.5 * (lt * lt - lx * lx)
            - 2 * np.sinh(lam) ** 2 * (pt * pt - px * px))


def _rates(y, t, x, h, d, lambda0, guard):
    lt_, pi, phi, xi, v, w = y
    lam = lambda0 + lt_
    if np.any(np.abs(lam) < guard * lambda0):
        i = int(np.argmax(np.abs(lam) < guard * lambda0))
        raise LambdaDegenerate(f"|Lambda| = {abs(lam[i]):.3e} below guard at x = {x[i]:.6g}, t = {t:.6g}")
    jet = _alpha_on(d, t, x)
    a, at, ax = jet.alpha, jet.dt, jet.dx
    lx, px = d1(lt_, h), d1(phi, h)
    sh = np.sinh(lam)
    lam_tt = d2(lt_, h) - (at * pi - ax * lx) / a + 2 * np.sinh(2 * lam) * (xi * xi - px * px)
    phi_tt = d2(phi, h) - (at * xi - ax * px) / a - 2 * np.cosh(lam) / sh * (xi * pi - px * lx)
    out = np.empty_like(y)
    out[0], out[1], out[2], out[3] = pi, lam_tt, xi, phi_tt
    out[4] = w
    out[5] = d2(v, h) + _g_terms(lam, pi, lx, xi, px, jet)
    return out


def _pack(state):
    n = state.grid.n
    v = state.v if state.v is not None else np.zeros(n)
    w = state.w if state.w is not None else np.zeros(n)
    return np.array([state.lambda_tilde, state.pi, state.phi, state.xi, v, w])


def _unpack(y, t, template):
    track = template.v is not None
    return FieldState(t, template.grid, y[0], y[1], y[2], y[3],
                      y[4] if track else None, y[5] if track else None,
                      template.lambda0, template.alpha)


def rhs(state, d=None, t=None, guard_fraction=0.5):
    """Time derivative of the state; raises LambdaDegenerate below the guard."""
    d = d if d is not None else state.alpha
    t = state.time if t is None else t
    g = state.grid
    r = _rates(_pack(state), t, g.x, g.dx, d, state.lambda0, guard_fraction)
    track = state.v is not None
    return StateRate(r[0], r[1], r[2], r[3], r[4] if track else None, r[5] if track else None)


def source_g(state, d=None, t=None):
    """Source G of the ln f equation at the state's time level."""
    d = d if d is not None else state.alpha
    t = state.time if t is None else t
    g = state.grid
    jet = _alpha_on(d, t, g.x)
    return _g_terms(state.lam, state.pi, d1(state.lambda_tilde, g.dx),
                    state.xi, d1(state.phi, g.dx), jet)


def _rk4(y, t, dt, x, h, d, lambda0, guard):
    k1 = _rates(y, t, x, h, d, lambda0, guard)
    k2 = _rates(y + 0.5 * dt * k1, t + 0.5 * dt, x, h, d, lambda0, guard)
    k3 = _rates(y + 0.5 * dt * k2, t + 0.5 * dt, x, h, d, lambda0, guard)
    k4 = _rates(y + dt * k3, t + dt, x, h, d, lambda0, guard)
    return y + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def step_rk4(state, d=None, dt=None, cfl=0.5, guard_fraction=0.5):
    """One classical RK4 step of size dt <= cfl * dx."""
    d = d if d is not None else state.alpha
    g = state.grid
    dt = cfl * g.dx if dt is None else dt
    if dt > cfl * g.dx * (1 + 1e-12):
        raise CflViolation(f"dt = {dt:.3e} exceeds cfl * dx = {cfl * g.dx:.3e}")
    y = _rk4(_pack(state), state.time, dt, g.x, g.dx, d, state.lambda0, guard_fraction)
    out = _unpack(y, state.time + dt, state)
    out.check_guard(guard_fraction)
    return out


@dataclass
class Trajectory:
    """Snapshots at uniform output spacing dt_out."""

    snapshots: list
    dt_out: float
    alpha: object
    config: EvolutionConfig
    complete: bool = True
    error: Optional[Exception] = None

    @property
    def times(self):
        return np.array([s.time for s in self.snapshots])

    def __len__(self):
        return len(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]


def _edge_rows(y):
    return np.concatenate([y[:4, :3], y[:4, -3:]], axis=1)


def run_simulation(config, d, initial, background: Optional[Callable] = None,
                   raise_errors=True):
    """
    Evolve `initial` to config.t_end and return a Trajectory.

    `background(t, x)` may return an exact background FieldState; its values
    are imposed on the two outermost nodes after every step and it serves as
    the reference for the boundary-contamination check. Without it the
    reference is the initial edge data, which is stationary for constant
    edge values.
    """
    g = config.grid
    if initial.grid != g:
        raise GridMismatch("initial state grid differs from config grid")
    x, h, dt = g.x, g.dx, config.dt
    lam0, guard = config.lambda0, config.guard_fraction
    initial = initial if initial.lambda0 == lam0 else initial.replace(lambda0=lam0)
    initial.check_guard(guard)
    y = _pack(initial)
    t = initial.time

    def reference(tt):
        if background is None:
            return _edge_rows(_pack(initial))
        return _edge_rows(_pack(background(tt, g)))

    # with an exact background the third edge node also carries ordinary
    # truncation error, so the allowance scales with the background size
    if background is None:
        amp = float(np.max(np.abs(y[:4] - y[:4, :1])))
    else:
        bg0 = _pack(background(t, g))[:4]
        amp = max(float(np.max(np.abs(y[:4] - bg0))), float(np.max(np.abs(bg0))))
    threshold = max(config.contamination_tol * amp, 1e-14)

    snaps = [initial]
    try:
        for k in range(1, config.steps + 1):
            y = _rk4(y, t, dt, x, h, d, lam0, guard)
            t = initial.time + k * dt
            ref = reference(t)
            if background is not None:
                bg = _pack(background(t, g))
                y[:4, :2] = bg[:4, :2]
                y[:4, -2:] = bg[:4, -2:]
            dev = np.max(np.abs(_edge_rows(y) - ref))
            if dev > threshold:
                raise BoundaryContamination(
                    f"edge deviation {dev:.3e} exceeds {threshold:.3e} at t = {t:.6g}")
            if k % config.output_stride == 0:
                snaps.append(_unpack(y, t, initial))
                snaps[-1].check_guard(guard)
    except Exception as exc:
        if raise_errors:
            raise
        return Trajectory(snaps, dt * config.output_stride, d, config, False, exc)
    return Trajectory(snaps, dt * config.output_stride, d, config)


def _check_triple(snaps):
    if len(snaps) != 3:
        raise GridMismatch("need exactly three snapshots")
    a, b, c = snaps
    if not (a.grid == b.grid == c.grid):
        raise GridMismatch("snapshots live on different grids")
    dt1, dt2 = b.time - a.time, c.time - b.time
    if not (dt1 > 0 and abs(dt1 - dt2) <= 1e-9 * dt1):
        raise GridMismatch(f"non-uniform snapshot spacing {dt1} vs {dt2}")
    return 0.5 * (dt1 + dt2)


def _norms(r, h):
    return float(np.max(np.abs(r))), float(np.sqrt(h * np.sum(r * r)))


def pde_residual(snaps, d=None):
    """
    Discrete residual of the divergence-form equations at the middle snapshot.
    Each residual is divided by alpha so the report is gauge-scale free.
    The ln f residual is NaN when the snapshots carry no ln f.
    """
    dt = _check_triple(snaps)
    s0, s1, s2 = snaps
    d = d if d is not None else s1.alpha
    g = s1.grid
    x, h, t = g.x, g.dx, s1.time
    jm = alpha_eval(d, t - 0.5 * dt, x)
    j0 = alpha_eval(d, t, x)
    jp = alpha_eval(d, t + 0.5 * dt, x)
    a0 = j0.alpha
    L0, L1, L2 = s0.lam, s1.lam, s2.lam
    p0, p1, p2 = s0.phi, s1.phi, s2.phi
    phi_t = (p2 - p0) / (2 * dt)
    phi_x = d1(p1, h)
    lam_x = d1(L1, h)

    time_l = (jp.alpha * (L2 - L1) - jm.alpha * (L1 - L0)) / dt**2
    space_l = a0 * d2(L1, h) + j0.dx * lam_x
    res_l = (time_l - space_l - 2 * a0 * np.sinh(2 * L1) * (phi_t**2 - phi_x**2)) / a0

    cp = jp.alpha * np.sinh(0.5 * (L1 + L2)) ** 2
    cm = jm.alpha * np.sinh(0.5 * (L0 + L1)) ** 2
    time_p = (cp * (p2 - p1) - cm * (p1 - p0)) / dt**2
    c0 = a0 * np.sinh(L1) ** 2
    # product rule keeps the spatial error constant small (d1 applied twice does not)
    space_p = c0 * d2(p1, h) + d1(c0, h) * phi_x
    res_p = (time_p - space_p) / a0

    am = alpha_eval(d, t - dt, x).alpha
    ap = alpha_eval(d, t + dt, x).alpha
    res_a = ((ap - 2 * a0 + am) / dt**2 - d2(a0, h)) / a0

    if s0.v is None or s1.v is None or s2.v is None:
        linf_f = float("nan")
    else:
        lam_t = (L2 - L0) / (2 * dt)
        G = _g_terms(L1, lam_t, lam_x, phi_t, phi_x, j0)
        res_f = (s2.v - 2 * s1.v + s0.v) / dt**2 - d2(s1.v, h) - G
        linf_f = float(np.max(np.abs(res_f)))

    li_l, l2_l = _norms(res_l, h)
    li_p, l2_p = _norms(res_p, h)
    return ResidualReport(li_l, l2_l, li_p, l2_p, float(np.max(np.abs(res_a))), linf_f)


def lnf_quadrature(d, trajectory, t, x, f0, f1, c1):
    """
    ln f at (t, x) from the d'Alembert formula with source G taken from the
    trajectory's stored snapshots. The time integral uses composite Simpson
    over the snapshots with time <= t, so t must be a snapshot time reached
    by an even number of intervals (a trailing odd interval uses the
    trapezoid-corrected scipy Simpson rule).
    """
    snaps = trajectory.snapshots
    grid = snaps[0].grid
    s0 = np.linspace(grid.x_min, grid.x_max, 4001)
    if np.max(np.abs(f0(s0))) > 0.5 * c1:
        raise OutsideDomain("requires sup |f0| <= c1/2")
    times = trajectory.times
    if t < times[0] - 1e-12 or t > times[-1] + 1e-9:
        raise OutsideDomain(f"t = {t} outside the trajectory time range")
    if x - t < grid.x_min - 1e-12 or x + t > grid.x_max + 1e-12:
        raise OutsideDomain(f"backward light cone of ({t}, {x}) leaves the grid")
    k = int(round((t - times[0]) / trajectory.dt_out))
    if abs(times[0] + k * trajectory.dt_out - t) > 1e-9 * max(1.0, t):
        raise OutsideDomain("t must coincide with a stored snapshot time")

    v1 = 0.5 * (np.log(c1 + f0(x + t)) + np.log(c1 + f0(x - t)))
    ys = np.linspace(x - t, x + t, 2 * max(64, int(np.ceil(2 * t / grid.dx))) + 1)
    v2 = 0.5 * simpson(f1(ys) / (c1 + f0(ys)), x=ys) if t > 0 else 0.0
    if k == 0:
        return float(v1 + v2)

    gx = grid.x
    inner = np.empty(k + 1)
    for i in range(k + 1):
        s = snaps[i]
        G = source_g(s, d)
        cum = cumulative_simpson(G, x=gx, initial=0.0)
        half = t - (s.time - times[0])
        lo, hi = x - half, x + half
        # linear interpolation of the cumulative integral is second order
        inner[i] = np.interp(hi, gx, cum) - np.interp(lo, gx, cum)
    tt = times[: k + 1] - times[0]
    v3 = 0.5 * simpson(inner, x=tt)
    return float(v1 + v2 + v3)


def initial_state(grid, alpha, lambda0=1.0, lambda_tilde0=None, lambda_tilde1=None,
                  phi0=None, phi1=None, f0=None, f1=None, c1=1.0, t0=0.0, track_f=True):
    """Sample initial data profiles (callables of x) onto the grid."""
    x = grid.x
    z = np.zeros_like(x)

    def ev(fn):
        return z.copy() if fn is None else np.asarray(fn(x), dtype=float) + z

    v = w = None
    if track_f:
        f0v = ev(f0)
        if np.any(c1 + f0v <= 0):
            raise NonPositiveF("c1 + f0 must be positive")
        v = np.log(c1 + f0v)
        w = ev(f1) / (c1 + f0v)
    return FieldState(t0, grid, ev(lambda_tilde0), ev(lambda_tilde1), ev(phi0), ev(phi1),
                      v, w, lambda0, alpha)


def evolve_alpha_numeric(d, grid, t_end, cfl=0.5):
    """
    Solve alpha_tt = alpha_xx numerically from the closed-form data with exact
    edge values; used to cross-check alpha_eval.
    """
    x, h = grid.x, grid.dx
    dt = cfl * h
    steps = int(round(t_end / dt))
    j = alpha_eval(d, 0.0, x)
    y = np.array([j.alpha, j.dt])

    def f(yy):
        return np.array([yy[1], d2(yy[0], h)])

    t = 0.0
    for k in range(1, steps + 1):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = k * dt
        je = alpha_eval(d, t, x)
        y[0, :2], y[0, -2:] = je.alpha[:2], je.alpha[-2:]
        y[1, :2], y[1, -2:] = je.dt[:2], je.dt[-2:]
    return t, y[0]
