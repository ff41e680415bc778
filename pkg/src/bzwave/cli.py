"""
Command-line front end.

    bzwave validate|simulate|exact|convergence|decay-study SCENARIO... [--out DIR] [--jobs N]

Each scenario writes into its own directory ``DIR/<scenario name>``. CSV
bodies depend only on the scenario document; timestamps and wall times go
to ``manifest.json``.
"""

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .alpha import alpha_eval, check_cosmological, validate_alpha_data
from .diagnostics import (compute_series, continuity_residuals, decay_summary, format_value,
                          snapshot_densities, time_average, virial_rate_check, write_columns)
from .errors import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, BZError, ScenarioError
from .evolution import lnf_quadrature, pde_residual, run_simulation
from .exact import sample_family
from .fields import metric_from_fields
from .profiles import make_profile
from .scenarios import load_scenario

EPS = np.finfo(float).eps
SNAPSHOT_COLUMNS = ("x", "lambda_tilde", "pi", "phi", "xi", "v", "w", "alpha", "alpha_t", "alpha_x")
SOLVER_THRESHOLD = 3.5
RESIDUAL_THRESHOLD = 1.8
COMMANDS = ("validate", "simulate", "exact", "convergence", "decay-study")


# ---------------------------------------------------------------- helpers

def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o).__name__)


def _clean(v):
    """JSON-safe float: NaN and inf become None."""
    v = float(v)
    return v if np.isfinite(v) else None


def _grid_info(grid):
    return {"x_min": grid.x_min, "x_max": grid.x_max, "n": grid.n, "dx": grid.dx}


def write_snapshot(path, state):
    """One snapshot: a comment header line, then the CSV table."""
    jet = alpha_eval(state.alpha, state.time, state.grid.x)
    nan = np.full(state.grid.n, np.nan)
    cols = {"x": state.grid.x, "lambda_tilde": state.lambda_tilde, "pi": state.pi,
            "phi": state.phi, "xi": state.xi,
            "v": state.v if state.v is not None else nan,
            "w": state.w if state.w is not None else nan,
            "alpha": jet.alpha, "alpha_t": jet.dt, "alpha_x": jet.dx}
    with open(path, "w", newline="") as fh:
        fh.write(f"# t={format_value(state.time)} n={state.grid.n} dx={format_value(state.grid.dx)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for row in zip(*(cols[k] for k in SNAPSHOT_COLUMNS)):
            w.writerow([format_value(v) for v in row])


def read_snapshot(path):
    """Inverse of write_snapshot: (header dict, column dict)."""
    with open(path) as fh:
        head = fh.readline().lstrip("#").split()
        meta = {k: float(v) for k, v in (item.split("=") for item in head)}
        reader = csv.reader(fh)
        names = next(reader)
        data = np.array([[float(v) for v in r] for r in reader])
    return meta, {k: data[:, i] for i, k in enumerate(names)}


# ---------------------------------------------------------------- validate

def validation_report(sc):
    """Hypothesis checks for a scenario: (exit code, report lines, warnings)."""
    lines, warnings = [], []
    failed = False
    rep = validate_alpha_data(sc.alpha)
    for name, passed, detail in rep.checks:
        # smallness hypotheses only bind small-data scenarios
        binding = sc.small_data and passed is False
        failed |= binding
        tag = {True: "PASS", False: "FAIL" if binding else "INFO", None: "UNCHECKED"}[passed]
        lines.append(f"{tag:9s} {name}: {detail}")
    ev = sc.evolution
    times = np.linspace(0.0, ev.t_end, 11)
    if sc.orientation == "timelike" and sc.alpha.cosmological:
        cos = check_cosmological(sc.alpha, ev.grid, times)
        failed |= not cos.ok
        lines.extend(cos.lines())
    else:
        amin = min(float(np.min(alpha_eval(sc.alpha, t, ev.grid.x).alpha)) for t in times)
        ok = amin > 0
        failed |= not ok
        lines.append(f"{'PASS' if ok else 'FAIL':9s} alpha > 0: min alpha = {amin:.6g}")
    if sc.epsilon > 0:
        r = max(_support(sc.profiles.get(k)) for k in ("lambda_tilde0", "lambda_tilde1",
                                                          "phi0", "phi1"))
        half = 0.5 * (ev.grid.x_max - ev.grid.x_min)
        centre = 0.5 * (ev.grid.x_max + ev.grid.x_min)
        need = abs(centre) + r + ev.t_end
        ok = need <= half or not np.isfinite(r)
        failed |= not ok
        lines.append(f"{'PASS' if ok else 'FAIL':9s} domain rule: half-width {half:g} >= "
                     f"support {r:g} + t_end {ev.t_end:g}")
        if sc.epsilon > 0.1:
            warnings.append(f"epsilon = {sc.epsilon:g} is far from the small-data regime")
    return (EXIT_DOMAIN if failed else EXIT_OK), lines, warnings


def _support(spec):
    return make_profile(spec).support_radius() if spec else 0.0


def cmd_validate(sc, out, opts):
    code, lines, warnings = validation_report(sc)
    if opts.get("strict"):
        lines.extend(f"WARNING   {w}" for w in warnings)
    with open(out / "validation.txt", "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return code, {"report": lines, "warnings": warnings}


# ---------------------------------------------------------------- simulate

def _trajectory(sc, config=None):
    config = config or sc.evolution
    return run_simulation(config, sc.alpha, sc.initial(config), sc.background(),
                          raise_errors=False)


def _final_values(series):
    return {k: _clean(v[-1]) for k, v in series.columns.items()}


def cmd_simulate(sc, out, opts):
    code, lines, _ = validation_report(sc)
    info = {"validation": lines}
    if code != EXIT_OK:
        info["status"] = "validation failed"
        return code, info
    traj = _trajectory(sc)
    info["steps_completed"] = (len(traj) - 1) * sc.evolution.output_stride
    info["dt"] = sc.evolution.dt
    every = int(sc.outputs.get("snapshot_every", max(1, (len(traj) - 1) // 10)))
    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    written = []
    for i in range(0, len(traj), every):
        p = snap_dir / f"snapshot_{i:05d}.csv"
        write_snapshot(p, traj[i])
        written.append(p.name)
    if (len(traj) - 1) % every:
        p = snap_dir / f"snapshot_{len(traj) - 1:05d}.csv"
        write_snapshot(p, traj[-1])
        written.append(p.name)
    info["snapshots"] = written
    series = compute_series(traj, sc.virial[0], sc.orientation, sc.delta)
    series.write_csv(out / "diagnostics.csv")
    series.meta.update(scenario=sc.name, config_hash=sc.config_hash)
    series.write_sidecar(out / "diagnostics.json")
    info["final_diagnostics"] = _final_values(series)
    if opts.get("figures", True):
        from .plotting import plot_series, plot_snapshots
        plot_series(series, out / "diagnostics.png", sc.name)
        plot_snapshots(traj, out / "fields.png", title=sc.name)
    if not traj.complete:
        info["status"] = "failed"
        info["error"] = f"{type(traj.error).__name__}: {traj.error}"
        return getattr(traj.error, "exit_code", 3), info
    info["status"] = "ok"
    return EXIT_OK, info


# ---------------------------------------------------------------- exact

EXACT_COLUMNS = ("x", "Lambda", "phi", "alpha", "g11", "g12", "g22", "h1", "h2", "e", "p",
                 "e_tilde", "p_tilde", "e_hat", "p_hat", "kappa")


def exact_table(sc, t):
    """Column dict of an exact solution sampled on the scenario grid at time t."""
    grid = sc.evolution.grid
    kw = sc.exact_kwargs()
    state, ev = sample_family(grid=grid, t=t, lambda0=sc.lambda0, **kw)
    ds = snapshot_densities(state)
    lam = state.lam
    m = metric_from_fields(lam, state.phi, ev.alpha.alpha)
    cols = {"x": grid.x, "Lambda": lam, "phi": state.phi, "alpha": ev.alpha.alpha,
            "g11": m.g11, "g12": m.g12 + np.zeros_like(lam), "g22": m.g22}
    for k in ("h1", "h2", "e", "p", "e_tilde", "p_tilde", "e_hat", "p_hat", "kappa"):
        cols[k] = getattr(ds, k)
    extras = {}
    for k in ("det_ratio_raw", "cosh_lambda_raw"):
        if k in ev.extras:
            cols[k] = np.asarray(ev.extras[k]) + np.zeros_like(lam)
            extras[k] = cols[k]
    return cols, extras


def cmd_exact(sc, out, opts):
    if sc.exact is None:
        raise_usage(f"scenario {sc.name} names no exact family")
    t = float(opts.get("t") if opts.get("t") is not None else 0.0)
    cols, extras = exact_table(sc, t)
    write_columns(out / "exact.csv", cols)
    info = {"t": t, "family": sc.exact["family"]}
    if extras:
        det = extras.get("det_ratio_raw")
        info["det_ratio_raw"] = {"min": float(np.min(det)), "max": float(np.max(det))}
        info["cosh_lambda_raw_range"] = [float(np.min(extras["cosh_lambda_raw"])),
                                         float(np.max(extras["cosh_lambda_raw"]))]
        info["cosh_lambda_normalized_range"] = [float(np.min(np.cosh(cols["Lambda"]))),
                                                float(np.max(np.cosh(cols["Lambda"])))]
    if opts.get("figures", True):
        from .plotting import plot_exact
        plot_exact(cols, out / "exact.png", f"{sc.name}, t = {t:g}")
    return EXIT_OK, info


def raise_usage(msg):
    raise ScenarioError(msg)


# ---------------------------------------------------------------- convergence

def _triple(traj, t):
    k = int(round((t - traj[0].time) / traj.dt_out))
    if k < 1 or k + 1 >= len(traj):
        raise_usage(f"check time {t} is not interior to the run")
    return traj.snapshots[k - 1:k + 2]


def _sampled_triple(sc, config, t):
    dt = config.dt
    return [sc.exact_state(config.grid, t + s * dt)[0] for s in (-1, 0, 1)]


def _level_quantities(sc, config, t, solver_t):
    """Norms measured at one refinement level."""
    q = {}
    evolved = sc.exact is None or sc.epsilon > 0
    if evolved:
        run_cfg = sc.with_grid(config.grid.n, config.t_end, 1)
        traj = run_simulation(run_cfg, sc.alpha, sc.initial(run_cfg), sc.background())
        snaps = _triple(traj, t)
    else:
        traj = None
        snaps = _sampled_triple(sc, config, t)
    res = pde_residual(snaps, sc.alpha)
    q["residual_lambda"] = res.linf_lambda
    q["residual_phi"] = res.linf_phi
    q["residual_alpha"] = res.linf_alpha
    q["residual_lnf"] = res.linf_f
    orients = ["raw", sc.orientation] if sc.orientation != "raw" else ["raw"]
    for o in orients:
        q[f"continuity_{o}"] = continuity_residuals(snaps, sc.alpha, o).linf
    if sc.orientation == "timelike":
        for cfg in sc.virial:
            q[f"virial_v{cfg.v:g}"] = virial_rate_check(snaps, cfg, sc.alpha).mismatch
    if evolved:
        f0, f1 = sc.f_profiles()
        k = int(round((t - traj[0].time) / traj.dt_out))
        mid = traj[k]
        j = int(np.argmin(np.abs(mid.grid.x - 0.5 * (mid.grid.x_min + mid.grid.x_max))))
        quad = lnf_quadrature(sc.alpha, traj, mid.time, float(mid.grid.x[j]),
                              f0.value, f1.value, sc.c1)
        q["lnf_crosscheck"] = abs(mid.v[j] - quad)
        q["min_f"] = float(min(np.min(np.exp(s.v)) for s in traj.snapshots))
    elif solver_t:
        run_cfg = sc.with_grid(config.grid.n, solver_t, 1)
        traj = run_simulation(run_cfg, sc.alpha, sc.initial(run_cfg), sc.background())
        last = traj[-1]
        ref = sc.exact_state(run_cfg.grid, last.time)[0]
        q["solver_error"] = max(float(np.max(np.abs(last.lambda_tilde - ref.lambda_tilde))),
                                float(np.max(np.abs(last.phi - ref.phi))))
    # round-off floors: second differences amplify eps by 1/dt^2, the
    # solver accumulates it over its steps
    jet = alpha_eval(sc.alpha, snaps[1].time, snaps[1].grid.x)
    scale = max(1.0, float(np.max(np.abs(snaps[1].lam))), float(np.max(np.abs(jet.alpha))))
    q["_floor"] = 10 * EPS * scale / config.dt**2
    q["_floor_solver"] = 10 * EPS * scale * max(1.0, (solver_t or 0.0) / config.dt)
    return q


def order_table(dxs, values, floors, threshold):
    """
    Observed orders between consecutive levels and a PASS/FAIL/exact status.
    Levels at or below their round-off floor carry no slope information; a
    pair touching one is reported as "round-off", and a quantity with no
    usable pair is "exact".
    """
    v = np.asarray(values, dtype=float)
    if np.all(~np.isfinite(v)):
        return None
    above = v > np.asarray(floors)
    orders = []
    for i in range(len(v) - 1):
        if above[i] and above[i + 1]:
            orders.append(float(np.log(v[i] / v[i + 1]) / np.log(dxs[i] / dxs[i + 1])))
        else:
            orders.append("round-off")
    slopes = [o for o in orders if not isinstance(o, str)]
    if not slopes:
        return {"orders": ["exact"] * len(orders), "status": "exact", "threshold": threshold}
    ok = all(o >= threshold for o in slopes)
    return {"orders": orders, "status": "PASS" if ok else "FAIL", "threshold": threshold}


def convergence_study(sc, levels=None):
    """Run every refinement level; returns (table columns, order dict)."""
    conv = sc.convergence
    levels = list(levels or conv.get("levels", [401, 801, 1601]))
    if len(levels) < 3:
        raise_usage("convergence needs at least three levels")
    t = float(conv.get("t", 1.0))
    t_end = float(conv.get("t_end", t + 0.5))
    solver_t = conv.get("solver_t", t if sc.exact is not None else None)
    per_level = []
    dxs = []
    for n in levels:
        cfg = sc.with_grid(n, t_end)
        dxs.append(cfg.grid.dx)
        per_level.append(_level_quantities(sc, cfg, t, solver_t))
    keys = [k for k in per_level[0] if not k.startswith("_")]
    table = {"n": np.array(levels, dtype=float), "dx": np.array(dxs)}
    for k in keys:
        table[k] = np.array([lv[k] for lv in per_level], dtype=float)
    orders = {}
    for k in keys:
        if k == "min_f":
            continue
        solver = k == "solver_error"
        floors = [lv["_floor_solver" if solver else "_floor"] for lv in per_level]
        row = order_table(dxs, table[k], floors, SOLVER_THRESHOLD if solver else RESIDUAL_THRESHOLD)
        if row is not None:
            orders[k] = row
    if "min_f" in table:
        ok = bool(np.all(table["min_f"] > 0))
        orders["min_f"] = {"orders": [], "status": "PASS" if ok else "FAIL", "threshold": 0.0}
    return table, orders


def cmd_convergence(sc, out, opts):
    table, orders = convergence_study(sc, opts.get("levels"))
    write_columns(out / "convergence.csv", table)
    with open(out / "orders.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["quantity", "threshold", "status"]
                   + [f"order_{i}" for i in range(len(table["n"]) - 1)])
        for k, row in orders.items():
            vals = [o if isinstance(o, str) else format(o, ".6f") for o in row["orders"]]
            w.writerow([k, format(row["threshold"], "g"), row["status"]] + vals)
    if opts.get("figures", True):
        from .plotting import plot_convergence
        plot_convergence({k: v for k, v in table.items() if k != "min_f"},
                         out / "convergence.png", sc.name)
    failed = [k for k, r in orders.items() if r["status"] == "FAIL"]
    info = {"orders": orders, "failed": failed}
    return (EXIT_DOMAIN if failed else EXIT_OK), info


# ---------------------------------------------------------------- decay study

DECAY_COLUMNS = ("t", "windowed_field", "windowed_detg", "averaged_window", "I",
                 "virial_rhs", "virial_mismatch")


def monitor_summary(series):
    """Global-existence monitor: weighted energies plus fluxes against the early maximum."""
    c = series.columns
    total = (c["energy_k0"] + c["energy_k1"] + c["energy_bar_k0"] + c["energy_bar_k1"]
             + c["flux"] + c["flux_bar"])
    early = float(np.max(total[c["t"] <= 1.0 + 1e-12]))
    return {"energy_flux_max": float(np.max(total)), "energy_flux_early_max": early,
            "energy_flux_ratio": float(np.max(total) / early) if early > 0 else 0.0,
            "energy_initial": float(c["energy_k0"][0] + c["energy_k1"][0]
                                    + c["energy_bar_k0"][0] + c["energy_bar_k1"][0])}


def decay_study(sc, velocities=None):
    """Run once, then evaluate windowed diagnostics for each velocity."""
    if sc.orientation != "timelike":
        raise_usage("decay study needs the timelike orientation")
    code, lines, _ = validation_report(sc)
    if code != EXIT_OK:
        return code, None, None, {"validation": lines}
    traj = _trajectory(sc)
    base = sc.virial[0]
    cfgs = sc.virial if velocities is None else [
        type(base)(float(v), base.weight_mode, base.omega0) for v in velocities]
    results, summary = {}, {"velocities": {}}
    monitor = None
    t_final = float(traj.times[-1])
    for cfg in cfgs:
        series = compute_series(traj, cfg, "timelike", sc.delta)
        if monitor is None:
            monitor = monitor_summary(series)
        cols = {k: series[k] for k in DECAY_COLUMNS}
        results[cfg.v] = cols
        t = cols["t"]
        tail = decay_summary(t, cols["windowed_field"], 5.0, 0.02, t_final)
        tail_detg = decay_summary(t, cols["windowed_detg"], 5.0, 0.02, t_final)
        mism = np.asarray(cols["virial_mismatch"])
        mism = mism[np.isfinite(mism)]
        rate_scale = np.nanmax(np.abs(cols["virial_rhs"])) if len(t) else 0.0
        late = t >= 2.0
        summary["velocities"][format(cfg.v, "g")] = {
            "windowed_field": tail, "windowed_detg": tail_detg,
            "averaged_integral": time_average(t[late], cols["averaged_window"][late])
            if late.sum() > 1 else 0.0,
            "virial_mismatch_max": float(np.max(mism)) if mism.size else None,
            "virial_rhs_scale": _clean(rate_scale),
        }
    summary["monitor"] = monitor
    summary["complete"] = traj.complete
    summary["t_final"] = t_final
    summary["flagged"] = [v for v, s in summary["velocities"].items()
                          if not s["windowed_field"]["non_increasing"]]
    return EXIT_OK, traj, results, summary


def cmd_decay_study(sc, out, opts):
    code, traj, results, summary = decay_study(sc, opts.get("velocities"))
    if traj is None:
        return code, summary
    for v, cols in results.items():
        write_columns(out / f"decay_v{v:g}.csv", cols)
    summary["scenario"] = sc.name
    _write_json(out / "decay_summary.json", summary)
    if opts.get("figures", True):
        from .plotting import plot_decay
        plot_decay(results, out / "decay.png", sc.name)
    info = {"flagged": summary["flagged"], "monitor": summary["monitor"]}
    if not traj.complete:
        info["error"] = f"{type(traj.error).__name__}: {traj.error}"
        return getattr(traj.error, "exit_code", 3), info
    return (EXIT_DOMAIN if summary["flagged"] else EXIT_OK), info


# ---------------------------------------------------------------- driver

HANDLERS = {"validate": cmd_validate, "simulate": cmd_simulate, "exact": cmd_exact,
            "convergence": cmd_convergence, "decay-study": cmd_decay_study}


def run_one(command, scenario, out_root, opts):
    """Run one command on one scenario; returns (name, exit code, message)."""
    start = time.time()
    manifest = {"command": command, "scenario_source": str(scenario), "version": __version__}
    try:
        sc = load_scenario(scenario)
    except BZError as exc:
        return str(scenario), exc.exit_code, f"{type(exc).__name__}: {exc}"
    out = Path(out_root) / sc.name
    out.mkdir(parents=True, exist_ok=True)
    manifest.update(scenario=sc.name, config_hash=sc.config_hash,
                    grid=_grid_info(sc.evolution.grid), t_end=sc.evolution.t_end)
    try:
        code, info = HANDLERS[command](sc, out, opts)
        msg = "ok" if code == EXIT_OK else "failed"
    except BZError as exc:
        code, info = exc.exit_code, {"status": "failed"}
        msg = f"{type(exc).__name__}: {exc}"
        info["error"] = msg
    manifest.update(info)
    manifest["exit_code"] = code
    manifest["wall_time_s"] = time.time() - start
    manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    _write_json(out / "manifest.json", manifest)
    if command == "validate":
        msg = "\n".join(info.get("report", []) + [f"WARNING   {w}" for w in info.get("warnings", [])]
                        if opts.get("strict") else info.get("report", []))
    return sc.name, code, msg


def build_parser():
    p = argparse.ArgumentParser(prog="bzwave", description=__doc__.strip().splitlines()[0])
    p.add_argument("--version", action="version", version=f"bzwave {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("scenarios", nargs="+", help="scenario JSON files or shipped names")
        sp.add_argument("--out", default="bzwave_out", help="output root directory")
        sp.add_argument("--jobs", type=int, default=1, help="scenarios run concurrently")
        sp.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        if name == "validate":
            sp.add_argument("--strict", action="store_true", help="also report policy warnings")
        if name == "exact":
            sp.add_argument("--t", type=float, default=0.0, help="sampling time")
        if name == "convergence":
            sp.add_argument("--levels", type=int, nargs="+", help="grid sizes, at least three")
        if name == "decay-study":
            sp.add_argument("--velocities", type=float, nargs="+", help="window velocities")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("--jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    opts = {"figures": not args.no_figures, "strict": getattr(args, "strict", False),
            "t": getattr(args, "t", None), "levels": getattr(args, "levels", None),
            "velocities": getattr(args, "velocities", None)}
    Path(args.out).mkdir(parents=True, exist_ok=True)
    jobs = [(args.command, s, args.out, opts) for s in args.scenarios]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run_one, *zip(*jobs)))
    else:
        results = [run_one(*j) for j in jobs]
    worst = EXIT_OK
    for name, code, msg in results:
        print(f"[{name}] exit {code}: {msg}" if code or args.command != "validate"
              else f"[{name}] exit {code}\n{msg}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
