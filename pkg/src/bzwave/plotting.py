"""Figures written next to the CSV outputs (Agg backend, PNG files)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_series(series, path, title=""):
    """Energies, virial, windowed integrals and residuals against time."""
    t = series["t"]
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5))
    ax = axes[0, 0]
    ax.plot(t, series["E"], label=r"$E$")
    ax.plot(t, series["E_hat"], "--", label=r"$\int \hat e$")
    ax.plot(t, series["I"], ":", label=r"$\mathcal{I}$")
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    ax.set_title("energy and virial")

    ax = axes[0, 1]
    ax.plot(t, series["windowed_field"], label="field form")
    ax.set_xlabel("t")
    ax.set_title("windowed decay integral")
    ax2 = ax.twinx()
    ax2.plot(t, series["windowed_detg"], "C1--", label="det g form")
    ax2.tick_params(labelsize=8)
    ax.legend(loc="upper right", fontsize=8)

    ax = axes[1, 0]
    for key, lab in (("energy_k0", r"$\mathcal{E}_0$"), ("energy_k1", r"$\mathcal{E}_1$"),
                     ("flux", r"$\mathcal{F}$")):
        ax.plot(t, series[key], label=lab)
    ax.set_xlabel("t")
    ax.set_title("weighted norms")
    ax.legend(fontsize=8)

    ax = axes[1, 1]
    for key in ("cont_linf", "virial_mismatch"):
        y = np.abs(np.asarray(series[key], dtype=float))
        ok = np.isfinite(y) & (y > 0)
        if ok.any():
            ax.semilogy(np.asarray(t)[ok], y[ok], label=key)
    ax.set_xlabel("t")
    ax.set_title("identity residuals")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    if title:
        fig.suptitle(title)
    return _finish(fig, path)


def plot_snapshots(trajectory, path, count=5, title=""):
    """Lambda_tilde and phi at a few evenly spaced snapshot times."""
    snaps = trajectory.snapshots
    idx = np.unique(np.linspace(0, len(snaps) - 1, count).round().astype(int))
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    for i in idx:
        s = snaps[i]
        axes[0].plot(s.grid.x, s.lambda_tilde, lw=1, label=f"t = {s.time:.3g}")
        axes[1].plot(s.grid.x, s.phi, lw=1)
    axes[0].set_ylabel(r"$\tilde\Lambda$")
    axes[1].set_ylabel(r"$\phi$")
    axes[1].set_xlabel("x")
    axes[0].legend(fontsize=8)
    if title:
        fig.suptitle(title)
    return _finish(fig, path)


def plot_decay(results, path, title=""):
    """Windowed field integral per velocity, log scale."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for v, cols in results.items():
        y = np.asarray(cols["windowed_field"], dtype=float)
        ok = y > 0
        ax.semilogy(np.asarray(cols["t"])[ok], y[ok], label=f"v = {v:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("windowed field integral")
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def plot_convergence(table, path, title=""):
    """Log-log residual norms against dx for every measured quantity."""
    dx = np.asarray(table["dx"], dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key, vals in table.items():
        if key in ("n", "dx"):
            continue
        y = np.abs(np.asarray(vals, dtype=float))
        ok = np.isfinite(y) & (y > 0)
        if ok.sum() >= 2:
            ax.loglog(dx[ok], y[ok], "o-", label=key)
    ax.loglog(dx, (dx / dx[0]) ** 2 * 1e-3, "k:", lw=0.8, label="slope 2")
    ax.set_xlabel("dx")
    ax.set_ylabel("norm")
    ax.legend(fontsize=7)
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def plot_exact(columns, path, title=""):
    """Fields and hat densities of a tabulated exact solution."""
    x = columns["x"]
    fig, axes = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    axes[0].plot(x, columns["Lambda"], label=r"$\Lambda$")
    axes[0].plot(x, columns["phi"], label=r"$\phi$")
    axes[0].plot(x, columns["alpha"], label=r"$\alpha$")
    axes[0].legend(fontsize=8)
    axes[1].plot(x, columns["e_hat"], label=r"$\hat e$")
    axes[1].plot(x, columns["p_hat"], label=r"$\hat p$")
    axes[1].set_xlabel("x")
    axes[1].legend(fontsize=8)
    if title:
        fig.suptitle(title)
    return _finish(fig, path)
