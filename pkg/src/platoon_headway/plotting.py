"""Matplotlib figures for regions, sweep surfaces, root curves and spacing errors."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from platoon_headway.internal_stability import ConditionBCurve, InterlacingReport, quasipoly_parts  # noqa: E402
from platoon_headway.plotdata import interlacing_samples, region_boundary  # noqa: E402
from platoon_headway.simulation import SimulationTrace  # noqa: E402
from platoon_headway.string_stability import SweepReport  # noqa: E402
from platoon_headway.synthesis import GainRegion  # noqa: E402

STYLE = {
    "axes.labelsize": 11,
    "axes.titlesize": 11,
    "font.size": 10,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "figure.figsize": (6.0, 4.2),
    "figure.dpi": 110,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_region(region: GainRegion, path, point: tuple[float, float] | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        lines = region_boundary(region)
        up, lo = lines["upper"], lines["lower"]
        ax.plot(up[:, 0], up[:, 1], label="upper bound")
        ax.plot(lo[:, 0], lo[:, 1], "--", label="lower bound")
        kv = np.linspace(0, region.rhs * region.a1, 400)
        top = region.b1 * (region.rhs - kv / region.a1)
        bottom = np.maximum(region.b2 * (region.rhs - kv / region.a2), 0.0)
        ax.fill_between(kv, bottom, top, where=top >= bottom, alpha=0.3, label="admissible")
        if point is not None:
            ax.plot(*point, "k*", ms=9, label="chosen gains")
        ax.set_xlabel(r"$k_v$ [1/s]")
        ax.set_ylabel(r"$k_p$ [1/s$^2$]")
        ax.set_xlim(left=0)
        ax.set_ylim(bottom=0)
        ax.legend()
        return _save(fig, path)


def plot_sweep(report: SweepReport, path) -> Path:
    if report.magnitude is None:
        raise ValueError("sweep report carries no surface")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        mesh = ax.pcolormesh(report.omegas, report.taus, report.magnitude, shading="auto", cmap="viridis")
        ax.contour(report.omegas, report.taus, report.magnitude, levels=[1.0], colors="r", linewidths=1.0)
        ax.plot(report.argmax_omega, report.argmax_tau, "r+", ms=10)
        ax.set_xscale("log")
        ax.set_xlabel(r"$\omega$ [rad/s]")
        ax.set_ylabel(r"$\tau$ [s]")
        label = r"$|rH(j\omega;\tau)|$" if report.scaled else r"$|H(j\omega;\tau)|$"
        fig.colorbar(mesh, ax=ax, label=label)
        ax.set_title(f"sup = {report.sup_magnitude:.6g}")
        return _save(fig, path)


def plot_interlacing(report: InterlacingReport, path) -> Path:
    theta, dr, di = interlacing_samples(report)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(theta, dr, label=r"$D_r(\theta)$")
        ax.plot(theta, di, label=r"$D_i(\theta)$")
        ax.axhline(0, color="0.5", lw=0.8)
        ax.plot(report.roots.real, np.zeros(len(report.roots.real)), "o", mfc="none", label="real-part roots")
        ax.plot(report.roots.imag, np.zeros(len(report.roots.imag)), "x", label="imag-part roots")
        span = max(np.max(np.abs(quasipoly_parts(report.params, theta[: len(theta) // 6])[0])), 1.0)
        ax.set_ylim(-4 * span, 4 * span)
        ax.set_xlabel(r"$\theta = \tau\omega$")
        ax.legend()
        return _save(fig, path)


def plot_condition_b(curve: ConditionBCurve, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(curve.omega, curve.value)
        ax.axhline(0, color="0.5", lw=0.8)
        ax.set_xlabel(r"$\omega$ [rad/s]")
        ax.set_ylabel(r"$D_i' D_r - D_i D_r'$")
        return _save(fig, path)


def plot_deltas(trace: SimulationTrace, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        cmap = plt.get_cmap("viridis")
        n = trace.n_followers
        for i in range(n):
            ax.plot(trace.t, trace.delta[:, i], color=cmap(i / max(n - 1, 1)), label=rf"$\delta_{{{i + 1}}}$")
        ax.set_xlabel("t [s]")
        ax.set_ylabel("spacing error [m]")
        ax.legend(ncol=2)
        return _save(fig, path)
