"""Delimited-text export of regions, sweep surfaces, root curves and traces."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from platoon_headway.internal_stability import ConditionBCurve, InterlacingReport, quasipoly_parts
from platoon_headway.simulation import SimulationTrace
from platoon_headway.string_stability import SweepReport
from platoon_headway.synthesis import GainRegion

KINDS = ("region-boundary", "sweep-surface", "interlacing-curves", "delta-traces", "condition-b-curve", "trace")


def fmt(x, precision: int = 6) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.{precision}g}"


def region_boundary(region: GainRegion, n: int = 51) -> dict[str, np.ndarray]:
    """Segments of both boundary lines between their axis intercepts."""
    s = np.linspace(0.0, 1.0, n)
    out = {}
    for name, a, b in (("upper", region.a1, region.b1), ("lower", region.a2, region.b2)):
        k_v = region.rhs * a * (1 - s)
        k_p = region.rhs * b * s
        out[name] = np.column_stack([k_v, k_p])
    return out


def interlacing_samples(report: InterlacingReport, n: int = 2000) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    theta_max = 2 * report.roots.window_count * math.pi + math.pi / 4
    theta = np.linspace(0.0, theta_max, n)
    dr, di = quasipoly_parts(report.params, theta)
    return theta, dr, di


def _write(path: Path, header: list[str], rows, precision: int) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v, precision) for v in row])
    return path


def emit_plot_data(obj, kind: str, path, precision: int = 6) -> Path:
    """Write ``obj`` as comma-separated text of the given ``kind`` to ``path``.

    Raises ``TypeError`` when ``obj`` is not the report type ``kind`` expects
    and ``ValueError`` for an unknown ``kind``.
    """
    path = Path(path)
    expected = {
        "region-boundary": GainRegion,
        "sweep-surface": SweepReport,
        "interlacing-curves": InterlacingReport,
        "delta-traces": SimulationTrace,
        "condition-b-curve": ConditionBCurve,
        "trace": SimulationTrace,
    }
    if kind not in expected:
        raise ValueError(f"unknown plot-data kind {kind!r}; expected one of {KINDS}")
    if not isinstance(obj, expected[kind]):
        raise TypeError(f"{kind} needs a {expected[kind].__name__}, got {type(obj).__name__}")

    if kind == "region-boundary":
        lines = region_boundary(obj)
        rows = [(name, kv, kp) for name, pts in lines.items() for kv, kp in pts]
        return _write(path, ["line", "k_v", "k_p"], rows, precision)

    if kind == "sweep-surface":
        if obj.magnitude is None:
            raise ValueError("sweep report carries no surface; rerun robust_sweep with keep_surface=True")
        rows = (
            (w, t, obj.magnitude[it, iw])
            for it, t in enumerate(obj.taus)
            for iw, w in enumerate(obj.omegas)
        )
        return _write(path, ["omega", "tau", "magnitude"], rows, precision)

    if kind == "interlacing-curves":
        if obj.roots is None:
            raise ValueError("no roots to export: certificate was not attempted")
        theta, dr, di = interlacing_samples(obj)
        rows = [(t, a, b, "") for t, a, b in zip(theta, dr, di)]
        for part, roots in (("real", obj.roots.real), ("imag", obj.roots.imag)):
            for t in roots:
                a, b = quasipoly_parts(obj.params, t)
                rows.append((t, a, b, f"{part}-root"))
        rows.sort(key=lambda row: row[0])
        return _write(path, ["theta", "D_r", "D_i", "marker"], rows, precision)

    if kind == "condition-b-curve":
        return _write(path, ["omega", "value"], zip(obj.omega, obj.value), precision)

    n = obj.n_followers
    if kind == "delta-traces":
        header = ["t"] + [f"delta_{i}" for i in range(1, n + 1)]
        rows = (np.concatenate([[t], row]) for t, row in zip(obj.t, obj.delta))
        return _write(path, header, rows, precision)

    header = ["t"]
    for i in range(n + 1):
        header += [f"x_{i}", f"v_{i}", f"a_{i}", f"u_{i}"] + ([f"delta_{i}"] if i else [])
    cols = [obj.t]
    for i in range(n + 1):
        cols += [obj.x[:, i], obj.v[:, i], obj.a[:, i], obj.u[:, i]]
        if i:
            cols.append(obj.delta[:, i - 1])
    return _write(path, header, np.column_stack(cols), precision)
