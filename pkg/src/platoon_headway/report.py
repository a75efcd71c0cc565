"""Run every check for a scenario and assemble a machine-readable report bundle."""

from __future__ import annotations

import datetime as _dt
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from platoon_headway.internal_stability import ConditionBCurve, InterlacingReport, certify_internal, condition_b_curve
from platoon_headway.scenario import ScenarioConfig, scenario_hash
from platoon_headway.simulation import SimulationTrace, simulate
from platoon_headway.string_stability import (
    SweepReport,
    ka_necessity_check,
    robust_sweep,
    sufficient_condition,
)
from platoon_headway.synthesis import GainRegion, gain_region, min_headway, region_contains, to_effective
from platoon_headway.gains import DomainError


@dataclass
class FullResult:
    cfg: ScenarioConfig
    bound: float | None
    region: GainRegion | None
    member: bool
    sufficient: tuple[float, float, bool]
    ka_ok: bool
    sweep: SweepReport
    internal: InterlacingReport
    condition_b: ConditionBCurve
    trace: SimulationTrace

    @property
    def verdicts(self) -> dict[str, bool]:
        return {
            "region_feasible": bool(self.region is not None and self.region.feasible),
            "gains_in_region": self.member,
            "sufficient_condition": self.sufficient[2],
            "ka_necessary_bound": self.ka_ok,
            "robust_string_stability": self.sweep.passed,
            "internal_stability": self.internal.stable,
            "simulation_no_amplification": self.trace.summary.passed,
        }

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())


def synthesis_checks(cfg: ScenarioConfig):
    g = cfg.design
    try:
        bound = min_headway(g.mode, g.k_a, g.r, g.tau0)
        region = gain_region(g)
    except DomainError:
        return None, None, False
    return bound, region, region_contains(region, g.k_v, g.k_p)


def run_all(cfg: ScenarioConfig, keep_surface: bool = True) -> FullResult:
    g = cfg.design
    bound, region, member = synthesis_checks(cfg)
    return FullResult(
        cfg=cfg,
        bound=bound,
        region=region,
        member=member,
        sufficient=sufficient_condition(g),
        ka_ok=ka_necessity_check(g),
        sweep=robust_sweep(g, cfg.grid, keep_surface=keep_surface),
        internal=certify_internal(g, cfg.scenario.tau, cfg.l_max),
        condition_b=condition_b_curve(g, cfg.scenario.tau),
        trace=simulate(cfg.scenario),
    )


def round_floats(obj, precision: int):
    if isinstance(obj, dict):
        return {str(k): round_floats(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, precision) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{precision}g}")
    return obj


def gains_dict(g) -> dict:
    return {"k_a": g.k_a, "k_v": g.k_v, "k_p": g.k_p, "h_w": g.h_w, "r": g.r, "tau0": g.tau0, "mode": g.mode.value}


def region_dict(region: GainRegion | None) -> dict | None:
    if region is None:
        return None
    return {"a1": region.a1, "b1": region.b1, "a2": region.a2, "b2": region.b2, "rhs": region.rhs, "feasible": region.feasible}


def bundle(result: FullResult, precision: int = 6, timestamp: str | None = None) -> dict:
    """Report dictionary; everything except ``provenance.timestamp`` is a function of the scenario."""
    cfg = result.cfg
    eff = to_effective(cfg.design)
    lhs1, lhs2, holds = result.sufficient
    if timestamp is None:
        timestamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    from platoon_headway import __version__

    doc = {
        "provenance": {
            "toolkit_version": __version__,
            "scenario": cfg.name,
            "scenario_hash": scenario_hash(cfg),
            "timestamp": timestamp,
        },
        "design_gains": gains_dict(cfg.design),
        "effective_gains": {"k_a": eff.k_a, "k_v": eff.k_v, "k_p": eff.k_p, "h_w": eff.h_w},
        "synthesis": {
            "min_headway": result.bound,
            "region": region_dict(result.region),
            "gains_in_region": result.member,
        },
        "string_stability": {
            "sufficient_condition": {"lhs1": lhs1, "lhs2": lhs2, "holds": holds},
            "ka_necessary_bound": result.ka_ok,
            "sweep": result.sweep.to_dict(),
        },
        "internal_stability": result.internal.to_dict(),
        "simulation": {
            "followers": cfg.scenario.n_followers,
            "dt": cfg.scenario.dt,
            "t_end": cfg.scenario.t_end,
            "dynamics": cfg.scenario.dynamics,
            "summary": result.trace.summary.to_dict(),
        },
        "verdicts": result.verdicts,
        "passed": result.passed,
    }
    return round_floats(doc, precision)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_report(result: FullResult, out_dir, precision: int = 6, figures: bool = True, timestamp: str | None = None) -> list[Path]:
    """Write ``report.json``, the plot-data CSV files and (optionally) PNG figures."""
    from platoon_headway.plotdata import emit_plot_data

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.json"]
    written[0].write_text(dumps(bundle(result, precision, timestamp)))
    if result.region is not None:
        written.append(emit_plot_data(result.region, "region-boundary", out / "region_boundary.csv", precision))
    written.append(emit_plot_data(result.sweep, "sweep-surface", out / "sweep_surface.csv", precision))
    if result.internal.roots is not None:
        written.append(emit_plot_data(result.internal, "interlacing-curves", out / "interlacing_curves.csv", precision))
    written.append(emit_plot_data(result.condition_b, "condition-b-curve", out / "condition_b_curve.csv", precision))
    written.append(emit_plot_data(result.trace, "delta-traces", out / "delta_traces.csv", precision))
    written.append(emit_plot_data(result.trace, "trace", out / "trace.csv", precision))
    if figures:
        from platoon_headway import plotting

        g = result.cfg.design
        if result.region is not None:
            written.append(plotting.plot_region(result.region, out / "region.png", point=(g.k_v, g.k_p)))
        written.append(plotting.plot_sweep(result.sweep, out / "sweep_surface.png"))
        if result.internal.roots is not None:
            written.append(plotting.plot_interlacing(result.internal, out / "interlacing.png"))
        written.append(plotting.plot_condition_b(result.condition_b, out / "condition_b.png"))
        written.append(plotting.plot_deltas(result.trace, out / "delta_traces.png"))
    return written
