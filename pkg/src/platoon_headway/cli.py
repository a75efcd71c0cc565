"""Command-line interface.

Exit status: 0 when every verdict of the command passes, 1 when a verdict
fails, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from platoon_headway.gains import CharacteristicRootError, ConfigError, ControllerGains, DomainError, Mode
from platoon_headway.internal_stability import BracketError, certify_internal, condition_b_curve
from platoon_headway.plotdata import emit_plot_data, fmt
from platoon_headway.report import dumps, gains_dict, region_dict, round_floats, run_all, write_report
from platoon_headway.scenario import PRESETS, ScenarioConfig, load_preset, parse_scenario
from platoon_headway.simulation import simulate
from platoon_headway.string_stability import (
    FrequencyGrid,
    ka_necessity_check,
    robust_sweep,
    sufficient_condition,
)
from platoon_headway.synthesis import gain_region, min_headway, region_contains

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _source_args(p: argparse.ArgumentParser, gains: bool = True) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
    src.add_argument("--scenario", type=Path, help="YAML scenario file")
    if gains:
        g = p.add_argument_group("gain overrides")
        g.add_argument("--mode", help="acc, cacc or cacc+")
        g.add_argument("--ka", type=float)
        g.add_argument("--kv", type=float)
        g.add_argument("--kp", type=float)
        g.add_argument("--hw", type=float)
        g.add_argument("--r", type=int)
        g.add_argument("--tau0", type=float)


def _output_args(p: argparse.ArgumentParser, out_default: str | None = None) -> None:
    p.add_argument("--precision", type=int, default=6, help="significant digits of numeric output (default 6)")
    p.add_argument("--out", type=Path, default=Path(out_default) if out_default else None, help="output directory")
    p.add_argument("--figures", action="store_true", help="also render PNG figures into --out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="platoon-headway", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="minimum employable time headways")
    p.add_argument("--mode", help="acc, cacc or cacc+ (default: all three)")
    p.add_argument("--ka", type=float, default=0.0)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--tau0", type=float, required=True)
    p.add_argument("--precision", type=int, default=6)

    p = sub.add_parser("region", help="admissible (k_v, k_p) region")
    _source_args(p)
    _output_args(p)

    p = sub.add_parser("check-gains", help="region membership and sufficient condition")
    _source_args(p)
    _output_args(p)

    p = sub.add_parser("string-sweep", help="sup of |H| over the frequency/delay grid")
    _source_args(p)
    _output_args(p)
    p.add_argument("--omega-min", type=float)
    p.add_argument("--omega-max", type=float)
    p.add_argument("--omega-points", type=int)
    p.add_argument("--tau-points", type=int)

    p = sub.add_parser("internal-check", help="interlacing certificate of internal stability")
    _source_args(p)
    _output_args(p)
    p.add_argument("--tau", type=float, help="delay to certify at (default tau0)")
    p.add_argument("--l-max", type=int)

    p = sub.add_parser("simulate", help="simulate the platoon and export the trace")
    _source_args(p, gains=False)
    _output_args(p, out_default="out")

    p = sub.add_parser("full-report", help="every check, one report bundle with data and figures")
    _source_args(p, gains=False)
    _output_args(p, out_default="report")
    p.add_argument("--no-figures", action="store_true")
    return parser


def _config(args) -> ScenarioConfig | None:
    if getattr(args, "preset", None):
        return load_preset(args.preset)
    if getattr(args, "scenario", None):
        return parse_scenario(args.scenario)
    return None


def _gains(args) -> ControllerGains:
    cfg = _config(args)
    fields = gains_dict(cfg.design) if cfg else {}
    fields.pop("mode", None)
    for flag, key in (("ka", "k_a"), ("kv", "k_v"), ("kp", "k_p"), ("hw", "h_w"), ("r", "r"), ("tau0", "tau0")):
        value = getattr(args, flag, None)
        if value is not None:
            fields[key] = value
    missing = [k for k in ("k_v", "k_p", "h_w", "tau0") if k not in fields]
    if missing:
        raise ConfigError(f"missing gains {missing}: pass --preset/--scenario or the matching flags")
    fields.setdefault("k_a", 0.0)
    g = ControllerGains(**fields)
    if args.mode:
        wanted = Mode.parse(args.mode)
        # k_a = 0 with r = 1 is ACC, which is also a valid CACC request
        if wanted is not g.mode and not (wanted is Mode.CACC and g.mode is Mode.ACC):
            raise ConfigError(f"--mode {args.mode} contradicts k_a = {g.k_a}, r = {g.r} ({g.mode.value})")
    return g


def _print_kv(pairs: dict, precision: int) -> None:
    for key, value in pairs.items():
        print(f"{key}: {fmt(value, precision) if value is not None else 'n/a'}")


def cmd_bounds(args) -> int:
    rows = []
    if args.mode:
        rows.append((Mode.parse(args.mode), args.ka, args.r))
    else:
        rows = [(Mode.ACC, 0.0, 1), (Mode.CACC, args.ka, 1), (Mode.CACC_PLUS, args.ka, max(args.r, 2))]
    lines = []
    for mode, ka, r in rows:
        try:
            value = fmt(min_headway(mode, ka, r, args.tau0), args.precision)
        except DomainError as exc:
            if args.mode:
                raise
            print(f"# {mode.value}: {exc}", file=sys.stderr)
            value = "nan"
        lines.append(f"{mode.value},{fmt(ka, args.precision)},{r},{fmt(args.tau0, args.precision)},{value}")
    print("mode,k_a,r,tau0,min_headway")
    print("\n".join(lines))
    return EXIT_PASS


def cmd_region(args) -> int:
    g = _gains(args)
    region = gain_region(g)
    out = region_dict(region)
    out["min_headway"] = min_headway(g.mode, g.k_a, g.r, g.tau0)
    _print_kv(out, args.precision)
    if args.out:
        emit_plot_data(region, "region-boundary", args.out / "region_boundary.csv", args.precision)
        if args.figures:
            from platoon_headway.plotting import plot_region

            plot_region(region, args.out / "region.png", point=(g.k_v, g.k_p))
    return EXIT_PASS if region.feasible else EXIT_FAIL


def cmd_check_gains(args) -> int:
    g = _gains(args)
    region = gain_region(g)
    member = region_contains(region, g.k_v, g.k_p)
    lhs1, lhs2, holds = sufficient_condition(g)
    _print_kv(
        {
            "mode": g.mode.value,
            "region_feasible": region.feasible,
            "upper_sum": region.upper_sum(g.k_v, g.k_p),
            "lower_sum": region.lower_sum(g.k_v, g.k_p),
            "rhs": region.rhs,
            "in_region": member,
            "lhs1": lhs1,
            "lhs2": lhs2,
            "sufficient_condition": holds,
            "ka_necessary_bound": ka_necessity_check(g),
        },
        args.precision,
    )
    return EXIT_PASS if member and holds and ka_necessity_check(g) else EXIT_FAIL


def cmd_string_sweep(args) -> int:
    g = _gains(args)
    cfg = _config(args)
    grid = cfg.grid if cfg else FrequencyGrid()
    overrides = {
        k: getattr(args, k)
        for k in ("omega_min", "omega_max", "omega_points", "tau_points")
        if getattr(args, k) is not None
    }
    if overrides:
        grid = FrequencyGrid(**{**grid.__dict__, **overrides})
    report = robust_sweep(g, grid, keep_surface=args.out is not None)
    _print_kv(report.to_dict(), args.precision)
    if not report.passed:
        print(
            f"witness: |H| = {fmt(report.sup_magnitude, args.precision)} > 1 at "
            f"omega = {fmt(report.argmax_omega, args.precision)}, tau = {fmt(report.argmax_tau, args.precision)}"
        )
    if args.out:
        emit_plot_data(report, "sweep-surface", args.out / "sweep_surface.csv", args.precision)
        if args.figures:
            from platoon_headway.plotting import plot_sweep

            plot_sweep(report, args.out / "sweep_surface.png")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_internal_check(args) -> int:
    g = _gains(args)
    cfg = _config(args)
    l_max = args.l_max or (cfg.l_max if cfg else 3)
    tau = args.tau if args.tau is not None else g.tau0
    report = certify_internal(g, tau, l_max)
    print(json.dumps(round_floats(report.to_dict(), args.precision), indent=2))
    if args.out:
        curve = condition_b_curve(g, tau)
        emit_plot_data(curve, "condition-b-curve", args.out / "condition_b_curve.csv", args.precision)
        if report.roots is not None:
            emit_plot_data(report, "interlacing-curves", args.out / "interlacing_curves.csv", args.precision)
        if args.figures:
            from platoon_headway import plotting

            plotting.plot_condition_b(curve, args.out / "condition_b.png")
            if report.roots is not None:
                plotting.plot_interlacing(report, args.out / "interlacing.png")
    return EXIT_PASS if report.stable else EXIT_FAIL


def cmd_simulate(args) -> int:
    cfg = _config(args)
    if cfg is None:
        raise ConfigError("simulate needs --preset or --scenario")
    trace = simulate(cfg.scenario)
    out = args.out
    emit_plot_data(trace, "trace", out / "trace.csv", args.precision)
    emit_plot_data(trace, "delta-traces", out / "delta_traces.csv", args.precision)
    summary = round_floats(trace.summary.to_dict(), args.precision)
    (out / "summary.json").write_text(dumps(summary))
    if args.figures:
        from platoon_headway.plotting import plot_deltas

        plot_deltas(trace, out / "delta_traces.png")
    print(f"trace written to {out / 'trace.csv'}")
    _print_kv({"verdict_kind": summary["verdict_kind"], "passed": summary["passed"], "worst_vehicle": summary["worst_vehicle"]}, args.precision)
    print("peaks: " + " ".join(fmt(p, args.precision) for p in trace.summary.peaks))
    return EXIT_PASS if trace.summary.passed else EXIT_FAIL


def cmd_full_report(args) -> int:
    cfg = _config(args)
    if cfg is None:
        raise ConfigError("full-report needs --preset or --scenario")
    result = run_all(cfg)
    write_report(result, args.out, args.precision, figures=not args.no_figures)
    for key, ok in result.verdicts.items():
        print(f"{key}: {'pass' if ok else 'FAIL'}")
    print(f"report written to {args.out / 'report.json'}")
    return EXIT_PASS if result.passed else EXIT_FAIL


COMMANDS = {
    "bounds": cmd_bounds,
    "region": cmd_region,
    "check-gains": cmd_check_gains,
    "string-sweep": cmd_string_sweep,
    "internal-check": cmd_internal_check,
    "simulate": cmd_simulate,
    "full-report": cmd_full_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "precision", 6) < 1:
        parser.error("--precision must be at least 1")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BracketError, CharacteristicRootError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
