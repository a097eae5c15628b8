"""Command-line front end.

Subcommands: ``scenarios`` (list presets), ``model`` (closed-form
evaluation), ``simulate`` (event simulation), ``compare`` (both, side by
side), ``optimize`` (parameter sweeps).  Results go to CSV files under
--out (default ``./out``) with a manifest header; a short human-readable
summary is printed to stdout.

Exit codes: 0 ok, 2 validation/usage error, 3 infeasible configuration,
4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import shlex
import sys
from pathlib import Path

from . import __version__, optimizer, reporting, simulator
from .energymodel import evaluate
from .mactiming import derive_timing
from .exceptions import (AhPowerError, InfeasibleConfigError, ScenarioParseError,
                         UnreachableStationError, ValidationError)
from .scenarios import BUILTIN_NAMES, Scenario, builtin_scenario, load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_INTERNAL = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ahpower",
        description="802.11ah power-save energy model, simulator and tuner")
    parser.add_argument("--version", action="version",
                        version=f"ahpower {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("scenarios", help="list the built-in presets")

    def add_common(p, seed_default=None):
        p.add_argument("--scenario", help=f"preset name ({', '.join(BUILTIN_NAMES)})")
        p.add_argument("--config", help="scenario YAML file")
        p.add_argument("--ntim", type=int, help="override the TIM group count")
        p.add_argument("--t", type=float, help="override the DTIM period [s]")
        p.add_argument("--seed", type=int, default=seed_default)
        p.add_argument("--out", default="out", help="output directory (default: out)")

    p = sub.add_parser("model", help="evaluate the closed-form energy model")
    add_common(p)

    p = sub.add_parser("simulate", help="run the event simulator")
    add_common(p)
    p.add_argument("--periods", type=int, default=2000,
                   help="DTIM periods to simulate (default 2000)")
    p.add_argument("--duration", type=float,
                   help="simulated seconds (overrides --periods)")
    p.add_argument("--trace", action="store_true",
                   help="write a per-event trace file")

    p = sub.add_parser("compare", help="model vs simulator, side by side")
    add_common(p)
    p.add_argument("--periods", type=int, default=2000)

    p = sub.add_parser("optimize", help="sweep a parameter axis")
    add_common(p)
    p.add_argument("--axis", choices=("ntim", "t"), required=True)
    p.add_argument("--grid", help="ntim: comma list (1,2,4,8,16,32); "
                                  "t: start:stop:step in seconds (0.2:60:0.1)")
    p.add_argument("--threshold", type=float,
                   default=optimizer.DEFAULT_SUCCESS_THRESHOLD,
                   help="delivery threshold for the t axis")
    p.add_argument("--backend", choices=("model", "sim"), default="model")
    p.add_argument("--periods", type=int, default=2000,
                   help="periods per point for --backend sim")
    return parser


def _resolve_scenario(args) -> Scenario:
    if args.config and args.scenario:
        raise ValidationError("give either --scenario or --config, not both")
    if args.config:
        scenario = load_scenario(args.config)
    elif args.scenario:
        scenario = builtin_scenario(args.scenario)
    else:
        raise ValidationError(
            f"a scenario is required; built-ins: {', '.join(BUILTIN_NAMES)}")
    overrides = {}
    if args.ntim is not None:
        overrides["n_tim"] = args.ntim
    if args.t is not None:
        overrides["dtim_period"] = args.t
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return scenario.with_overrides(**overrides) if overrides else scenario


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _command_string() -> str:
    return shlex.join(["ahpower"] + sys.argv[1:])


def _cmd_scenarios(args) -> int:
    print(f"{'name':<26} {'n_sta':>6} {'env':<8} {'E[dl]':>7} {'E[ul]':>7} "
          f"{'T':>5} {'n_tim':>5}")
    for name in BUILTIN_NAMES:
        s = builtin_scenario(name)
        print(f"{s.name:<26} {s.n_sta:>6} {s.environment:<8} "
              f"{s.mean_dl_interval:>7.0f} {s.mean_ul_interval:>7.0f} "
              f"{s.dtim_period:>5.2f} {s.n_tim:>5}")
    return EXIT_OK


def _cmd_model(args) -> int:
    scenario = _resolve_scenario(args)
    report = evaluate(scenario)
    out = _outdir(args)
    path = out / f"model_{scenario.name}.csv"
    reporting.write_csv(path, reporting.RESULT_FIELDS,
                        [reporting.model_row(report)], _command_string(),
                        seed=scenario.seed)
    breakdown = derive_timing(scenario).breakdown()
    reporting.write_csv(out / f"timing_{scenario.name}.csv",
                        list(breakdown), [list(breakdown.values())],
                        _command_string(), seed=scenario.seed)
    f = report.fractions()
    print(f"scenario {scenario.name}: n_tim={scenario.n_tim} "
          f"T={scenario.dtim_period}s")
    print(f"  state fractions: rx={f['rx']:.5f} tx={f['tx']:.5f} "
          f"id={f['id']:.5f} sl={f['sl']:.5f}")
    print(f"  mean current: {report.mean_current_ma:.6f} mA; "
          f"battery lifetime: {report.battery_lifetime_h:.0f} h")
    print(f"  delivery: dl={report.delivery_dl:.4f} ul={report.delivery_ul:.4f}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scenario = _resolve_scenario(args)
    n_periods = args.periods
    if args.duration is not None:
        n_periods = max(1, int(round(args.duration / scenario.dtim_period)))
    out = _outdir(args)
    trace_fh = None
    trace_path = None
    if args.trace:
        trace_path = out / f"trace_{scenario.name}_{scenario.seed}.log"
        trace_fh = open(trace_path, "w")
    try:
        report = simulator.run(scenario, n_periods=n_periods, seed=scenario.seed,
                               trace=trace_fh)
    finally:
        if trace_fh:
            trace_fh.close()
    path = out / f"sim_{scenario.name}_{scenario.seed}.csv"
    reporting.write_csv(path, reporting.RESULT_FIELDS,
                        [reporting.sim_row(report)], _command_string(),
                        seed=report.seed, extra={"periods": n_periods})
    packets = out / f"sim_packets_{scenario.name}_{scenario.seed}.csv"
    reporting.write_csv(packets, reporting.SIM_PACKET_FIELDS,
                        reporting.sim_packet_rows(report), _command_string(),
                        seed=report.seed)
    f = report.fractions()
    print(f"simulated {n_periods} periods of {scenario.name} "
          f"(seed {report.seed})")
    print(f"  state fractions: rx={f['rx']:.5f} tx={f['tx']:.5f} "
          f"id={f['id']:.5f} sl={f['sl']:.5f}")
    print(f"  mean current: {report.mean_current_ma:.6f} mA "
          f"(+-{report.current_ci95_ma:.6f} across stations); "
          f"delivery: dl={report.delivery_ratio('dl'):.4f} "
          f"ul={report.delivery_ratio('ul'):.4f}")
    print(f"  collisions: {report.channel_collisions} channel events / "
          f"{report.station_collisions} station hits; errors: {report.error_events}")
    print(f"wrote {path}")
    if trace_path:
        print(f"wrote {trace_path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    scenario = _resolve_scenario(args)
    model_report = evaluate(scenario)
    sim_report = simulator.run(scenario, n_periods=args.periods,
                               seed=scenario.seed)
    cmp = simulator.compare(model_report, sim_report)
    out = _outdir(args)
    path = out / f"compare_{scenario.name}.csv"
    reporting.write_csv(path, reporting.COMPARE_FIELDS,
                        reporting.compare_rows(cmp), _command_string(),
                        seed=scenario.seed, extra={"periods": args.periods})
    side = out / f"compare_side_{scenario.name}.csv"
    reporting.write_csv(side, reporting.RESULT_FIELDS,
                        [reporting.model_row(model_report),
                         reporting.sim_row(sim_report)], _command_string(),
                        seed=scenario.seed)
    print(f"scenario {scenario.name}, {args.periods} periods:")
    print(f"  current model={model_report.mean_current_ma:.6f} mA "
          f"sim={sim_report.mean_current_ma:.6f} mA "
          f"delta={cmp.delta_current_ma:+.6f} mA")
    print(f"  lifetime ratio (sim/model): {cmp.lifetime_ratio:.4f}")
    print(f"wrote {path}")
    return EXIT_OK


def _parse_grid(args):
    if args.grid is None:
        return None
    if args.axis == "ntim":
        values = [int(v) for v in args.grid.split(",") if v.strip()]
    else:
        parts = [float(v) for v in args.grid.split(":")]
        if len(parts) != 3:
            raise ValidationError("t grid must be start:stop:step")
        values = optimizer.t_grid(*parts)
    if not values:
        raise ValidationError("empty grid")
    return values


def _cmd_optimize(args) -> int:
    scenario = _resolve_scenario(args)
    values = _parse_grid(args)
    if args.axis == "ntim":
        result = optimizer.sweep_ntim(
            scenario, values or optimizer.DEFAULT_NTIM_CANDIDATES)
    else:
        result = optimizer.sweep_t(scenario, values=values,
                                   success_threshold=args.threshold,
                                   backend=args.backend,
                                   sim_periods=args.periods,
                                   seed=scenario.seed)
    out = _outdir(args)
    path = out / f"sweep_{result.axis}_{scenario.name}.csv"
    reporting.write_csv(path, reporting.SWEEP_FIELDS,
                        reporting.sweep_rows(result), _command_string(),
                        seed=scenario.seed,
                        extra={"threshold": result.constraint_threshold})
    # plot-ready two-column series per curve
    curve = out / f"curve_{result.axis}_{scenario.name}.csv"
    metric = "mean_current_ma" if result.axis == "n_tim" else "min_delivery"
    rows = [[p.value, p.mean_current_ma if result.axis == "n_tim" else p.min_delivery]
            for p in result.points]
    reporting.write_csv(curve, (result.axis, metric), rows, _command_string(),
                        seed=scenario.seed)
    chosen = result.chosen_point
    print(f"sweep {result.axis} on {scenario.name}: chose "
          f"{result.chosen:g} (current {chosen.mean_current_ma:.6f} mA, "
          f"delivery dl={chosen.delivery_dl:.4f} ul={chosen.delivery_ul:.4f})")
    print(f"wrote {path}")
    return EXIT_OK


_HANDLERS = {
    "scenarios": _cmd_scenarios,
    "model": _cmd_model,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "optimize": _cmd_optimize,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ValidationError, ScenarioParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (InfeasibleConfigError, UnreachableStationError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except AhPowerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
