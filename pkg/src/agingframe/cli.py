"""Command-line interface.

Exit codes: 0 success, 2 configuration/validation error, 3 assertion-mode
mismatch (a reproduction check failed).
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import AgingFrameError, InvalidLayoutError, InvalidScenarioError
from .framelayout import parse_layout
from .harness import (SWEEP_PARAMETERS, cmd_deteq, cmd_montecarlo,
                      cmd_optimize, cmd_sweep, cmd_table1, write_report)
from .optimizer import OptimizerConfig
from .scenario import load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISMATCH = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agingframe",
        description="Pilot spacing and power design over aging Rician "
                    "channels: deterministic-equivalent evaluation, "
                    "optimization and Monte Carlo validation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario_required=True):
        if scenario_required:
            p.add_argument("--scenario", required=True,
                           help="scenario JSON file")
        p.add_argument("--out", help="output directory for JSON/CSV/figures")
        p.add_argument("--no-plots", action="store_true",
                       help="skip figure rendering")
        p.add_argument("--bits", action="store_true",
                       help="report spectral efficiency in bits instead of nats")

    p = sub.add_parser("deteq", help="per-slot deterministic SE for a layout")
    add_common(p)
    p.add_argument("--layout", required=True,
                   help="comma-separated frame sizes, e.g. 3,3,3,2")

    p = sub.add_parser("optimize", help="frame and power search")
    add_common(p)
    p.add_argument("--q-max", type=int, default=12)
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--fixed-powers", action="store_true",
                   help="evaluate the scenario's powers without ascent")
    p.add_argument("--literal-alg1", action="store_true",
                   help="fixed-step ascent without backtracking")
    p.add_argument("--total-budget-bound", action="store_true",
                   help="bound sum(q) <= q_max instead of per-frame sizes")

    p = sub.add_parser("montecarlo",
                       help="instantaneous SE versus the deterministic "
                            "equivalent")
    add_common(p)
    p.add_argument("--layout", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--dump-trajectories", action="store_true",
                   help="also write one trial's channel trajectories as CSV")

    p = sub.add_parser("table1", help="reproduce the comparison-table grid")
    add_common(p, scenario_required=False)

    p = sub.add_parser("bundled",
                       help="export a bundled scenario to JSON (or list them)")
    p.add_argument("--name", help="scenario name; omit to list all names")
    p.add_argument("--to", help="output JSON path (defaults to <name>.json)")

    p = sub.add_parser("sweep", help="sweep a scalar parameter")
    add_common(p)
    p.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    p.add_argument("--values", required=True,
                   help="comma-separated values, e.g. 0.1,1,10,100")
    p.add_argument("--q-max", type=int, default=24)
    p.add_argument("--m-max", type=int, default=1)
    p.add_argument("--optimize-powers", action="store_true",
                   help="run the power ascent at each sweep point")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bundled":
            return _export_bundled(args)
        report = _dispatch(args)
    except (InvalidScenarioError, InvalidLayoutError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AgingFrameError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        write_report(report, args.out, plots=not args.no_plots)
    _print_summary(report)
    return EXIT_OK if report.ok else EXIT_MISMATCH


def _export_bundled(args) -> int:
    from .bundled import bundled_scenarios
    from .scenario import save_scenario

    scenarios = bundled_scenarios()
    if not args.name:
        print("\n".join(sorted(scenarios)))
        return EXIT_OK
    if args.name not in scenarios:
        print(f"unknown bundled scenario {args.name!r}; available: "
              f"{', '.join(sorted(scenarios))}", file=sys.stderr)
        return EXIT_CONFIG
    path = args.to or f"{args.name}.json"
    save_scenario(scenarios[args.name], path)
    print(path)
    return EXIT_OK


def _dispatch(args):
    if args.command == "table1":
        return cmd_table1()
    scenario = load_scenario(args.scenario)
    if getattr(args, "bits", False):
        scenario.se_units = "bits"
    if args.command == "deteq":
        return cmd_deteq(scenario, parse_layout(args.layout))
    if args.command == "montecarlo":
        report = cmd_montecarlo(scenario, parse_layout(args.layout),
                                trials=args.trials, seed=args.seed)
        if args.dump_trajectories:
            _attach_trajectory_dump(report, scenario, args)
        return report
    if args.command == "optimize":
        cfg = OptimizerConfig(q_max=args.q_max, m_max=args.m_max,
                              fixed_powers=args.fixed_powers,
                              literal_ascent=args.literal_alg1,
                              total_budget_bound=args.total_budget_bound)
        return cmd_optimize(scenario, cfg)
    if args.command == "sweep":
        values = [float(v) for v in args.values.split(",") if v.strip()]
        cfg = OptimizerConfig(q_max=args.q_max, m_max=args.m_max,
                              fixed_powers=not args.optimize_powers)
        return cmd_sweep(scenario, args.param, values, cfg)
    raise AgingFrameError(f"unknown command {args.command}")


def _attach_trajectory_dump(report, scenario, args):
    from .channelsim import sample_trajectory, trajectory_rows
    from .framelayout import parse_layout

    layout = parse_layout(args.layout)
    seed = scenario.seed if args.seed is None else args.seed
    rows = []
    for k in range(scenario.n_users):
        cov = scenario.covariance_set(k, layout.horizon)
        traj = sample_trajectory(cov, layout.horizon, seed, trial=0, user=k)
        rows.extend(trajectory_rows(traj))
    report.results["tables"]["trajectories"] = ("trajectories", rows)


def _print_summary(report):
    summary = {k: v for k, v in report.results.items() if k != "tables"}
    print(json.dumps({"command": report.command, "ok": report.ok,
                      "results": summary,
                      "wall_clock_s": round(report.wall_clock_s, 3)},
                     indent=2, default=str))


if __name__ == "__main__":
    sys.exit(main())
