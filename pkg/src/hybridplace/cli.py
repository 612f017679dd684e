"""Command-line front end.

Exit codes: 0 success, 1 invalid input (including bad usage), 2 infeasible
model, 3 solver limit reached without a solution.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .builder import InvalidInstance, build
from .config import ConfigError, Instance, load
from .exporters import export_ampl, export_lp
from .netmodel import VARIANTS, apply_variants, default_params, to_usd
from .report import RunReport, pct, usd
from .scenarios import (CAPACITY_WHATIFS, ComparisonRecord, run_capacity_whatif, run_figure8,
                        run_redirect_sweep, run_table2, run_table3, to_csv)
from .solver import InfeasibleModel, SolverConfig, SolverLimit, solve_placement

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _variants(text):
    names = [n.strip() for n in text.split(",") if n.strip()]
    for n in names:
        if n not in VARIANTS:
            raise argparse.ArgumentTypeError(f"unknown variant {n!r}; choose from {', '.join(VARIANTS)}")
    return names


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridplace", description="Streaming-server placement across cloud and telco sites.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def solver_flags(p):
        p.add_argument("--node-limit", type=int, default=SolverConfig.node_limit)
        p.add_argument("--time-limit", type=float, default=None, help="seconds")

    p = sub.add_parser("solve", help="solve one instance")
    p.add_argument("--config", required=True)
    p.add_argument("--variant", type=_variants, default=[], help="comma-separated: " + ", ".join(VARIANTS))
    p.add_argument("--params", choices=("table1", "effective"),
                   help="replace the config's prices with a reference price set")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    solver_flags(p)

    p = sub.add_parser("scenario", help="run a canned experiment")
    p.add_argument("--name", required=True, choices=("table2", "table3", "figure8", "redirect-sweep"))
    p.add_argument("--params", choices=("table1", "effective"), default="effective")
    p.add_argument("--whatif", action="store_true",
                   help="table2/table3 only: rerun with the enlarged site capacities")
    p.add_argument("--from", dest="x_from", type=int, help="sweep start")
    p.add_argument("--to", dest="x_to", type=int, help="sweep end (inclusive)")
    p.add_argument("--step", type=int, help="sweep step")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--out")
    solver_flags(p)

    p = sub.add_parser("export", help="write the model as AMPL or LP text")
    p.add_argument("--config", required=True)
    p.add_argument("--format", required=True, choices=("ampl-mod", "ampl-dat", "lp"))
    p.add_argument("--variant", type=_variants, default=[])
    p.add_argument("--out")

    p = sub.add_parser("simulate", help="replay a demand trace through the reactive scaler")
    p.add_argument("--trace", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="JSON timeline (default stdout)")
    p.add_argument("--summary", help="also write a per-site CSV summary here")
    p.add_argument("--deploy-latency", type=float, default=180)
    p.add_argument("--destroy-latency", type=float, default=60)
    p.add_argument("--epoch", type=float, default=60)
    p.add_argument("--horizon", type=float)
    solver_flags(p)
    return parser


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(node_limit=args.node_limit, time_limit=args.time_limit)


def _instance(args) -> Instance:
    inst = load(args.config)
    if getattr(args, "params", None):
        inst = replace(inst, params=default_params(effective=args.params == "effective"))
    if getattr(args, "variant", None):
        inst = replace(inst, flags=apply_variants(inst.flags, args.variant))
    return inst


def cmd_solve(args) -> int:
    inst = _instance(args)
    config = _solver_config(args)
    sol = solve_placement(inst.topology, inst.params, inst.demand, inst.flags, config)
    report = RunReport.create(inst, sol.placement, sol.stats, config)
    _write(report.render(args.format), args.out)
    return EXIT_OK


def _comparison_text(rec: ComparisonRecord) -> str:
    rows = [
        ("total USD/h", lambda p: usd(p.total_cost)),
        ("n_a", lambda p: str(p.n_a)),
        ("n_p", lambda p: "/".join(map(str, p.n_p))),
        ("n_s", lambda p: "/".join(str(v) for r in p.n_s for v in r)),
    ]
    cells = [(label, [fn(p) for p in rec.arms.values()]) for label, fn in rows]
    w = max(14, *(len(c) for _, row in cells for c in row)) + 2
    lines = [rec.label, f"  {'':<12}" + "".join(f"{arm:>{w}}" for arm in rec.arms)]
    lines += [f"  {label:<12}" + "".join(f"{c:>{w}}" for c in row) for label, row in cells]
    lines.append(f"  saving of {rec.other} vs {rec.baseline}: {rec.delta:.2f} USD/h ({pct(rec.relative_delta)})")
    for key, value in rec.meta.items():
        lines.append(f"  {key}: {value}")
    return "\n".join(lines) + "\n"


def _sweep_text(sweep) -> str:
    arms = list(sweep.rows[0].placements) if sweep.rows else []
    lines = [sweep.label, f"  {'x':>8}" + "".join(f"{a:>16}" for a in arms)]
    for row in sweep:
        cells = ["infeasible" if t is None else f"{t:.2f}" for t in row.totals.values()]
        lines.append(f"  {row.x:>8}" + "".join(f"{c:>16}" for c in cells))
    for key, value in sweep.meta.items():
        lines.append(f"  {key}: {value}")
    return "\n".join(lines) + "\n"


def cmd_scenario(args) -> int:
    params = default_params(effective=args.params == "effective")
    config = _solver_config(args)
    ranged = (args.x_from, args.x_to, args.step)
    if args.whatif:
        if args.name not in CAPACITY_WHATIFS:
            raise UsageError(f"error: --whatif applies to {', '.join(CAPACITY_WHATIFS)} only")
        result = run_capacity_whatif(args.name, params)
    elif args.name in ("table2", "table3"):
        if any(v is not None for v in ranged):
            raise UsageError("error: --from/--to/--step apply to sweeps only")
        result = (run_table2 if args.name == "table2" else run_table3)(params, config=config)
    elif args.name == "figure8":
        lo, hi, step = (v if v is not None else d for v, d in zip(ranged, (0, 400_000, 20_000)))
        result = run_figure8((lo, hi), step, params, config)
    else:
        lo, hi, step = (v if v is not None else d for v, d in zip(ranged, (20_000, 40_000, 1_000)))
        if step <= 0 or hi < lo:
            raise UsageError("error: sweep needs --step > 0 and --to >= --from")
        result = run_redirect_sweep(lo, hi, step, params, config)
    if args.format == "csv":
        text = to_csv(result)
    elif isinstance(result, ComparisonRecord):
        text = _comparison_text(result)
    else:
        text = _sweep_text(result)
    _write(text, args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    inst = _instance(args)
    if args.format == "lp":
        problem, _ = build(inst.topology, inst.params, inst.demand, inst.flags)
        text = export_lp(problem)
    else:
        mod, dat = export_ampl(inst.topology, inst.params, inst.demand, inst.flags)
        text = mod if args.format == "ampl-mod" else dat
    _write(text, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .autosim import SimConfig, parse_trace, simulate

    inst = _instance(args)
    with open(args.trace, encoding="utf-8") as fh:
        trace = parse_trace(fh.read())
    cfg = SimConfig(args.deploy_latency, args.destroy_latency, args.epoch, args.horizon)
    result = simulate(trace, inst.topology, inst.params, cfg, inst.flags, _solver_config(args))
    _write(result.to_json() + "\n", args.out)
    if args.summary:
        _write(result.summary_csv(), args.summary)
    elif args.out:
        sys.stdout.write(f"accrued cost {to_usd(round(result.cost)):.2f} USD, "
                         f"unserved {float(result.unserved_client_seconds):.0f} client-seconds\n")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "scenario": cmd_scenario, "export": cmd_export, "simulate": cmd_simulate}


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleModel as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverLimit as exc:
        print(f"solver limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except InvalidInstance as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
