"""Command-line entry point.

Exit codes: 0 optimal or feasible, 1 infeasible, 2 inconclusive, 3 usage or
input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .exact import SolverSettings, build_master, export_lp, solve_exact
from .heuristic import HeuristicSettings, solve_heuristic
from .instance import (
    Instance,
    InstanceFormatError,
    generate,
    instance_to_dict,
    load_instance,
    preprocess_extract_biconnected,
    preprocess_raise_connectivity,
    save_instance,
)
from .model import make_partition, verify_feasible
from .report import (
    RunRecord,
    export_partition_dot,
    load_records,
    render_table,
    save_records,
    summarize,
    table_rows,
    write_table_csv,
)
from .result import SolveResult

EXIT_OK = 0
EXIT_INFEASIBLE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

STATUS_EXIT = {
    "optimal": EXIT_OK,
    "feasible": EXIT_OK,
    "infeasible": EXIT_INFEASIBLE,
    "inconclusive": EXIT_INCONCLUSIVE,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _tau(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tau {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("tau must be nonnegative")
    return value


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _instance_args(p, required=True):
    p.add_argument("--instance", required=required, help="instance JSON file")
    p.add_argument("--k", type=int, help="number of parts (overrides the file)")
    p.add_argument("--q", type=int, help="connectivity level (overrides the file)")
    p.add_argument("--tau", type=_tau, help="balance deviation, a number or 'inf' (overrides the file)")


def _output_args(p, formats=("json", "dot")):
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--format", choices=formats, default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qconnpart", description="Balanced Q-connected graph partitioning.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("solve-exact", help="branch-and-cut to optimality")
    _instance_args(p)
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cuts", choices=("all", "one"), default="all")
    p.add_argument("--root-resilience", type=_on_off, default=True, metavar="on|off")
    p.add_argument("--no-degree-rows", action="store_true", help="drop the degree inequalities")
    _output_args(p)

    p = sub.add_parser("solve-heuristic", help="ear-construction heuristic (q = 2)")
    _instance_args(p)
    p.add_argument("--time-limit", type=float, default=60.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-restarts", type=int, default=1000)
    _output_args(p)

    p = sub.add_parser("verify", help="check a result's partition against an instance")
    _instance_args(p)
    p.add_argument("--result", required=True, help="result JSON written by solve-*")
    _output_args(p, ("json",))

    p = sub.add_parser("preprocess", help="largest 2-connected block or added edges")
    _instance_args(p)
    p.add_argument("--mode", choices=("biconnected", "raise"), default="biconnected")
    _output_args(p, ("json",))

    p = sub.add_parser("generate", help="write a generated instance")
    p.add_argument("kind", choices=("grid", "cycle", "complete", "random", "mycielskian"))
    p.add_argument("params", nargs="*", help="generator parameters")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--tau", type=_tau, default=math.inf)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name")
    _output_args(p, ("json",))

    p = sub.add_parser("export-lp", help="write the model in LP format")
    _instance_args(p)
    p.add_argument("--with-cuts", action="store_true", help="solve first and include the cut pool")
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--out")

    p = sub.add_parser("report", help="run both methods and tabulate, or tabulate saved records")
    p.add_argument("--instance", action="append", default=[], help="instance JSON (repeatable)")
    p.add_argument("--records", action="append", default=[], help="saved records JSON (repeatable)")
    p.add_argument("--k", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--tau", type=_tau)
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--save-records", help="write the run records here")
    p.add_argument("--out", help="CSV table path")
    return parser


def _load(args) -> Instance:
    inst = load_instance(args.instance)
    tau = getattr(args, "tau", None)
    return inst.with_params(k=args.k, q=args.q, tau=tau)


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_result(res: SolveResult, inst: Instance, args) -> int:
    if args.format == "dot":
        if res.partition is None:
            raise UsageError("no partition to draw")
        if args.out is None:
            raise UsageError("--format dot needs --out")
        export_partition_dot(res.partition, inst.graph, args.out)
    else:
        _emit(res.to_json() + "\n", args.out)
    return STATUS_EXIT[res.status]


def _cmd_solve_exact(args) -> int:
    inst = _load(args)
    settings = SolverSettings(
        root_resilience=args.root_resilience,
        cut_mode=args.cuts,
        time_limit=args.time_limit,
        seed=args.seed,
        degree_inequalities=not args.no_degree_rows,
    )
    return _emit_result(solve_exact(inst, settings), inst, args)


def _cmd_solve_heuristic(args) -> int:
    inst = _load(args)
    settings = HeuristicSettings(seed=args.seed, time_limit=args.time_limit, max_restarts=args.max_restarts)
    return _emit_result(solve_heuristic(inst, settings), inst, args)


def _cmd_verify(args) -> int:
    inst = _load(args)
    try:
        res = SolveResult.from_dict(json.loads(Path(args.result).read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise InstanceFormatError(f"{args.result}: {exc}") from None
    if res.partition is None:
        raise UsageError("result holds no partition")
    report = verify_feasible(make_partition(res.partition.parts, inst.costs), inst)
    _emit(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_INFEASIBLE


def _cmd_preprocess(args) -> int:
    inst = _load(args)
    if args.mode == "biconnected":
        g = preprocess_extract_biconnected(inst.graph)
    else:
        g = preprocess_raise_connectivity(inst.graph, inst.q)
    new = Instance(g, inst.k, inst.q, inst.tau, inst.bounds, inst.name)
    _emit(json.dumps(instance_to_dict(new), indent=1) + "\n", args.out)
    return EXIT_OK


def _cmd_generate(args) -> int:
    g = generate(args.kind, *args.params, seed=args.seed)
    name = args.name or "-".join([args.kind, *args.params])
    inst = Instance(g, args.k, args.q, tau=args.tau, name=name)
    if args.out is None:
        _emit(json.dumps(instance_to_dict(inst), indent=1) + "\n", None)
    else:
        save_instance(inst, args.out)
    return EXIT_OK


def _cmd_export_lp(args) -> int:
    inst = _load(args)
    model = build_master(inst)
    if args.with_cuts:
        solve_exact(inst, SolverSettings(time_limit=args.time_limit), model=model)
    if args.out is None:
        raise UsageError("export-lp needs --out")
    export_lp(model, args.out)
    return EXIT_OK


def _cmd_report(args) -> int:
    if not args.instance and not args.records:
        raise UsageError("report needs --instance or --records")
    records = []
    for path in args.records:
        records.extend(load_records(path))
    for path in args.instance:
        inst = load_instance(path).with_params(k=args.k, q=args.q, tau=args.tau)
        ex = solve_exact(inst, SolverSettings(time_limit=args.time_limit, seed=args.seed))
        records.append(RunRecord.from_run(inst, ex, args.seed))
        if inst.q == 2:
            he = solve_heuristic(inst, HeuristicSettings(seed=args.seed, time_limit=args.time_limit))
            records.append(RunRecord.from_run(inst, he, args.seed))
    if args.save_records:
        save_records(records, args.save_records)
    rows = table_rows(records)
    sys.stdout.write(render_table(rows))
    if rows:
        s = summarize(rows)
        gap = "n/a" if s["mean_gap"] is None else f"{s['mean_gap']:.4f}"
        ratio = "n/a" if s["time_ratio"] is None else f"{s['time_ratio']:.2f}"
        sys.stdout.write(f"rows={s['rows']} mean_gap={gap} time_ratio={ratio}\n")
    if args.out:
        write_table_csv(rows, args.out)
    return EXIT_OK


COMMANDS = {
    "solve-exact": _cmd_solve_exact,
    "solve-heuristic": _cmd_solve_heuristic,
    "verify": _cmd_verify,
    "preprocess": _cmd_preprocess,
    "generate": _cmd_generate,
    "export-lp": _cmd_export_lp,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
