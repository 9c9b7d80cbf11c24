"""``vma`` command line: solve, stream, attack, bound and generate instances."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    BudgetExceededError,
    IllegalDecisionError,
    InfeasibleError,
    InstanceError,
    MachinesExceededError,
    OracleViolationError,
    VMAError,
)
from .exact import DEFAULT_NODE_BUDGET, optimal_partition
from .instances import (
    THREE_PARTITION_VARIANTS,
    Instance,
    Resources,
    gen_partition_reduction,
    gen_three_partition_reduction,
    gen_uniform,
    parse,
    power_of,
    serialize,
)
from .online import ALGORITHMS, CONSTRUCTIONS, adversary_m, adversary_threshold, adversary_two, run_stream, trace_records, verify_two_machine_gap
from .power import PowerParams
from .ratio_lab import (
    EXPERIMENT_ALGORITHMS,
    OFFLINE_SOLVERS,
    ExperimentConfig,
    algorithm_bound,
    bound_holds,
    bounds_csv,
    bounds_table,
    empirical_ratio,
    experiment,
    format_bounds,
    rows_to_csv,
    rows_to_jsonl,
    violations,
)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_BUDGET, EXIT_BOUND, EXIT_ILLEGAL = range(6)

DEFAULT_MAX_N = 20


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, path: str | None = None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _read_instance(path: str) -> Instance:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse(text)
    except InstanceError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _params(args) -> PowerParams:
    if args.alpha is None or args.b is None:
        raise UsageError("--alpha and --b are required")
    try:
        return PowerParams(args.alpha, args.b, args.mu)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _resources(args) -> Resources:
    try:
        return Resources(args.capacity, args.machines)
    except InstanceError as exc:
        raise UsageError(str(exc)) from exc


def _solution(instance: Instance, partition, power: float) -> dict:
    return {**partition.to_json(), "machines_used": len(partition), "power": power}


# -- commands -------------------------------------------------------------------

def cmd_exact(args) -> int:
    instance = _read_instance(args.instance)
    if instance.n > args.max_n:
        raise BudgetExceededError(
            f"n={instance.n} exceeds the exact-search limit of {args.max_n} VMs (raise --max-n to try anyway)"
        )
    partition, power = optimal_partition(instance, args.budget)
    _emit(json.dumps(_solution(instance, partition, power)))
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = _read_instance(args.instance)
    try:
        partition = OFFLINE_SOLVERS[args.algorithm](instance)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    power = power_of(instance, partition)
    out = {"algorithm": args.algorithm, **_solution(instance, partition, power)}
    if instance.n <= args.max_n:
        opt_partition, opt = optimal_partition(instance, args.budget)
        out["opt_power"] = opt
        out["ratio"] = empirical_ratio(power, opt)
        bound = algorithm_bound(args.algorithm, instance, len(opt_partition))
        if bound is not None:
            name, value, strict = bound
            out.update(bound_name=name, bound_value=value, bound_ok=bound_holds(out["ratio"], value, strict))
    _emit(json.dumps(out))
    return EXIT_BOUND if out.get("bound_ok") is False else EXIT_OK


def cmd_adversary(args) -> int:
    params = _params(args)
    alg = ALGORITHMS[args.algorithm]
    try:
        if args.construction == "threshold":
            report = adversary_threshold(alg, params, args.capacity, args.eps, args.tol)
        elif args.construction == "m":
            report = adversary_m(alg, params, args.machines or 8, args.beta, args.tol)
        else:
            report = adversary_two(alg, params, args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(report.to_json())
    return EXIT_OK if report.bound_met else EXIT_BOUND


def cmd_bounds(args) -> int:
    params = _params(args)
    table = bounds_table(
        params,
        args.capacity,
        m_bar=args.m_bar,
        m_star=args.m_star,
        total_load=args.total_load,
        small_load=args.small_load,
        beta=args.beta,
        eps=args.eps,
    )
    parts = []
    if args.format in ("text", "both"):
        parts.append(format_bounds(table))
    if args.format in ("csv", "both"):
        parts.append(bounds_csv(table))
    _emit("\n".join(parts))
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        if args.uniform is not None:
            n, lo, hi = args.uniform
            if n != int(n):
                raise UsageError("--uniform N must be an integer")
            instance = gen_uniform(int(n), lo, hi, args.seed, _params(args), _resources(args))
        elif args.partition is not None:
            instance = gen_partition_reduction(args.partition, args.alpha)
        else:
            if args.bound is None:
                raise UsageError("--three-partition needs --bound")
            instance = gen_three_partition_reduction(args.three_partition, args.bound, args.alpha, args.variant)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(serialize(instance), args.output)
    return EXIT_OK


def _read_stream(path: str) -> list[float]:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
        data = json.loads(text)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    loads = data.get("loads") if isinstance(data, dict) else None
    if not isinstance(loads, list) or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in loads):
        raise UsageError(f"{path}: expected an object with a 'loads' list of numbers")
    return [float(x) for x in loads]


def cmd_stream(args) -> int:
    loads = _read_stream(args.stream)
    params, resources = _params(args), _resources(args)
    alg = ALGORITHMS[args.algorithm]
    try:
        partition, trace = run_stream(loads, alg, params, resources)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    lines = [json.dumps(r) for r in trace_records(loads, trace)]
    instance = Instance(params, resources, tuple(loads))
    summary = {"algorithm": alg.name, **_solution(instance, partition, power_of(instance, partition))}
    if alg.name == "alg2":
        summary["gap_ok"] = verify_two_machine_gap(loads, trace, params)
    if args.trace:
        _emit("\n".join(lines), args.trace)
        _emit(json.dumps(summary))
    else:
        _emit("\n".join([*lines, json.dumps(summary)]))
    return EXIT_OK


def cmd_experiment(args) -> int:
    algorithms = tuple(a for a in args.algorithms.split(",") if a)
    try:
        config = ExperimentConfig(
            n=args.n,
            lo=args.lo,
            hi=args.hi,
            params=_params(args),
            resources=_resources(args),
            algorithms=algorithms,
            trials=args.trials,
            seed=args.seed,
            workers=args.workers,
            node_budget=args.budget,
        )
        rows = experiment(config)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _emit(rows_to_csv(rows) if args.format == "csv" else rows_to_jsonl(rows), args.output)
    bad = violations(rows)
    for row in bad:
        print(f"bound violated: {row.instance_id} {row.algorithm} ratio={row.ratio!r} > {row.bound_name}={row.bound_value!r}",
              file=sys.stderr)
    return EXIT_BOUND if bad else EXIT_OK


# -- parser ---------------------------------------------------------------------

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    model = _Parser(add_help=False)
    model.add_argument("--alpha", type=float, help="power exponent (> 1)")
    model.add_argument("--b", type=float, help="static power of an active machine")
    model.add_argument("--mu", type=float, default=1.0, help="dynamic power coefficient (default 1)")
    model.add_argument("--capacity", type=float, help="machine capacity; omit for unbounded")
    model.add_argument("--machines", type=_positive_int, help="machine count; omit for unbounded")

    search = _Parser(add_help=False)
    search.add_argument("--budget", type=_positive_int, default=DEFAULT_NODE_BUDGET, help="search node budget")
    search.add_argument("--max-n", type=int, default=DEFAULT_MAX_N, help="largest n handed to the exact search")

    parser = _Parser(prog="vma", description="Power-minimizing virtual machine assignment toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("exact", parents=[search], help="optimal partition of an instance file")
    p.add_argument("instance", help="instance JSON file, or - for stdin")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("solve", parents=[search], help="run an offline heuristic on an instance file")
    p.add_argument("instance")
    p.add_argument("--algorithm", choices=sorted(OFFLINE_SOLVERS), required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("adversary", parents=[model], help="run a lower-bound construction against an online algorithm")
    p.add_argument("--construction", choices=CONSTRUCTIONS, required=True)
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), required=True)
    p.add_argument("--eps", type=float, default=0.01, help="unit size fraction for the threshold construction")
    p.add_argument("--beta", type=float, default=2.0, help="load multiplier for the m-machine construction")
    p.add_argument("--tol", type=float, default=0.02, help="slack allowed below the lower bound")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("bounds", parents=[model], help="print the closed-form bounds")
    p.add_argument("--m-bar", type=_positive_int)
    p.add_argument("--m-star", type=_positive_int)
    p.add_argument("--total-load", type=float)
    p.add_argument("--small-load", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--eps", type=float, default=2 / 9)
    p.add_argument("--format", choices=("text", "csv", "both"), default="both")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gen", parents=[model], help="write an instance file")
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--uniform", nargs=3, type=float, metavar=("N", "LO", "HI"))
    kind.add_argument("--partition", nargs="+", type=float, metavar="SIZE", help="Partition reduction of these sizes")
    kind.add_argument("--three-partition", nargs="+", type=int, metavar="SIZE", help="3-Partition reduction")
    p.add_argument("--bound", type=int, help="triple target B for --three-partition")
    p.add_argument("--variant", choices=THREE_PARTITION_VARIANTS, default="unbounded")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("stream", parents=[model], help="feed a load stream to an online algorithm")
    p.add_argument("stream", help='JSON file {"loads": [...]}, or - for stdin')
    p.add_argument("--algorithm", choices=sorted(ALGORITHMS), required=True)
    p.add_argument("--trace", help="write the decision trace here instead of stdout")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("experiment", parents=[model], help="batch of uniform instances against the oracle")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithms", default="alg1", help=f"comma list from {','.join(EXPERIMENT_ALGORITHMS)}")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_experiment)
    return parser


_EXIT_CODES = {
    InfeasibleError: EXIT_INFEASIBLE,
    MachinesExceededError: EXIT_INFEASIBLE,
    BudgetExceededError: EXIT_BUDGET,
    OracleViolationError: EXIT_BOUND,
    IllegalDecisionError: EXIT_ILLEGAL,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"vma {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VMAError as exc:
        print(f"vma {args.command}: {exc.code}: {exc}", file=sys.stderr)
        return _EXIT_CODES.get(type(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
