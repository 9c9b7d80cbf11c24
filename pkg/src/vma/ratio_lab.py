"""Closed-form ratio bounds, empirical ratios and batch experiments."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

from .errors import OracleViolationError, VMAError
from .exact import DEFAULT_NODE_BUDGET, min_bins, optimal_partition
from .instances import Instance, Resources, gen_uniform, power_of, serialize
from .offline import balanced_k, local_improve, solve_capacity, solve_optimal_load
from .online import (
    ALGORITHMS,
    m_machines_lower_bound,
    run_stream,
    threshold_lower_bound,
    two_machine_threshold,
    two_machines_lower_bound,
)
from .power import PowerParams, group_load, optimal_load

FFD_EPS = 2 / 9
REL_TOL = 1e-12

OFFLINE_LB, OFFLINE_UB, ONLINE_LB, ONLINE_UB, PARAMETER = (
    "offline-LB",
    "offline-UB",
    "online-LB",
    "online-UB",
    "parameter",
)


@dataclass(frozen=True)
class Bound:
    name: str
    kind: str
    regime: str
    value: float
    note: str = ""


def _regime(p: PowerParams, capacity: float | None) -> str:
    if capacity is None:
        return "C unbounded"
    return "x* < C" if optimal_load(p) < capacity else "x* >= C"


def partition_gap_lower_bound(p: PowerParams) -> float:
    """Ratio between the best non-perfect split and a perfect split, with ``x* = C``."""
    a = p.alpha
    return 1.5 * (a - 1 + (2 / 3) ** a) / a


def capacity_packing_upper_bound(p: PowerParams, capacity: float, m_bar: int, eps: float = FFD_EPS) -> float:
    return 1 + eps + p.mu * capacity**p.alpha / p.b + 1 / m_bar


def optload_packing_upper_bound(p: PowerParams, m_bar: int, m_star: int, eps: float = FFD_EPS) -> float:
    return (m_bar / m_star) * ((1 + eps) + 1 / (p.alpha - 1)) + 1 / m_star


def alg1_large_capacity_coefficient(p: PowerParams) -> float:
    return 2 * (1 - (1 - 2**-p.alpha) / p.alpha)


def alg1_large_capacity_bound(p: PowerParams, small_load: float) -> float:
    """alg1 guarantee when ``x* < C``; ``small_load`` is the total of VMs lighter than ``x*``."""
    if small_load <= 0:
        return 1.0
    return (1 - (1 - 2**-p.alpha) / p.alpha) * (2 + optimal_load(p) / small_load)


def alg1_small_capacity_coefficient(p: PowerParams, capacity: float) -> float:
    return 2 * (2 * p.b / capacity) * (1 + 1 / ((p.alpha - 1) * 2**p.alpha))


def alg1_small_capacity_bound(p: PowerParams, capacity: float, total_load: float) -> float:
    """alg1 guarantee when ``x* >= C``."""
    return (2 * p.b / capacity) * (1 + 1 / ((p.alpha - 1) * 2**p.alpha)) * (2 + capacity / total_load)


def alg2_upper_bound(p: PowerParams) -> float:
    return max(2.0, 1.5 ** (p.alpha - 1))


def bounds_table(
    params: PowerParams,
    capacity: float | None = None,
    *,
    m_bar: int | None = None,
    m_star: int | None = None,
    total_load: float | None = None,
    small_load: float | None = None,
    beta: float | None = None,
    eps: float = FFD_EPS,
) -> dict[str, Bound]:
    """Every bound whose inputs are available, keyed by name.

    The regime (``x*`` against ``C``) is picked automatically.  Bounds that
    need instance quantities (``m_bar``, ``m_star``, loads) appear only when
    those are passed.
    """
    p = params
    regime = _regime(p, capacity)
    large = capacity is None or optimal_load(p) < capacity
    out: list[Bound] = [
        Bound(
            "offline_lb_partition_gap",
            OFFLINE_LB,
            "x* = C",
            partition_gap_lower_bound(p),
            "exact formula value; differs from the commonly quoted 11/9 at alpha=3",
        )
    ]
    if capacity is not None and not large and m_bar is not None:
        out.append(
            Bound(
                "offline_ub_capacity_packing",
                OFFLINE_UB,
                regime,
                capacity_packing_upper_bound(p, capacity, m_bar, eps),
                f"FFD packing, eps={eps:.6g}, m_bar={m_bar}",
            )
        )
    if large and m_bar is not None and m_star is not None:
        out.append(
            Bound(
                "offline_ub_optload_packing",
                OFFLINE_UB,
                regime,
                optload_packing_upper_bound(p, m_bar, m_star, eps),
                f"FFD packing, eps={eps:.6g}, m_bar={m_bar}, m_star={m_star}",
            )
        )
    name, value = threshold_lower_bound(p, capacity)
    out.append(Bound(name, ONLINE_LB, regime, value))
    if beta is not None:
        value = m_machines_lower_bound(p, beta)
        general = threshold_lower_bound(p)[1]
        note = f"beta={beta:.6g}" + ("; non-binding" if value < general else "")
        out.append(Bound("online_lb_m_machines", ONLINE_LB, "m bounded, C unbounded", value, note))
    out.append(Bound("online_lb_two_machines", ONLINE_LB, "m = 2, C unbounded", two_machines_lower_bound(p)))
    if large:
        out.append(
            Bound("alg1_ub_large_capacity_coefficient", ONLINE_UB, regime, alg1_large_capacity_coefficient(p),
                  "multiplies (2 + x*/small_load)/2")
        )
        if small_load is not None:
            out.append(Bound("alg1_ub_large_capacity", ONLINE_UB, regime, alg1_large_capacity_bound(p, small_load)))
    else:
        out.append(
            Bound("alg1_ub_small_capacity_coefficient", ONLINE_UB, regime,
                  alg1_small_capacity_coefficient(p, capacity), "multiplies (2 + C/total_load)/2")
        )
        if total_load is not None:
            out.append(
                Bound("alg1_ub_small_capacity", ONLINE_UB, regime, alg1_small_capacity_bound(p, capacity, total_load))
            )
    out.append(Bound("alg2_ub", ONLINE_UB, "m = 2, C unbounded", alg2_upper_bound(p)))
    out.append(Bound("alg2_threshold", PARAMETER, "m = 2, C unbounded", two_machine_threshold(p),
                     "alg2 is optimal when the total load is at most this"))
    return {b.name: b for b in out}


def format_bounds(table: dict[str, Bound]) -> str:
    width = max(len(n) for n in table)
    lines = [f"{b.name:<{width}}  {b.kind:<10}  {b.value:<20.15g}  {b.regime}" + (f"  ({b.note})" if b.note else "")
             for b in table.values()]
    return "\n".join(lines) + "\n"


def bounds_csv(table: dict[str, Bound]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "kind", "regime", "value", "note"])
    for b in table.values():
        writer.writerow([b.name, b.kind, b.regime, repr(b.value), b.note])
    return buf.getvalue()


def empirical_ratio(alg_power: float, opt_power: float) -> float:
    """``alg_power / opt_power``; a result below 1 means the oracle is wrong."""
    if not (alg_power > 0 and opt_power > 0):
        raise ValueError("powers must be positive")
    ratio = alg_power / opt_power
    if ratio < 1 - REL_TOL:
        raise OracleViolationError(f"algorithm power {alg_power!r} beats the optimum {opt_power!r}")
    return ratio


# -- experiments --------------------------------------------------------------

CSV_HEADER = (
    "instance_id", "n", "alpha", "b", "capacity", "machines", "algorithm",
    "power", "opt_power", "ratio", "bound_name", "bound_value", "bound_ok",
)

OFFLINE_SOLVERS = {
    "capacity": solve_capacity,
    "optload": solve_optimal_load,
    "balanced": balanced_k,
    "local": lambda inst: local_improve(balanced_k(inst), inst),
}

EXPERIMENT_ALGORITHMS = (*ALGORITHMS, *OFFLINE_SOLVERS)


@dataclass
class ExperimentRow:
    instance_id: str
    n: int
    alpha: float
    b: float
    capacity: float | None
    machines: int | None
    algorithm: str
    power: float | None = None
    opt_power: float | None = None
    ratio: float | None = None
    bound_name: str = ""
    bound_value: float | None = None
    bound_ok: bool | str | None = None

    def csv_cells(self) -> list[str]:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [cell(getattr(self, f.name)) for f in fields(self)]


@dataclass(frozen=True)
class ExperimentConfig:
    """Uniform instances ``U[lo, hi]`` of size ``n``, one per trial."""

    n: int
    lo: float
    hi: float
    params: PowerParams
    resources: Resources = Resources()
    algorithms: tuple[str, ...] = ("alg1",)
    trials: int = 1
    seed: int = 0
    workers: int = 1
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self) -> None:
        unknown = [a for a in self.algorithms if a not in EXPERIMENT_ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; choose from {EXPERIMENT_ALGORITHMS}")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")


def instance_id(instance: Instance) -> str:
    return hashlib.sha1(serialize(instance).encode()).hexdigest()[:12]


def instance_seeds(seed: int, trials: int) -> list[int]:
    rng = random.Random(seed)
    return [rng.getrandbits(32) for _ in range(trials)]


def algorithm_partition(name: str, instance: Instance):
    if name in ALGORITHMS:
        partition, _ = run_stream(instance.loads, ALGORITHMS[name], instance.params, instance.resources)
        return partition
    return OFFLINE_SOLVERS[name](instance)


def algorithm_bound(name: str, instance: Instance, opt_groups: int) -> tuple[str, float, bool] | None:
    """Bound applicable to ``name`` on ``instance`` as (name, value, strict)."""
    p, capacity, loads = instance.params, instance.capacity, instance.loads
    x_star = optimal_load(p)
    large = capacity is None or x_star < capacity
    if name == "alg1":
        if large:
            small = group_load(x for x in loads if x < x_star)
            return "alg1_ub_large_capacity", alg1_large_capacity_bound(p, small), False
        return "alg1_ub_small_capacity", alg1_small_capacity_bound(p, capacity, instance.total_load), False
    if name == "alg2" and capacity is None and instance.machines == 2:
        if instance.total_load <= two_machine_threshold(p):
            return "alg2_exact_below_threshold", 1.0, False
        return "alg2_ub", alg2_upper_bound(p), False
    if name == "capacity" and not large:
        return "offline_ub_capacity_packing", capacity_packing_upper_bound(p, capacity, min_bins(loads, capacity)), True
    if name == "optload" and large:
        return "offline_ub_optload_packing", optload_packing_upper_bound(p, optload_bins(instance), opt_groups), True
    return None


def optload_bins(instance: Instance) -> int:
    """Fewest bins of size ``x*`` for the light VMs, plus one per heavy VM."""
    x_star = optimal_load(instance.params)
    light = [x for x in instance.loads if x <= x_star]
    return min_bins(light, x_star) + (instance.n - len(light))


def bound_holds(ratio: float, bound: float, strict: bool) -> bool:
    return ratio < bound if strict else ratio <= bound * (1 + REL_TOL)


def evaluate_instance(instance: Instance, algorithms: Sequence[str], node_budget: int = DEFAULT_NODE_BUDGET) -> list[ExperimentRow]:
    """One row per algorithm; errors land in ``bound_ok`` instead of aborting."""
    base = dict(
        instance_id=instance_id(instance),
        n=instance.n,
        alpha=instance.params.alpha,
        b=instance.params.b,
        capacity=instance.capacity,
        machines=instance.machines,
    )
    try:
        opt_partition, opt_power = optimal_partition(instance, node_budget)
    except VMAError as exc:
        return [ExperimentRow(**base, algorithm=a, bound_ok=exc.code) for a in algorithms]
    rows = []
    for name in algorithms:
        row = ExperimentRow(**base, algorithm=name, opt_power=opt_power)
        try:
            partition = algorithm_partition(name, instance)
            row.power = power_of(instance, partition)
            row.ratio = empirical_ratio(row.power, opt_power)
            bound = algorithm_bound(name, instance, len(opt_partition))
        except VMAError as exc:
            row.bound_ok = exc.code
        except ValueError:
            row.bound_ok = "NOT_APPLICABLE"
        else:
            if bound is not None:
                row.bound_name, row.bound_value, strict = bound
                row.bound_ok = bound_holds(row.ratio, row.bound_value, strict)
        rows.append(row)
    return rows


def experiment_instances(config: ExperimentConfig) -> list[Instance]:
    return [
        gen_uniform(config.n, config.lo, config.hi, s, config.params, config.resources)
        for s in instance_seeds(config.seed, config.trials)
    ]


def _evaluate_task(args) -> list[ExperimentRow]:
    return evaluate_instance(*args)


def experiment(config: ExperimentConfig) -> list[ExperimentRow]:
    """Evaluate every configured algorithm on every generated instance.

    Rows come back in instance order regardless of ``workers``.
    """
    tasks = [(inst, config.algorithms, config.node_budget) for inst in experiment_instances(config)]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            batches = list(pool.map(_evaluate_task, tasks))
    else:
        batches = [_evaluate_task(t) for t in tasks]
    return [row for batch in batches for row in batch]


def rows_to_csv(rows: Iterable[ExperimentRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_cells())
    return buf.getvalue()


def rows_to_jsonl(rows: Iterable[ExperimentRow]) -> str:
    return "".join(json.dumps(asdict(r)) + "\n" for r in rows)


def violations(rows: Iterable[ExperimentRow]) -> list[ExperimentRow]:
    return [r for r in rows if r.bound_ok is False]

