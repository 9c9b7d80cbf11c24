"""Online assignment: the streaming engine, three algorithms and the adversaries.

An online algorithm sees the machines' current loads and the next VM, and
answers with a machine index or ``NEW_MACHINE``.  Placements are final.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import asdict, dataclass, field

from .errors import IllegalDecisionError, InfeasibleError
from .exact import optimal_partition
from .instances import Instance, Partition, Resources, fits
from .power import PowerParams, group_load, machine_power, optimal_load, partition_power

NEW_MACHINE = -1

# Above this many VMs the adversaries switch from the exact oracle to closed forms.
ORACLE_MAX_VMS = 20

DEFAULT_ADVERSARY_TOLERANCE = 0.02


@dataclass(frozen=True)
class OnlineState:
    loads: tuple[float, ...]
    params: PowerParams
    resources: Resources


@dataclass(frozen=True)
class OnlineAlgorithm:
    name: str
    step: Callable[[OnlineState, float], int]
    needs_unbounded_capacity: bool = False

    def __call__(self, state: OnlineState, load: float) -> int:
        return self.step(state, load)


class OnlineRun:
    """Feeds VMs one at a time to an algorithm and enforces the rules.

    Illegal answers raise ``IllegalDecisionError`` instead of being repaired.
    """

    def __init__(self, alg: OnlineAlgorithm, params: PowerParams, resources: Resources = Resources()):
        if alg.needs_unbounded_capacity and resources.capacity is not None:
            raise ValueError(f"{alg.name} only runs with unbounded capacity")
        self.alg = alg
        self.params = params
        self.resources = resources
        self.vm_loads: list[float] = []
        self.groups: list[list[int]] = []
        self.trace: list[int] = []
        self._contents: list[list[float]] = []
        self._loads: list[float] = []

    @property
    def state(self) -> OnlineState:
        return OnlineState(tuple(self._loads), self.params, self.resources)

    @property
    def machines_used(self) -> int:
        return len(self.groups)

    def push(self, load: float) -> int:
        """Place one VM; returns the index of the machine it landed on."""
        capacity, machines = self.resources.capacity, self.resources.machines
        if not load > 0:
            raise ValueError(f"VM loads must be positive, got {load!r}")
        if capacity is not None and load > capacity:
            raise ValueError(f"VM load {load!r} exceeds capacity {capacity!r}")
        vm = len(self.vm_loads)
        decision = self.alg(self.state, load)
        if decision == NEW_MACHINE:
            if machines is not None and len(self.groups) >= machines:
                raise IllegalDecisionError(
                    f"{self.alg.name} opened machine {len(self.groups) + 1} for VM {vm + 1}, only {machines} exist"
                )
            target = len(self.groups)
            self.groups.append([])
            self._contents.append([])
            self._loads.append(0.0)
        elif 0 <= decision < len(self.groups):
            target = decision
            if not fits(self._contents[target], load, capacity):
                raise IllegalDecisionError(
                    f"{self.alg.name} put VM {vm + 1} on machine {target + 1}, overflowing capacity {capacity!r}"
                )
        else:
            raise IllegalDecisionError(f"{self.alg.name} chose machine {decision!r}, which is not open")
        self.vm_loads.append(load)
        self.groups[target].append(vm)
        self._contents[target].append(load)
        self._loads[target] = group_load(self._contents[target])
        self.trace.append(decision)
        return target

    def partition(self) -> Partition:
        return Partition(self.groups)

    def power(self) -> float:
        return partition_power(self._contents, self.params)


def run_stream(
    loads: Iterable[float], alg: OnlineAlgorithm, params: PowerParams, resources: Resources = Resources()
) -> tuple[Partition, list[int]]:
    run = OnlineRun(alg, params, resources)
    for x in loads:
        run.push(x)
    return run.partition(), run.trace


def trace_records(loads: Sequence[float], trace: Sequence[int]) -> list[dict]:
    """Trace as file records: 1-based VM and machine numbers, ``"new"`` for openings."""
    return [
        {"vm": i + 1, "load": x, "target": "new" if d == NEW_MACHINE else d + 1}
        for i, (x, d) in enumerate(zip(loads, trace))
    ]


# -- algorithms ---------------------------------------------------------------

def alg1_step(state: OnlineState, load: float) -> int:
    """Threshold rule: big VMs alone, small VMs onto a machine still at most half full.

    "Full" means ``min(optimal_load, capacity)``.  Among eligible machines
    the lowest index wins.
    """
    limit = optimal_load(state.params)
    if state.resources.capacity is not None:
        limit = min(limit, state.resources.capacity)
    half = limit / 2
    if load > half:
        return NEW_MACHINE
    for j, x in enumerate(state.loads):
        if 0 < x <= half:
            return j
    return NEW_MACHINE


def two_machine_threshold(p: PowerParams) -> float:
    """Total load below which one machine beats any two-machine split."""
    return (p.b / (p.mu * (2**p.alpha - 2))) ** (1 / p.alpha)


def alg2_step(state: OnlineState, load: float) -> int:
    """Two-machine rule: stay on machine 1 while it is cheap or not heavier than machine 2."""
    a1 = state.loads[0] if len(state.loads) > 0 else 0.0
    a2 = state.loads[1] if len(state.loads) > 1 else 0.0
    slot = 0 if (load + a1 <= two_machine_threshold(state.params) or a1 <= a2) else 1
    return slot if slot < len(state.loads) else NEW_MACHINE


def greedy_step(state: OnlineState, load: float) -> int:
    """Cheapest legal placement; ties go to the lowest index, a new machine last."""
    p = state.params
    capacity, machines = state.resources.capacity, state.resources.machines
    best, best_cost = None, math.inf
    for j, x in enumerate(state.loads):
        if capacity is not None and group_load([x, load]) > capacity:
            continue
        cost = machine_power(x + load, p) - machine_power(x, p)
        if cost < best_cost:
            best, best_cost = j, cost
    if machines is None or len(state.loads) < machines:
        if machine_power(load, p) < best_cost:
            best = NEW_MACHINE
    if best is None:
        raise InfeasibleError(f"no legal machine for a VM of load {load!r}")
    return best


ALG1 = OnlineAlgorithm("alg1", alg1_step)
ALG2 = OnlineAlgorithm("alg2", alg2_step, needs_unbounded_capacity=True)
GREEDY = OnlineAlgorithm("greedy", greedy_step)

ALGORITHMS: dict[str, OnlineAlgorithm] = {a.name: a for a in (ALG1, ALG2, GREEDY)}


def verify_two_machine_gap(loads: Sequence[float], trace: Sequence[int], params: PowerParams) -> bool:
    """Check the load gap at the end of an ``alg2`` run.

    Once the total load reaches twice ``two_machine_threshold``, some VM must
    be at least as heavy as the gap between the two machines.
    """
    contents: list[list[float]] = [[], []]
    opened = 0
    for x, d in zip(loads, trace):
        target = opened if d == NEW_MACHINE else d
        if d == NEW_MACHINE:
            opened += 1
        contents[target].append(x)
    total = group_load(loads)
    if total < 2 * two_machine_threshold(params):
        return True
    gap = abs(group_load(contents[1]) - group_load(contents[0]))
    # an exact tie with a VM load may land one ulp either side
    return max(loads) >= gap - 1e-12 * total


# -- adversaries ----------------------------------------------------------------

@dataclass
class AdversaryReport:
    construction: str
    algorithm: str
    loads: list[float]
    groups: list[list[int]]
    alg_power: float
    opt_power: float
    opt_method: str
    ratio: float
    bound_name: str
    bound_value: float
    bound_met: bool
    tolerance: float
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["groups"] = [[i + 1 for i in g] for g in self.groups]
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def equal_load_optimum(
    count: int, unit: float, p: PowerParams, resources: Resources = Resources()
) -> float:
    """Exact optimum for ``count`` VMs of identical load ``unit``.

    With identical items the most even split is optimal for each machine
    count, so only the machine count needs searching.
    """
    per_machine = count
    if resources.capacity is not None:
        per_machine = max(1, int(resources.capacity // unit))
        while per_machine > 1 and group_load([unit] * per_machine) > resources.capacity:
            per_machine -= 1
        while group_load([unit] * (per_machine + 1)) <= resources.capacity:
            per_machine += 1
    j_min = -(-count // per_machine)
    j_max = count if resources.machines is None else min(count, resources.machines)
    if j_min > j_max:
        raise InfeasibleError(f"{count} VMs of load {unit!r} do not fit on {j_max} machines")
    best = math.inf
    for j in range(j_min, j_max + 1):
        q, r = divmod(count, j)
        heavy = machine_power(group_load([unit] * (q + 1)), p) if r else 0.0
        light = machine_power(group_load([unit] * q), p)
        best = min(best, math.fsum([heavy] * r + [light] * (j - r)))
    return best


def _optimum(loads: Sequence[float], p: PowerParams, resources: Resources, closed_form: Callable[[], float]) -> tuple[float, str]:
    if len(loads) <= ORACLE_MAX_VMS:
        _, power = optimal_partition(Instance(p, resources, tuple(loads)))
        return power, "oracle"
    return closed_form(), "closed-form"


def _report(construction, alg, run, opt, method, bound_name, bound, tol, notes=()) -> AdversaryReport:
    power = run.power()
    ratio = power / opt
    return AdversaryReport(
        construction=construction,
        algorithm=alg.name,
        loads=list(run.vm_loads),
        groups=[list(g) for g in run.groups],
        alg_power=power,
        opt_power=opt,
        opt_method=method,
        ratio=ratio,
        bound_name=bound_name,
        bound_value=bound,
        bound_met=ratio >= bound - tol,
        tolerance=tol,
        notes=list(notes),
    )


def threshold_lower_bound(p: PowerParams, capacity: float | None = None) -> tuple[str, float]:
    """Online lower bound from the many-tiny-VMs construction, regime-matched."""
    a = p.alpha
    if capacity is None or capacity > optimal_load(p):
        return "online_lb_threshold", (1.5 * 2**a - 1) / (2**a - 1)
    cpow = p.mu * capacity**a
    return "online_lb_threshold_small_capacity", (cpow + 2 * p.b) / (
        p.b + max(cpow, 2 * p.mu * (capacity / 2) ** a + p.b)
    )


def threshold_safety_cap(p: PowerParams, eps: float) -> int:
    a = p.alpha
    return math.ceil(4 * (1 / eps) * ((a - 1) / (1 - 2 ** (1 - a))) ** (1 / a))


def adversary_threshold(
    alg: OnlineAlgorithm,
    params: PowerParams,
    capacity: float | None = None,
    eps: float = 0.01,
    tol: float = DEFAULT_ADVERSARY_TOLERANCE,
) -> AdversaryReport:
    """Send identical tiny VMs until the algorithm opens a second machine.

    The unit is ``eps * min(optimal_load, capacity)``.  Degenerate algorithms
    that never open a second machine are stopped at ``threshold_safety_cap``.
    """
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 0.1]")
    limit = optimal_load(params) if capacity is None else min(optimal_load(params), capacity)
    unit = eps * limit
    resources = Resources(capacity, None)
    run = OnlineRun(alg, params, resources)
    cap = threshold_safety_cap(params, eps)
    notes = []
    while run.machines_used < 2:
        if len(run.vm_loads) >= cap:
            notes.append(f"stopped at safety cap of {cap} VMs without a second machine")
            break
        run.push(unit)
    k = len(run.vm_loads)
    opt, method = _optimum(run.vm_loads, params, resources, lambda: equal_load_optimum(k, unit, params, resources))
    name, bound = threshold_lower_bound(params, capacity)
    return _report("threshold", alg, run, opt, method, name, bound, tol, notes)


def m_machines_lower_bound(p: PowerParams, beta: float) -> float:
    slack = (p.alpha - 1) / beta**p.alpha
    return 3**p.alpha / (2 ** (p.alpha + 2) + slack)


def adversary_m(
    alg: OnlineAlgorithm,
    params: PowerParams,
    m: int,
    beta: float = 2.0,
    tol: float = DEFAULT_ADVERSARY_TOLERANCE,
) -> AdversaryReport:
    """Two-phase construction for ``m`` machines of unbounded capacity.

    Phase 1 sends ``m`` VMs of load ``beta*x*``.  If the algorithm spreads
    them over more than ``3m/4`` machines, phase 2 sends ``m/2`` VMs of
    load ``2*beta*x*``.
    """
    if m < 4 or m % 4:
        raise ValueError("m must be a positive multiple of 4")
    if not beta > 1:
        raise ValueError("beta must exceed 1")
    x_star = optimal_load(params)
    resources = Resources(None, m)
    run = OnlineRun(alg, params, resources)
    for _ in range(m):
        run.push(beta * x_star)
    notes = []
    general = threshold_lower_bound(params)[1]
    if run.machines_used > 3 * m // 4:
        for _ in range(m // 2):
            run.push(2 * beta * x_star)
        closed = lambda: m * machine_power(2 * beta * x_star, params)  # noqa: E731
        name, bound = "online_lb_m_machines", m_machines_lower_bound(params, beta)
        if bound < general:
            notes.append(f"non-binding: below the general online bound {general:.6g}")
    else:
        closed = lambda: m * machine_power(beta * x_star, params)  # noqa: E731
        name, bound = "online_lb_m_machines_phase1", 2 ** (params.alpha - 3) + 0.25
        notes.append(f"algorithm used {run.machines_used} <= 3m/4 machines; phase 2 skipped")
    opt, method = _optimum(run.vm_loads, params, resources, closed)
    return _report("m", alg, run, opt, method, name, bound, tol, notes)


def two_machines_lower_bound(p: PowerParams) -> float:
    return 3**p.alpha / 2 ** (p.alpha + 1)


def adversary_two(
    alg: OnlineAlgorithm, params: PowerParams, tol: float = DEFAULT_ADVERSARY_TOLERANCE
) -> AdversaryReport:
    """Two machines: two VMs of ``6x*``, then ``12x*`` only if they were split."""
    x_star = optimal_load(params)
    resources = Resources(None, 2)
    run = OnlineRun(alg, params, resources)
    first = run.push(6 * x_star)
    second = run.push(6 * x_star)
    if first == second:
        notes = ["first two VMs co-located; stream ends"]
    else:
        run.push(12 * x_star)
        notes = []
    closed = lambda: partition_power([[l] for l in run.vm_loads[:2]], params) if first == second else (  # noqa: E731
        2 * machine_power(12 * x_star, params)
    )
    opt, method = _optimum(run.vm_loads, params, resources, closed)
    return _report("two", alg, run, opt, method, "online_lb_two_machines", two_machines_lower_bound(params), tol, notes)


CONSTRUCTIONS = ("threshold", "m", "two")
