"""Offline heuristics: bin-packing reductions, balanced LPT and local search."""

from __future__ import annotations

from collections.abc import Sequence

from .errors import InfeasibleError, MachinesExceededError, OversizedItemError
from .instances import Instance, Partition, fits, power_of
from .power import group_load, machine_power, optimal_load


def ffd_pack(loads: Sequence[float], bin_size: float) -> Partition:
    """First-Fit-Decreasing into bins of ``bin_size``.

    Items go in descending load order (ties by index), each into the
    lowest-indexed bin with room.
    """
    for i, x in enumerate(loads):
        if x > bin_size:
            raise OversizedItemError(f"VM {i + 1} has load {x!r} > bin size {bin_size!r}")
    order = sorted(range(len(loads)), key=lambda i: -loads[i])
    bins: list[list[int]] = []
    contents: list[list[float]] = []
    for i in order:
        for b, members in enumerate(contents):
            if fits(members, loads[i], bin_size):
                members.append(loads[i])
                bins[b].append(i)
                break
        else:
            bins.append([i])
            contents.append([loads[i]])
    return Partition(bins)


def _check_machines(instance: Instance, partition: Partition) -> Partition:
    if instance.machines is not None and len(partition) > instance.machines:
        raise MachinesExceededError(
            f"packing needs {len(partition)} machines, only {instance.machines} available"
        )
    return partition


def solve_capacity(instance: Instance) -> Partition:
    """Pack machines to capacity with FFD; meant for ``optimal_load >= capacity``."""
    capacity = instance.capacity
    if capacity is None:
        raise ValueError("solve_capacity needs a bounded capacity")
    if instance.n == 0:
        return Partition()
    if instance.total_load <= capacity:
        return Partition([tuple(range(instance.n))])
    return _check_machines(instance, ffd_pack(instance.loads, capacity))


def solve_optimal_load(instance: Instance) -> Partition:
    """FFD into bins of the optimal load; meant for ``optimal_load < capacity``.

    VMs heavier than the optimal load each get a machine of their own.
    """
    x_star = optimal_load(instance.params)
    capacity = instance.capacity
    if capacity is not None and x_star >= capacity:
        raise ValueError(
            f"optimal load {x_star:.6g} >= capacity {capacity:.6g}; use solve_capacity instead"
        )
    loads = instance.loads
    if instance.n == 0:
        return Partition()
    if instance.total_load <= x_star:
        return Partition([tuple(range(instance.n))])
    heavy = [i for i, x in enumerate(loads) if x > x_star]
    light = [i for i, x in enumerate(loads) if x <= x_star]
    packed = ffd_pack([loads[i] for i in light], x_star)
    groups = [(i,) for i in heavy] + [tuple(light[j] for j in g) for g in packed.groups]
    return _check_machines(instance, Partition(groups))


def _lpt(loads: Sequence[float], k: int, capacity: float | None) -> Partition | None:
    order = sorted(range(len(loads)), key=lambda i: -loads[i])
    groups: list[list[int]] = [[] for _ in range(k)]
    contents: list[list[float]] = [[] for _ in range(k)]
    sums = [0.0] * k
    for i in order:
        for g in sorted(range(k), key=lambda g: (sums[g], g)):
            if fits(contents[g], loads[i], capacity):
                groups[g].append(i)
                contents[g].append(loads[i])
                sums[g] = group_load(contents[g])
                break
        else:
            return None
    return Partition(g for g in groups if g)


def balanced_k(instance: Instance) -> Partition:
    """Best LPT partition over every machine count ``k``.

    LPT: loads in descending order, each onto the lightest group it fits.
    """
    n = instance.n
    if n == 0:
        return Partition()
    k_max = n if instance.machines is None else min(n, instance.machines)
    best, best_power = None, float("inf")
    for k in range(1, k_max + 1):
        candidate = _lpt(instance.loads, k, instance.capacity)
        if candidate is None:
            continue
        power = power_of(instance, candidate)
        if power < best_power:
            best, best_power = candidate, power
    if best is None:
        raise InfeasibleError(f"no LPT partition with at most {k_max} machines respects capacity")
    return best


def local_improve(partition: Partition, instance: Instance) -> Partition:
    """Best-improvement local search with merges and single-VM moves.

    A merge joins two groups whose combined load is at most
    ``min(optimal_load, capacity)``.  A move shifts one VM between two groups
    when that narrows their load gap, leaves the donor non-empty and
    respects capacity.  Each applied step strictly lowers total power.
    """
    loads = instance.loads
    params = instance.params
    capacity = instance.capacity
    merge_cap = optimal_load(params) if capacity is None else min(optimal_load(params), capacity)
    groups = [list(g) for g in partition.groups if g]

    def f(members: list[int]) -> float:
        return machine_power(group_load(loads[i] for i in members), params)

    while True:
        sums = [group_load(loads[i] for i in g) for g in groups]
        powers = [f(g) for g in groups]
        best_delta, best_move = 0.0, None
        for a in range(len(groups)):
            for c in range(len(groups)):
                if a == c:
                    continue
                if a < c and group_load(loads[i] for i in groups[a] + groups[c]) <= merge_cap:
                    delta = f(groups[a] + groups[c]) - powers[a] - powers[c]
                    if delta < best_delta:
                        best_delta, best_move = delta, ("merge", a, c, None)
                if len(groups[a]) < 2:
                    continue
                gap = abs(sums[a] - sums[c])
                for v in groups[a]:
                    src = [i for i in groups[a] if i != v]
                    dst = groups[c] + [v]
                    src_load = group_load(loads[i] for i in src)
                    dst_load = group_load(loads[i] for i in dst)
                    if abs(src_load - dst_load) >= gap:
                        continue
                    if capacity is not None and dst_load > capacity:
                        continue
                    delta = f(src) + f(dst) - powers[a] - powers[c]
                    if delta < best_delta:
                        best_delta, best_move = delta, ("move", a, c, v)
        if best_move is None:
            return Partition(groups)
        kind, a, c, v = best_move
        if kind == "merge":
            groups[a] = groups[a] + groups[c]
            del groups[c]
        else:
            groups[a].remove(v)
            groups[c].append(v)
