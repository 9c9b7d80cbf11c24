"""Exact oracles: optimal partition, minimum bin count and feasibility.

These are exponential-time searches meant for desk-scale instances
(roughly n <= 14) and serve as ground truth for everything else.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

from .errors import BudgetExceededError, InfeasibleError, OversizedItemError
from .instances import Instance, Partition, fits
from .offline import balanced_k, ffd_pack, local_improve
from .power import PowerParams, group_load, machine_power, optimal_load, optimal_power_rate, partition_power

DEFAULT_NODE_BUDGET = 10**7

# Incumbent pruning margin; keeps rounding in the bound from cutting an optimal branch.
_PRUNE_SLACK = 1e-9


def fill_lower_bound(
    open_loads: Sequence[float], remaining: float, p: PowerParams, new_allowed: bool
) -> float:
    """Least extra power needed to place ``remaining`` load, relaxed to fractions.

    Open machines absorb load at marginal cost ``mu*alpha*y**(alpha-1)``;
    new machines never beat the optimal power rate.  Both facts hold for
    every integral completion, so the result is a valid lower bound.
    """
    if remaining <= 0:
        return 0.0
    cap = optimal_load(p) if new_allowed else math.inf
    levels = sorted(open_loads)
    # water level y with sum(max(0, y - g)) == remaining, clipped at cap
    level, prefix, k = None, 0.0, 0
    for j, g in enumerate(levels):
        if g >= cap:
            break
        prefix += g
        k = j + 1
        nxt = min(levels[j + 1] if j + 1 < len(levels) else math.inf, cap)
        y = (remaining + prefix) / k
        if y <= nxt:
            level = y
            break
    if k == 0:
        extra, leftover = 0.0, remaining
    else:
        if level is None:
            level = cap
            leftover = remaining - (k * cap - prefix)
        else:
            leftover = 0.0
        extra = p.mu * sum(level**p.alpha - g**p.alpha for g in levels[:k])
    if leftover > 0:
        if not new_allowed:
            return math.inf
        extra += optimal_power_rate(p) * leftover
    return extra


def optimal_partition(
    instance: Instance, node_budget: int = DEFAULT_NODE_BUDGET
) -> tuple[Partition, float]:
    """Minimum-power feasible partition by exhaustive search.

    Enumerates set partitions as restricted-growth strings over VM index
    order.  Ties go to fewer machines, then to the lexicographically
    smallest string.
    """
    loads = instance.loads
    n = instance.n
    p = instance.params
    capacity = instance.capacity
    if n == 0:
        return Partition(), 0.0
    if not feasible(instance):
        raise InfeasibleError("no partition satisfies the capacity and machine-count limits")
    max_groups = n if instance.machines is None else min(n, instance.machines)

    # identical loads: canonical solutions keep their labels non-decreasing
    prev_same = [-1] * n
    last_seen: dict[float, int] = {}
    for i, x in enumerate(loads):
        prev_same[i] = last_seen.get(x, -1)
        last_seen[x] = i
    suffix = [group_load(loads[i:]) for i in range(n)] + [0.0]

    try:
        seed = local_improve(balanced_k(instance), instance)
        best_power = partition_power(seed.group_loads(loads), p)
    except InfeasibleError:
        best_power = math.inf
    best_labels: list[int] | None = None
    best_groups = 0

    labels = [0] * n
    members: list[list[float]] = []
    sums: list[float] = []
    nodes = 0

    def search(i: int) -> None:
        nonlocal nodes, best_power, best_labels, best_groups
        if i == n:
            power = partition_power(members, p)
            k = len(members)
            if best_labels is None:
                better = power <= best_power
            else:
                better = power < best_power or (power == best_power and k < best_groups)
            if better:
                best_power, best_labels, best_groups = power, labels.copy(), k
            return
        x = loads[i]
        lo = labels[prev_same[i]] if prev_same[i] >= 0 else 0
        k_open = len(members)
        for label in range(lo, min(k_open + 1, max_groups)):
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceededError(f"node budget {node_budget} exhausted before proving optimality")
            new = label == k_open
            if not new and not fits(members[label], x, capacity):
                continue
            if new:
                members.append([x])
                sums.append(x)
            else:
                members[label].append(x)
                sums[label] = group_load(members[label])
            labels[i] = label
            bound = math.fsum(machine_power(s, p) for s in sums) + fill_lower_bound(
                sums, suffix[i + 1], p, len(members) < max_groups
            )
            if bound <= best_power * (1 + _PRUNE_SLACK):
                search(i + 1)
            if new:
                members.pop()
                sums.pop()
            else:
                members[label].pop()
                sums[label] = group_load(members[label])

    search(0)
    if best_labels is None:
        raise InfeasibleError("no partition satisfies the capacity and machine-count limits")
    groups: list[list[int]] = [[] for _ in range(best_groups)]
    for i, label in enumerate(best_labels):
        groups[label].append(i)
    return Partition(groups), best_power


def min_bins(loads: Sequence[float], bin_size: float) -> int:
    """Exact minimum number of bins of ``bin_size`` holding all ``loads``."""
    for i, x in enumerate(loads):
        if x > bin_size:
            raise OversizedItemError(f"item {i + 1} has size {x!r} > bin size {bin_size!r}")
    if not loads:
        return 0
    upper = len(ffd_pack(loads, bin_size))
    lower = max(1, math.ceil(group_load(loads) / bin_size - 1e-9))
    items = sorted(loads, reverse=True)
    for k in range(lower, upper):
        if _packs_into(items, k, bin_size):
            return k
    return upper


def _packs_into(items: Sequence[float], k: int, bin_size: float) -> bool:
    bins: list[list[float]] = []
    suffix = [group_load(items[i:]) for i in range(len(items))] + [0.0]

    def place(i: int) -> bool:
        if i == len(items):
            return True
        free = (k - len(bins)) * bin_size + sum(bin_size - group_load(b) for b in bins)
        if suffix[i] > free + 1e-9 * bin_size:
            return False
        tried: set[float] = set()
        for b in bins:
            level = group_load(b)
            if level in tried or not fits(b, items[i], bin_size):
                continue
            tried.add(level)
            b.append(items[i])
            if place(i + 1):
                return True
            b.pop()
        if len(bins) < k:
            bins.append([items[i]])
            if place(i + 1):
                return True
            bins.pop()
        return False

    return place(0)


def feasible(instance: Instance) -> bool:
    """Whether any partition respects both the capacity and the machine count."""
    capacity, machines = instance.capacity, instance.machines
    if capacity is None or instance.n == 0:
        return True
    if any(x > capacity for x in instance.loads):
        return False
    if machines is None:
        return True
    return min_bins(instance.loads, capacity) <= machines
