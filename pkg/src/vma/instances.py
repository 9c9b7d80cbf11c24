"""Instances, partitions, JSON I/O and instance generators.

``None`` stands for an unbounded capacity or machine count throughout.
VM indices are 0-based in memory and 1-based in files.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import InstanceError
from .power import PowerParams, group_load, partition_power

UNBOUNDED = None


@dataclass(frozen=True)
class Resources:
    capacity: float | None = UNBOUNDED
    machines: int | None = UNBOUNDED

    def __post_init__(self) -> None:
        if self.capacity is not None and not self.capacity > 0:
            raise InstanceError(f"capacity must be positive, got {self.capacity!r}")
        if self.machines is not None and self.machines < 1:
            raise InstanceError(f"machines must be at least 1, got {self.machines!r}")

    @property
    def variant(self) -> str:
        c = "C" if self.capacity is not None else "."
        m = "m" if self.machines is not None else "."
        return f"({c},{m})"


@dataclass(frozen=True)
class Instance:
    params: PowerParams
    resources: Resources
    loads: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "loads", tuple(float(x) for x in self.loads))
        for i, x in enumerate(self.loads):
            if not x > 0:
                raise InstanceError(f"load {i + 1} must be positive, got {x!r}")
            if self.capacity is not None and x > self.capacity:
                raise InstanceError(f"load {i + 1} ({x!r}) exceeds capacity {self.capacity!r}")

    @property
    def n(self) -> int:
        return len(self.loads)

    @property
    def capacity(self) -> float | None:
        return self.resources.capacity

    @property
    def machines(self) -> int | None:
        return self.resources.machines

    @property
    def total_load(self) -> float:
        return group_load(self.loads)


@dataclass(frozen=True)
class Partition:
    groups: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))

    def __len__(self) -> int:
        return len(self.groups)

    def group_loads(self, loads: Sequence[float]) -> list[list[float]]:
        return [[loads[i] for i in g] for g in self.groups]

    def normalized(self) -> Partition:
        """Same partition with members sorted and groups ordered by smallest member."""
        return Partition(sorted(tuple(sorted(g)) for g in self.groups if g))

    def to_json(self) -> dict:
        return {"groups": [[i + 1 for i in g] for g in self.groups]}

    @classmethod
    def from_json(cls, data: dict) -> Partition:
        try:
            return cls(tuple(int(i) - 1 for i in g) for g in data["groups"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed partition: {exc}") from exc


def fits(members: Iterable[float], x: float, capacity: float | None) -> bool:
    if capacity is None:
        return True
    return group_load([*members, x]) <= capacity


def validate(instance: Instance, partition: Partition) -> list[str]:
    """List every constraint the partition breaks; empty means valid."""
    problems = []
    seen: dict[int, int] = {}
    for gi, group in enumerate(partition.groups, start=1):
        if not group:
            problems.append(f"group {gi}: empty")
        for i in group:
            if not 0 <= i < instance.n:
                problems.append(f"group {gi}: VM index {i + 1} out of range 1..{instance.n}")
            elif i in seen:
                problems.append(f"group {gi}: VM {i + 1} already in group {seen[i]}")
            else:
                seen[i] = gi
        if instance.capacity is not None:
            load = group_load(instance.loads[i] for i in group if 0 <= i < instance.n)
            if load > instance.capacity:
                problems.append(f"group {gi}: capacity violation, load {load!r} > {instance.capacity!r}")
    missing = [i + 1 for i in range(instance.n) if i not in seen]
    if missing:
        problems.append(f"unassigned VMs: {missing}")
    used = sum(1 for g in partition.groups if g)
    if instance.machines is not None and used > instance.machines:
        problems.append(f"machine-count violation: {used} groups > {instance.machines} machines")
    return problems


def power_of(instance: Instance, partition: Partition) -> float:
    return partition_power(partition.group_loads(instance.loads), instance.params)


# -- JSON -------------------------------------------------------------------

def to_dict(instance: Instance) -> dict:
    return {
        "mu": instance.params.mu,
        "alpha": instance.params.alpha,
        "b": instance.params.b,
        "capacity": instance.capacity,
        "machines": instance.machines,
        "loads": list(instance.loads),
    }


def serialize(instance: Instance) -> str:
    return json.dumps(to_dict(instance), indent=2) + "\n"


def _number(data: dict, key: str, *, required: bool = True, default=None):
    if key not in data:
        if required:
            raise InstanceError(f"field {key!r}: missing")
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(f"field {key!r}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise InstanceError(f"field {key!r}: must be finite")
    return float(value)


def from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    mu = _number(data, "mu", required=False, default=1.0)
    alpha = _number(data, "alpha")
    b = _number(data, "b")
    if not alpha > 1:
        raise InstanceError("field 'alpha': alpha must exceed 1")
    if not b > 0:
        raise InstanceError("field 'b': b must be positive")
    if not mu > 0:
        raise InstanceError("field 'mu': mu must be positive")

    capacity = data.get("capacity")
    if capacity is not None:
        capacity = _number(data, "capacity")
    machines = data.get("machines")
    if machines is not None:
        if isinstance(machines, bool) or not isinstance(machines, int):
            raise InstanceError(f"field 'machines': expected an integer or null, got {machines!r}")

    loads = data.get("loads")
    if not isinstance(loads, list):
        raise InstanceError("field 'loads': expected a list of numbers")
    for i, x in enumerate(loads):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InstanceError(f"field 'loads[{i}]': expected a number, got {x!r}")
        if not x > 0:
            raise InstanceError(f"field 'loads[{i}]': loads must be positive, got {x!r}")

    return Instance(PowerParams(alpha, b, mu), Resources(capacity, machines), tuple(loads))


def parse(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return from_dict(data)


# -- generators ---------------------------------------------------------------

def gen_uniform(
    n: int,
    lo: float,
    hi: float,
    seed: int,
    params: PowerParams,
    resources: Resources = Resources(),
) -> Instance:
    """``n`` loads drawn i.i.d. from U[lo, hi] with a seeded Mersenne Twister.

    Draw ``i`` is ``lo + (hi - lo) * u_i`` where ``u_i`` is the ``i``-th
    53-bit double of MT19937 seeded by ``seed`` (CPython ``random.Random``).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not lo > 0:
        raise ValueError("lo must be positive")
    if hi < lo:
        raise ValueError("hi must be at least lo")
    if resources.capacity is not None and hi > resources.capacity:
        raise ValueError(f"hi={hi!r} exceeds capacity {resources.capacity!r}; VMs could not be placed")
    rng = random.Random(seed)
    loads = tuple(lo + (hi - lo) * rng.random() for _ in range(n))
    return Instance(params, resources, loads)


def gen_partition_reduction(sizes: Sequence[float], alpha: float) -> Instance:
    """Capacity-bounded instance whose optimum reveals whether ``sizes`` splits in half.

    Capacity is half the total and ``b`` is chosen so the optimal load equals
    the capacity: a perfect split costs ``2b + 2C**alpha``, anything else at
    least ``3b + 3(2C/3)**alpha``.
    """
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if any(not s > 0 for s in sizes):
        raise ValueError("sizes must be positive")
    capacity = group_load(sizes) / 2
    if max(sizes) > capacity:
        raise ValueError("a size exceeds half the total; no split exists")
    b = capacity**alpha * (alpha - 1)
    return Instance(PowerParams(alpha, b), Resources(capacity, None), tuple(sizes))


THREE_PARTITION_VARIANTS = ("unbounded", "capacity", "machines")


def gen_three_partition_reduction(
    sizes: Sequence[int], bound: int, alpha: float, variant: str = "unbounded"
) -> Instance:
    """Instance with optimal load ``bound``; its optimum equals ``k * f(bound)`` iff
    ``sizes`` splits into ``k`` triples each summing to ``bound``.

    ``variant`` adds ``C = bound`` ("capacity") or ``m = k`` ("machines").
    """
    if variant not in THREE_PARTITION_VARIANTS:
        raise ValueError(f"variant must be one of {THREE_PARTITION_VARIANTS}")
    if not sizes or len(sizes) % 3:
        raise ValueError("number of sizes must be a positive multiple of 3")
    k = len(sizes) // 3
    if sum(sizes) != k * bound:
        raise ValueError(f"sizes sum to {sum(sizes)}, expected k*B = {k * bound}")
    outside = [s for s in sizes if not bound / 4 < s < bound / 2]
    if outside:
        warnings.warn(f"sizes {outside} fall outside (B/4, B/2)", stacklevel=2)
    b = bound**alpha * (alpha - 1)
    resources = Resources(
        float(bound) if variant == "capacity" else None,
        k if variant == "machines" else None,
    )
    return Instance(PowerParams(alpha, b), resources, tuple(float(s) for s in sizes))
