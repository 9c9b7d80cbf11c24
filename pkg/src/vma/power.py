"""Machine power model and the closed-form lower bounds built on it.

A machine carrying load ``x > 0`` draws ``mu * x**alpha + b``; an idle
machine draws nothing.  Everything here is a pure function of floats.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass


@dataclass(frozen=True)
class PowerParams:
    alpha: float
    b: float
    mu: float = 1.0

    def __post_init__(self) -> None:
        if not self.alpha > 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha!r}")
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b!r}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu!r}")

    @property
    def x_star(self) -> float:
        return optimal_load(self)

    @property
    def phi_star(self) -> float:
        return optimal_power_rate(self)


def machine_power(x: float, p: PowerParams) -> float:
    if x < 0:
        raise ValueError(f"load must be nonnegative, got {x!r}")
    if x == 0:
        return 0.0
    return p.mu * x**p.alpha + p.b


def group_load(loads: Iterable[float]) -> float:
    """Correctly rounded sum, so a group's load never depends on insertion order."""
    return math.fsum(loads)


def partition_power(groups: Iterable[Iterable[float]], p: PowerParams) -> float:
    """Total power of machines holding the given groups of loads.

    Empty groups are idle and cost nothing.
    """
    return math.fsum(machine_power(group_load(g), p) for g in groups)


def optimal_load(p: PowerParams) -> float:
    """Load at which power per unit of load is smallest."""
    return (p.b / (p.mu * (p.alpha - 1))) ** (1 / p.alpha)


def optimal_power_rate(p: PowerParams) -> float:
    x = optimal_load(p)
    return machine_power(x, p) / x


def merge_delta(a: float, b_load: float, p: PowerParams) -> float:
    """Power change from moving two loaded machines onto one.

    Negative whenever ``a + b_load <= optimal_load(p)``.
    """
    return machine_power(a + b_load, p) - (machine_power(a, p) + machine_power(b_load, p))


def balanced_lower_bound(k: int, total_load: float, p: PowerParams) -> float:
    """Power of spreading ``total_load`` perfectly evenly over ``k`` machines.

    Any partition using exactly ``k`` machines draws at least this much.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    return k * p.b + k * p.mu * (total_load / k) ** p.alpha


def min_balanced_lower_bound(total_load: float, p: PowerParams, max_k: int) -> float:
    """Smallest balanced bound over machine counts ``1..max_k``."""
    return min(balanced_lower_bound(k, total_load, p) for k in range(1, max_k + 1))


def rate_lower_bound(total_load: float, p: PowerParams) -> float:
    return optimal_power_rate(p) * total_load
