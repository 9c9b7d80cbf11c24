import itertools
import random
import time
from dataclasses import dataclass

import pytest

from vma import (
    Instance,
    PowerParams,
    Resources,
    balanced_k,
    gen_uniform,
    local_improve,
    min_balanced_lower_bound,
    optimal_load,
    optimal_partition,
    power_of,
    run_stream,
    solve_capacity,
    solve_optimal_load,
)
from vma.online import ALG1, ALG2

GRID_SIZE = 500
GRID_SEED = 2024
GRID_ALPHAS = (1.5, 2.0, 3.0)
GRID_BS = (1.0, 2.0)
GRID_CAPACITIES = (1.0, 2.0, None)

# criterion number -> (passed, detail)
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@dataclass
class GridCase:
    instance: Instance
    opt_power: float
    lower_bound: float
    heuristics: dict
    alg1_power: float
    two_machine: Instance
    alg2_power: float
    alg2_opt: float
    alg2_trace: list


@dataclass
class Grid:
    cases: list
    seconds: float


def _grid_case(instance: Instance) -> GridCase:
    p, loads = instance.params, instance.loads
    _, opt = optimal_partition(instance)
    large = instance.capacity is None or optimal_load(p) < instance.capacity
    packed = solve_optimal_load(instance) if large else solve_capacity(instance)
    balanced = balanced_k(instance)
    alg1, _ = run_stream(loads, ALG1, p, instance.resources)
    heuristics = {
        "optload" if large else "capacity": power_of(instance, packed),
        "balanced": power_of(instance, balanced),
        "local": power_of(instance, local_improve(balanced, instance)),
        "alg1": power_of(instance, alg1),
    }
    # alg2 needs two machines of unbounded capacity; same loads, own optimum
    two = Instance(p, Resources(None, 2), loads)
    _, two_opt = optimal_partition(two)
    alg2, trace = run_stream(loads, ALG2, p, two.resources)
    return GridCase(
        instance=instance,
        opt_power=opt,
        lower_bound=min_balanced_lower_bound(instance.total_load, p, instance.n),
        heuristics=heuristics,
        alg1_power=heuristics["alg1"],
        two_machine=two,
        alg2_power=power_of(two, alg2),
        alg2_opt=two_opt,
        alg2_trace=trace,
    )


def grid_instances() -> list[Instance]:
    """500 seeded uniform instances cycling through every parameter combination."""
    rng = random.Random(GRID_SEED)
    combos = list(itertools.product(GRID_ALPHAS, GRID_BS, GRID_CAPACITIES))
    out = []
    for i in range(GRID_SIZE):
        alpha, b, capacity = combos[i % len(combos)]
        n = rng.randint(1, 8)
        hi = capacity if capacity is not None else 2.0
        out.append(gen_uniform(n, 0.05, hi, rng.getrandbits(32), PowerParams(alpha, b), Resources(capacity, None)))
    return out


@pytest.fixture(scope="session")
def grid() -> Grid:
    start = time.perf_counter()
    cases = [_grid_case(inst) for inst in grid_instances()]
    return Grid(cases, time.perf_counter() - start)


@pytest.fixture
def acceptance():
    def record(criterion: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[criterion] = (passed, detail)
        print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[criterion]
        terminalreporter.write_line(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")
