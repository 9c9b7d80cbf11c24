import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vma.errors import InfeasibleError, MachinesExceededError, OversizedItemError
from vma.exact import min_bins, optimal_partition
from vma.instances import Instance, Partition, Resources, power_of, validate
from vma.offline import balanced_k, ffd_pack, local_improve, solve_capacity, solve_optimal_load
from vma.power import PowerParams

P32 = PowerParams(3, 2)


def make(loads, capacity=None, machines=None, p=P32):
    return Instance(p, Resources(capacity, machines), loads)


instances = st.builds(
    make,
    st.lists(st.floats(0.05, 1.0), min_size=1, max_size=7),
    st.sampled_from([None, 1.0, 1.5, 3.0]),
    st.sampled_from([None, 3, 7]),
    st.builds(PowerParams, st.sampled_from([1.5, 2.0, 3.0]), st.sampled_from([0.5, 1.0, 2.0])),
)


def test_ffd_example():
    part = ffd_pack([0.6, 0.5, 0.4, 0.3, 0.2], 1)
    assert part.groups == ((0, 2), (1, 3, 4))


def test_ffd_singletons_and_single_bin():
    assert ffd_pack([0.6, 0.6, 0.6], 1).groups == ((0,), (1,), (2,))
    assert ffd_pack([1.0], 1).groups == ((0,),)


def test_ffd_breaks_ties_by_index():
    assert ffd_pack([0.5, 0.7, 0.5], 1).groups == ((1,), (0, 2))


def test_ffd_rejects_oversized():
    with pytest.raises(OversizedItemError):
        ffd_pack([0.5, 1.5], 1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=10))
def test_ffd_within_classical_guarantee(items):
    part = ffd_pack(items, 1.0)
    assert 9 * len(part) <= 11 * min_bins(items, 1.0) + 9
    assert validate(make(items, capacity=1.0), part) == []


def test_solve_capacity_examples():
    assert solve_capacity(make([0.5, 0.4], capacity=1)).groups == ((0, 1),)
    assert solve_capacity(make([0.6, 0.6], capacity=1)).groups == ((0,), (1,))
    part = solve_capacity(make([0.6, 0.6], capacity=1))
    assert power_of(make([0.6, 0.6], capacity=1), part) == pytest.approx(2 * (0.216 + 2), rel=1e-15)


def test_solve_capacity_needs_capacity():
    with pytest.raises(ValueError):
        solve_capacity(make([0.5]))


def test_solve_capacity_respects_machine_limit():
    with pytest.raises(MachinesExceededError):
        solve_capacity(make([0.6, 0.6, 0.6], capacity=1, machines=2))


def test_solve_optimal_load_examples():
    assert solve_optimal_load(make([0.5, 0.4], capacity=2)).groups == ((0, 1),)
    assert len(solve_optimal_load(make([0.6, 0.6, 0.6], capacity=2))) == 3
    inst = make([1.5, 0.3], capacity=2)
    part = solve_optimal_load(inst)
    assert part.groups == ((0,), (1,))
    _, opt = optimal_partition(inst)
    assert power_of(inst, part) == pytest.approx(opt, rel=1e-12)
    assert opt == pytest.approx(5.375 + 2.027, rel=1e-12)


def test_solve_optimal_load_refuses_small_capacity():
    with pytest.raises(ValueError, match="use solve_capacity"):
        solve_optimal_load(make([0.5], capacity=1))


@settings(max_examples=100, deadline=None)
@given(instances)
def test_packers_are_feasible(inst):
    large = inst.capacity is None or inst.params.x_star < inst.capacity
    try:
        part = solve_optimal_load(inst) if large else solve_capacity(inst)
    except MachinesExceededError:
        return
    assert validate(inst, part) == []


def test_balanced_k_examples():
    assert power_of(make([0.5, 0.5]), balanced_k(make([0.5, 0.5]))) == 3
    inst = make([6, 6, 12], machines=2)
    part = balanced_k(inst)
    assert part.normalized().groups == ((0, 1), (2,))
    assert power_of(inst, part) == 3460
    assert power_of(make([1, 1]), balanced_k(make([1, 1]))) == 6


def test_balanced_k_infeasible():
    with pytest.raises(InfeasibleError):
        balanced_k(make([1, 1, 1], capacity=1, machines=2))


def test_balanced_k_skips_groups_that_would_overflow():
    # k=2 LPT: 0.6 | 0.5, then 0.4 onto the lighter 0.5 group (0.9 fits)
    part = balanced_k(make([0.6, 0.5, 0.4], capacity=1.0, machines=2))
    assert validate(make([0.6, 0.5, 0.4], capacity=1.0, machines=2), part) == []


def test_local_improve_merges_small_groups():
    inst = make([0.3, 0.3])
    assert local_improve(Partition([(0,), (1,)]), inst).groups == ((0, 1),)


def test_local_improve_rebalances():
    # {1.0, 0.9} | {0.1}: power 1.9**3 + 2 + 0.1**3 + 2 = 10.86, one move reaches the optimum 6
    inst = make([1.0, 0.9, 0.1])
    start = Partition([(0, 1), (2,)])
    assert power_of(inst, start) == pytest.approx(10.86, rel=1e-12)
    out = local_improve(start, inst)
    assert out.normalized().groups == ((0,), (1, 2))
    assert power_of(inst, out) == pytest.approx(6.0, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(instances, st.data())
def test_local_improve_contract(inst, data):
    try:
        start = balanced_k(inst)
    except InfeasibleError:
        return
    if data.draw(st.booleans()):
        start = Partition([(i,) for i in range(inst.n)]) if inst.machines is None else start
    out = local_improve(start, inst)
    assert validate(inst, out) == []
    assert power_of(inst, out) <= power_of(inst, start)
    assert local_improve(out, inst) == out
