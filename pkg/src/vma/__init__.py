"""Power-minimizing virtual machine assignment.

Exact search, offline packing heuristics, online algorithms with adaptive
adversaries, and closed-form ratio bounds for the cost model
``mu * load**alpha + b`` per active machine.
"""

from .errors import (
    BudgetExceededError,
    IllegalDecisionError,
    InfeasibleError,
    InstanceError,
    MachinesExceededError,
    OracleViolationError,
    OversizedItemError,
    VMAError,
)
from .exact import feasible, min_bins, optimal_partition
from .instances import (
    UNBOUNDED,
    Instance,
    Partition,
    Resources,
    gen_partition_reduction,
    gen_three_partition_reduction,
    gen_uniform,
    parse,
    power_of,
    serialize,
    validate,
)
from .offline import balanced_k, ffd_pack, local_improve, solve_capacity, solve_optimal_load
from .online import (
    ALGORITHMS,
    NEW_MACHINE,
    AdversaryReport,
    OnlineAlgorithm,
    OnlineState,
    adversary_m,
    adversary_threshold,
    adversary_two,
    alg1_step,
    alg2_step,
    greedy_step,
    run_stream,
    verify_two_machine_gap,
)
from .power import (
    PowerParams,
    balanced_lower_bound,
    machine_power,
    merge_delta,
    min_balanced_lower_bound,
    optimal_load,
    optimal_power_rate,
    partition_power,
    rate_lower_bound,
)
from .ratio_lab import Bound, ExperimentConfig, bounds_table, empirical_ratio, experiment

__version__ = "0.1.0"
