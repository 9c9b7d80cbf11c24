"""Exception types shared across the package."""


class VMAError(Exception):
    code = "ERROR"


class InstanceError(VMAError, ValueError):
    """Malformed or invalid instance data."""

    code = "INVALID_INSTANCE"


class InfeasibleError(VMAError):
    code = "INFEASIBLE"


class BudgetExceededError(VMAError):
    code = "BUDGET_EXCEEDED"


class OversizedItemError(VMAError, ValueError):
    code = "OVERSIZED_ITEM"


class MachinesExceededError(VMAError):
    code = "MACHINES_EXCEEDED"


class IllegalDecisionError(VMAError):
    """An online algorithm asked for a move the engine cannot honour."""

    code = "ILLEGAL_DECISION"


class OracleViolationError(VMAError):
    """A heuristic beat the exact optimum, which means the oracle is wrong."""

    code = "ORACLE_VIOLATION"
