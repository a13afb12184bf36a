"""Semantic exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 2, PreconditionError -> 3,
BudgetError -> 4.
"""


class FncompError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FncompError, ValueError):
    """Malformed problem data: bad tensor lengths, alphabet mismatches, ..."""


class PreconditionError(FncompError, ValueError):
    """An operation's structural precondition does not hold for the input
    (Markov structure, decodability, product distribution)."""


class BudgetError(FncompError, RuntimeError):
    """An exact enumeration would exceed the configured step budget."""

    def __init__(self, required: int, budget: int, what: str = "enumeration"):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(
            f"{what} needs ~{self.required} elementary steps but the budget "
            f"is {self.budget}; raise it via FNCOMP_BUDGET or the config's "
            f"sim.budget field"
        )
