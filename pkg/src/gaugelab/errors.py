"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: bad input -> 2,
hypothesis violation -> 3, numeric budget exceeded -> 4.
"""


class GaugeLabError(Exception):
    """Base class for all errors raised by this package."""


class BadInputError(GaugeLabError):
    """Malformed or out-of-contract input (bad file, bad parameter, wrong shape)."""


class HypothesisViolationError(GaugeLabError):
    """A mathematical hypothesis required by an operation does not hold.

    Examples: a cap with zero boundary mass, a measure supported off the
    boundary, an asymmetric measure fed to an operation that needs a real
    transform.
    """


class BudgetExceededError(GaugeLabError):
    """A numeric search or sampling budget ran out before the goal was met."""
