"""Exception types shared across the package.

The CLI maps these onto documented process exit codes, so keep the
hierarchy flat and the categories disjoint.
"""


class InvariantViolation(ValueError):
    """A value failed one of its construction-time invariants."""


class ImpossibleOutcomeError(RuntimeError):
    """A zero-probability outcome was requested, or post-selection cannot
    succeed in any branch (vanishing conditional denominator / no data)."""


class ToleranceError(RuntimeError):
    """An internal numerical identity broke beyond its tolerance.

    Signals a bug or ill-conditioned input, not ordinary round-off.
    """


class ScenarioError(ValueError):
    """A scenario file failed to parse or is missing required fields."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(message if field is None else f"{field}: {message}")


class TimeReversalConventionWarning(UserWarning):
    """Reversal with a nonvanishing Hamiltonian rests on a convention choice."""
