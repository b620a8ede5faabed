from enum import Enum


class Status(str, Enum):
    """Outcome of an iteration run."""

    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    MAX_ITERATIONS = "MaxIterations"

    def __str__(self):
        return self.value
