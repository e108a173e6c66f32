"""Exception types shared across the package."""


class InstanceError(ValueError):
    """Invalid instance data: bad shapes, probabilities, or budgets."""


class SolverError(RuntimeError):
    """LP solve failed after anticycling retries."""


class SizeCapError(ValueError):
    """A brute-force oracle was called beyond its enforced size cap."""
