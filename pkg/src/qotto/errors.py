"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class ConvergenceError(RuntimeError):
    """A numerical procedure did not reach its tolerance."""


class UnattainableEntropyError(ValidationError):
    """No Gibbs state of the given Hamiltonian has the requested entropy."""
