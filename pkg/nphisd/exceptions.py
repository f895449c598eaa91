# nphisd/exceptions.py
"""
Error hierarchy for the saddle-search library.

Non-convergence is never raised: search results carry a `converged` flag.
Precondition violations (bad shapes, empty vectors, index mismatches) are
plain ValueError.
"""


class NPHiSDError(RuntimeError):
    """Root of every library error."""


class NonFiniteValueError(NPHiSDError):
    pass


class FrameCollapseError(NPHiSDError):
    """Gram-Schmidt met a (numerically) dependent vector."""

    def __init__(self, position: int, norm: float) -> None:
        self.position = position
        self.norm = norm
        super().__init__(f"rank deficiency at vector {position} (norm {norm:.3e})")


class ProbeWindowError(NPHiSDError):
    pass


class EigensolverError(NPHiSDError):
    pass


class SplitUnavailableError(NPHiSDError):
    pass


class LinearSolveError(NPHiSDError):
    pass


class SingularConfigurationError(NPHiSDError):
    pass


class ConfigError(NPHiSDError):
    pass


class VerificationError(NPHiSDError):
    """Post-hoc classification disagrees with what a search reported."""


class InvariantViolationError(NPHiSDError):
    """A frame invariant exceeded its tolerance while invariant checking was on."""
