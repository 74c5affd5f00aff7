"""Exception types raised by the library.

Every failure that a caller can meaningfully react to gets its own class;
the CLI maps these onto process exit codes.
"""


class SolvHullError(Exception):
    """Base class for all library errors."""


class ValidationError(SolvHullError):
    """Input data failed structural validation."""


class AntisymmetryViolation(ValidationError):
    """Structure constants are not antisymmetric in the first two slots."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"antisymmetry violated at entry {index}")


class JacobiViolation(ValidationError):
    """The Jacobi identity fails for some basis triple."""

    def __init__(self, triple, residual, residual_vector=None):
        self.triple = triple
        self.residual = residual
        self.residual_vector = residual_vector
        super().__init__(
            f"Jacobi identity fails on basis triple {triple}: residual {residual:.3e}"
        )


class NotSolvable(ValidationError):
    """The derived series does not terminate at zero."""


class NotNilpotent(SolvHullError):
    """The lower central series does not terminate at zero."""


class EigenClusterAmbiguity(SolvHullError):
    """Two eigenvalue clusters are too close to separate reliably.

    Raised instead of silently merging or splitting; the caller should
    adjust the clustering tolerance or rescale the input.
    """

    def __init__(self, gap, tolerance):
        self.gap = gap
        self.tolerance = tolerance
        super().__init__(
            f"eigenvalue clusters separated by {gap:.3e} with tolerance {tolerance:.3e}"
        )


class TruncationOverflow(SolvHullError):
    """The truncated enveloping module exceeds the configured size cap."""

    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"truncated module dimension {size} exceeds cap {cap}")


class NotInLattice(SolvHullError):
    """A diagonal character is not an integer combination of the basis."""

    def __init__(self, residual, tolerance):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"character rounding residual {residual:.3e} exceeds {tolerance:.3e}"
        )


class EndpointMismatch(SolvHullError):
    """A constructed loop word does not reach the requested group element."""

    def __init__(self, deviation, tolerance):
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(
            f"loop endpoint deviates by {deviation:.3e} (tolerance {tolerance:.3e})"
        )


class SpecFileError(ValidationError):
    """A problem spec file is malformed."""
