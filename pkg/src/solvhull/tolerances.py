"""Numeric tolerance bundle threaded through the pipeline."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Named tolerances used across validation and verification.

    alg controls algebraic identities on input data (Jacobi, brackets),
    num controls derived numerical checks (representations, transports),
    exact controls identities that hold to rounding error by construction,
    integer controls lattice membership rounding for characters,
    cluster_scale sets the relative eigenvalue clustering width.
    """

    alg: float = 1e-9
    num: float = 1e-8
    exact: float = 1e-10
    integer: float = 1e-6
    cluster_scale: float = 1e-7


DEFAULT = Tolerances()
