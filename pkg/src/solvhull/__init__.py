"""Triangular hull representations for solvable Lie groups.

Build pipeline: validate structure constants, extract the nilradical,
split every adjoint operator into commuting semisimple and nilpotent
parts, assemble the semisimple splitting (a torus acting on a nilpotent
shadow algebra), truncate the shadow's enveloping algebra to a strictly
triangular module, and read off the flat connection form whose diagonal
is integral in a small character lattice.  On top of that sit Chen
iterated integrals, exponential iterated integrals, and lattice
monodromy with closedness cross checks.
"""

from .algebra import (
    LieAlgebra,
    NilradicalResult,
    SemisimpleAdjoint,
    derived_series,
    lower_central_series,
    nilpotency_class,
    nilradical,
    restricted_structure,
    semisimple_adjoint,
    validate_algebra,
)
from .builtin_models import BUILTINS, builtin_problem, sect4_spec, sol_spec
from .connection import ConnectionForm, build_connection_form, integer_lattice_basis
from .envelope import EnvelopingTruncation, build_enveloping_rep
from .errors import (
    AntisymmetryViolation,
    EigenClusterAmbiguity,
    EndpointMismatch,
    JacobiViolation,
    NotInLattice,
    NotNilpotent,
    NotSolvable,
    SolvHullError,
    SpecFileError,
    TruncationOverflow,
    ValidationError,
)
from .groups import GroupElement, Lattice, SemidirectModel, parse_word
from .integrals import (
    IntegralWord,
    SeriesResult,
    exp_iterated_integral,
    exp_iterated_integral_series,
    iterated_integral,
    iterated_integral_quadrature,
    shuffle_identity_residual,
    shuffle_words,
    transport,
    transport_series,
)
from .linalg import JordanDecomposition, jordan_decompose, triangularize_family
from .monodromy import (
    MonodromyRep,
    build_monodromy_rep,
    closedness_residual,
    entry_chain_value,
    entry_chains,
    monodromy,
    path_independence_residual,
    path_variants,
    separation_demo,
    word_monodromy,
)
from .paths import PathWord, Segment, path_from_pairs
from .report import canonical_json, digest
from .specfile import Problem, parse_problem, serialize_problem
from .splitting import SplitAlgebra, build_splitting
from .tolerances import DEFAULT, Tolerances
from .verify import build_stages, run_verification

__version__ = "0.1.0"

__all__ = [
    "AntisymmetryViolation",
    "BUILTINS",
    "ConnectionForm",
    "DEFAULT",
    "EigenClusterAmbiguity",
    "EndpointMismatch",
    "EnvelopingTruncation",
    "GroupElement",
    "IntegralWord",
    "JacobiViolation",
    "JordanDecomposition",
    "Lattice",
    "LieAlgebra",
    "MonodromyRep",
    "NilradicalResult",
    "NotInLattice",
    "NotNilpotent",
    "NotSolvable",
    "PathWord",
    "Problem",
    "Segment",
    "SemidirectModel",
    "SemisimpleAdjoint",
    "SeriesResult",
    "SolvHullError",
    "SpecFileError",
    "SplitAlgebra",
    "Tolerances",
    "TruncationOverflow",
    "ValidationError",
    "build_connection_form",
    "build_enveloping_rep",
    "build_monodromy_rep",
    "build_splitting",
    "build_stages",
    "builtin_problem",
    "canonical_json",
    "closedness_residual",
    "derived_series",
    "digest",
    "entry_chain_value",
    "entry_chains",
    "exp_iterated_integral",
    "exp_iterated_integral_series",
    "integer_lattice_basis",
    "iterated_integral",
    "iterated_integral_quadrature",
    "jordan_decompose",
    "lower_central_series",
    "monodromy",
    "nilpotency_class",
    "nilradical",
    "parse_problem",
    "parse_word",
    "path_from_pairs",
    "path_independence_residual",
    "path_variants",
    "restricted_structure",
    "run_verification",
    "sect4_spec",
    "semisimple_adjoint",
    "separation_demo",
    "serialize_problem",
    "shuffle_identity_residual",
    "shuffle_words",
    "sol_spec",
    "transport",
    "transport_series",
    "triangularize_family",
    "validate_algebra",
    "word_monodromy",
]
