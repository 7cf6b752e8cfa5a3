"""Exact-arithmetic engine for group-equivariant Lie bialgebras.

Everything is computed over the rationals with hard truncation degrees, so
every identity in the pipeline is checked as residual == 0, never "small".
"""

from gammastack.tensors import Monomial, SparseTensor, TensorSeries, unit_monomial
from gammastack.linalg import LinearSystem, LinearSolveResult, solve_linear
from gammastack.liealg import (
    FiniteGroup,
    GammaLieBialgebra,
    LieBialgebra,
    QuasitriangularData,
    QuasitriangularError,
    ValidationIssue,
    copoisson_envelope,
    from_quasitriangular,
    validate_gamma_lba,
)
from gammastack.formal import PairingContext, build_delta_gamma
from gammastack.cohomology import (
    CochainSpace,
    CoboundaryObstruction,
    alt,
    cohochschild_d,
    cohomology_rank,
    solve_coboundary,
)
from gammastack.stack import (
    AlgebraMap,
    PoissonIso,
    StackBuildError,
    StackCertificate,
    TwistLift,
    build_iso,
    build_u,
    gauge_act,
    lift_twist,
    solve_gauge,
    verify_stack,
    verify_twist_equation,
)
from gammastack.quantum import (
    GammaQUEData,
    HElement,
    QuantumError,
    QuantumStackCertificate,
    QueContext,
    SemidirectBialgebra,
    admissibilize,
    build_semidirect,
    check_v_admissible,
    classical_limit_residuals,
    drinfeld_prime_membership,
    drinfeld_prime_membership_general,
    gauge_transform,
    is_admissible,
    pbw_multiply,
    quantize_stack,
    validate_que_data,
)
from gammastack.problemfile import (
    Problem,
    ProblemParseError,
    build_que_data,
    parse_problem,
    serialize_problem,
)

__all__ = [
    "Monomial",
    "SparseTensor",
    "TensorSeries",
    "unit_monomial",
    "LinearSystem",
    "LinearSolveResult",
    "solve_linear",
    "LieBialgebra",
    "FiniteGroup",
    "GammaLieBialgebra",
    "QuasitriangularData",
    "QuasitriangularError",
    "ValidationIssue",
    "validate_gamma_lba",
    "from_quasitriangular",
    "copoisson_envelope",
    "PairingContext",
    "build_delta_gamma",
    "CochainSpace",
    "CoboundaryObstruction",
    "alt",
    "cohochschild_d",
    "cohomology_rank",
    "solve_coboundary",
    "AlgebraMap",
    "PoissonIso",
    "StackBuildError",
    "StackCertificate",
    "TwistLift",
    "build_iso",
    "build_u",
    "gauge_act",
    "lift_twist",
    "solve_gauge",
    "verify_stack",
    "verify_twist_equation",
    "GammaQUEData",
    "HElement",
    "QuantumError",
    "QuantumStackCertificate",
    "QueContext",
    "SemidirectBialgebra",
    "admissibilize",
    "build_semidirect",
    "check_v_admissible",
    "classical_limit_residuals",
    "drinfeld_prime_membership",
    "drinfeld_prime_membership_general",
    "gauge_transform",
    "is_admissible",
    "pbw_multiply",
    "quantize_stack",
    "validate_que_data",
    "Problem",
    "ProblemParseError",
    "build_que_data",
    "parse_problem",
    "serialize_problem",
]
