"""Exterior-calculus engine for Poisson-Nijenhuis and Poisson quasi-Nijenhuis structures."""

__version__ = "0.1.0"

from .scalar import (
    Chart,
    Point,
    ScalarField,
    ZeroTestConfig,
    ZeroVerdict,
    evaluate,
    exp,
    is_zero,
    parse_prefix,
    partial,
)
from .exterior import (
    Bivector,
    Form,
    Tensor11,
    VectorField,
    interior,
    lie_bracket,
    lie_derivative,
    omega_flat,
    pi_sharp,
    tensor_interior,
    wedge,
)
from .calculus import (
    Torsion12,
    cartan_d,
    deformed_lie_bracket,
    differential,
    koszul_bracket,
    nijenhuis_d,
    nijenhuis_torsion,
    poisson_bracket,
)
from .structures import (
    CheckReport,
    DeformResult,
    GeometricStructure,
    InvolutivityMatrix,
    check_compatibility,
    check_pn,
    check_poisson,
    check_pqn,
    deform,
    deform_to_pn,
    involutivity_matrix,
    recursion_check,
    trace_invariants,
)
from .models import (
    ExpectedOutcome,
    ModelBundle,
    calogero,
    canonical_pn,
    closed_toda,
    open_toda,
    pair_potential_model,
    two_particle_fixture,
    two_particle_model,
)

__all__ = [
    "__version__",
    "Chart",
    "Point",
    "ScalarField",
    "ZeroTestConfig",
    "ZeroVerdict",
    "evaluate",
    "exp",
    "is_zero",
    "parse_prefix",
    "partial",
    "Bivector",
    "Form",
    "Tensor11",
    "VectorField",
    "interior",
    "lie_bracket",
    "lie_derivative",
    "omega_flat",
    "pi_sharp",
    "tensor_interior",
    "wedge",
    "Torsion12",
    "cartan_d",
    "deformed_lie_bracket",
    "differential",
    "koszul_bracket",
    "nijenhuis_d",
    "nijenhuis_torsion",
    "poisson_bracket",
    "CheckReport",
    "DeformResult",
    "GeometricStructure",
    "InvolutivityMatrix",
    "check_compatibility",
    "check_pn",
    "check_poisson",
    "check_pqn",
    "deform",
    "deform_to_pn",
    "involutivity_matrix",
    "recursion_check",
    "trace_invariants",
    "ExpectedOutcome",
    "ModelBundle",
    "calogero",
    "canonical_pn",
    "closed_toda",
    "open_toda",
    "pair_potential_model",
    "two_particle_fixture",
    "two_particle_model",
]
