"""Exact linear algebra and homological primitives over Q, F_p, and Z."""

from .rings import GF, QQ, Ring, ValidationError, ZZ, parse_rational, rational_str
from .matrix import (
    Matrix,
    abs_det,
    block_diag,
    elementary_divisors,
    inverse,
    is_injective,
    is_invertible,
    is_surjective,
    kernel_basis,
    rank,
    rref,
    smith_normal_form,
    solve,
)
from .modules import FgModule, ModuleHom, Submodule
from .complexes import (
    ChainComplex,
    ChainMap,
    CohomologyClassGroup,
    QuasiIsoResult,
    cohomology,
    cohomology_invariants,
    cohomology_rank,
    direct_sum,
    fiber,
    fiber_connecting,
    fiber_projection,
    induced_hom,
    induced_map_on_cohomology,
    is_quasi_iso,
    summand_projection,
)

__all__ = [
    "GF", "QQ", "Ring", "ValidationError", "ZZ", "parse_rational", "rational_str",
    "Matrix", "abs_det", "block_diag", "elementary_divisors", "inverse",
    "is_injective", "is_invertible", "is_surjective", "kernel_basis", "rank",
    "rref", "smith_normal_form", "solve",
    "FgModule", "ModuleHom", "Submodule",
    "ChainComplex", "ChainMap", "CohomologyClassGroup", "QuasiIsoResult",
    "cohomology", "cohomology_invariants", "cohomology_rank", "direct_sum",
    "fiber", "fiber_connecting", "fiber_projection", "induced_hom",
    "induced_map_on_cohomology", "is_quasi_iso", "summand_projection",
]
