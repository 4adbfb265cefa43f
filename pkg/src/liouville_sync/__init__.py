"""Spectral analysis of Lindblad generators and quantum synchronization."""

__version__ = "0.1.0"

from .operators import (
    HilbertSpace,
    Operator,
    DensityMatrix,
    SitePermutation,
    embed_site_operator,
    partial_trace,
    hs_inner,
    bloch_vector,
    spin_matrices,
    fermion_operators,
    permutation_operator,
)
from .liouvillian import (
    LindbladModel,
    Superoperator,
    EigenSystem,
    assemble,
    adjoint,
    eigensystem,
    is_unital,
    model_scale,
)

__all__ = [
    "HilbertSpace", "Operator", "DensityMatrix", "SitePermutation",
    "embed_site_operator", "partial_trace", "hs_inner", "bloch_vector",
    "spin_matrices", "fermion_operators", "permutation_operator",
    "LindbladModel", "Superoperator", "EigenSystem",
    "assemble", "adjoint", "eigensystem", "is_unital", "model_scale",
]
