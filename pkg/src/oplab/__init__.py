"""Finite-dimensional laboratory for R-boundedness, C(K) representations,
H^infinity calculus of sectorial matrices and change of density on L^p."""
from .spaces import (
    DimensionError,
    NormEstimate,
    OperatorMatrix,
    RadSpace,
    SearchConfig,
    SpaceDescriptor,
    lp,
    op_norm,
    rad_space,
    weighted_atoms,
)
from .rademacher import AverageConfig, RadFamily, RBoundConfig, gauss_norm, r_bound, r_bound_of_map, rad_norm
from .representation import FiniteRepresentation, rep_norm, verify_extension

__version__ = "0.1.0"
