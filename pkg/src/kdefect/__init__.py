"""Defect of unitary matrices, exploiting Kronecker-product structure."""

from .bounds import (
    closed_form_lower_bound,
    compare_strategies,
    count_twos,
    expanded_lower_bound,
    subspace_dim_bound,
    supermultiplicative_floor,
)
from .engine import (
    DefectReport,
    FactorList,
    defect,
    dim_mspace,
    dim_mspace_direct,
    dim_mspace_kron,
    feasible_space_contains,
    feasible_space_dim,
    generalized_defect,
    phasing_basis,
    subproduct_dim,
    verify_direct_sum,
)
from .matrix import fourier, haar_unitary, is_unitary, kron, numerical_rank

__version__ = "0.1.0"
