"""Numerical checks of the structural identities behind the decomposition.

Each function returns a residual (max-norm) or an integer pair so callers
decide the tolerance; :func:`run_suite` bundles them for the CLI.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import bounds
from .engine import (
    FactorList,
    dim_mspace_direct,
    dim_mspace_kron,
    feasible_space_dim,
    generalized_defect,
    phasing_basis,
    verify_direct_sum,
)
from .indexing import reduce_index, subrow, vector_digits, vector_to_ordinary
from .matrix import numerical_rank
from .mset import m_matrix, spanning_set

__all__ = [
    "column_sum_residual",
    "subrow_zero_sum_residual",
    "subrow_reduction_residual",
    "phasing_rank",
    "run_suite",
]


def column_sum_residual(u) -> float:
    """Largest absolute column sum over all generators of ``u``."""
    gens = spanning_set(u)
    if len(gens) == 0:
        return 0.0
    return float(np.abs(gens.matrices().sum(axis=1)).max())


def subrow_zero_sum_residual(factors) -> float:
    """Subrows of rows of ``M^{ij}`` summed over position ``k`` with ``i_k != j_k``.

    The sum must vanish; covers A and S at once through the complex matrix.
    """
    factors = factors if isinstance(factors, FactorList) else FactorList(factors)
    sizes = factors.sizes
    u = factors.product()
    digits = vector_digits(sizes)
    worst = 0.0
    for i, j in itertools.combinations(range(1, u.shape[0] + 1), 2):
        m = m_matrix(u, i, j)
        for k in range(1, len(sizes) + 1):
            if digits[i - 1, k - 1] == digits[j - 1, k - 1]:
                continue
            for row in (i, j):
                total = sum(subrow(m[row - 1], sizes, k, y) for y in range(1, sizes[k - 1] + 1))
                worst = max(worst, float(np.abs(total).max()))
    return worst


def subrow_reduction_residual(factors) -> float:
    """Subrow sums at a shared position ``k`` against the reduced product.

    For ``i_k == j_k`` the subrows of row ``i`` (and ``j``) of ``M^{ij}``
    summed over the k-th subindex equal the matching row of ``M^{i'j'}``
    built for the product without factor ``k``.
    """
    factors = factors if isinstance(factors, FactorList) else FactorList(factors)
    sizes = factors.sizes
    r = len(sizes)
    if r < 2:
        return 0.0
    u = factors.product()
    digits = vector_digits(sizes) + 1
    worst = 0.0
    for k in range(1, r + 1):
        reduced_sizes = tuple(n for q, n in enumerate(sizes, 1) if q != k)
        u_red = factors.retained({k}).product()
        for i, j in itertools.combinations(range(1, u.shape[0] + 1), 2):
            if digits[i - 1, k - 1] != digits[j - 1, k - 1]:
                continue
            m = m_matrix(u, i, j)
            ir = vector_to_ordinary(reduce_index(digits[i - 1], {k}), reduced_sizes)
            jr = vector_to_ordinary(reduce_index(digits[j - 1], {k}), reduced_sizes)
            m_red = m_matrix(u_red, ir, jr)
            for row, row_red in ((i, ir), (j, jr)):
                total = sum(subrow(m[row - 1], sizes, k, y) for y in range(1, sizes[k - 1] + 1))
                worst = max(worst, float(np.abs(total - m_red[row_red - 1]).max()))
    return worst


def phasing_rank(n: int) -> int:
    return numerical_rank(np.array([m.ravel() for m in phasing_basis(n)])).rank


def run_suite(factors, tol: float | None = None) -> dict:
    """Run every check on one factor list; returns ``{name: {...,"ok": bool}}``."""
    factors = factors if isinstance(factors, FactorList) else FactorList(factors)
    u = factors.product()
    n = u.shape[0]
    out = {}

    ds = verify_direct_sum(factors, tol)
    out["direct_sum"] = {"ok": ds.ok, "total_rank": ds.total_rank, "sum_of_ranks": ds.sum_of_ranks}

    dec = dim_mspace_kron(factors, tol)
    direct = dim_mspace_direct(factors, tol)
    out["decomposition"] = {
        "ok": dec.dim_mspace == direct.dim_mspace,
        "decomposed": dec.dim_mspace,
        "direct": direct.dim_mspace,
    }
    out["lower_bound"] = {
        "ok": direct.generalized_defect >= dec.lower_bound,
        "generalized_defect": direct.generalized_defect,
        "bound": dec.lower_bound,
    }

    res = column_sum_residual(u)
    out["column_sums"] = {"ok": res <= 1e-12, "residual": res}
    res = subrow_zero_sum_residual(factors)
    out["subrow_zero_sum"] = {"ok": res <= 1e-12, "residual": res}
    res = subrow_reduction_residual(factors)
    out["subrow_reduction"] = {"ok": res <= 1e-12, "residual": res}

    g_fact = [generalized_defect(f, tol) for f in factors.factors]
    floor = bounds.supermultiplicative_floor(g_fact)
    out["supermultiplicative"] = {
        "ok": direct.generalized_defect >= floor,
        "generalized_defect": direct.generalized_defect,
        "floor": floor,
    }

    fdim = feasible_space_dim(u, tol)
    out["feasible_dim"] = {
        "ok": fdim == direct.generalized_defect,
        "feasible_dim": fdim,
        "generalized_defect": direct.generalized_defect,
    }
    pr = phasing_rank(n)
    out["phasing_rank"] = {"ok": pr == 2 * n - 1, "rank": pr, "expected": 2 * n - 1}
    return out
