"""Exact integer lower bounds on the generalized defect of Kronecker products.

Nothing here touches floating point: the bounds are combinatorial
functions of the factor sizes only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Sequence

from .indexing import check_sizes

__all__ = [
    "BoundBreakdown",
    "StrategyComparison",
    "MAX_TOTAL_SIZE",
    "count_twos",
    "subspace_dim_bound",
    "proper_subsets",
    "expanded_lower_bound",
    "closed_form_lower_bound",
    "naive_product",
    "supermultiplicative_floor",
    "compare_strategies",
]

MAX_TOTAL_SIZE = 2**31


def _guard(sizes: tuple[int, ...]) -> None:
    if prod(sizes) > MAX_TOTAL_SIZE:
        raise OverflowError(f"product of sizes {sizes} exceeds {MAX_TOTAL_SIZE}")


def count_twos(sizes: Sequence[int]) -> int:
    """Number of 2's in ``sizes``, or 1 when there are none."""
    if len(sizes) == 0:
        raise ValueError("count_twos needs a non-empty sequence")
    return sum(1 for n in sizes if n == 2) or 1


def subspace_dim_bound(sizes: Sequence[int]) -> int:
    """Upper bound on the dimension of the all-positions-differ subspace.

    ``(N - 2**(t-1)) * prod(n_k - 1)`` with ``t = count_twos(sizes)``; this
    covers both the no-2 case (``t = 1`` gives ``N - 1``) and the case with
    2's. Any size equal to 1 gives 0.
    """
    sizes = check_sizes(sizes)
    if any(n == 1 for n in sizes):
        return 0
    return (prod(sizes) - 2 ** (count_twos(sizes) - 1)) * prod(n - 1 for n in sizes)


def proper_subsets(r: int):
    """All subsets of positions ``1..r`` except the full set, by size."""
    positions = range(1, r + 1)
    for p in range(r):
        yield from (frozenset(c) for c in itertools.combinations(positions, p))


@dataclass(frozen=True)
class BoundBreakdown:
    sizes: tuple[int, ...]
    per_subset_bounds: dict[frozenset, int]
    expanded_total: int
    closed_form_total: int
    naive_product: int
    twos_count: int


def naive_product(sizes: Sequence[int]) -> int:
    return prod(2 * n - 1 for n in sizes)


def expanded_lower_bound(sizes: Sequence[int]) -> BoundBreakdown:
    """Lower bound ``N**2 - sum_S (prod_{k in S} n_k) * bound(retained)``.

    The sum runs over every proper subset ``S`` of removed positions, by
    explicit enumeration. ``per_subset_bounds[S]`` stores the multiplied
    term for that subset.
    """
    sizes = check_sizes(sizes)
    _guard(sizes)
    terms = {}
    for removed in proper_subsets(len(sizes)):
        retained = [n for k, n in enumerate(sizes, start=1) if k not in removed]
        mult = prod(sizes[k - 1] for k in removed)
        terms[removed] = mult * subspace_dim_bound(retained)
    total = prod(sizes) ** 2 - sum(terms.values())
    return BoundBreakdown(
        sizes=sizes,
        per_subset_bounds=terms,
        expanded_total=total,
        closed_form_total=closed_form_lower_bound(sizes),
        naive_product=naive_product(sizes),
        twos_count=sum(1 for n in sizes if n == 2),
    )


def closed_form_lower_bound(sizes: Sequence[int]) -> int:
    """Product formula for the generalized-defect lower bound.

    With ``x`` the number of 2's: ``prod(2n - 1)`` when ``x <= 1``, else
    ``prod_{n > 2}(2n - 1) * 2**(x-1) * (2**x + 1)``. Sizes equal to 1
    contribute a factor 1.
    """
    sizes = check_sizes(sizes)
    _guard(sizes)
    x = sum(1 for n in sizes if n == 2)
    if x <= 1:
        return naive_product(sizes)
    rest = prod(2 * n - 1 for n in sizes if n > 2)
    return rest * 2 ** (x - 1) * (2**x + 1)


def supermultiplicative_floor(gendefects: Sequence[int]) -> int:
    """Product of factor generalized defects; a floor for the product's."""
    if len(gendefects) == 0:
        raise ValueError("need at least one generalized defect")
    return prod(int(g) for g in gendefects)


@dataclass(frozen=True)
class StrategyComparison:
    closed_form: int
    naive_product: int
    delta: int


def compare_strategies(sizes: Sequence[int]) -> StrategyComparison:
    """Closed-form bound against the plain product of ``2n - 1`` factors."""
    closed = closed_form_lower_bound(sizes)
    naive = naive_product(check_sizes(sizes))
    return StrategyComparison(closed, naive, closed - naive)
