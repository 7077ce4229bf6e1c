"""Defect, generalized defect, and the Kronecker-decomposed dimension formula.

For ``U = U1 (x) ... (x) Ur`` the dimension of the generator span splits
into a sum over proper subsets ``S`` of removed factor positions:

    dim M(U) = sum_S (prod_{k in S} n_k) * d(S),

where ``d(S)`` is the rank of the all-positions-differ generators of the
product of the retained factors. Each ``d(S)`` is an independent, much
smaller rank problem than the direct one.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from math import prod
from typing import Sequence

import numpy as np

from . import bounds
from .matrix import (
    as_complex_matrix,
    as_real_matrix,
    dagger,
    haar_unitary,
    is_unitary,
    kron,
    numerical_rank,
    RankResult,
)
from .mset import all_pattern_keys, pattern_subset, spanning_set

__all__ = [
    "UNITARY_TOL",
    "GENERATOR_SCALE",
    "MAX_DIRECT_N",
    "MAX_SUBPRODUCT_N",
    "GuardError",
    "NonUnitaryError",
    "FactorList",
    "subset_key",
    "parse_subset_key",
    "DefectReport",
    "DirectSumCheck",
    "dim_mspace",
    "defect",
    "generalized_defect",
    "subproduct_rank",
    "subproduct_dim",
    "dim_mspace_kron",
    "dim_mspace_direct",
    "verify_direct_sum",
    "feasible_space_contains",
    "feasible_constraint_matrix",
    "feasible_space_dim",
    "feasible_space_basis",
    "phasing_basis",
    "kron_feasible_product",
]

UNITARY_TOL = 1e-10
# generator entries are products of unitary entries, so roundoff is absolute
GENERATOR_SCALE = 1.0
MAX_DIRECT_N = 64
MAX_SUBPRODUCT_N = 64


class GuardError(ValueError):
    """Problem size exceeds a configured guard."""


class NonUnitaryError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class FactorList:
    """Ordered unitary factors of a Kronecker product, kept unmaterialized."""

    factors: tuple[np.ndarray, ...]

    def __init__(self, factors: Sequence, tol: float = UNITARY_TOL):
        mats = tuple(as_complex_matrix(f) for f in factors)
        if not mats:
            raise ValueError("FactorList needs at least one factor")
        for k, m in enumerate(mats, start=1):
            if m.shape[0] != m.shape[1]:
                raise ValueError(f"factor {k} is not square: {m.shape}")
            if not is_unitary(m, tol):
                raise NonUnitaryError(k, f"factor {k} is not unitary to {tol:g}")
        object.__setattr__(self, "factors", mats)

    @classmethod
    def haar(cls, sizes: Sequence[int], seed=None) -> "FactorList":
        """Independent Haar factors drawn from a single seeded generator."""
        rng = np.random.default_rng(seed)
        return cls([haar_unitary(int(n), rng) for n in sizes])

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(m.shape[0] for m in self.factors)

    @property
    def n_total(self) -> int:
        return prod(self.sizes)

    def __len__(self) -> int:
        return len(self.factors)

    def product(self) -> np.ndarray:
        return reduce(kron, self.factors)

    def retained(self, removed) -> "FactorList":
        keep = [m for k, m in enumerate(self.factors, start=1) if k not in removed]
        return FactorList(keep)


def _as_factors(obj) -> FactorList:
    return obj if isinstance(obj, FactorList) else FactorList(obj)


def subset_key(removed) -> str:
    """Render a removed-position set as ``"{1,3}"`` (``"{}"`` when empty)."""
    return "{" + ",".join(str(k) for k in sorted(removed)) + "}"


def parse_subset_key(text: str) -> frozenset:
    return frozenset(int(k) for k in text.strip("{}").split(",") if k.strip())


@dataclass
class DefectReport:
    """Result of a defect computation.

    ``per_subset_dims`` maps a removed-position set to ``(d, multiplicity)``;
    it is empty for the direct method.
    """

    n_total: int
    sizes: tuple[int, ...]
    dim_mspace: int
    method: str
    lower_bound: int
    min_gap_ratio: float
    per_subset_dims: dict[frozenset, tuple[int, int]] = field(default_factory=dict)
    wall_times: dict[str, float] = field(default_factory=dict)

    @property
    def generalized_defect(self) -> int:
        return self.n_total**2 - self.dim_mspace

    @property
    def defect(self) -> int:
        return self.generalized_defect - (2 * self.n_total - 1)

    def to_dict(self, timings: bool = True) -> dict:
        d = {
            "n_total": self.n_total,
            "sizes": list(self.sizes),
            "method": self.method,
            "dim_mspace": self.dim_mspace,
            "defect": self.defect,
            "generalized_defect": self.generalized_defect,
            "lower_bound": self.lower_bound,
            "min_gap_ratio": self.min_gap_ratio,
            "per_subset_dims": {
                subset_key(s): {"d": d_, "multiplicity": mult}
                for s, (d_, mult) in sorted(
                    self.per_subset_dims.items(), key=lambda kv: (len(kv[0]), sorted(kv[0]))
                )
            },
        }
        if timings:
            d["wall_times"] = dict(self.wall_times)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DefectReport":
        per = {}
        for key, val in d.get("per_subset_dims", {}).items():
            per[parse_subset_key(key)] = (int(val["d"]), int(val["multiplicity"]))
        return cls(
            n_total=int(d["n_total"]),
            sizes=tuple(int(n) for n in d["sizes"]),
            dim_mspace=int(d["dim_mspace"]),
            method=d["method"],
            lower_bound=int(d["lower_bound"]),
            min_gap_ratio=float(d["min_gap_ratio"]),
            per_subset_dims=per,
            wall_times=dict(d.get("wall_times", {})),
        )


def dim_mspace(u, tol: float | None = None) -> RankResult:
    """Rank of the full generator set of ``u``."""
    u = as_complex_matrix(u)
    if u.shape[0] > MAX_DIRECT_N:
        raise GuardError(f"direct rank limited to N <= {MAX_DIRECT_N}, got {u.shape[0]}")
    if u.shape[0] == 1:
        return RankResult(0, np.zeros(0), float("inf"), 0.0)
    return numerical_rank(spanning_set(u).vectors, tol, scale=GENERATOR_SCALE)


def defect(u, tol: float | None = None) -> int:
    n = np.shape(u)[0]
    return (n - 1) ** 2 - dim_mspace(u, tol).rank


def generalized_defect(u, tol: float | None = None) -> int:
    n = np.shape(u)[0]
    return n * n - dim_mspace(u, tol).rank


def subproduct_rank(factors, removed=frozenset(), tol: float | None = None) -> RankResult | None:
    """Rank of the all-differ subset for the product without ``removed``.

    Returns ``None`` when a retained factor is 1x1 (the subset is empty
    and the dimension is 0 by convention).
    """
    factors = _as_factors(factors)
    removed = frozenset(removed)
    r = len(factors)
    if not removed <= set(range(1, r + 1)) or len(removed) == r:
        raise ValueError(f"removed positions {sorted(removed)} invalid for r = {r}")
    reduced = factors.retained(removed)
    if any(n == 1 for n in reduced.sizes):
        return None
    if reduced.n_total > MAX_SUBPRODUCT_N:
        raise GuardError(
            f"retained subproduct of size {reduced.n_total} exceeds {MAX_SUBPRODUCT_N}"
        )
    gens = pattern_subset(reduced)
    return numerical_rank(gens.vectors, tol, scale=GENERATOR_SCALE)


def subproduct_dim(factors, removed=frozenset(), tol: float | None = None) -> int:
    res = subproduct_rank(factors, removed, tol)
    return 0 if res is None else res.rank


def _factor_identity(m: np.ndarray) -> tuple:
    return (m.shape, m.tobytes())


def dim_mspace_kron(factors, tol: float | None = None, jobs: int = 1) -> DefectReport:
    """Dimension of the generator span via the subset decomposition.

    Terms whose retained factors coincide (as arrays) are computed once.

    Parameters
    ----------
    factors : FactorList or sequence of unitary matrices
    tol : float, optional
        Explicit rank tolerance; automatic when omitted.
    jobs : int
        Worker threads for the independent rank problems.
    """
    t0 = time.perf_counter()
    factors = _as_factors(factors)
    sizes = factors.sizes
    r = len(sizes)
    subsets = list(bounds.proper_subsets(r))

    # memoize by the retained factors' contents
    groups: dict[tuple, list[frozenset]] = {}
    for s in subsets:
        ident = tuple(_factor_identity(m) for k, m in enumerate(factors.factors, 1) if k not in s)
        groups.setdefault(ident, []).append(s)
    t1 = time.perf_counter()

    reps = [members[0] for members in groups.values()]
    if jobs > 1 and len(reps) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda s: subproduct_rank(factors, s, tol), reps))
    else:
        results = [subproduct_rank(factors, s, tol) for s in reps]
    t2 = time.perf_counter()

    per_subset: dict[frozenset, tuple[int, int]] = {}
    gaps = []
    for members, res in zip(groups.values(), results):
        d = 0 if res is None else res.rank
        if res is not None:
            gaps.append(res.gap_ratio)
        for s in members:
            per_subset[s] = (d, prod(sizes[k - 1] for k in s))
    dim = sum(d * mult for d, mult in per_subset.values())
    t3 = time.perf_counter()

    return DefectReport(
        n_total=factors.n_total,
        sizes=sizes,
        dim_mspace=dim,
        method="decomposed",
        lower_bound=bounds.closed_form_lower_bound(sizes),
        min_gap_ratio=min(gaps, default=float("inf")),
        per_subset_dims=per_subset,
        wall_times={"setup": t1 - t0, "ranks": t2 - t1, "assemble": t3 - t2, "total": t3 - t0},
    )


def dim_mspace_direct(factors, tol: float | None = None) -> DefectReport:
    """Same report as :func:`dim_mspace_kron` but from the materialized product.

    A bare square matrix is treated as a single factor.
    """
    t0 = time.perf_counter()
    if not isinstance(factors, FactorList):
        arr = np.asarray(factors)
        factors = FactorList([arr] if arr.ndim == 2 else factors)
    u = factors.product()
    t1 = time.perf_counter()
    res = dim_mspace(u, tol)
    t2 = time.perf_counter()
    return DefectReport(
        n_total=factors.n_total,
        sizes=factors.sizes,
        dim_mspace=res.rank,
        method="direct",
        lower_bound=bounds.closed_form_lower_bound(factors.sizes),
        min_gap_ratio=res.gap_ratio,
        wall_times={"setup": t1 - t0, "ranks": t2 - t1, "total": t2 - t0},
    )


@dataclass(frozen=True)
class DirectSumCheck:
    ok: bool
    total_rank: int
    sum_of_ranks: int
    per_key_ranks: dict = field(repr=False)

    def __bool__(self) -> bool:
        return self.ok


def verify_direct_sum(factors, tol: float | None = None) -> DirectSumCheck:
    """Check that the pattern subspaces form a direct sum.

    Compares the rank of all generators of the product with the sum of the
    ranks of the individual pattern subsets.
    """
    factors = _as_factors(factors)
    if factors.n_total > MAX_DIRECT_N:
        raise GuardError(f"direct-sum check limited to N <= {MAX_DIRECT_N}")
    per_key = {}
    blocks = []
    for key in all_pattern_keys(factors.sizes):
        gens = pattern_subset(factors, key)
        per_key[key] = numerical_rank(gens.vectors, tol, scale=GENERATOR_SCALE).rank if len(gens) else 0
        blocks.append(gens.vectors)
    stacked = np.vstack(blocks)
    total = numerical_rank(stacked, tol, scale=GENERATOR_SCALE).rank if stacked.shape[0] else 0
    summed = sum(per_key.values())
    return DirectSumCheck(total == summed, total, summed, per_key)


def feasible_space_contains(u, rmat, tol: float = 1e-9) -> bool:
    """True iff ``E = (i R.U) U*`` is antihermitian to ``tol`` (max-norm)."""
    u = as_complex_matrix(u)
    rmat = as_real_matrix(rmat)
    if rmat.shape != u.shape:
        raise ValueError(f"shape mismatch: {rmat.shape} vs {u.shape}")
    e = (1j * rmat * u) @ dagger(u)
    return bool(np.abs(e + dagger(e)).max() <= tol)


def feasible_constraint_matrix(u) -> np.ndarray:
    """Real linear constraints on ``vec(R)`` expressing ``R`` feasible for ``u``.

    Column ``a*N + b`` holds the independent real and imaginary parts of
    ``E + E*`` for ``R`` equal to the unit matrix at ``(a, b)``; the
    feasible space is the null space of this matrix.
    """
    u = as_complex_matrix(u)
    n = u.shape[0]
    ud = dagger(u)
    iu, ju = np.triu_indices(n)
    cols = []
    for a in range(n):
        for b in range(n):
            # (i R.U) U* with R = e_a e_b^T is i * U[a,b] * e_a ud[b,:]
            e = np.zeros((n, n), dtype=np.complex128)
            e[a] = 1j * u[a, b] * ud[b]
            h = e + dagger(e)
            cols.append(np.concatenate([h.real[iu, ju], h.imag[iu, ju]]))
    return np.array(cols).T


def feasible_space_dim(u, tol: float | None = None) -> int:
    """``N**2`` minus the rank of :func:`feasible_constraint_matrix`."""
    k = feasible_constraint_matrix(u)
    n = np.shape(u)[0]
    return n * n - numerical_rank(k, tol, scale=GENERATOR_SCALE).rank


def feasible_space_basis(u, tol: float | None = None) -> list[np.ndarray]:
    """Orthonormal basis (as ``N x N`` real matrices) of the feasible space."""
    k = feasible_constraint_matrix(u)
    n = np.shape(u)[0]
    rank = numerical_rank(k, tol, scale=GENERATOR_SCALE).rank
    _, _, vt = np.linalg.svd(k)
    return [row.reshape(n, n) for row in vt[rank:]]


def phasing_basis(n: int) -> list[np.ndarray]:
    """Row indicators ``e_i 1^T`` then column indicators ``1 e_j^T``.

    All ``2n`` are returned; together they span a ``2n - 1`` dimensional
    space.
    """
    if n < 1:
        raise ValueError("phasing_basis needs n >= 1")
    out = []
    for i in range(n):
        m = np.zeros((n, n))
        m[i, :] = 1.0
        out.append(m)
    for j in range(n):
        m = np.zeros((n, n))
        m[:, j] = 1.0
        out.append(m)
    return out


def kron_feasible_product(r1, r2) -> np.ndarray:
    """Kronecker product of two real direction matrices.

    If ``r1`` is feasible for ``U`` and ``r2`` for ``V`` then the result is
    feasible for ``kron(U, V)``.
    """
    return np.kron(as_real_matrix(r1), as_real_matrix(r2))
