"""Generator matrices spanning the space whose complement defines the defect.

For a unitary ``U`` and rows ``i < j`` the complex matrix ``M^{ij}`` has
``row_i(U) * conj(row_j(U))`` in row ``i``, the negation in row ``j`` and
zeros elsewhere. Its real and imaginary parts ``A^{ij}`` and ``S^{ij}`` are
the generators. Everything here is 1-based in the public API.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Sequence

import numpy as np

from .indexing import check_sizes, vector_digits
from .matrix import as_complex_matrix, is_unitary, kron

__all__ = [
    "GeneratorLabel",
    "GeneratorSet",
    "PatternKey",
    "m_matrix",
    "generator_pair",
    "vectorize",
    "spanning_set",
    "pattern_subset",
    "all_pattern_keys",
]


@dataclass(frozen=True, order=True)
class GeneratorLabel:
    i: int
    j: int
    kind: str  # "A" or "S"


@dataclass(frozen=True)
class GeneratorSet:
    """Labelled generators, flattened row-major into rows of ``vectors``."""

    n: int
    labels: tuple[GeneratorLabel, ...]
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    def matrices(self) -> np.ndarray:
        return self.vectors.reshape(len(self), self.n, self.n)


@dataclass(frozen=True)
class PatternKey:
    """Positions fixed to equal values in both vector indices of a pair.

    Positions and values are 1-based; the empty key selects pairs whose
    vector indices differ at every position.
    """

    fixed_positions: tuple[int, ...] = ()
    fixed_values: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "fixed_positions", tuple(self.fixed_positions))
        object.__setattr__(self, "fixed_values", tuple(self.fixed_values))
        if len(self.fixed_positions) != len(self.fixed_values):
            raise ValueError("fixed_positions and fixed_values differ in length")
        if any(b <= a for a, b in zip(self.fixed_positions, self.fixed_positions[1:])):
            raise ValueError("fixed_positions must be strictly increasing")

    def validate(self, sizes: Sequence[int]) -> None:
        r = len(sizes)
        if len(self.fixed_positions) > r - 1:
            raise ValueError(f"a key may fix at most r-1 = {r - 1} positions")
        for k, v in zip(self.fixed_positions, self.fixed_values):
            if not 1 <= k <= r:
                raise ValueError(f"position {k} out of range 1..{r}")
            if not 1 <= v <= sizes[k - 1]:
                raise ValueError(f"value {v} out of range 1..{sizes[k - 1]} at position {k}")


def _check_pair(n: int, i: int, j: int) -> None:
    if not 1 <= i < j <= n:
        raise ValueError(f"need 1 <= i < j <= {n}, got i={i}, j={j}")


def m_matrix(u, i: int, j: int) -> np.ndarray:
    u = as_complex_matrix(u)
    n = u.shape[0]
    if u.shape[1] != n:
        raise ValueError("m_matrix needs a square matrix")
    _check_pair(n, i, j)
    m = np.zeros((n, n), dtype=np.complex128)
    row = u[i - 1] * np.conj(u[j - 1])
    m[i - 1] = row
    m[j - 1] = -row
    return m


def generator_pair(u, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """``(A^{ij}, S^{ij})``, the real and imaginary parts of ``m_matrix``."""
    m = m_matrix(u, i, j)
    return m.real.copy(), m.imag.copy()


def vectorize(m) -> np.ndarray:
    """Row-major flattening; ``vectorize(A) @ vectorize(B) == trace(A @ B.T)``."""
    return np.asarray(m, dtype=np.float64).ravel()


def _generators_for_pairs(u: np.ndarray, ii: np.ndarray, jj: np.ndarray) -> GeneratorSet:
    """Build A/S generators for 0-based pair arrays, A before S per pair."""
    n = u.shape[0]
    npairs = ii.size
    rows = u[ii] * np.conj(u[jj])  # (npairs, n)
    out = np.zeros((2 * npairs, n, n))
    idx = np.arange(npairs)
    out[2 * idx, ii] = rows.real
    out[2 * idx, jj] = -rows.real
    out[2 * idx + 1, ii] = rows.imag
    out[2 * idx + 1, jj] = -rows.imag
    labels = tuple(
        GeneratorLabel(int(a) + 1, int(b) + 1, kind)
        for a, b in zip(ii, jj)
        for kind in ("A", "S")
    )
    return GeneratorSet(n, labels, out.reshape(2 * npairs, n * n))


def spanning_set(u, tol: float = 1e-10) -> GeneratorSet:
    """All ``N(N-1)`` generators of ``u`` in lexicographic ``(i, j)`` order.

    A non-unitary input only triggers a warning; the construction is
    defined for any square matrix.
    """
    u = as_complex_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ValueError("spanning_set needs a square matrix")
    if not is_unitary(u, tol):
        warnings.warn("spanning_set called on a non-unitary matrix", RuntimeWarning, stacklevel=2)
    ii, jj = np.triu_indices(u.shape[0], k=1)
    return _generators_for_pairs(u, ii, jj)


def _factor_matrices(factors) -> list[np.ndarray]:
    mats = getattr(factors, "factors", factors)
    return [as_complex_matrix(f) for f in mats]


def pattern_subset(factors, key: PatternKey = PatternKey()) -> GeneratorSet:
    """Generators of the full product whose index pair matches ``key``.

    A pair ``(i, j)`` qualifies when ``i_k = j_k = v`` at every fixed
    position ``(k, v)`` of the key and ``i_k != j_k`` at every other
    position. A free position of size 1 makes the subset empty.

    Parameters
    ----------
    factors : FactorList or sequence of square matrices
    key : PatternKey
    """
    mats = _factor_matrices(factors)
    sizes = tuple(m.shape[0] for m in mats)
    key.validate(sizes)
    u = reduce(kron, mats)
    digits = vector_digits(sizes)
    ii, jj = np.triu_indices(u.shape[0], k=1)
    di, dj = digits[ii], digits[jj]

    fixed = np.zeros(len(sizes), dtype=bool)
    fixed[[k - 1 for k in key.fixed_positions]] = True
    mask = np.all(di[:, ~fixed] != dj[:, ~fixed], axis=1)
    for k, v in zip(key.fixed_positions, key.fixed_values):
        mask &= (di[:, k - 1] == v - 1) & (dj[:, k - 1] == v - 1)
    return _generators_for_pairs(u, ii[mask], jj[mask])


def all_pattern_keys(sizes: Sequence[int]) -> Iterator[PatternKey]:
    """Every valid key for ``sizes``, ordered by number of fixed positions."""
    sizes = check_sizes(sizes)
    r = len(sizes)
    for p in range(r):
        for positions in itertools.combinations(range(1, r + 1), p):
            ranges = [range(1, sizes[k - 1] + 1) for k in positions]
            for values in itertools.product(*ranges):
                yield PatternKey(positions, values)
