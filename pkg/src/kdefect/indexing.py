"""Ordinary <-> vector indices of Kronecker products, and subrow extraction.

All public indices are 1-based: an ordinary index ``i`` in ``1..N`` of a
product with factor sizes ``(n_1, ..., n_r)`` corresponds to the vector
index ``(i_1, ..., i_r)`` with

    i = (i_1 - 1) n_2 ... n_r + (i_2 - 1) n_3 ... n_r + ... + i_r.
"""

from __future__ import annotations

from math import prod
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "check_sizes",
    "ordinary_to_vector",
    "vector_to_ordinary",
    "reduce_index",
    "vector_digits",
    "column_positions",
    "subrow",
    "submatrix",
]


def check_sizes(sizes: Iterable[int]) -> tuple[int, ...]:
    """Validate a size sequence and return it as a tuple."""
    t = tuple(int(n) for n in sizes)
    if not t:
        raise ValueError("size sequence must be non-empty")
    if any(n < 1 for n in t):
        raise ValueError(f"sizes must be positive, got {t}")
    return t


def ordinary_to_vector(i: int, sizes: Sequence[int]) -> tuple[int, ...]:
    sizes = check_sizes(sizes)
    total = prod(sizes)
    if not 1 <= i <= total:
        raise ValueError(f"index {i} out of range 1..{total}")
    rem = i - 1
    out = []
    for n in reversed(sizes):
        rem, digit = divmod(rem, n)
        out.append(digit + 1)
    return tuple(reversed(out))


def vector_to_ordinary(v: Sequence[int], sizes: Sequence[int]) -> int:
    sizes = check_sizes(sizes)
    if len(v) != len(sizes):
        raise ValueError(f"vector index {tuple(v)} has wrong length for sizes {sizes}")
    i = 0
    for vk, n in zip(v, sizes):
        if not 1 <= vk <= n:
            raise ValueError(f"component {vk} out of range 1..{n}")
        i = i * n + (vk - 1)
    return i + 1


def reduce_index(v: Sequence[int], drop: Iterable[int]) -> tuple[int, ...]:
    """Remove the (1-based) positions in ``drop`` from the vector index ``v``."""
    drop = set(drop)
    if any(not 1 <= k <= len(v) for k in drop):
        raise ValueError(f"positions {sorted(drop)} invalid for length {len(v)}")
    if len(drop) == len(v):
        raise ValueError("cannot drop every position")
    return tuple(c for k, c in enumerate(v, start=1) if k not in drop)


def vector_digits(sizes: Sequence[int]) -> np.ndarray:
    """``(N, r)`` array of 0-based digits of every ordinary index, in order."""
    sizes = check_sizes(sizes)
    return np.array(np.unravel_index(np.arange(prod(sizes)), sizes)).T


def _check_position(sizes: tuple[int, ...], k: int, value: int) -> None:
    if not 1 <= k <= len(sizes):
        raise ValueError(f"position {k} out of range 1..{len(sizes)}")
    if not 1 <= value <= sizes[k - 1]:
        raise ValueError(f"value {value} out of range 1..{sizes[k - 1]} at position {k}")


def column_positions(sizes: Sequence[int], k: int, y: int) -> np.ndarray:
    """0-based ordinary positions whose k-th subindex equals ``y``, ascending."""
    sizes = check_sizes(sizes)
    _check_position(sizes, k, y)
    grid = np.arange(prod(sizes)).reshape(sizes)
    return np.take(grid, y - 1, axis=k - 1).ravel()


def subrow(row, sizes: Sequence[int], k: int, y: int) -> np.ndarray:
    """Entries of ``row`` at columns whose k-th subindex is ``y``, order kept."""
    row = np.asarray(row)
    sizes = check_sizes(sizes)
    if row.shape != (prod(sizes),):
        raise ValueError(f"row of length {row.shape} does not match sizes {sizes}")
    return row[column_positions(sizes, k, y)]


def submatrix(m, sizes: Sequence[int], k: int, row_value: int, col_value: int) -> np.ndarray:
    """Rows with k-th subindex ``row_value`` and columns with ``col_value``."""
    m = np.asarray(m)
    sizes = check_sizes(sizes)
    n = prod(sizes)
    if m.shape != (n, n):
        raise ValueError(f"matrix of shape {m.shape} does not match sizes {sizes}")
    rows = column_positions(sizes, k, row_value)
    cols = column_positions(sizes, k, col_value)
    return m[np.ix_(rows, cols)]
