"""Dense complex matrices, structured constructors and numerical rank.

Matrices are plain :class:`numpy.ndarray` objects of dtype ``complex128``
(or ``float64`` for real ones). :func:`as_complex_matrix` is the single
validation point used by the rest of the package.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RankGapWarning",
    "RankResult",
    "GAP_WARNING_THRESHOLD",
    "as_complex_matrix",
    "as_real_matrix",
    "kron",
    "hadamard",
    "dagger",
    "is_unitary",
    "fourier",
    "haar_unitary",
    "numerical_rank",
    "matrix_to_json",
    "matrix_from_json",
]

GAP_WARNING_THRESHOLD = 1e3


class RankGapWarning(UserWarning):
    """Spectral gap at the rank cut is too small to trust the integer rank."""


def as_complex_matrix(a) -> np.ndarray:
    """Return ``a`` as a finite 2-D ``complex128`` array.

    Raises
    ------
    ValueError
        If ``a`` is not two-dimensional, is empty, or holds NaN/Inf.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def as_real_matrix(a) -> np.ndarray:
    m = np.asarray(a)
    if np.iscomplexobj(m):
        raise ValueError("expected a real matrix")
    m = m.astype(np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    """Kronecker product with the first factor as the most significant index.

    Entry ``((i1, i2), (j1, j2))`` of the result is ``a[i1, j1] * b[i2, j2]``
    where the combined row index is ``i1 * b.rows + i2``.
    """
    return np.kron(np.asarray(a), np.asarray(b))


def hadamard(a, b) -> np.ndarray:
    """Entrywise product of two equally shaped matrices."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a * b


def dagger(a) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def is_unitary(u, tol: float = 1e-10) -> bool:
    """True iff ``max |U* U - I| <= tol``."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"is_unitary needs a square matrix, got shape {u.shape}")
    err = np.abs(dagger(u) @ u - np.eye(u.shape[0])).max()
    return bool(err <= tol)


def fourier(n: int) -> np.ndarray:
    """Unitary DFT matrix, ``F[j, k] = exp(2 pi i j k / n) / sqrt(n)`` (0-based)."""
    if n < 1:
        raise ValueError("fourier needs n >= 1")
    jk = np.outer(np.arange(n), np.arange(n)) % n
    return np.exp(2j * np.pi * jk / n) / np.sqrt(n)


def haar_unitary(n: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Sample an ``n x n`` unitary from the Haar measure.

    A Ginibre matrix is QR-factorized and the columns of Q are rephased so
    that R has a positive real diagonal; without that correction the
    distribution is not Haar.

    Parameters
    ----------
    n : int
        Matrix side.
    seed : int or numpy.random.Generator, optional
        Seed (or generator) making the draw reproducible.
    """
    if n < 1:
        raise ValueError("haar_unitary needs n >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    phases = d / np.abs(d)
    return q * phases[np.newaxis, :]


@dataclass(frozen=True)
class RankResult:
    """Outcome of a numerical rank computation.

    ``gap_ratio`` is ``sigma[rank-1] / sigma[rank]``; it is infinite when no
    singular value was discarded, when the discarded one is exactly zero, or
    when the rank is zero.
    """

    rank: int
    singular_values: np.ndarray = field(repr=False)
    gap_ratio: float
    tolerance_used: float

    def __int__(self) -> int:
        return self.rank


def numerical_rank(
    vectors, tol: float | None = None, warn: bool = True, scale: float | None = None
) -> RankResult:
    """Numerical rank of a family of real vectors.

    Parameters
    ----------
    vectors : array_like, shape (m, L)
        One vector per row.
    tol : float, optional
        Explicit cut-off. Singular values strictly above it are counted.
        When omitted the cut-off is ``max(m, L) * eps * sigma_max``.
    warn : bool
        Emit :class:`RankGapWarning` when the gap ratio falls below
        :data:`GAP_WARNING_THRESHOLD`.
    scale : float, optional
        Lower limit for ``sigma_max`` in the automatic cut-off. Use it when
        the entries carry absolute roundoff of a known magnitude, e.g.
        vectors built from products of unitary entries, whose noise does not
        shrink with the norm of the family.

    Returns
    -------
    RankResult
    """
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim == 1:
        v = v[np.newaxis, :]
    if v.ndim != 2:
        raise ValueError("vectors must form a 2-D array (one vector per row)")
    if v.shape[0] < 1:
        raise ValueError("numerical_rank needs at least one vector")
    m, length = v.shape
    if length == 0:
        return RankResult(0, np.zeros(0), float("inf"), float(tol or 0.0))

    s = np.linalg.svd(v, compute_uv=False)
    smax = s[0] if s.size else 0.0
    if tol is None:
        ref = smax if scale is None else max(smax, float(scale))
        tau = max(m, length) * np.finfo(np.float64).eps * ref
    else:
        if tol <= 0:
            raise ValueError("explicit tolerance must be positive")
        tau = float(tol)
    rank = int(np.count_nonzero(s > tau))

    if rank == 0 or rank == s.size or s[rank] == 0.0:
        gap = float("inf")
    else:
        gap = float(s[rank - 1] / s[rank])
    if warn and gap < GAP_WARNING_THRESHOLD:
        warnings.warn(
            f"singular value gap {gap:.3g} at rank {rank} is below "
            f"{GAP_WARNING_THRESHOLD:g}; the integer rank may be unreliable",
            RankGapWarning,
            stacklevel=2,
        )
    return RankResult(rank, s, gap, float(tau))


def matrix_to_json(a) -> dict:
    """Serialize to ``{"rows", "cols", "data": [[re, im], ...]}`` (row-major)."""
    m = np.asarray(a, dtype=np.complex128)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`; raises ``ValueError`` on schema errors."""
    if not isinstance(obj, dict):
        raise ValueError("matrix object must be a JSON object")
    try:
        rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    except KeyError as exc:
        raise ValueError(f"matrix object is missing key {exc}") from None
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ValueError(f"data must hold rows*cols = {rows * cols} entries")
    vals = []
    for entry in data:
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise ValueError(f"bad matrix entry {entry!r}; expected [re, im]")
        vals.append(complex(entry[0], entry[1]))
    return as_complex_matrix(np.array(vals, dtype=np.complex128).reshape(rows, cols))
