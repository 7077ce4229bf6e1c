import itertools
from math import prod

import numpy as np
import pytest

from kdefect.engine import FactorList
from kdefect.indexing import ordinary_to_vector
from kdefect.matrix import fourier, haar_unitary, numerical_rank
from kdefect.mset import (
    PatternKey,
    all_pattern_keys,
    generator_pair,
    m_matrix,
    pattern_subset,
    spanning_set,
    vectorize,
)


def brute_pairs(sizes, key):
    """Index pairs (1-based) selected by a key, by direct enumeration."""
    n = prod(sizes)
    fixed = dict(zip(key.fixed_positions, key.fixed_values))
    out = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            vi, vj = ordinary_to_vector(i, sizes), ordinary_to_vector(j, sizes)
            ok = True
            for k in range(1, len(sizes) + 1):
                if k in fixed:
                    ok &= vi[k - 1] == vj[k - 1] == fixed[k]
                else:
                    ok &= vi[k - 1] != vj[k - 1]
            if ok:
                out.append((i, j))
    return out


def test_m_matrix_f2(f2):
    m = m_matrix(f2, 1, 2)
    assert np.allclose(m, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_m_matrix_identity_zero():
    assert np.array_equal(m_matrix(np.eye(3), 1, 2), np.zeros((3, 3)))


def test_m_matrix_rows():
    u = haar_unitary(5, 11)
    for i, j in itertools.combinations(range(1, 6), 2):
        m = m_matrix(u, i, j)
        assert abs(m[i - 1].sum()) < 1e-12
        assert np.array_equal(m[j - 1], -m[i - 1])
        others = [q for q in range(5) if q not in (i - 1, j - 1)]
        assert not m[others].any()


def test_m_matrix_bad_indices(f2):
    with pytest.raises(ValueError):
        m_matrix(f2, 2, 1)
    with pytest.raises(ValueError):
        m_matrix(f2, 1, 3)


def test_generator_pair(f2):
    a, s = generator_pair(f2, 1, 2)
    assert np.allclose(a, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)
    assert np.abs(s).max() < 1e-15
    u = haar_unitary(4, 2)
    a, s = generator_pair(u, 2, 4)
    assert np.array_equal(a + 1j * s, m_matrix(u, 2, 4))


def test_real_orthogonal_has_no_s():
    q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((4, 4)))
    gens = spanning_set(q)
    s_rows = [v for lab, v in zip(gens.labels, gens.vectors) if lab.kind == "S"]
    assert not np.any(s_rows)


def test_spanning_set_counts_and_order(f2):
    assert len(spanning_set(f2)) == 2
    gens = spanning_set(fourier(6))
    assert len(gens) == 30
    keys = [(lab.i, lab.j, lab.kind) for lab in gens.labels]
    assert keys == sorted(keys)
    assert keys[:2] == [(1, 2, "A"), (1, 2, "S")]
    assert numerical_rank(spanning_set(f2).vectors).rank == 1


def test_spanning_set_matches_generator_pair():
    u = haar_unitary(4, 5)
    gens = spanning_set(u)
    mats = gens.matrices()
    for lab, m in zip(gens.labels, mats):
        a, s = generator_pair(u, lab.i, lab.j)
        assert np.array_equal(m, a if lab.kind == "A" else s)


def test_spanning_set_warns_on_nonunitary():
    with pytest.warns(RuntimeWarning):
        spanning_set(2 * np.eye(2))


def test_vectorize(rng):
    assert not vectorize(np.zeros((2, 2))).any()
    assert list(vectorize(np.eye(2))) == [1, 0, 0, 1]
    for _ in range(5):
        a, b = rng.standard_normal((2, 3, 3))
        expected = sum(a[p, q] * b[p, q] for p in range(3) for q in range(3))
        assert vectorize(a) @ vectorize(b) == pytest.approx(expected, abs=1e-13)
        assert vectorize(a) @ vectorize(b) == pytest.approx(np.trace(a @ b.T), abs=1e-13)


def test_pattern_subset_examples(f2):
    sub = pattern_subset([f2, f2], PatternKey((1,), (1,)))
    assert {(lab.i, lab.j) for lab in sub.labels} == {(1, 2)}
    assert len(sub) == 2
    sub = pattern_subset([f2, f2], PatternKey())
    assert {(lab.i, lab.j) for lab in sub.labels} == {(1, 4), (2, 3)}
    assert len(sub) == 4
    assert len(pattern_subset([np.eye(1), fourier(3)], PatternKey())) == 0


def test_pattern_key_validation(f2):
    with pytest.raises(ValueError):
        pattern_subset([f2, f2], PatternKey((1, 2), (1, 1)))
    with pytest.raises(ValueError):
        pattern_subset([f2, f2], PatternKey((1,), (3,)))
    with pytest.raises(ValueError):
        PatternKey((2, 1), (1, 1))
    with pytest.raises(ValueError):
        PatternKey((1,), ())


@pytest.mark.parametrize("sizes", [(2, 2), (2, 3), (3, 2), (1, 3), (2, 2, 2), (3, 1, 2), (2, 3, 3)])
def test_pattern_subsets_partition(sizes):
    factors = FactorList.haar(sizes, 4)
    full = spanning_set(factors.product())
    full_labels = list(full.labels)
    seen = []
    for key in all_pattern_keys(sizes):
        sub = pattern_subset(factors, key)
        pairs = sorted({(lab.i, lab.j) for lab in sub.labels})
        assert pairs == brute_pairs(sizes, key)
        seen.extend(sub.labels)
        lookup = dict(zip(full.labels, full.vectors))
        for lab, vec in zip(sub.labels, sub.vectors):
            assert np.array_equal(vec, lookup[lab])
    assert len(seen) == len(set(seen))
    assert sorted(seen) == sorted(full_labels)


def test_column_sums_vanish():
    for n in (2, 5, 9, 16):
        gens = spanning_set(haar_unitary(n, n))
        assert np.abs(gens.matrices().sum(axis=1)).max() < 1e-12


def test_unimodular_invariance():
    u = haar_unitary(4, 9)
    c = np.exp(0.73j)
    assert np.abs(spanning_set(u).vectors - spanning_set(c * u).vectors).max() < 1e-14


def test_generator_set_row_structure():
    gens = spanning_set(haar_unitary(5, 1))
    for lab, m in zip(gens.labels, gens.matrices()):
        assert np.array_equal(m[lab.j - 1], -m[lab.i - 1])
        mask = np.ones(5, bool)
        mask[[lab.i - 1, lab.j - 1]] = False
        assert not m[mask].any()
