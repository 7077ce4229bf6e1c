import numpy as np
import pytest

from kdefect import engine
from kdefect.bounds import closed_form_lower_bound
from kdefect.engine import (
    DefectReport,
    FactorList,
    GuardError,
    NonUnitaryError,
    defect,
    dim_mspace,
    dim_mspace_direct,
    dim_mspace_kron,
    feasible_constraint_matrix,
    feasible_space_basis,
    feasible_space_contains,
    feasible_space_dim,
    generalized_defect,
    kron_feasible_product,
    phasing_basis,
    subproduct_dim,
    verify_direct_sum,
)
from kdefect.matrix import fourier, haar_unitary, kron, numerical_rank

GRID = [(2, 2), (2, 3), (3, 3), (2, 2, 2), (2, 2, 3)]


def test_dim_mspace_examples(f2):
    assert dim_mspace(f2).rank == 1
    for n in (1, 2, 5):
        assert dim_mspace(np.eye(n)).rank == 0
    assert dim_mspace(kron(f2, f2)).rank == 6


def test_defect_examples(f2):
    assert defect(f2) == 0
    assert defect(np.eye(3)) == 4
    assert defect(fourier(6)) == 4
    assert generalized_defect(f2) == 3
    assert generalized_defect(kron(f2, f2)) == 10
    for n in (1, 3, 4):
        assert generalized_defect(np.eye(n)) == n * n


def test_subproduct_dim_examples(f2):
    assert subproduct_dim([f2, f2], {1}) == 1
    assert subproduct_dim([f2, f2], set()) == 2
    assert subproduct_dim([np.eye(1), fourier(3)], {2}) == 0
    with pytest.raises(ValueError):
        subproduct_dim([f2, f2], {1, 2})
    with pytest.raises(ValueError):
        subproduct_dim([f2, f2], {3})


def test_kron_report_f2f2(f2):
    rep = dim_mspace_kron([f2, f2])
    assert rep.method == "decomposed"
    assert rep.per_subset_dims == {
        frozenset(): (2, 1),
        frozenset({1}): (1, 2),
        frozenset({2}): (1, 2),
    }
    assert rep.dim_mspace == 6
    assert rep.generalized_defect == 10
    assert rep.lower_bound == 10


def test_kron_report_single_factor():
    rep = dim_mspace_kron([fourier(6)])
    assert rep.defect == 4
    assert rep.dim_mspace == dim_mspace(fourier(6)).rank


def test_one_by_one_factor_is_absorbed(f2):
    a = dim_mspace_kron([np.eye(1), f2])
    b = dim_mspace_kron([f2])
    assert (a.dim_mspace, a.defect, a.generalized_defect, a.lower_bound) == (
        b.dim_mspace,
        b.defect,
        b.generalized_defect,
        b.lower_bound,
    )
    c = dim_mspace_kron([haar_unitary(3, 1), np.eye(1), haar_unitary(2, 2)])
    d = dim_mspace_kron([haar_unitary(3, 1), haar_unitary(2, 2)])
    assert c.dim_mspace == d.dim_mspace


@pytest.mark.parametrize("sizes", GRID)
def test_oracle_equivalence(sizes):
    for seed in range(10):
        factors = FactorList.haar(sizes, seed)
        dec = dim_mspace_kron(factors)
        direct = dim_mspace_direct(factors)
        assert dec.dim_mspace == direct.dim_mspace
        assert dec.min_gap_ratio >= 1e3
        assert dec.generalized_defect >= closed_form_lower_bound(sizes)


def test_report_invariants():
    rep = dim_mspace_kron(FactorList.haar((2, 3), 0))
    n = rep.n_total
    assert rep.generalized_defect == rep.defect + 2 * n - 1
    assert rep.dim_mspace == n * n - rep.generalized_defect
    assert rep.defect >= 0 and rep.dim_mspace <= (n - 1) ** 2
    assert rep.generalized_defect >= rep.lower_bound
    assert sum(d * m for d, m in rep.per_subset_dims.values()) == rep.dim_mspace


def test_report_roundtrip():
    rep = dim_mspace_kron(FactorList.haar((2, 2, 3), 5))
    back = DefectReport.from_dict(rep.to_dict())
    assert back.per_subset_dims == rep.per_subset_dims
    assert (back.dim_mspace, back.defect, back.generalized_defect) == (
        rep.dim_mspace,
        rep.defect,
        rep.generalized_defect,
    )


def test_memoized_equal_factors(f2):
    # identical factors share one rank computation but every subset is reported
    rep = dim_mspace_kron([f2, f2, f2])
    assert len(rep.per_subset_dims) == 7
    assert rep.dim_mspace == dim_mspace(kron(kron(f2, f2), f2)).rank


def test_parallel_matches_serial():
    factors = FactorList.haar((2, 3, 2), 8)
    assert dim_mspace_kron(factors, jobs=4).per_subset_dims == dim_mspace_kron(factors).per_subset_dims


def test_explicit_tolerance(f2):
    rep = dim_mspace_kron([f2, f2], tol=1e-8)
    assert rep.dim_mspace == 6


def test_guards(monkeypatch):
    monkeypatch.setattr(engine, "MAX_DIRECT_N", 4)
    monkeypatch.setattr(engine, "MAX_SUBPRODUCT_N", 4)
    with pytest.raises(GuardError):
        dim_mspace(fourier(5))
    with pytest.raises(GuardError):
        dim_mspace_kron([fourier(2), fourier(3)])
    with pytest.raises(GuardError):
        verify_direct_sum([fourier(2), fourier(3)])
    # 1x1 factor makes the full-product term vanish; only size-3 term is ranked
    assert dim_mspace_kron([np.eye(1), fourier(3)]).dim_mspace == 4


def test_factor_list_validation():
    with pytest.raises(NonUnitaryError) as info:
        FactorList([fourier(2), 2 * np.eye(2)])
    assert info.value.index == 2
    with pytest.raises(ValueError):
        FactorList([])
    with pytest.raises(ValueError):
        FactorList([np.ones((2, 3))])


def test_verify_direct_sum_examples(f2):
    check = verify_direct_sum([f2, f2])
    assert check.ok and check.total_rank == 6
    assert sorted(check.per_key_ranks.values()) == [1, 1, 1, 1, 2]
    assert verify_direct_sum([haar_unitary(2, 3), haar_unitary(3, 4)])
    assert verify_direct_sum([fourier(4)]).ok


@pytest.mark.parametrize("sizes", GRID)
def test_verify_direct_sum_grid(sizes):
    for seed in range(3):
        assert verify_direct_sum(FactorList.haar(sizes, seed)).ok


def test_feasible_contains_examples():
    u = haar_unitary(4, 1)
    assert feasible_space_contains(u, np.ones((4, 4)))
    for m in phasing_basis(4):
        assert feasible_space_contains(u, m)
    rng = np.random.default_rng(0)
    for seed in range(10):
        u = haar_unitary(4, seed)
        assert not feasible_space_contains(u, rng.standard_normal((4, 4)))
    with pytest.raises(ValueError):
        feasible_space_contains(u, np.ones((3, 3)))


def test_phasing_basis():
    basis = phasing_basis(2)
    assert len(basis) == 4
    assert numerical_rank([m.ravel() for m in basis]).rank == 3
    for n in range(1, 9):
        basis = phasing_basis(n)
        assert numerical_rank([m.ravel() for m in basis]).rank == 2 * n - 1
        assert np.array_equal(sum(basis[:n]), sum(basis[n:]))
        assert np.array_equal(sum(basis[:n]), np.ones((n, n)))


@pytest.mark.parametrize("n", range(2, 10))
def test_feasible_dim_equals_generalized_defect(n):
    for u in (haar_unitary(n, n), fourier(n), np.eye(n)):
        assert feasible_space_dim(u) == generalized_defect(u)


def test_feasible_dim_kron_products(f2):
    for u in (kron(f2, f2), kron(fourier(3), f2), kron(haar_unitary(2, 1), haar_unitary(3, 2))):
        assert feasible_space_dim(u) == generalized_defect(u)


def test_feasible_constraint_shape():
    k = feasible_constraint_matrix(fourier(3))
    assert k.shape == (2 * 6, 9)


def test_feasible_basis_members():
    u = fourier(4)
    basis = feasible_space_basis(u)
    assert len(basis) == generalized_defect(u)
    for r in basis:
        assert feasible_space_contains(u, r)


def test_kron_feasible_product():
    u, v = haar_unitary(2, 1), haar_unitary(3, 2)
    uv = kron(u, v)
    for a in phasing_basis(2):
        for b in phasing_basis(3):
            assert feasible_space_contains(uv, kron_feasible_product(a, b))
    rng = np.random.default_rng(5)
    bu, bv = feasible_space_basis(fourier(4)), feasible_space_basis(fourier(3))
    for _ in range(10):
        ra = sum(rng.standard_normal() * m for m in bu)
        rb = sum(rng.standard_normal() * m for m in bv)
        assert feasible_space_contains(kron(fourier(4), fourier(3)), kron_feasible_product(ra, rb))
    z = kron_feasible_product(np.zeros((2, 2)), rng.standard_normal((3, 3)))
    assert not z.any()
    assert feasible_space_contains(uv, z)


def test_defect_invariance():
    rng = np.random.default_rng(2)
    for u in (fourier(6), haar_unitary(5, 3), kron(fourier(2), fourier(3))):
        n = u.shape[0]
        base = defect(u)
        assert defect(np.exp(1.1j) * u) == base
        dr = np.diag(np.exp(2j * np.pi * rng.random(n)))
        dc = np.diag(np.exp(2j * np.pi * rng.random(n)))
        assert defect(dr @ u @ dc) == base
        p, q = rng.permutation(n), rng.permutation(n)
        assert defect(u[p][:, q]) == base


def test_supermultiplicativity():
    rng = np.random.default_rng(4)
    pairs = [(fourier(2), fourier(2)), (fourier(4), fourier(3))]
    for _ in range(10):
        a, b = rng.integers(2, 5, size=2)
        pairs.append((haar_unitary(int(a), rng), haar_unitary(int(b), rng)))
    for u, v in pairs:
        assert generalized_defect(kron(u, v)) >= generalized_defect(u) * generalized_defect(v)
    assert generalized_defect(kron(fourier(2), fourier(2))) > generalized_defect(fourier(2)) ** 2
