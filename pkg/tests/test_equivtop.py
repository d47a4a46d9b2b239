from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lensmaslov.equivtop import (
    ChainVector,
    EquivComplex,
    IndexShapeError,
    JoinModel,
    QuotientComplex,
    Subcomplex,
    betti,
    bockstein,
    boundary_rule_defect,
    chain_join_via_phi,
    circle_complex,
    cohom_index,
    cohomology_basis,
    complex_from_text,
    complex_to_text,
    homology_basis,
    homology_index,
    join_complex,
    property_suite,
    random_subcomplex,
    sphere_model,
    twist_check,
)
from lensmaslov.equivtop import fp
from lensmaslov.equivtop.chains import random_chain
from lensmaslov.equivtop.complexes import permutation_sign
from lensmaslov.equivtop.homology import _check_shape, chain_boundary, is_boundary, is_coboundary, is_cycle, upstairs_betti


def test_fp_linear_algebra():
    M = np.array([[1, 2, 0], [2, 4, 0], [0, 1, 1]])
    assert fp.rank(M, 3) == 2
    assert fp.rank(M, 5) == 2
    N = fp.nullspace(M, 3)
    assert N.shape[0] == 1 and not np.any((M @ N[0]) % 3)
    assert fp.in_row_span([1, 3, 1], M, 3)  # row0 + row2 mod 3
    assert not fp.in_row_span([0, 0, 1], M, 3)


def test_permutation_sign():
    assert permutation_sign((2, 0, 1)) == ((0, 1, 2), 1)
    assert permutation_sign((1, 0, 2)) == ((0, 1, 2), -1)


@pytest.mark.parametrize("k,w,fv", [(3, 1, (3, 3)), (5, 2, (5, 5)), (2, 1, (4, 4))])
def test_circle_complexes(k, w, fv):
    X = circle_complex(k, w)
    X.check()
    assert X.f_vector() == fv and X.euler_characteristic() == 0
    assert QuotientComplex(X).f_vector() == (fv[0] // k, fv[1] // k)


def test_join_of_triangles():
    # f-vector of the join of two triangles and its Z_3 quotient
    X = sphere_model(3, [1, 1])
    X.check()
    assert X.f_vector() == (6, 15, 18, 9) and X.euler_characteristic() == 0
    assert QuotientComplex(X).f_vector() == (2, 5, 6, 3)
    assert upstairs_betti(X, 3) == [1, 0, 0, 1]


def test_non_free_action_rejected():
    X = EquivComplex(2, 2, (((0,), (1,)), ((0, 1),)), (1, 0))
    with pytest.raises(ValueError):
        X.check()


@pytest.mark.parametrize("k,weights", [(2, [1, 1]), (3, [1, 2]), (5, [1, 2, 3])])
def test_boundary_squares_to_zero(k, weights):
    Q = QuotientComplex(sphere_model(k, weights))
    for d in range(1, Q.dim):
        assert not np.any(Q.boundary(d) @ Q.boundary(d + 1))


@pytest.mark.parametrize("k", [2, 3, 5])
@pytest.mark.parametrize("M", [1, 2, 3])
def test_lens_homology_and_bockstein(k, M):
    # every Z_k Betti number is 1; the Bockstein is nonzero from odd degrees
    Q = QuotientComplex(sphere_model(k, [1] * M))
    assert betti(Q) == [1] * (2 * M)
    for d in range(2 * M - 1):
        c = cohomology_basis(Q, d)[0]
        assert (not is_coboundary(Q, bockstein(Q, c))) == (d % 2 == 1)


def test_weighted_lens_homology():
    assert betti(QuotientComplex(sphere_model(5, [1, 2]))) == [1, 1, 1, 1]


def test_index_of_standard_subcomplexes():
    Q = QuotientComplex(sphere_model(3, [1, 1, 1]))
    assert cohom_index(Q.full(), cross_check=True) == 6
    assert cohom_index(Q.empty()) == 0
    assert cohom_index(Q.vertex()) == 1
    for r in (1, 2, 3):
        assert cohom_index(Q.lens_subspace(range(r)), cross_check=True) == 2 * r
        assert homology_index(Q.lens_subspace(range(r))) == 2 * r


def test_non_closed_set_rejected():
    Q = QuotientComplex(circle_complex(3))
    A = Subcomplex(Q, ((), (0,)))
    assert not A.is_closed()
    with pytest.raises(ValueError):
        cohom_index(A)


def test_index_shape_error_on_holes():
    with pytest.raises(IndexShapeError):
        _check_shape([1, 0, 1], "test")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_index_routes_agree_on_random_subcomplexes(seed):
    Q = QuotientComplex(sphere_model(3, [1, 1]))
    A = random_subcomplex(Q, np.random.default_rng(seed))
    assert A.is_closed()
    assert cohom_index(A, cross_check=True) == homology_index(A)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_index_monotone(seed):
    Q = QuotientComplex(sphere_model(3, [1, 1]))
    rng = np.random.default_rng(seed)
    A, B = random_subcomplex(Q, rng), random_subcomplex(Q, rng)
    assert A.intersection(B).issubset(A) and A.issubset(A.union(B))
    assert cohom_index(A.intersection(B)) <= cohom_index(A) <= cohom_index(A.union(B))


def test_join_indices():
    m = JoinModel(sphere_model(3, [1, 1]), circle_complex(3))
    # full L^3 joined with a vertex: 4 + 1
    assert cohom_index(m.subcomplex_join(m.QX.full(), m.QY.vertex())) == 5
    c = JoinModel(circle_complex(3), circle_complex(3))
    # two circles give L^3
    assert cohom_index(c.subcomplex_join(c.QX.full(), c.QY.full())) == 4
    # two vertices give a free orbit of edges, a circle
    assert cohom_index(c.subcomplex_join(c.QX.vertex(), c.QY.vertex())) == 2


@pytest.mark.parametrize("k", [3, 5])
def test_join_of_generators(k):
    m = JoinModel(circle_complex(k), circle_complex(k))
    y = [homology_basis(m.QX, d)[0] for d in (0, 1)]
    x00 = m.chain_join(y[0], y[0])
    assert is_cycle(m.QXY, x00) and is_boundary(m.QXY, x00)
    for a in (0, 1):
        for b in (0, 1):
            z = m.chain_join(y[a], y[b])
            assert (is_cycle(m.QXY, z) and not is_boundary(m.QXY, z)) == (a == 1 or b == 1)
            assert twist_check(m, y[a], y[b])["homologous"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_boundary_rule_on_random_chains(seed):
    rng = np.random.default_rng(seed)
    m = JoinModel(circle_complex(3), sphere_model(3, [1, 1]))
    x = random_chain(m.QX, int(rng.integers(0, 2)), rng)
    y = random_chain(m.QY, int(rng.integers(0, 4)), rng)
    assert boundary_rule_defect(m, x, y).is_zero()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_closed_form_join_matches_lift_route(seed):
    # the orbit-sum formula against lift, join upstairs, project
    rng = np.random.default_rng(seed)
    m = JoinModel(circle_complex(5), circle_complex(5, 2))
    x = random_chain(m.QX, int(rng.integers(0, 2)), rng)
    y = random_chain(m.QY, int(rng.integers(0, 2)), rng)
    a, b = m.chain_join(x, y), chain_join_via_phi(m, x, y)
    assert a.degree == b.degree and np.array_equal(a.coeffs, b.coeffs)


def test_join_is_associative_on_chains():
    rng = np.random.default_rng(0)
    C = circle_complex(3)
    left = JoinModel(join_complex(C, C), C)
    right = JoinModel(C, join_complex(C, C))
    inner_l = JoinModel(C, C)
    inner_r = JoinModel(C, C)
    QC = inner_l.QX
    for _ in range(20):
        x, y, z = (random_chain(QC, int(rng.integers(0, 2)), rng) for _ in range(3))
        a = left.chain_join(inner_l.chain_join(x, y), z)
        b = right.chain_join(x, inner_r.chain_join(y, z))
        assert np.array_equal(a.coeffs, b.coeffs)


def test_chain_arithmetic():
    Q = QuotientComplex(circle_complex(3))
    x = ChainVector(1, [2], 3)
    assert (x + x).coeffs.tolist() == [1]
    assert (x - x).is_zero() and x.scale(3).is_zero()
    assert chain_boundary(Q, x).is_zero()
    with pytest.raises(ValueError):
        x + ChainVector(0, [1], 3)


def test_text_round_trip():
    X = sphere_model(3, [1, 2])
    Q = QuotientComplex(X)
    subs = {"edge": [Q.reps[1][0]]}
    X2, subs2 = complex_from_text(complex_to_text(X, subs))
    assert X2 == X
    assert subs2 == {"edge": [tuple(Q.reps[1][0])]}


def test_property_suite_small():
    rep = property_suite(samples=15, seed=3)
    assert rep.ok, rep.violations[:3]
    assert set(rep.checks) == {"monotonicity", "lefschetz", "subadditivity", "join_quasi_additivity", "join_stability"}
    assert rep.as_dict()["k"] == 3
