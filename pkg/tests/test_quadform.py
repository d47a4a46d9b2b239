from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lensmaslov.lens_core import LensData, complex_structure
from lensmaslov.maslov import random_symplectic, three_piece_rotation_matrix
from lensmaslov.quadform import (
    QuadForm,
    bracketings,
    diagonal_kernel,
    direct_sum,
    form_from_text,
    form_to_text,
    generated_linear_map,
    index_i,
    inertia,
    leaf_count,
    primitive_quad,
    reduce_identity_form,
    reeb_quad,
    sharp_chain,
    sharp_quad,
    stabilize,
    zero_form,
    zero_tower,
)


def test_inertia_counts():
    assert inertia(np.diag([1.0, -2.0, 0.0, 3.0])) == (1, 1, 2)
    assert index_i(QuadForm(np.diag([-1.0, 0.0]), 1, 0)) == 2
    assert index_i(zero_form(2)) == 4


def test_reeb_quad_value():
    # rotation by 2 pi / 3 is generated by tan(pi / 3) |q|^2
    Q = reeb_quad(1 / 3)
    assert np.allclose(Q.matrix, 2 * math.tan(math.pi / 3) * np.eye(2))
    with pytest.raises(ValueError):
        reeb_quad(0.5)


@pytest.mark.parametrize("t", [0.0, 0.2, 0.5, 0.8, 1.0])
def test_three_pieces_match_explicit_matrix(t):
    # the left-nested chain, written as v^T A v, is the explicit matrix
    Q = sharp_chain([reeb_quad(t / 3)] * 3)
    assert np.allclose(Q.matrix, 2 * three_piece_rotation_matrix(t), atol=1e-12)


def test_three_piece_endpoint_indices():
    # i = 6 at the identity and 4 after a full turn
    assert index_i(QuadForm(three_piece_rotation_matrix(0.0), 1, 4)) == 6
    assert index_i(QuadForm(three_piece_rotation_matrix(1.0), 1, 4)) == 4


def test_right_nesting_gives_same_indices():
    for t in (0.0, 1.0):
        R = reeb_quad(t / 3)
        left = sharp_quad(sharp_quad(R, R), R)
        right = sharp_quad(R, sharp_quad(R, R))
        assert index_i(left) == index_i(right)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_zero_towers(n, m):
    # an identity-generating tower of m leaves has i = 2nm
    for shape in bracketings(m):
        Q = zero_tower(n, shape)
        assert leaf_count(shape) == m
        assert Q.N == 2 * (m - 1)
        assert index_i(Q) == 2 * n * m


def test_diagonal_is_kernel_of_zero_tower():
    Q = zero_tower(2, ((0, 0), 0))
    V = diagonal_kernel(2, Q.N)
    assert np.allclose(Q.matrix @ V, 0)


def _sym(rng, d):
    S = rng.standard_normal((d, d))
    return S + S.T


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_index_additive_on_direct_sums(seed):
    rng = np.random.default_rng(seed)
    Q1 = QuadForm(_sym(rng, 2), 1, 0)
    Q2 = QuadForm(_sym(rng, 4), 1, 1)
    assert inertia(direct_sum(Q1, Q2))[1:] == tuple(a + b for a, b in zip(inertia(Q1.matrix)[1:], inertia(Q2.matrix)[1:]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_primitive_generates_its_map(seed):
    rng = np.random.default_rng(seed)
    A = random_symplectic(2, rng, 0.15)
    assert np.allclose(generated_linear_map(primitive_quad(A)), A, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_sharp_generates_composition(seed):
    # the product form generates B o A
    rng = np.random.default_rng(seed)
    A, B = random_symplectic(1, rng, 0.15), random_symplectic(1, rng, 0.15)
    Q = sharp_quad(primitive_quad(A), primitive_quad(B))
    assert np.allclose(generated_linear_map(Q), B @ A, atol=1e-8)


def test_primitive_requires_small_map():
    with pytest.raises(ValueError):
        primitive_quad(-np.eye(2))


def test_reduce_identity_form_removes_base():
    Q = zero_tower(1, (0, (0, 0)))
    fibre, Psi = reduce_identity_form(Q)
    R = Psi.T @ Q.matrix @ Psi
    assert np.allclose(R[:2], 0) and np.allclose(R[:, :2], 0)
    # the base is the kernel direction: the fibre form carries the rest
    assert index_i(fibre) == index_i(Q) - 2
    with pytest.raises(ValueError):
        reduce_identity_form(sharp_quad(reeb_quad(0.1), reeb_quad(0.1)))


def test_stabilize_adds_fibre_index():
    Q = stabilize(reeb_quad(0.1), -np.eye(2))
    assert Q.N == 1 and index_i(Q) == index_i(reeb_quad(0.1)) + 2
    with pytest.raises(ValueError):
        stabilize(reeb_quad(0.1), np.eye(3))


def test_lens_forms_are_invariant():
    lens = LensData(5, (1, 2))
    Q = sharp_quad(reeb_quad(0.1, 2, lens), reeb_quad(0.2, 2, lens))
    assert Q.invariance_defect() < 1e-12
    assert np.allclose(Q.action_matrix(5), np.eye(Q.dim))


def test_text_round_trip():
    lens = LensData(3, (1, 2))
    Q = sharp_quad(reeb_quad(0.1, 2, lens), zero_form(2, lens))
    Q2 = form_from_text(form_to_text(Q))
    assert np.array_equal(Q2.matrix, Q.matrix) and (Q2.n, Q2.N, Q2.lens) == (Q.n, Q.N, Q.lens)


def test_shape_validation():
    with pytest.raises(ValueError):
        QuadForm(np.eye(3), 1, 0)
    with pytest.raises(ValueError):
        QuadForm(np.array([[0.0, 1.0], [0.0, 0.0]]), 1, 0)
    with pytest.raises(ValueError):
        sharp_quad(reeb_quad(0.1, 1), reeb_quad(0.1, 2))


def test_complex_structure_squares_to_minus_one():
    J = complex_structure(3)
    assert np.allclose(J @ J, -np.eye(6))
