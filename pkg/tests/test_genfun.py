from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lensmaslov.contact_dyn import ComposedMap, FlowMap, LinearMap, RotationMap, decompose
from lensmaslov.genfun import (
    DirectSum,
    GeneratingFunctionError,
    MultiSharp,
    Primitive,
    Quadratic,
    Stabilize,
    base_graph_error,
    check_invariants,
    coupling_sign_mutation,
    fibre_critical,
    flow_family,
    graph_error,
    monotone_family_check,
    quasiadd_embed,
    sharp,
)
from lensmaslov.lens_core import ContactHamiltonian, LensData, perturbed_reeb, random_sphere_points, to_real
from lensmaslov.maslov import random_symplectic
from lensmaslov.quadform import primitive_quad, reeb_quad, sharp_quad


def _witnesses(n, count, seed):
    rng = np.random.default_rng(seed)
    return random_sphere_points(n, count, rng) * rng.uniform(0.5, 2.0, (count, 1))


def test_primitive_of_rotation_is_tangent_form():
    # rotation by theta is generated by tan(theta / 2) |q|^2
    theta = 2 * math.pi / 3
    F = Primitive(RotationMap(2, theta))
    q = np.random.default_rng(0).standard_normal((5, 4))
    assert np.allclose(F.value(q), math.tan(theta / 2) * np.sum(q ** 2, axis=1), rtol=1e-12)


def test_primitive_matches_quadratic_form_for_linear_maps():
    A = random_symplectic(2, np.random.default_rng(1), 0.2)
    F = Primitive(LinearMap(A))
    Q = primitive_quad(A)
    q = np.random.default_rng(2).standard_normal((6, 4))
    assert np.allclose(F.value(q), Q(q), atol=1e-12)
    assert np.allclose(F.hessian(q[0]), Q.matrix, atol=1e-10)


def test_nonlinear_primitive_hessian_is_symmetric_gradient():
    lens = LensData.standard(3, 2)
    F = Primitive(FlowMap(perturbed_reeb(lens, 0.1, 0), 0.5), lens)
    r = check_invariants(F, samples=100)
    assert r["homogeneity"] < 1e-10 and r["invariance"] < 1e-10 and r["gradient"] < 1e-6


def test_non_small_map_is_rejected():
    with pytest.raises(GeneratingFunctionError):
        Primitive(RotationMap(1, math.pi))


def test_sharp_of_quadratics_matches_form_product():
    Q1, Q2 = reeb_quad(0.1), reeb_quad(0.2)
    F = sharp(Quadratic(Q1), Quadratic(Q2))
    x = np.random.default_rng(3).standard_normal((8, F.dim))
    assert np.allclose(F.value(x), sharp_quad(Q1, Q2)(x), atol=1e-12)


def test_graph_of_linear_composition():
    rng = np.random.default_rng(4)
    A, B = random_symplectic(2, rng, 0.2), random_symplectic(2, rng, 0.2)
    F = sharp(Primitive(LinearMap(A)), Primitive(LinearMap(B)))
    r = graph_error(F, LinearMap(B @ A), _witnesses(2, 5, 5))
    assert r["graph_error"] < 1e-10 and r["vertical_residual"] < 1e-10


def test_graph_of_nested_flows():
    lens = LensData.standard(3, 2)
    H = perturbed_reeb(lens, 0.1, 3)
    maps = [FlowMap(H, 0.3), FlowMap(H, 0.4), FlowMap(H, 0.2)]
    F = sharp(sharp(Primitive(maps[0], lens), Primitive(maps[1], lens)), Primitive(maps[2], lens))
    w = _witnesses(2, 3, 6)
    r = graph_error(F, ComposedMap(maps), w)
    assert r["graph_error"] < 1e-7 and r["vertical_residual"] < 1e-7
    assert len(fibre_critical(F, w)) == 3


def test_base_newton_route_agrees():
    # the fibre Newton solve at fixed base is an independent route to the graph
    rng = np.random.default_rng(7)
    A, B = random_symplectic(1, rng, 0.2), random_symplectic(1, rng, 0.2)
    F = sharp(Primitive(LinearMap(A)), Primitive(LinearMap(B)))
    q = rng.standard_normal((4, 2))
    assert base_graph_error(F, LinearMap(B @ A), q) < 1e-8


@pytest.mark.parametrize("N", [2, 4])
def test_multi_sharp_generates_product(N):
    rng = np.random.default_rng(N)
    mats = [random_symplectic(1, rng, 0.2) for _ in range(N)]
    F = MultiSharp([Primitive(LinearMap(A)) for A in mats])
    prod = np.eye(2)
    for A in mats:
        prod = A @ prod
    r = graph_error(F, LinearMap(prod), _witnesses(1, 4, N))
    assert r["graph_error"] < 1e-10 and r["vertical_residual"] < 1e-10
    with pytest.raises(ValueError):
        MultiSharp([Primitive(LinearMap(mats[0]))] * 3)


def test_stabilization_keeps_graph():
    A = random_symplectic(1, np.random.default_rng(9), 0.2)
    F = Stabilize(sharp(Primitive(LinearMap(A)), Primitive(LinearMap(A))), -np.eye(2))
    r = graph_error(F, LinearMap(A @ A), _witnesses(1, 3, 10))
    assert r["graph_error"] < 1e-10 and r["vertical_residual"] < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_quasi_additivity_is_exact(seed):
    rng = np.random.default_rng(seed)
    F1 = Primitive(LinearMap(random_symplectic(1, rng, 0.2)))
    F2 = sharp(Primitive(LinearMap(random_symplectic(1, rng, 0.2))), Primitive(LinearMap(random_symplectic(1, rng, 0.2))))
    assert quasiadd_embed(F1, F2, 50, seed) <= 1e-12
    assert DirectSum(F1, F2).dim == F1.dim + F2.dim


def test_mutation_breaks_composition():
    rng = np.random.default_rng(11)
    A, B = random_symplectic(1, rng, 0.3), random_symplectic(1, rng, 0.3)
    w = _witnesses(1, 4, 12)
    with coupling_sign_mutation():
        F = sharp(Primitive(LinearMap(A)), Primitive(LinearMap(B)))
        bad = graph_error(F, LinearMap(B @ A), w)
    assert max(bad["graph_error"], bad["vertical_residual"]) > 1e-3
    good = graph_error(sharp(Primitive(LinearMap(A)), Primitive(LinearMap(B))), LinearMap(B @ A), w)
    assert good["graph_error"] < 1e-10


def test_flow_family_endpoints():
    H = ContactHamiltonian.reeb(1)
    T = 2 * math.pi
    bps = decompose(H, T)
    F = flow_family(H, bps, T)
    w = _witnesses(1, 3, 13)
    r = graph_error(F, FlowMap(H, T), w)
    assert r["graph_error"] < 1e-8
    F0 = flow_family(H, bps, 0.0)
    x = np.random.default_rng(14).standard_normal((4, F0.dim))
    # every piece is the identity primitive, so only the coupling remains
    assert np.allclose(F0.value(x), sharp(sharp(Quadratic(reeb_quad(0)), Quadratic(reeb_quad(0))), Quadratic(reeb_quad(0))).value(x))


def test_positive_flow_family_is_nondecreasing():
    r = monotone_family_check(ContactHamiltonian.reeb(1), 2 * math.pi)
    assert r["min_derivative"] >= -1e-6 and r["max_derivative"] > 0
    assert r["pieces"] == 3


def test_reeb_primitive_gradient_is_graph():
    F = Primitive(RotationMap(1, 1.0))
    z = _witnesses(1, 3, 15)
    x, w = F.critical_from_witness(z)
    assert np.allclose(to_real(1j * (z - w)), F.gradient(x), atol=1e-12)
