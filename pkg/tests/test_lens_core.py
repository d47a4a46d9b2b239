from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lensmaslov.lens_core import (
    ContactHamiltonian,
    HamTerm,
    LensData,
    complex_structure,
    hamiltonian_flow,
    invariant_monomials,
    lift_hamiltonian,
    perturbed_reeb,
    random_sphere_points,
    reeb,
    rotation_matrix,
    tau,
    tau_inverse,
    to_complex,
    to_real,
    zk_orbit,
)


def test_lens_data_rejects_bad_input():
    with pytest.raises(ValueError):
        LensData(4, (1, 1))
    with pytest.raises(ValueError):
        LensData(3, (3, 1))


def test_generator_has_order_k():
    lens = LensData(5, (1, 2, 3))
    z = random_sphere_points(3, 4, np.random.default_rng(0))
    assert np.allclose(lens.act(z, 5), z, atol=1e-14)
    assert np.allclose(to_real(lens.act(z)), to_real(z) @ lens.generator_matrix().T, atol=1e-14)
    assert len(zk_orbit(z[0], lens)) == 5


def test_real_complex_round_trip_and_j():
    z = np.array([1 + 2j, -3 + 0.5j])
    assert np.array_equal(to_complex(to_real(z)), z)
    J = complex_structure(2)
    # multiplication by i is J in interleaved coordinates
    assert np.allclose(to_real(1j * z), J @ to_real(z))
    assert np.allclose(rotation_matrix([0.3, 0.3]), np.cos(0.3) * np.eye(4) + np.sin(0.3) * J)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_tau_round_trip(seed):
    rng = np.random.default_rng(seed)
    z, Z = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    q, p = tau(z, Z)
    z2, Z2 = tau_inverse(q, p)
    assert np.allclose(z2, z) and np.allclose(Z2, Z)


def test_tau_sends_diagonal_to_zero_section():
    z = np.array([0.3 - 1j, 2.0 + 0.1j])
    q, p = tau(z, z)
    assert np.array_equal(q, z) and np.allclose(p, 0)


def test_reeb_lift_flows_by_rotation():
    # h = 1 integrates to e^{it} z; RK4 error at step 0.01 is ~1e-11
    H = ContactHamiltonian.reeb(2)
    z = random_sphere_points(2, 5, np.random.default_rng(1)) * 1.7
    for t in (0.5, 1.0, 2 * math.pi / 3):
        assert np.max(np.abs(hamiltonian_flow(H, z, t) - reeb(z, t))) < 1e-9


def test_gradient_matches_finite_differences():
    lens = LensData.standard(3, 2)
    H = perturbed_reeb(lens, 0.2, seed=4)
    x = to_real(random_sphere_points(2, 3, np.random.default_rng(2))) * 1.3
    g = to_real(H.gradient(to_complex(x)))
    h = 1e-6
    for j in range(4):
        e = np.zeros(4)
        e[j] = h
        fd = (H.value(to_complex(x + e)) - H.value(to_complex(x - e))) / (2 * h)
        assert np.allclose(g[:, j], fd, atol=1e-7)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 5.0))
def test_lift_is_two_homogeneous_and_invariant(seed, lam):
    lens = LensData(3, (1, 2))
    H = perturbed_reeb(lens, 0.3, seed)
    z = random_sphere_points(2, 4, np.random.default_rng(seed))
    assert np.allclose(H.value(lam * z), lam ** 2 * H.value(z), rtol=1e-10)
    assert np.allclose(H.value(lens.act(z)), H.value(z), atol=1e-12)


def test_non_invariant_term_rejected():
    lens = LensData.standard(3, 1)
    H = ContactHamiltonian(1, 1.0, [HamTerm(0.1, "re", (1,), (0,))])
    with pytest.raises(ValueError, match="not invariant"):
        lift_hamiltonian(H, lens)
    assert lift_hamiltonian(perturbed_reeb(lens, 0.1), lens) is not None


def test_invariant_monomials_have_zero_charge():
    lens = LensData(5, (1, 2))
    for a, b in invariant_monomials(lens, 4):
        assert sum(w * (x - y) for w, x, y in zip(lens.weights, a, b)) % 5 == 0


def test_flow_is_conical_and_equivariant():
    lens = LensData.standard(3, 2)
    H = perturbed_reeb(lens, 0.2, 1)
    z = random_sphere_points(2, 3, np.random.default_rng(3))
    a = hamiltonian_flow(H, 2.5 * z, 0.7)
    assert np.allclose(a, 2.5 * hamiltonian_flow(H, z, 0.7), atol=1e-12)
    assert np.allclose(hamiltonian_flow(H, lens.act(z), 0.7), lens.act(hamiltonian_flow(H, z, 0.7)), atol=1e-12)


def test_flow_preserves_lift():
    H = perturbed_reeb(LensData.standard(3, 2), 0.3, 2)
    z = random_sphere_points(2, 4, np.random.default_rng(4))
    assert np.allclose(H.value(hamiltonian_flow(H, z, 1.0)), H.value(z), atol=1e-9)


def test_spec_round_trip_and_quadratic_hessian():
    H = perturbed_reeb(LensData.standard(3, 2), 0.1, 7)
    H2 = ContactHamiltonian.from_spec(H.spec())
    z = random_sphere_points(2, 5, np.random.default_rng(5))
    assert np.allclose(H.value(z), H2.value(z))
    R = ContactHamiltonian.reeb(2)
    assert R.is_quadratic() and np.allclose(R.hessian(), np.eye(4))
