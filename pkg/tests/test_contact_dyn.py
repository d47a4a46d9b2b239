from __future__ import annotations

import math

import numpy as np
import pytest

from lensmaslov.contact_dyn import (
    ComposedMap,
    FlowMap,
    LinearMap,
    RotationMap,
    decompose,
    discriminant_times,
    is_c1_small,
    smallness_margin,
    translated_points,
)
from lensmaslov.lens_core import ContactHamiltonian, LensData, perturbed_reeb, random_sphere_points
from lensmaslov.maslov import random_symplectic


def test_reeb_flow_map_is_rotation():
    z = random_sphere_points(2, 4, np.random.default_rng(0))
    phi = FlowMap(ContactHamiltonian.reeb(2), 1.3)
    assert np.allclose(phi(z), RotationMap(2, 1.3)(z), atol=1e-9)
    assert np.allclose(phi.jacobian(z[0]), RotationMap(2, 1.3).A, atol=1e-6)


def test_inverse_and_composition():
    H = perturbed_reeb(LensData.standard(3, 2), 0.1, 0)
    phi = FlowMap(H, 0.4)
    z = random_sphere_points(2, 3, np.random.default_rng(1))
    assert np.allclose(phi.inverse()(phi(z)), z, atol=1e-9)
    psi = ComposedMap([phi, FlowMap(H, 0.3)])
    assert np.allclose(psi(z), FlowMap(H, 0.7)(z), atol=1e-9)


def test_linear_map_jacobian():
    A = random_symplectic(2, np.random.default_rng(2))
    z = random_sphere_points(2, 2, np.random.default_rng(3))
    assert np.allclose(LinearMap(A).jacobian(z)[1], A)
    assert np.allclose(ComposedMap([LinearMap(A), LinearMap(A)]).jacobian(z[0]), A @ A, atol=1e-6)


def test_smallness_of_rotations():
    # sigma_min((I + R_theta)/2) = |cos(theta / 2)|
    for theta in (0.5, 2 * math.pi / 3, 2.8):
        assert smallness_margin(RotationMap(1, theta)) == pytest.approx(abs(math.cos(theta / 2)), abs=1e-12)
    assert is_c1_small(RotationMap(2, 2 * math.pi / 3)).small
    assert not is_c1_small(RotationMap(2, math.pi))


def test_decompose_reeb_full_turn():
    # pieces of angle < 2 arccos(0.1) ~ 2.94: a full turn needs 3
    bps = decompose(ContactHamiltonian.reeb(1), 2 * math.pi)
    assert len(bps) == 4 and bps[0] == 0.0 and bps[-1] == 2 * math.pi
    assert decompose(ContactHamiltonian.reeb(1), 0.0) == [0.0, 0.0]
    greedy = decompose(ContactHamiltonian.reeb(1), 2 * math.pi, strategy="greedy")
    assert len(greedy) == 4


def test_decompose_perturbed_pieces_are_small():
    H = perturbed_reeb(LensData.standard(3, 2), 0.1, 1)
    bps = decompose(H, 2.0)
    for a, b in zip(bps[:-1], bps[1:]):
        assert is_c1_small(FlowMap(H, b - a)).small


def test_translated_points_of_perturbed_flow():
    lens = LensData.standard(3, 1)
    phi = FlowMap(perturbed_reeb(lens, 0.1, 0), 1.0)
    search = translated_points(phi, lens, seeds=32)
    nd = search.nondegenerate
    assert len(nd) >= 2
    for p in nd:
        assert abs(np.linalg.norm(p.p) - 1) < 1e-10
        assert np.linalg.norm(phi(p.p) - np.exp(1j * p.eta) * p.p) < 1e-8
    # the solutions are distinct in the quotient
    for i, a in enumerate(nd):
        for b in nd[i + 1:]:
            assert lens.orbit_distance(a.p, b.p) > 1e-6


def test_translated_points_of_reeb_form_a_family():
    lens = LensData.standard(3, 2)
    search = translated_points(FlowMap(ContactHamiltonian.reeb(2), 1.0), lens)
    assert search.degenerate_family
    assert not search.nondegenerate


def test_discriminant_times_antipodal_circle():
    # on L_2^3 the Reeb flow returns to the orbit at multiples of pi
    lens = LensData.standard(2, 2)
    scan = discriminant_times(ContactHamiltonian.reeb(2), lens, 2 * math.pi)
    assert len(scan.values) == 2
    assert np.allclose(scan.values, [math.pi, 2 * math.pi], atol=1e-8)
    assert [d.group_element for d in scan.times] == [1, 0]


def test_discriminant_every_time_for_zero():
    scan = discriminant_times(ContactHamiltonian.zero(1), LensData.standard(3, 1), 1.0)
    assert scan.every_time


def test_short_perturbed_flow_has_no_crossings():
    lens = LensData.standard(3, 2)
    scan = discriminant_times(perturbed_reeb(lens, 0.1, 0), lens, 1.5)
    assert [t for t in scan.values if t > 0] == []
