#!/usr/bin/env python
# -*- coding: utf-8 -*-

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from conftest import ETA3, SQRT3, frieze
from rum_spectrum.exceptions import ContractViolationError, UsageError, ValidationError
from rum_spectrum.gain import (COMPONENT_CONTINUOUS, COMPONENT_ISOLATED, AffineIsometry, GainEdge,
                               GainFramework, RepresentationTau, evaluate_grid,
                               joint_spectral_points, orbit_matrix, rum_membership,
                               rum_spectrum, rum_spectrum_finite, rum_spectrum_scan,
                               spectrum_bound_report)
from rum_spectrum.group import AbelianGroupSpec, Character, same_character_sets

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"


def parallel(u, v):
    u, v = np.asarray(u, dtype=complex), np.asarray(v, dtype=complex)
    return abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))


def characters(spec, pairs):
    return [Character(spec, angles, torsion) for angles, torsion in pairs]


def test_affine_isometry_must_be_unitary():
    with pytest.raises(ContractViolationError):
        AffineIsometry(np.diag([1.0, 2.0]))


def test_representation_checks_torsion_order(z2_z3):
    rotation = AffineIsometry(np.diag([1.0, 1j]))
    with pytest.raises(ContractViolationError):
        RepresentationTau(z2_z3, [AffineIsometry(np.eye(2)), rotation])


def test_representation_checks_commutation():
    spec = AbelianGroupSpec(2, ())
    swap = AffineIsometry(np.array([[0.0, 1.0], [1.0, 0.0]]))
    flip = AffineIsometry(np.diag([1.0, -1.0]))
    with pytest.raises(ContractViolationError):
        RepresentationTau(spec, [swap, flip])


def test_dtau_negative_powers(cinfh):
    tau = cinfh.G0.tau
    gamma = tau.group.element((3,), (1,))
    assert np.allclose(tau.dtau(gamma) @ tau.dtau(-gamma), np.eye(3))
    assert np.allclose(tau.dtau_many(np.array([[2, 0], [-2, 0]]))[1],
                       np.linalg.matrix_power(tau.generator_images[0].linear.conj().T, 2))


def test_affine_part_of_frieze_translation(frieze_g0):
    tau = frieze_g0.G0.tau
    point = tau.apply(tau.group.element((2,), (1,)), [0.0, -1.0])
    assert np.allclose(point, [2.0, 1.0])


def test_zero_gain_loop_is_rejected(z_z2):
    with pytest.raises(ValidationError):
        GainEdge("e", "v", "v", z_z2.zero(), np.ones((1, 2)))


def test_parallel_edges_need_distinct_gains(frieze_g0):
    G0 = frieze_g0.G0
    with pytest.raises(ValidationError):
        G0.with_edges([G0.edges[0], GainEdge("e9", "v", "v", G0.edges[0].gain, G0.edges[0].phi)])


def test_unknown_vertex_is_rejected(frieze_g0):
    G0 = frieze_g0.G0
    with pytest.raises(ValidationError):
        G0.with_edges([GainEdge("e9", "v", "w", G0.edges[0].gain, G0.edges[0].phi)])


def test_c3h_joint_spectral_points(c3h):
    """The three joint spectral characters of the C3h representation"""
    points = joint_spectral_points(c3h.G0)
    spec = c3h.G0.group
    assert same_character_sets([p.character for p in points],
                               characters(spec, [((), (1, 0)), ((), (0, 2)), ((), (0, 1))]))
    lambdas = [tuple(p.eigenpair.lambdas) for p in points]
    for expected in [(-1, 1), (1, ETA3), (1, np.conj(ETA3))]:
        assert any(np.allclose(found, expected, atol=1e-9) for found in lambdas)


def test_joint_points_independent_of_generating_tuple(c3h):
    spec = c3h.G0.group
    standard = joint_spectral_points(c3h.G0)
    redundant = joint_spectral_points(c3h.G0, extra_generators=[spec.element((), (1, 1))])
    assert same_character_sets([p.character for p in standard],
                               [p.character for p in redundant])


def test_c3h_euclidean_kernels(c3h):
    G0 = c3h.G0
    spec = G0.group
    points = rum_spectrum_finite(G0)
    assert len(points) == 6
    assert all(point.kernel_dim == 1 for point in points)
    expected = {(0, 0): [1, -SQRT3, 0],
                (1, 1): [1j, 1, -2 * np.conj(ETA3)],
                (1, 2): [1j, -1, 2 * ETA3]}
    for torsion, vector in expected.items():
        _, kernel = rum_membership(G0, Character(spec, (), torsion))
        assert parallel(kernel[:, 0], vector) >= 1 - 1e-8


def test_c3h_cylindrical_kernels(c3h_cylindrical):
    G0 = c3h_cylindrical.G0
    assert np.allclose(G0.edges[1].phi, [[0, 0, 2]])
    for point in rum_spectrum_finite(G0):
        if point.character.torsion_indices == (1, 0):
            assert point.kernel_dim == 2
            _, kernel = rum_membership(G0, point.character)
            span = np.array([[1, 0], [-SQRT3, 0], [0, 1]], dtype=complex)
            assert np.max(subspace_angles(kernel, span)) <= 1e-8
        else:
            assert point.kernel_dim == 1


def test_orbit_matrix_of_non_loop_edge(z_group):
    tau = RepresentationTau(z_group, [AffineIsometry(np.array([[0.0, 1.0], [-1.0, 0.0]]))])
    phi = np.array([[1.0, 2.0]])
    edge = GainEdge("e", "a", "b", z_group.element((1,)), phi)
    G0 = GainFramework(["a", "b"], [edge], tau)
    chi = Character(z_group, (np.pi / 2,))
    matrix = orbit_matrix(G0, chi).matrix
    assert np.allclose(matrix[:, :2], phi)
    assert np.allclose(matrix[:, 2:], -1j * phi @ tau.generator_images[0].linear)


def test_edgeless_framework_is_flexible_everywhere(edgeless):
    points = rum_spectrum(edgeless.G0)
    assert len(points) == 2
    assert all(point.kernel_dim == 1 for point in points)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_frieze_scan_finds_three_characters(q):
    G0 = frieze(q)
    result = rum_spectrum_scan(G0, samples_per_circle=4096)
    spec = G0.group
    assert len(result.points) == 3
    assert all(point.component == COMPONENT_ISOLATED for point in result.points)
    expected = characters(spec, [((0.0,), (0,)), ((0.0,), (1,)), ((np.pi,), (0,))])
    assert same_character_sets(result.characters, expected, tol=1e-6)
    _, kernel = rum_membership(G0, Character(spec, (np.pi,), (0,)))
    assert kernel.shape[1] == 1
    assert parallel(kernel[:, 0], [0, 1]) >= 1 - 1e-8


@pytest.mark.parametrize("samples", [17, 33, 65, 97])
def test_frieze_scan_on_coarse_odd_grids(samples):
    """pi is no grid point: the isolated zero has to be found by refinement"""
    G0 = frieze(2.0)
    result = rum_spectrum_scan(G0, samples_per_circle=samples)
    expected = characters(G0.group, [((0.0,), (0,)), ((0.0,), (1,)), ((np.pi,), (0,))])
    assert len(result.points) == 3
    assert same_character_sets(result.characters, expected, tol=1e-6)


def test_grid_slack_follows_the_gains(frieze_g0, edgeless):
    G0 = frieze_g0.G0
    norms = [np.linalg.norm(edge.phi, 2) for edge in G0.edges]
    assert G0.angle_lipschitz == pytest.approx(np.sqrt(sum(n ** 2 for n in norms)))
    assert edgeless.G0.angle_lipschitz == 0


def test_braced_frieze_spectrum_is_joint_spectrum(frieze_g1):
    G0 = frieze_g1.G0
    points = rum_spectrum(G0, samples_per_circle=1024)
    assert same_character_sets([p.character for p in points],
                               [p.character for p in joint_spectral_points(G0)], tol=1e-6)


def test_scan_trace(frieze_g0):
    result = rum_spectrum_scan(frieze_g0.G0, samples_per_circle=64)
    assert len(result.trace) == 128
    assert {"angle_0", "torsion_0", "sigma_min", "sigma_max", "kernel_dim",
            "flagged"} <= set(result.trace.columns)
    assert result.trace["flagged"].sum() == 3


def test_cinfh_joint_points_and_full_spectrum(cinfh, rng):
    G0 = cinfh.G0
    spec = G0.group
    expected = characters(spec, [((0.0,), (1,)), ((2 * np.pi - 1,), (0,)), ((1.0,), (0,))])
    assert same_character_sets([p.character for p in joint_spectral_points(G0)], expected)

    edges = [GainEdge(e.id, e.source, e.range, e.gain, rng.normal(size=(1, 3)))
             for e in G0.edges]
    generic = G0.with_edges(edges)
    for _ in range(64):
        chi = Character(spec, (rng.uniform(0, 2 * np.pi),), (int(rng.integers(2)),))
        is_member, kernel = rum_membership(generic, chi)
        assert is_member
        assert kernel.shape[1] >= 1


def test_cinfh_scan_reports_continuous_spectrum(cinfh):
    result = rum_spectrum_scan(cinfh.G0, samples_per_circle=64)
    continuous = [p for p in result.points if p.component == COMPONENT_CONTINUOUS]
    assert len(continuous) == 128
    joint = [p.character for p in joint_spectral_points(cinfh.G0)]
    for chi in joint:
        assert any(chi.is_close(p.character, 1e-6) for p in result.points)


def test_scan_is_independent_of_worker_count(frieze_g0):
    G0 = frieze_g0.G0
    angles = np.linspace(0, 2 * np.pi, 100, endpoint=False)[:, np.newaxis]
    single = evaluate_grid(G0, angles, (1,), n_processes=1)
    double = evaluate_grid(G0, angles, (1,), n_processes=2)
    for first, second in zip(single, double):
        assert np.allclose(first, second, rtol=0, atol=1e-14)


def test_scan_preconditions(c3h, frieze_g0):
    with pytest.raises(UsageError):
        rum_spectrum_scan(c3h.G0)
    with pytest.raises(UsageError):
        rum_spectrum_scan(frieze_g0.G0, samples_per_circle=8)
    with pytest.raises(UsageError):
        rum_spectrum_finite(frieze_g0.G0)


def test_spectrum_bound_chain(frieze_g0, c3h):
    for document in (frieze_g0, c3h):
        G0 = document.G0
        points = rum_spectrum(G0, samples_per_circle=256)
        report = spectrum_bound_report(G0, [p.character for p in points])
        assert report["omega_detected"] >= report["joint_eigenvalues"]
        assert report["joint_eigenvalues"] >= report["max_sampled_eigenvalues"]
    assert report["joint_eigenvalues"] == 3
