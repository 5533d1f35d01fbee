#!/usr/bin/env python
# -*- coding: utf-8 -*-

import numpy as np
import pytest

from conftest import frieze
from rum_spectrum.ap import (SampledFunction, TrigPolynomial, averaging_operator,
                             bohr_fourier_spectrum, check_ap_rigidity, default_coefficient_tol,
                             fejer_approximation, fejer_weights, fourier_coefficient,
                             fourier_report, mean_translation_defect, truncated_mean, untwist)
from rum_spectrum.exceptions import StructuralError, UnsupportedError, UsageError
from rum_spectrum.flex import ChiSymmetricVector, WindowedField, verify_flex
from rum_spectrum.gain import AffineIsometry, GainFramework, RepresentationTau, rum_spectrum
from rum_spectrum.group import (AbelianGroupSpec, Character, Window, folner_defect,
                                same_character_sets)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"


@pytest.fixture
def planted(z_z2):
    """Three characters with known coefficients on Z x Z2"""
    return TrigPolynomial(z_z2, [(Character(z_z2, (0.5,), (0,)), [1.0, 2j]),
                                 (Character(z_z2, (2.0,), (1,)), [0.5, -1.0]),
                                 (Character(z_z2, (0.0,), (0,)), [0.25, 0.25])])


@pytest.fixture
def planted_torsion(z2_z3):
    return TrigPolynomial(z2_z3, [(Character(z2_z3, (), (1, 2)), [1.0, -1j]),
                                  (Character(z2_z3, (), (0, 1)), [0.5, 0.5])])


def test_trig_polynomial_rejects_duplicates(z_z2):
    chi = Character(z_z2, (0.5,), (0,))
    with pytest.raises(StructuralError):
        TrigPolynomial(z_z2, [(chi, [1.0]), (chi, [2.0])])
    with pytest.raises(StructuralError):
        TrigPolynomial(z_z2, [(chi, [1.0]), (Character(z_z2, (1.5,), (0,)), [1.0, 2.0])])


@pytest.mark.parametrize("n", [5, 50, 100, 200])
def test_mean_of_a_character_decays(z_group, rng, n):
    for angle in rng.uniform(1e-3, 2 * np.pi - 1e-3, size=20):
        chi = Character(z_group, (angle,))
        f = SampledFunction.from_trig_polynomial(TrigPolynomial(z_group, [(chi, [1.0])]))
        mean = abs(truncated_mean(f, n)[0])
        assert mean <= 2 / ((2 * n + 1) * abs(1 - np.exp(1j * angle))) + 1e-12


def test_mean_of_trivial_character_is_one(z_z2):
    f = SampledFunction.from_trig_polynomial(
        TrigPolynomial(z_z2, [(Character.trivial(z_z2), [1.0, 2.0])]))
    assert np.allclose(truncated_mean(f, 7), [1.0, 2.0])
    with pytest.raises(UsageError):
        truncated_mean(f, -1)


def test_fourier_coefficients_are_recovered(planted):
    h = SampledFunction.from_trig_polynomial(planted)
    for chi, coefficient in planted.terms:
        assert np.linalg.norm(fourier_coefficient(h, chi, 200) - coefficient) <= 5e-2


def test_fourier_coefficients_are_exact_on_finite_groups(planted_torsion, z2_z3):
    h = SampledFunction.from_trig_polynomial(planted_torsion)
    for chi in z2_z3.characters():
        assert np.allclose(fourier_coefficient(h, chi, 0), planted_torsion.coefficient(chi),
                           atol=1e-12)


def test_fourier_report(planted):
    h = SampledFunction.from_trig_polynomial(planted)
    report = fourier_report(h, planted.characters, 50)
    assert [record["character"]["angles"] for record in report] == [[0.5], [2.0], [0.0]]
    assert report[0]["magnitude"] == pytest.approx(np.sqrt(5), abs=0.1)


def test_bohr_fourier_spectrum_finds_planted_characters(planted, z_z2):
    h = SampledFunction.from_trig_polynomial(planted)
    decoys = [Character(z_z2, (1.0,), (0,)), Character(z_z2, (np.pi,), (1,)),
              Character(z_z2, (0.5,), (1,))]
    detected = bohr_fourier_spectrum(h, decoys + planted.characters, n=200)
    assert detected == planted.characters


def test_default_coefficient_tol(planted, planted_torsion):
    h = SampledFunction.from_trig_polynomial(planted)
    assert default_coefficient_tol(h, 100) == pytest.approx(10 * h.sup_norm(100) / 201)
    finite = SampledFunction.from_trig_polynomial(planted_torsion)
    assert default_coefficient_tol(finite, 0) == pytest.approx(1e-6 * finite.sup_norm(0))


def test_averaging_operator_is_exact_on_finite_groups(planted_torsion, z2_z3):
    h = SampledFunction.from_trig_polynomial(planted_torsion)
    chi, coefficient = planted_torsion.terms[0]
    averaged = averaging_operator(h, chi, 0)
    expected = np.outer(chi.evaluate_coordinates(averaged.window.coordinates), coefficient)
    assert np.allclose(averaged.values, expected, atol=1e-12)
    missing = averaging_operator(h, Character(z2_z3, (), (1, 0)), 0)
    assert np.allclose(missing.values, 0, atol=1e-12)


def test_averaging_operator_projects_onto_a_character(planted):
    h = SampledFunction.from_trig_polynomial(planted)
    chi, coefficient = planted.terms[0]
    averaged = averaging_operator(h, chi, 100, out_radius=5)
    assert averaged.window.radius == 5
    expected = np.outer(chi.evaluate_coordinates(averaged.window.coordinates), coefficient)
    assert np.max(np.abs(averaged.values - expected)) <= 0.1


def test_averaging_operator_needs_a_smaller_output_window(planted):
    h = SampledFunction.from_trig_polynomial(planted)
    with pytest.raises(UsageError):
        averaging_operator(h, planted.characters[0], 5, out_radius=5)


def test_fejer_weights(z_group):
    candidates = [Character(z_group, (a,)) for a in (0.0, 0.3, 0.6, -0.3)]
    weights = fejer_weights(candidates, 50)
    assert weights == pytest.approx([1.0, 50 / 51, 49 / 51, 50 / 51])
    uneven = fejer_weights([Character(z_group, (0.3,)), Character(z_group, (0.45,))], 50)
    assert uneven == pytest.approx([50 / 51, 49 / 51])
    assert fejer_weights([], 3).size == 0


def test_fejer_approximation_on_finite_groups_is_exact(planted_torsion, z2_z3):
    h = SampledFunction.from_trig_polynomial(planted_torsion)
    approximation = fejer_approximation(h, 3, z2_z3.characters(), n=0)
    assert len(approximation.terms) == 2
    for chi, coefficient in planted_torsion.terms:
        assert np.allclose(approximation.coefficient(chi), coefficient, atol=1e-12)


def test_fejer_spectrum_lies_in_the_bohr_spectrum(planted, z_z2):
    h = SampledFunction.from_trig_polynomial(planted)
    candidates = planted.characters + [Character(z_z2, (1.0,), (0,))]
    detected = bohr_fourier_spectrum(h, candidates, n=100)
    approximation = fejer_approximation(h, 10, candidates, n=100)
    assert approximation.characters
    assert all(any(chi.is_close(other) for other in detected)
               for chi in approximation.characters)
    assert all(any(chi.is_close(other) for other in planted.characters)
               for chi in approximation.characters)
    with pytest.raises(UsageError):
        fejer_approximation(h, -1, candidates)


def test_mean_translation_defect_is_bounded(planted, z_z2):
    h = SampledFunction.from_trig_polynomial(planted)
    shift = z_z2.element((3,), (1,))
    n = 50
    bound = 2 * h.sup_norm(n + 3) * float(folner_defect(shift, n))
    assert mean_translation_defect(h, shift, n) <= bound + 1e-12


def test_untwisted_chi_vector_is_a_character(frieze_g0, rng):
    G0 = frieze_g0.G0
    chi = Character(G0.group, (0.4,), (1,))
    amplitude = rng.normal(size=2) + 1j * rng.normal(size=2)
    g = SampledFunction.from_chi_vector(ChiSymmetricVector(chi, amplitude, G0.tau))
    plain = untwist(G0.tau, g)
    coordinates = Window(G0.group, 3).coordinates
    assert np.allclose(plain.evaluate(coordinates),
                       np.outer(chi.evaluate_coordinates(coordinates), amplitude))


def test_bohr_spectrum_of_a_frieze_flex(frieze_g0):
    G0 = frieze_g0.G0
    spec = G0.group
    translation = Character(spec, (0.0,), (0,))
    alternating = Character(spec, (np.pi,), (0,))
    g = (SampledFunction.from_chi_vector(ChiSymmetricVector(translation, [1.0, 0.0], G0.tau)) +
         2 * SampledFunction.from_chi_vector(ChiSymmetricVector(alternating, [0.0, 1.0], G0.tau)))
    assert verify_flex(G0, g.on_window(Window(spec, 3)), tol=1e-9).passed
    candidates = [point.character for point in rum_spectrum(G0, samples_per_circle=1024)]
    detected = bohr_fourier_spectrum(untwist(G0.tau, g), candidates, n=200)
    assert same_character_sets(detected, [translation, alternating], tol=1e-6)


def test_sampled_function_arithmetic_and_checks(planted, z_z2):
    h = SampledFunction.from_trig_polynomial(planted)
    coordinates = Window(z_z2, 2).coordinates
    assert np.allclose((h + 2 * h).evaluate(coordinates), 3 * h.evaluate(coordinates))
    broken = SampledFunction(z_z2, lambda c: np.full((c.shape[0], 1), np.nan), 1)
    with pytest.raises(StructuralError):
        broken.evaluate(coordinates)
    table = SampledFunction.from_field(WindowedField(Window(z_z2, 1), np.ones((6, 1))))
    with pytest.raises(UsageError):
        table.evaluate(np.array([[2, 0]]))


def test_braced_frieze_is_ap_rigid(frieze_g1):
    certificate = check_ap_rigidity(frieze_g1.G0, samples_per_circle=1024)
    assert certificate.ap_rigid
    assert certificate.witnesses == []
    assert certificate.to_dict()["ap_rigid"] is True


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0])
def test_frieze_is_not_ap_rigid(q):
    certificate = check_ap_rigidity(frieze(q), samples_per_circle=1024)
    assert not certificate.ap_rigid
    characters = [w for w in certificate.witnesses if w["kind"] == "character"]
    assert len(characters) == 1
    assert characters[0]["character"]["angles"][0] == pytest.approx(np.pi, abs=1e-6)
    assert characters[0]["character"]["torsion_indices"] == [0]


@pytest.mark.parametrize("samples", [33, 65, 97])
def test_frieze_is_not_ap_rigid_on_coarse_grids(samples):
    certificate = check_ap_rigidity(frieze(2.0), samples_per_circle=samples)
    assert not certificate.ap_rigid
    characters = [w for w in certificate.witnesses if w["kind"] == "character"]
    assert len(characters) == 1
    assert characters[0]["character"]["angles"][0] == pytest.approx(np.pi, abs=1e-6)


def test_edgeless_framework_is_not_ap_rigid(edgeless):
    certificate = check_ap_rigidity(edgeless.G0)
    assert not certificate.ap_rigid
    assert [w["kind"] for w in certificate.witnesses] == ["character"]


def test_non_translational_flex_at_a_joint_point():
    """Two unbraced vertex orbits: the kernel at the joint point moves them independently"""
    spec = AbelianGroupSpec(0, (2,))
    tau = RepresentationTau(spec, [AffineIsometry(np.array([[-1.0]]))])
    G0 = GainFramework(["v", "w"], [], tau, dY=1)
    certificate = check_ap_rigidity(G0)
    assert not certificate.ap_rigid
    kinds = [w["kind"] for w in certificate.witnesses]
    assert kinds.count("character") == 1
    assert kinds.count("flex") == 2


def test_witnesses_are_capped(z_group):
    G0 = GainFramework(["v"], [], RepresentationTau.trivial(z_group, 2), dY=1)
    certificate = check_ap_rigidity(G0, samples_per_circle=64)
    assert not certificate.ap_rigid
    assert len(certificate.witnesses) == 16


def test_ap_rigidity_needs_rank_at_most_two():
    spec = AbelianGroupSpec(3, ())
    G0 = GainFramework(["v"], [], RepresentationTau.trivial(spec, 1), dY=1)
    with pytest.raises(UnsupportedError):
        check_ap_rigidity(G0)
