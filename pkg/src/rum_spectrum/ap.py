"""
Almost periodic analysis on windows: means, Bohr-Fourier coefficients and spectra, averaging
operators, Fejer approximation and almost periodic rigidity certificates.

All limits over a Bohr-Bochner sequence are replaced by the value on one window H_n. On groups with
free factors the truncation leaks O(1/n) mass from a character to its neighbours; on torsion-only
groups every mean is exact.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from rum_spectrum import LOGGER_BASE_NAME
from rum_spectrum.exceptions import StructuralError, UnsupportedError, UsageError
from rum_spectrum.flex import (TRANSLATION_TOL, WindowedField, chi_flex_basis, evaluate_chi_vector,
                               flex_to_dict, is_translation)
from rum_spectrum.gain import (DEFAULT_SAMPLES, MAX_REFINED_RANK, SNAP_TOL, joint_spectral_points,
                               rum_spectrum)
from rum_spectrum.group import ANGLE_TOL, TWO_PI, Character, Window, window
from rum_spectrum.linalg import DEFAULT_KERNEL_TOL
from rum_spectrum.utils import complex_to_pairs

logger = logging.getLogger(LOGGER_BASE_NAME)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"

TORSION_COEFFICIENT_TOL = 1e-6
LEAKAGE_FACTOR = 10.0
DEFAULT_COEFFICIENT_RADIUS = 200
MULTIPLE_TOL = 1e-9
RIGIDITY_WINDOW = 2
MAX_WITNESSES = 16


@dataclass
class TrigPolynomial:
    """
    A trigonometric polynomial p(gamma) = sum_k chi_k(gamma) a_k

    Parameters
    ----------
    spec: AbelianGroupSpec
        The group
    terms: list
        (Character, coefficient vector) pairs with pairwise distinct characters
    """
    spec: object
    terms: list = field(default_factory=list)

    def __post_init__(self):
        terms = []
        for chi, coefficient in self.terms:
            self.spec.check_same(chi.spec)
            terms.append((chi, np.atleast_1d(np.asarray(coefficient, dtype=complex))))
        self.terms = terms
        widths = {coefficient.size for _, coefficient in self.terms}
        if len(widths) > 1:
            raise StructuralError(f"coefficients of a trigonometric polynomial differ in length "
                                  f"{widths}")
        for i, (chi, _) in enumerate(self.terms):
            for other, _ in self.terms[:i]:
                if chi.is_close(other, ANGLE_TOL):
                    raise StructuralError(f"character {chi} appears twice in a trigonometric "
                                          f"polynomial")

    @property
    def dimension(self):
        return self.terms[0][1].size if self.terms else 1

    @property
    def characters(self):
        return [chi for chi, _ in self.terms]

    def coefficient(self, chi, tol=ANGLE_TOL):
        for other, coefficient in self.terms:
            if other.is_close(chi, tol):
                return coefficient
        return np.zeros(self.dimension, dtype=complex)

    def evaluate(self, coordinates):
        """(N, dimension) values on an (N, rank) coordinate array"""
        coordinates = np.atleast_2d(coordinates)
        values = np.zeros((coordinates.shape[0], self.dimension), dtype=complex)
        for chi, coefficient in self.terms:
            values += np.outer(chi.evaluate_coordinates(coordinates), coefficient)
        return values

    def to_dict(self):
        return [fourier_record(chi, coefficient) for chi, coefficient in self.terms]


class SampledFunction(object):
    """
    A bounded function on the group, known through an evaluation rule

    Parameters
    ----------
    spec: AbelianGroupSpec
        The group
    rule: callable
        Maps an (N, rank) array of reduced coordinates to an (N, dimension) complex array.
        Rules must be pure: they may be called from several workers.
    dimension: int
        Length of the values
    """

    def __init__(self, spec, rule, dimension):
        self.spec = spec
        self.rule = rule
        self.dimension = int(dimension)

    def evaluate(self, coordinates):
        coordinates = self.spec.reduce_coordinates(np.atleast_2d(coordinates))
        values = np.asarray(self.rule(coordinates), dtype=complex).reshape(coordinates.shape[0],
                                                                           self.dimension)
        if not np.all(np.isfinite(values)):
            raise StructuralError("sampled function returned non-finite values")
        return values

    def on_window(self, window_):
        return WindowedField(window_, self.evaluate(window_.coordinates))

    def sup_norm(self, radius):
        values = self.evaluate(window(self.spec, radius).coordinates)
        return float(np.max(np.linalg.norm(values, axis=1))) if values.size else 0.0

    @classmethod
    def from_trig_polynomial(cls, polynomial):
        return cls(polynomial.spec, polynomial.evaluate, polynomial.dimension)

    @classmethod
    def from_field(cls, f):
        """A table on a window; evaluation outside the window is a usage error"""
        return cls(f.window.spec, f.values_at, f.width)

    @classmethod
    def from_chi_vector(cls, z):
        def rule(coordinates):
            chi_values = z.character.evaluate_coordinates(coordinates)
            values = np.einsum("n,nij,vj->nvi", chi_values, z.tau.dtau_many(coordinates),
                               z.blocks())
            return values.reshape(coordinates.shape[0], -1)
        return cls(z.tau.group, rule, z.amplitude.size)

    def __add__(self, other):
        self.spec.check_same(other.spec)
        if self.dimension != other.dimension:
            raise StructuralError(f"cannot add functions of dimension {self.dimension} and "
                                  f"{other.dimension}")
        return SampledFunction(self.spec,
                               lambda coordinates: self.rule(coordinates) + other.rule(coordinates),
                               self.dimension)

    def __mul__(self, scalar):
        return SampledFunction(self.spec, lambda coordinates: scalar * self.rule(coordinates),
                               self.dimension)

    __rmul__ = __mul__


def untwist(tau, g):
    """
    The untwisted function gamma -> dtau(-gamma) g(gamma), blockwise per vertex

    For g = z(chi, a) the result is the constant-amplitude character chi (x) a.
    """
    if g.dimension % tau.dimension:
        raise StructuralError(f"function dimension {g.dimension} is not a multiple of dX = "
                              f"{tau.dimension}")

    def rule(coordinates):
        values = g.rule(coordinates).reshape(coordinates.shape[0], -1, tau.dimension)
        inverse = tau.dtau_many(-coordinates)
        return np.einsum("nij,nvj->nvi", inverse, values).reshape(coordinates.shape[0], -1)
    return SampledFunction(g.spec, rule, g.dimension)


def truncated_mean(f, n):
    """Arithmetic mean of f over the window H_n"""
    if n < 0:
        raise UsageError(f"window radius must be non-negative, got {n}")
    return f.evaluate(window(f.spec, n).coordinates).mean(axis=0)


def fourier_coefficient(h, chi, n):
    """Truncated Bohr-Fourier coefficient: the mean of conj(chi) h over H_n"""
    if n < 0:
        raise UsageError(f"window radius must be non-negative, got {n}")
    h.spec.check_same(chi.spec)
    coordinates = window(h.spec, n).coordinates
    weights = np.conj(chi.evaluate_coordinates(coordinates))
    return (weights[:, np.newaxis] * h.evaluate(coordinates)).mean(axis=0)


def fourier_record(chi, coefficient):
    return dict(character=chi.to_dict(), coefficient=complex_to_pairs(coefficient),
                magnitude=float(np.linalg.norm(coefficient)))


def fourier_report(h, candidates, n):
    """Coefficient and magnitude per candidate character"""
    return [fourier_record(chi, fourier_coefficient(h, chi, n)) for chi in candidates]


def averaging_operator(f, chi, n, out_radius=0):
    """
    The averaging operator (A f)(omega) = 1/|H_n| sum_{gamma in H_n} chi(gamma) f(omega - gamma)

    Parameters
    ----------
    f: SampledFunction
        Must be evaluable on the window of radius n + out_radius
    chi: Character
        The character
    n: int
        Radius of the averaging window
    out_radius: int
        Radius n' < n of the output window

    Returns
    -------
    WindowedField:
        The averaged function on the output window
    """
    f.spec.check_same(chi.spec)
    if out_radius < 0 or (f.spec.free_rank and out_radius >= n):
        raise UsageError(f"output radius {out_radius} must lie in [0, {n})")
    averaging = window(f.spec, n).coordinates
    weights = chi.evaluate_coordinates(averaging)
    target = Window(f.spec, out_radius)
    values = np.empty((target.size, f.dimension), dtype=complex)
    for i, omega in enumerate(target.coordinates):
        samples = f.evaluate(omega - averaging)
        values[i] = (weights[:, np.newaxis] * samples).mean(axis=0)
    return WindowedField(target, values)


def default_coefficient_tol(h, n):
    """
    Threshold separating planted coefficients from truncation leakage

    Torsion-only groups: 1e-6 ||h||. With free factors the leakage is O(||h||/n), so the threshold
    is 10 ||h|| / (2n + 1).
    """
    sup = h.sup_norm(n)
    if h.spec.free_rank == 0:
        return TORSION_COEFFICIENT_TOL * sup
    return LEAKAGE_FACTOR * sup / (2 * n + 1)


def bohr_fourier_spectrum(h, candidates, n=DEFAULT_COEFFICIENT_RADIUS, tol=None):
    """
    Candidate characters whose truncated Fourier coefficient exceeds tol in norm

    Parameters
    ----------
    h: SampledFunction
        The function
    candidates: list of Character
        Characters to test, e.g. the scanned RUM spectrum
    n: int
        Window radius of the truncated means
    tol: float
        Threshold; default :func:`default_coefficient_tol`

    Returns
    -------
    list of Character:
        The detected part of the Bohr-Fourier spectrum, in candidate order
    """
    if tol is None:
        tol = default_coefficient_tol(h, n)
    detected = [chi for chi in candidates
                if np.linalg.norm(fourier_coefficient(h, chi, n)) > tol]
    logger.debug(f"Bohr-Fourier spectrum: {len(detected)} of {len(candidates)} candidates above "
                 f"{tol:.3g}")
    return detected


def _signed_angle(angle):
    return angle - TWO_PI if angle > np.pi else angle


def fejer_weights(candidates, level):
    """
    Fejer weights prod_l max(0, 1 - |j_l| / (level + 1)) of the candidate characters

    On every free factor the candidate angles are expressed as multiples j of the smallest non-zero
    signed angle among the candidates (rounded up when not an integer multiple). Torsion factors
    carry the uniform kernel, weight one.
    """
    if not candidates:
        return np.array([])
    angles = np.array([[_signed_angle(a) for a in chi.free_angles] for chi in candidates])
    weights = np.ones(len(candidates))
    for axis in range(angles.shape[1]):
        column = angles[:, axis]
        nonzero = np.abs(column[np.abs(column) > ANGLE_TOL])
        if nonzero.size == 0:
            continue
        ratio = np.abs(column) / nonzero.min()
        rounded = np.rint(ratio)
        multiples = np.where(np.abs(ratio - rounded) <= MULTIPLE_TOL, rounded, np.ceil(ratio))
        weights *= np.maximum(0.0, 1 - multiples / (level + 1))
    return weights


def fejer_approximation(h, level, candidates, n=DEFAULT_COEFFICIENT_RADIUS, tol=None):
    """
    Fejer mean sum_k c_k h^(chi_k) chi_k of h over the candidate characters

    Terms whose weighted coefficient does not exceed tol are dropped, so the spectrum of the output
    is contained in the detected spectrum of h.

    Parameters
    ----------
    h: SampledFunction
        The function
    level: int
        Fejer level N; weights are 1 - |j| / (N + 1)
    candidates: list of Character
        Characters carrying the approximation
    n: int
        Window radius of the coefficients
    tol: float
        Coefficient threshold; default :func:`default_coefficient_tol`

    Returns
    -------
    TrigPolynomial:
        The approximation
    """
    if level < 0:
        raise UsageError(f"Fejer level must be non-negative, got {level}")
    if tol is None:
        tol = default_coefficient_tol(h, n)
    terms = []
    for chi, weight in zip(candidates, fejer_weights(candidates, level)):
        coefficient = weight * fourier_coefficient(h, chi, n)
        if np.linalg.norm(coefficient) > tol:
            terms.append((chi, coefficient))
    return TrigPolynomial(h.spec, terms)


def mean_translation_defect(f, shift, n):
    """|| M_n(f) - M_n(f(. - shift)) ||"""
    shifted = SampledFunction(f.spec, lambda coordinates: f.evaluate(coordinates - shift.coordinates),
                              f.dimension)
    return float(np.linalg.norm(truncated_mean(f, n) - truncated_mean(shifted, n)))


@dataclass
class RigidityCertificate:
    """
    Outcome of the almost periodic rigidity check

    Parameters
    ----------
    ap_rigid: bool
        Spectrum equals the joint spectral points and all their flexes are translations
    spectrum: list of SpectrumPoint
        The computed RUM spectrum
    joint_points: list of JointSpectralPoint
        The joint spectral points of tau
    witnesses: list of dict
        Spectrum characters beyond the joint spectral points, or non-translational flexes
    """
    ap_rigid: bool
    spectrum: list
    joint_points: list
    witnesses: list

    def to_dict(self):
        return dict(ap_rigid=self.ap_rigid,
                    spectrum=[point.to_dict() for point in self.spectrum],
                    joint_points=[point.character.to_dict() for point in self.joint_points],
                    witnesses=self.witnesses)


def check_ap_rigidity(G0, samples_per_circle=DEFAULT_SAMPLES, tol=DEFAULT_KERNEL_TOL,
                      window_radius=RIGIDITY_WINDOW, translation_tol=TRANSLATION_TOL,
                      n_processes=None, progress_bar=False):
    """
    Decide almost periodic rigidity of a gain framework

    The framework is rigid when the RUM spectrum coincides with the joint spectral points of tau and
    every chi-symmetric flex at a joint spectral point is a translation.

    Returns
    -------
    RigidityCertificate:
        The verdict with the spectrum, the joint spectral points and up to 16 witnesses
    """
    if G0.group.free_rank > MAX_REFINED_RANK:
        raise UnsupportedError(f"almost periodic rigidity needs a refined scan, free rank "
                               f"{G0.group.free_rank} exceeds {MAX_REFINED_RANK}")
    spectrum = rum_spectrum(G0, samples_per_circle, tol, n_processes=n_processes,
                            progress_bar=progress_bar)
    joint = joint_spectral_points(G0)

    witnesses = []
    for point in spectrum:
        if not any(point.character.is_close(j.character, SNAP_TOL) for j in joint):
            witnesses.append(dict(kind="character", **point.to_dict()))
    for j in joint:
        if not any(j.character.is_close(point.character, SNAP_TOL) for point in spectrum):
            witnesses.append(dict(kind="missing_joint_point", character=j.character.to_dict()))

    check_window = window(G0.group, window_radius)
    for j in joint:
        for z in chi_flex_basis(G0, j.character, tol):
            field_ = evaluate_chi_vector(z, check_window)
            if not is_translation(field_, G0, translation_tol):
                witnesses.append(dict(kind="flex", **flex_to_dict(z, field_)))

    ap_rigid = not witnesses
    if len(witnesses) > MAX_WITNESSES:
        logger.info(f"Keeping {MAX_WITNESSES} of {len(witnesses)} witnesses")
        witnesses = witnesses[:MAX_WITNESSES]
    logger.info(f"Almost periodic rigidity: {ap_rigid} ({len(spectrum)} spectrum points, "
                f"{len(joint)} joint spectral points)")
    return RigidityCertificate(ap_rigid=ap_rigid, spectrum=spectrum, joint_points=joint,
                               witnesses=witnesses)
