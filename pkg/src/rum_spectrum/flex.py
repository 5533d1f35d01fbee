"""
Chi-symmetric vectors, windowed velocity fields and the gain framework operator.

A velocity field on the covering framework is a bounded map from the group to X^{V0}. Only a finite
window of it can be stored; the gain framework operator reads the field at gamma and gamma + m_e,
so its output lives on a window that is smaller by the largest gain.
"""

import logging
from dataclasses import dataclass

import numpy as np

from rum_spectrum import LOGGER_BASE_NAME
from rum_spectrum.exceptions import StructuralError, UsageError, WindowTooSmallError
from rum_spectrum.gain import joint_spectral_points, rum_membership
from rum_spectrum.group import Character, Window
from rum_spectrum.linalg import DEFAULT_KERNEL_TOL
from rum_spectrum.utils import complex_to_pairs, pairs_to_complex

logger = logging.getLogger(LOGGER_BASE_NAME)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"

FLEX_TOL_FACTOR = 1e-9
TRANSLATION_TOL = 1e-9


@dataclass
class ChiSymmetricVector:
    """
    The field z(chi, a)(gamma) = (chi(gamma) dtau(gamma) a_v)_v

    Parameters
    ----------
    character: Character
        The character chi
    amplitude: np.ndarray
        Stacked vertex blocks a_v, length |V0| dX
    tau: RepresentationTau
        The representation providing dtau
    """
    character: Character
    amplitude: np.ndarray
    tau: object

    def __post_init__(self):
        self.amplitude = np.asarray(self.amplitude, dtype=complex).reshape(-1)
        if self.amplitude.size % self.tau.dimension:
            raise StructuralError(f"amplitude length {self.amplitude.size} is not a multiple of "
                                  f"dX = {self.tau.dimension}")

    @property
    def n_vertices(self):
        return self.amplitude.size // self.tau.dimension

    def blocks(self):
        return self.amplitude.reshape(self.n_vertices, self.tau.dimension)


@dataclass
class WindowedField:
    """
    A field gamma -> C^width stored on a window

    Parameters
    ----------
    window: Window
        The window; row i of values belongs to window.coordinates[i]
    values: np.ndarray
        (window size, width) complex array
    """
    window: Window
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[0] != self.window.size:
            raise StructuralError(f"field values of shape {self.values.shape} do not fit a "
                                  f"window of size {self.window.size}")
        if not np.all(np.isfinite(self.values)):
            raise StructuralError("field values must be finite")

    @property
    def width(self):
        return self.values.shape[1]

    def values_at(self, coordinates):
        index = self.window.index_of(coordinates)
        if np.any(index < 0):
            raise UsageError(f"field on window radius {self.window.radius} evaluated outside "
                             f"its window")
        return self.values[index]

    def value_at(self, gamma):
        return self.values_at(gamma.coordinates[np.newaxis, :])[0]

    def restrict(self, radius):
        target = Window(self.window.spec, radius)
        return WindowedField(target, self.values_at(target.coordinates))

    def max_norm(self):
        if self.values.size == 0:
            return 0.0
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    def _check_compatible(self, other):
        if self.window != other.window or self.width != other.width:
            raise StructuralError("fields live on different windows")

    def __add__(self, other):
        self._check_compatible(other)
        return WindowedField(self.window, self.values + other.values)

    def __sub__(self, other):
        self._check_compatible(other)
        return WindowedField(self.window, self.values - other.values)

    def __mul__(self, scalar):
        return WindowedField(self.window, scalar * self.values)

    __rmul__ = __mul__

    def to_dict(self):
        return dict(window_radius=self.window.radius,
                    samples=[dict(gamma=[int(c) for c in row], value=complex_to_pairs(value))
                             for row, value in zip(self.window.coordinates, self.values)])

    @classmethod
    def from_dict(cls, spec, data):
        window = Window(spec, data["window_radius"])
        samples = data["samples"]
        coordinates = np.array([sample["gamma"] for sample in samples], dtype=np.int64)
        index = window.index_of(coordinates.reshape(-1, spec.rank))
        if len(samples) != window.size or np.any(index < 0) or len(set(index)) != window.size:
            raise UsageError(f"samples do not cover the window of radius {window.radius}")
        values = np.array([pairs_to_complex(sample["value"]) for sample in samples])
        ordered = np.empty_like(values)
        ordered[index] = values
        return cls(window, ordered)


def evaluate_chi_vector(z, window):
    """Evaluate z(chi, a) on every point of the window"""
    coordinates = window.coordinates
    chi_values = z.character.evaluate_coordinates(coordinates)
    linear_parts = z.tau.dtau_many(coordinates)
    values = np.einsum("n,nij,vj->nvi", chi_values, linear_parts, z.blocks())
    return WindowedField(window, values.reshape(window.size, -1))


def translation_field(G0, vector, window):
    """The constant field [a ... a]"""
    amplitude = np.tile(np.asarray(vector, dtype=complex), len(G0.vertices))
    return WindowedField(window, np.tile(amplitude, (window.size, 1)))


def apply_gain_operator(G0, f, out_radius=None):
    """
    The gain framework operator on a windowed field

    (C f)(gamma)_e = phi_e dtau(-gamma) (f(gamma)_{s(e)} - f(gamma + m_e)_{r(e)})

    Parameters
    ----------
    G0: GainFramework
        The framework
    f: WindowedField
        Field with |V0| dX components
    out_radius: int
        Radius of the output window; default is the largest radius the input supports

    Returns
    -------
    WindowedField:
        Field with |E0| dY components on the output window
    """
    if f.width != G0.n_columns:
        raise StructuralError(f"field width {f.width} does not match |V0| dX = {G0.n_columns}")
    margin = G0.max_gain_norm
    if out_radius is None:
        out_radius = f.window.radius - margin
    if out_radius < 0 or out_radius + margin > f.window.radius:
        raise WindowTooSmallError(
            f"output radius {out_radius} needs an input window of radius at least "
            f"{max(out_radius, 0) + margin} (margin {margin}), got {f.window.radius}",
            required_margin=margin)
    target = Window(G0.group, out_radius)
    coordinates = target.coordinates
    inverse_parts = G0.tau.dtau_many(-coordinates)
    output = np.zeros((target.size, G0.n_rows), dtype=complex)
    here = f.values_at(coordinates)
    for number, edge in enumerate(G0.edges):
        there = f.values_at(coordinates + edge.gain.coordinates)
        difference = (here[:, G0.column_slice(edge.source)] -
                      there[:, G0.column_slice(edge.range)])
        output[:, G0.row_slice(number)] = np.einsum("ij,njk,nk->ni", edge.phi, inverse_parts,
                                                    difference)
    return WindowedField(target, output)


def default_flex_tol(G0):
    """1e-9 (1 + max_e ||phi_e||)"""
    largest = max((np.linalg.norm(edge.phi, 2) for edge in G0.edges), default=0.0)
    return FLEX_TOL_FACTOR * (1 + largest)


@dataclass
class FlexVerification:
    residual: float
    passed: bool
    tol: float

    def to_dict(self):
        return dict(residual=self.residual, tol=self.tol, **{"pass": self.passed})


def verify_flex(G0, f, tol=None):
    """
    Check that a windowed field is annihilated by the gain framework operator

    Returns
    -------
    FlexVerification:
        Max norm of the operator output over the window and the verdict
    """
    if tol is None:
        tol = default_flex_tol(G0)
    residual = apply_gain_operator(G0, f).max_norm()
    logger.debug(f"Flex residual {residual:.3g} (tol {tol:.3g})")
    return FlexVerification(residual=residual, passed=bool(residual <= tol), tol=tol)


def chi_flex_basis(G0, chi, tol=DEFAULT_KERNEL_TOL):
    """One chi-symmetric vector per kernel basis column of O(chi); empty outside the spectrum"""
    _, kernel = rum_membership(G0, chi, tol)
    return [ChiSymmetricVector(chi, column, G0.tau) for column in kernel.T]


def translation_space(G0):
    """
    Constant flexes built from a joint eigenbasis of X

    Every joint eigenvector a with joint eigenvalue lambda gives z(conj chi_lambda, [a ... a]),
    which equals [a ... a] at every group element.
    """
    vectors = []
    for point in joint_spectral_points(G0):
        for column in point.eigenpair.eigenspace.T:
            vectors.append(ChiSymmetricVector(point.character,
                                              np.tile(column, len(G0.vertices)), G0.tau))
    return vectors


def real_imag_parts(f, G0):
    """
    Componentwise real and imaginary part of a field

    Only meaningful for frameworks with real constraint maps and real dtau; then both parts are
    flexes whenever f is.
    """
    if not G0.is_real:
        message = ("real and imaginary parts of a flex are only flexes for real constraint data "
                   "and a real representation")
        logger.warning(f"Cannot split field in real and imaginary part: {message}")
        raise UsageError(message)
    return (WindowedField(f.window, f.values.real.astype(complex)),
            WindowedField(f.window, f.values.imag.astype(complex)))


def is_translation(f, G0, tol=TRANSLATION_TOL):
    """
    True if all vertex blocks of all values agree with their mean within tol

    Parameters
    ----------
    f: WindowedField
        The field
    G0: GainFramework
        Framework the field lives on; its vertex count fixes the block layout of a value
    tol: float
        Max allowed deviation of a block from the mean block
    """
    n_vertices = len(G0.vertices)
    if f.width != n_vertices * G0.dX:
        raise UsageError(f"field of width {f.width} does not fit {n_vertices} vertex blocks of "
                         f"dimension {G0.dX}")
    if f.values.size == 0:
        return True
    blocks = f.values.reshape(f.window.size * n_vertices, G0.dX)
    deviation = np.max(np.linalg.norm(blocks - blocks.mean(axis=0), axis=1))
    return bool(deviation <= tol)


def twisted_shift(tau, f, shift):
    """
    Twisted translation (pi(shift) f)(gamma) = dtau(shift) f(gamma - shift), blockwise

    The result lives on the window shrunk by the sup norm of the shift.
    """
    radius = f.window.radius - shift.free_sup_norm
    if radius < 0:
        raise WindowTooSmallError(f"shift {shift} does not fit window radius {f.window.radius}",
                                  required_margin=shift.free_sup_norm)
    target = Window(f.window.spec, radius)
    values = f.values_at(target.coordinates - shift.coordinates)
    blocks = values.reshape(target.size, -1, tau.dimension) @ tau.dtau(shift).T
    return WindowedField(target, blocks.reshape(target.size, -1))


def shift_field(f, shift):
    """Plain translation (pi(shift) f)(gamma) = f(gamma - shift) on the shrunk window"""
    radius = f.window.radius - shift.free_sup_norm
    if radius < 0:
        raise WindowTooSmallError(f"shift {shift} does not fit window radius {f.window.radius}",
                                  required_margin=shift.free_sup_norm)
    target = Window(f.window.spec, radius)
    return WindowedField(target, f.values_at(target.coordinates - shift.coordinates))


def flex_to_dict(z, field):
    """Export format of a chi-symmetric flex evaluated on a window"""
    return dict(character=z.character.to_dict(), amplitude=complex_to_pairs(z.amplitude),
                **field.to_dict())


def flex_dimension_report(G0, spectrum_points):
    """
    Spectrum size next to the number of independent chi-symmetric flexes

    Every spectrum character beyond the joint spectral points carries non-translational flexes.
    A joint spectral point carries the translations of its joint eigenspace and can carry more:
    its kernel may be larger than that eigenspace. Flexes beyond translations are counted per
    character as kernel dimension minus joint eigenspace dimension. The counts are reported,
    nothing is concluded from them.
    """
    joint = joint_spectral_points(G0)

    def translation_count(point):
        for j in joint:
            if point.character.is_close(j.character):
                return j.eigenpair.eigenspace.shape[1]
        return 0

    counts = [translation_count(point) for point in spectrum_points]
    return dict(spectrum_characters=len(spectrum_points),
                joint_spectral_points=len(joint),
                chi_symmetric_flexes=int(sum(point.kernel_dim for point in spectrum_points)),
                characters_beyond_joint_points=sum(1 for count in counts if count == 0),
                flexes_beyond_translations=int(sum(point.kernel_dim - count for point, count
                                                   in zip(spectrum_points, counts))))
