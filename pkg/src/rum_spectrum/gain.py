"""
Gain frameworks, orbit matrices and the rigid unit mode (RUM) spectrum.

A gain framework is a directed multigraph whose edges carry a group element (the gain) and a
constraint map, together with a representation of the group by affine isometries. For every
character of the dual group the orbit matrix collects the character-twisted constraints; the RUM
spectrum is the set of characters where the orbit matrix has a kernel.

For finite groups the spectrum is enumerated exactly. For groups with free factors the dual group
contains circles; these are sampled on a grid and the local minima of the smallest singular value
that a zero between grid points could explain are refined by golden-section search.
"""

import itertools
import logging
import multiprocessing as mp
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from tqdm import tqdm

from rum_spectrum import LOGGER_BASE_NAME, N_PROCESSES_ENV
from rum_spectrum.exceptions import (ContractViolationError, StructuralError, UsageError,
                                     ValidationError)
from rum_spectrum.group import TWO_PI, Character, unique_characters, window
from rum_spectrum.linalg import (DEFAULT_CLUSTER_TOL, DEFAULT_KERNEL_TOL, JointEigenpair,
                                 as_complex_matrix, batched_rank_summary, check_unitary,
                                 joint_spectrum, numeric_kernel, unitary_eigendecomposition)

logger = logging.getLogger(LOGGER_BASE_NAME)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"

REPRESENTATION_TOL = 1e-8
TORSION_ROOT_TOL = 1e-8
DEFAULT_SAMPLES = 4096
MIN_SAMPLES = 16
SCAN_ACCEPT_TOL = 1e-7
SCAN_CANDIDATE_TOL = 1e-2
CANDIDATE_SLACK = 1.5
PLATEAU_TOL = 1e-12
SNAP_TOL = 1e-6
REFINE_PRECISION = 1e-10
REFINE_BRACKET_STEPS = 3
CONTINUOUS_RUN_LENGTH = 3
MAX_REFINED_RANK = 2

COMPONENT_FINITE = "finite"
COMPONENT_ISOLATED = "isolated"
COMPONENT_CONTINUOUS = "continuous"
COMPONENT_JOINT = "joint"


@dataclass
class AffineIsometry:
    """
    x -> linear @ x + translation

    Parameters
    ----------
    linear: np.ndarray
        (d, d) unitary matrix, the complexified linear part
    translation: np.ndarray
        Length d translation vector
    """
    linear: np.ndarray
    translation: np.ndarray = None

    def __post_init__(self):
        self.linear = as_complex_matrix(self.linear, name="linear part")
        dimension = self.linear.shape[0]
        if self.translation is None:
            self.translation = np.zeros(dimension, dtype=complex)
        self.translation = np.asarray(self.translation, dtype=complex).reshape(-1)
        if self.translation.shape != (dimension,):
            raise StructuralError(f"translation needs {dimension} entries, "
                                  f"got {self.translation.shape}")
        check_unitary(self.linear, tol=REPRESENTATION_TOL, name="linear part")

    @property
    def dimension(self):
        return self.linear.shape[0]

    def homogeneous(self):
        """(d+1, d+1) matrix acting on (x, 1)"""
        matrix = np.eye(self.dimension + 1, dtype=complex)
        matrix[:-1, :-1] = self.linear
        matrix[:-1, -1] = self.translation
        return matrix

    @classmethod
    def from_homogeneous(cls, matrix):
        return cls(linear=matrix[:-1, :-1], translation=matrix[:-1, -1])

    def apply(self, point):
        return self.linear @ np.asarray(point, dtype=complex) + self.translation


class RepresentationTau(object):
    """
    A homomorphism from the group into the affine isometries of C^d

    Parameters
    ----------
    group: AbelianGroupSpec
        The group
    generator_images: list of AffineIsometry
        Images of the standard generators, free generators first
    """

    def __init__(self, group, generator_images):
        self.group = group
        self.generator_images = list(generator_images)
        if len(self.generator_images) != group.rank:
            raise StructuralError(f"group {group} needs {group.rank} generator images, "
                                  f"got {len(self.generator_images)}")
        dimensions = {image.dimension for image in self.generator_images}
        if len(dimensions) != 1:
            raise StructuralError(f"generator images have different dimensions {dimensions}")
        self.dimension = dimensions.pop()
        self._homogeneous = [image.homogeneous() for image in self.generator_images]
        self._power_cache = dict()
        self._check_homomorphism()

    @classmethod
    def trivial(cls, group, dimension):
        """Every generator acts as the identity"""
        return cls(group, [AffineIsometry(np.eye(dimension)) for _ in range(group.rank)])

    def _check_homomorphism(self):
        identity = np.eye(self.dimension + 1)
        for axis, order in enumerate(self.group.torsion_orders):
            power = np.linalg.matrix_power(self._homogeneous[self.group.free_rank + axis], order)
            deviation = np.max(np.abs(power - identity))
            if deviation > REPRESENTATION_TOL:
                raise ContractViolationError(
                    f"torsion generator {axis} of order {order} is not of finite order: "
                    f"deviation {deviation:.3g}")
        for i, j in itertools.combinations(range(self.group.rank), 2):
            first, second = self._homogeneous[i], self._homogeneous[j]
            deviation = np.max(np.abs(first @ second - second @ first))
            if deviation > REPRESENTATION_TOL:
                raise ContractViolationError(f"generator images {i} and {j} do not commute: "
                                             f"deviation {deviation:.3g}")

    @property
    def is_real(self):
        return all(np.allclose(matrix.imag, 0) for matrix in self._homogeneous)

    @property
    def is_trivial(self):
        return all(np.allclose(image.linear, np.eye(self.dimension))
                   for image in self.generator_images)

    def _linear_power(self, axis, exponent):
        key = (axis, exponent)
        if key not in self._power_cache:
            linear = self.generator_images[axis].linear
            if exponent >= 0:
                power = np.linalg.matrix_power(linear, exponent)
            else:
                power = np.linalg.matrix_power(linear.conj().T, -exponent)
            self._power_cache[key] = power
        return self._power_cache[key]

    def dtau(self, gamma):
        """Linear part of tau(gamma)"""
        self.group.check_same(gamma.spec)
        return self.dtau_many(gamma.coordinates[np.newaxis, :])[0]

    def dtau_many(self, coordinates):
        """(N, d, d) stack of linear parts for an (N, rank) coordinate array"""
        coordinates = self.group.reduce_coordinates(np.atleast_2d(coordinates))
        count = coordinates.shape[0]
        result = np.broadcast_to(np.eye(self.dimension, dtype=complex),
                                 (count, self.dimension, self.dimension)).copy()
        for axis in range(self.group.rank):
            column = coordinates[:, axis]
            if not np.any(column):
                continue
            low, high = int(column.min()), int(column.max())
            table = np.stack([self._linear_power(axis, k) for k in range(low, high + 1)])
            result = result @ table[column - low]
        return result

    def affine(self, gamma):
        """The affine isometry tau(gamma)"""
        self.group.check_same(gamma.spec)
        matrix = np.eye(self.dimension + 1, dtype=complex)
        for generator, exponent in zip(self._homogeneous, gamma.coordinates):
            matrix = matrix @ np.linalg.matrix_power(generator, int(exponent))
        return AffineIsometry.from_homogeneous(matrix)

    def apply(self, gamma, point):
        return self.affine(gamma).apply(point)

    def with_extra_generators(self, elements):
        """dtau of the standard generators followed by dtau of the given elements"""
        return ([image.linear for image in self.generator_images] +
                [self.dtau(element) for element in elements])


def dtau(tau, gamma):
    """Linear part dtau(gamma) of the affine isometry tau(gamma)"""
    return tau.dtau(gamma)


@dataclass
class GainEdge:
    """
    A directed edge of a gain graph

    Parameters
    ----------
    id: str
        Edge label
    source: str
        Source vertex s(e)
    range: str
        Range vertex r(e)
    gain: GroupElement
        Gain m_e
    phi: np.ndarray
        (dY, dX) constraint map
    """
    id: str
    source: str
    range: str
    gain: object
    phi: np.ndarray

    def __post_init__(self):
        self.phi = as_complex_matrix(self.phi, name=f"phi of edge {self.id}")
        if self.is_loop and self.gain.is_zero:
            raise ValidationError(f"loop {self.id} at {self.source} needs a non-zero gain")

    @property
    def is_loop(self):
        return self.source == self.range


@dataclass
class GainFramework:
    """
    A gain framework: vertices, gain edges and the representation tau

    Parameters
    ----------
    vertices: list of str
        Vertex ids V0 (order defines the column blocks of the orbit matrix)
    edges: list of GainEdge
        Edges E0 (order defines the row blocks)
    tau: RepresentationTau
        Affine isometric representation; its dimension is dX
    dY: int
        Rows of every constraint map; only needed for a framework without edges
    """
    vertices: list
    edges: list
    tau: RepresentationTau
    dY: int = None
    _vertex_index: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.vertices = [str(v) for v in self.vertices]
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError(f"vertex ids must be unique: {self.vertices}")
        if not self.vertices:
            raise ValidationError("a gain framework needs at least one vertex")
        self._vertex_index = {v: i for i, v in enumerate(self.vertices)}
        row_counts = {edge.phi.shape[0] for edge in self.edges}
        if self.dY is None:
            self.dY = row_counts.pop() if len(row_counts) == 1 else (1 if not row_counts else None)
        if self.dY is None:
            raise StructuralError(f"constraint maps have different row counts {row_counts}")
        seen = dict()
        for edge in self.edges:
            for end in (edge.source, edge.range):
                if end not in self._vertex_index:
                    raise ValidationError(f"edge {edge.id} refers to unknown vertex {end}")
            if edge.phi.shape != (self.dY, self.dX):
                raise StructuralError(f"phi of edge {edge.id} has shape {edge.phi.shape}, "
                                      f"expected {(self.dY, self.dX)}")
            self.group.check_same(edge.gain.spec)
            key = (edge.source, edge.range, edge.gain)
            if key in seen:
                raise ValidationError(f"parallel edges {seen[key]} and {edge.id} share their gain "
                                      f"{edge.gain}")
            seen[key] = edge.id

    @property
    def group(self):
        return self.tau.group

    @property
    def dX(self):
        return self.tau.dimension

    @property
    def n_rows(self):
        return len(self.edges) * self.dY

    @property
    def n_columns(self):
        return len(self.vertices) * self.dX

    @property
    def max_gain_norm(self):
        """max_e ||m_e||_inf over the free coordinates"""
        return max((edge.gain.free_sup_norm for edge in self.edges), default=0)

    @property
    def angle_lipschitz(self):
        """
        Lipschitz bound of sigma_min(O(chi)) in the free angles (Euclidean distance)

        The angle derivative of the row block of edge e has norm ||phi_e|| |m_e . u| for a unit
        direction u, so sqrt(sum_e ||phi_e||^2 ||m_e||^2) bounds the derivative of O(chi).
        """
        return float(np.sqrt(sum(np.linalg.norm(edge.phi, 2) ** 2 *
                                 float(np.sum(np.square(edge.gain.free_part)))
                                 for edge in self.edges)))

    @property
    def is_real(self):
        return self.tau.is_real and all(np.allclose(edge.phi.imag, 0) for edge in self.edges)

    def vertex_index(self, vertex):
        return self._vertex_index[vertex]

    def column_slice(self, vertex):
        index = self._vertex_index[vertex]
        return slice(index * self.dX, (index + 1) * self.dX)

    def row_slice(self, edge_number):
        return slice(edge_number * self.dY, (edge_number + 1) * self.dY)

    def with_edges(self, edges):
        return GainFramework(vertices=list(self.vertices), edges=list(edges), tau=self.tau,
                             dY=self.dY)


@dataclass
class OrbitMatrix:
    """The orbit matrix O(chi) with rows per edge block and columns per vertex block"""
    matrix: np.ndarray
    character: Character


@dataclass
class SpectrumPoint:
    """
    One character of the RUM spectrum

    Parameters
    ----------
    character: Character
        The character
    kernel_dim: int
        Dimension of the orbit matrix kernel
    sigma_min: float
        Smallest singular value of the orbit matrix at the character
    component: str
        finite (exact enumeration), isolated (refined scan point), continuous (grid point of a
        flagged arc) or joint (joint spectral point added after the scan)
    """
    character: Character
    kernel_dim: int
    sigma_min: float
    component: str = COMPONENT_FINITE

    def to_dict(self):
        return dict(character=self.character.to_dict(), kernel_dim=int(self.kernel_dim),
                    sigma_min=float(self.sigma_min), component=self.component)


@dataclass
class JointSpectralPoint:
    """A joint spectral point: the conjugate character of a joint eigenvalue"""
    character: Character
    eigenpair: JointEigenpair


@dataclass
class ScanResult:
    """Spectrum records and the grid trace of a RUM scan"""
    points: list
    trace: pd.DataFrame
    samples_per_circle: int

    @property
    def characters(self):
        return [point.character for point in self.points]


def _gain_character_values(G0, angles, torsion_indices):
    """chi(m_e) for every edge and every character on a grid; shape (N, |E0|)"""
    spec = G0.group
    angles = np.atleast_2d(angles)
    values = np.empty((angles.shape[0], len(G0.edges)), dtype=complex)
    for number, edge in enumerate(G0.edges):
        phase = np.zeros(angles.shape[0])
        if spec.free_rank:
            phase = angles @ np.array(edge.gain.free_part, dtype=float)
        torsion_phase = sum(TWO_PI * ((j * t) % n) / n for j, t, n in
                            zip(torsion_indices, edge.gain.torsion_part, spec.torsion_orders))
        values[:, number] = np.exp(1j * (phase + torsion_phase))
    return values


def orbit_matrix_stack(G0, angles, torsion_indices):
    """
    Orbit matrices for many characters sharing their torsion indices

    Parameters
    ----------
    G0: GainFramework
        The framework
    angles: np.ndarray
        (N, free_rank) angles
    torsion_indices: tuple
        Torsion part of all characters

    Returns
    -------
    np.ndarray:
        (N, |E0| dY, |V0| dX) stack
    """
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    count = angles.shape[0]
    stack = np.zeros((count, G0.n_rows, G0.n_columns), dtype=complex)
    values = _gain_character_values(G0, angles, torsion_indices)
    for number, edge in enumerate(G0.edges):
        rows = G0.row_slice(number)
        twisted = edge.phi @ G0.tau.dtau(edge.gain)
        chi_m = values[:, number, np.newaxis, np.newaxis]
        if edge.is_loop:
            stack[:, rows, G0.column_slice(edge.source)] = edge.phi - chi_m * twisted
        else:
            stack[:, rows, G0.column_slice(edge.source)] = edge.phi
            stack[:, rows, G0.column_slice(edge.range)] = -chi_m * twisted
    return stack


def orbit_matrix(G0, chi):
    """
    The orbit matrix O(chi)

    Loop rows are phi_e (I - chi(m_e) dtau(m_e)) at the loop vertex; a non-loop row has phi_e at
    the source block and -chi(m_e) phi_e dtau(m_e) at the range block.
    """
    G0.group.check_same(chi.spec)
    matrix = orbit_matrix_stack(G0, np.array([chi.free_angles]), chi.torsion_indices)[0]
    return OrbitMatrix(matrix=matrix, character=chi)


def rum_membership(G0, chi, tol=DEFAULT_KERNEL_TOL):
    """
    Decide whether chi lies in the RUM spectrum

    Returns
    -------
    tuple:
        (is_member, kernel basis as a (|V0| dX, k) matrix)
    """
    if G0.n_rows == 0:
        return True, np.eye(G0.n_columns, dtype=complex)
    kernel = numeric_kernel(orbit_matrix(G0, chi).matrix, tol)
    return kernel.shape[1] > 0, kernel


def _sigma_min(G0, chi):
    if G0.n_rows == 0:
        return 0.0
    sigma_min, _, _ = batched_rank_summary(orbit_matrix(G0, chi).matrix[np.newaxis])
    return float(sigma_min[0])


def rum_spectrum_finite(G0, tol=DEFAULT_KERNEL_TOL):
    """
    Exact RUM spectrum of a framework over a finite group

    Returns
    -------
    list of SpectrumPoint:
        Every character with a non-trivial orbit matrix kernel, lexicographic order
    """
    spec = G0.group
    if not spec.is_finite:
        raise UsageError(f"group {spec} has free factors; use rum_spectrum_scan instead")
    points = []
    for chi in spec.characters():
        is_member, kernel = rum_membership(G0, chi, tol)
        logger.debug(f"{chi}: kernel dimension {kernel.shape[1]}")
        if is_member:
            points.append(SpectrumPoint(chi, kernel.shape[1], _sigma_min(G0, chi),
                                        COMPONENT_FINITE))
    logger.info(f"Finite spectrum: {len(points)} of {spec.order} characters are RUM")
    return points


def _evaluate_chunk(arguments):
    G0, angles, torsion_indices, tol = arguments
    if G0.n_rows == 0:
        zeros = np.zeros(angles.shape[0])
        return zeros, zeros, np.full(angles.shape[0], G0.n_columns)
    return batched_rank_summary(orbit_matrix_stack(G0, angles, torsion_indices), tol)


def number_of_processes(n_processes=None):
    """Worker count from the argument, else the environment, else 1"""
    if n_processes is None:
        n_processes = int(os.environ.get(N_PROCESSES_ENV, 1))
    return max(1, int(n_processes))


def evaluate_grid(G0, angles, torsion_indices, tol=SCAN_ACCEPT_TOL, n_processes=None):
    """
    sigma_min, sigma_max and kernel dimension of O(chi) for all grid angles

    The grid is cut into contiguous chunks; chunks are evaluated in worker processes when more than
    one process is requested. Results are concatenated in grid order, so the worker count does not
    change them.
    """
    n_processes = number_of_processes(n_processes)
    chunks = np.array_split(angles, n_processes) if n_processes > 1 else [angles]
    arguments = [(G0, chunk, torsion_indices, tol) for chunk in chunks if len(chunk)]
    if n_processes > 1:
        with mp.Pool(processes=n_processes) as pool:
            results = pool.map(_evaluate_chunk, arguments)
    else:
        results = [_evaluate_chunk(argument) for argument in arguments]
    return tuple(np.concatenate([result[i] for result in results]) for i in range(3))


def _flagged_runs(flagged):
    """Runs of consecutive flagged indices on a circular grid"""
    count = len(flagged)
    if np.all(flagged):
        return [np.arange(count)]
    # rotate so that the grid starts at an unflagged point; no run then wraps around
    start = int(np.flatnonzero(~flagged)[0])
    rotated = np.roll(flagged, -start)
    runs = []
    index = 0
    while index < count:
        if rotated[index]:
            end = index
            while end + 1 < count and rotated[end + 1]:
                end += 1
            runs.append((np.arange(index, end + 1) + start) % count)
            index = end + 1
        else:
            index += 1
    return runs


def _discrete_minima(sigma):
    """Grid indices that are local minima over all neighbours (circular in every axis)"""
    is_minimum = np.ones(sigma.shape, dtype=bool)
    for axis in range(sigma.ndim):
        for shift in (-1, 1):
            is_minimum &= sigma <= np.roll(sigma, shift, axis=axis)
    return [tuple(index) for index in np.argwhere(is_minimum)]


def _unflagged_plateau(sigma, scale, flagged):
    """sigma_min does not change over the grid and no point is flagged: no minimum to refine"""
    return not np.any(flagged) and np.ptp(sigma) <= PLATEAU_TOL * np.max(scale)


def _golden_refine(objective, center, step):
    """
    Minimise objective(angle) near center with golden-section search

    The search runs on the shifted variable x = (angle - center) / step + 4 so that the relative
    stopping criterion of the golden-section method amounts to an absolute angular precision of
    REFINE_PRECISION.
    """
    offset = REFINE_BRACKET_STEPS + 1

    def shifted(x):
        return objective(center + (x - offset) * step)

    bracket = (offset - REFINE_BRACKET_STEPS, offset, offset + REFINE_BRACKET_STEPS)
    try:
        result = minimize_scalar(shifted, bracket=bracket, method="golden",
                                 options=dict(xtol=REFINE_PRECISION / (2 * offset * step)))
    except ValueError as err:
        # the grid minimum is not bracketed by the points three steps away
        logger.debug(f"No refinement around {center}: {err}")
        return center, objective(center)
    return center + (result.x - offset) * step, float(result.fun)


class _Scanner(object):
    """Scan one torsion slice of the dual group"""

    def __init__(self, G0, samples_per_circle, torsion_indices, tol, accept_tol, n_processes):
        self.G0 = G0
        self.spec = G0.group
        self.samples = samples_per_circle
        self.torsion_indices = torsion_indices
        self.tol = tol
        self.accept_tol = accept_tol
        self.n_processes = n_processes
        self.step = TWO_PI / samples_per_circle
        self.axis_angles = np.arange(samples_per_circle) * self.step
        # a zero inside the cell of a grid point keeps sigma_min there below lipschitz * distance
        self.grid_slack = (CANDIDATE_SLACK * G0.angle_lipschitz * self.step *
                           np.sqrt(self.spec.free_rank) / 2)

    def is_candidate(self, sigma, scale):
        """Grid minima worth refining: small relative to the matrix or within reach of a zero"""
        return sigma <= max(SCAN_CANDIDATE_TOL * scale, self.accept_tol * scale + self.grid_slack)

    def character(self, angles):
        return Character(self.spec, tuple(angles), self.torsion_indices)

    def sigma(self, angles):
        return _sigma_min(self.G0, self.character(angles))

    def kernel_dim(self, angles):
        _, kernel = rum_membership(self.G0, self.character(angles), self.accept_tol)
        return kernel.shape[1]

    def run(self):
        rank = self.spec.free_rank
        grids = np.meshgrid(*[self.axis_angles] * rank, indexing="ij")
        angles = np.stack(grids, axis=-1).reshape(-1, rank)
        sigma_min, sigma_max, kernel_dim = evaluate_grid(self.G0, angles, self.torsion_indices,
                                                         self.accept_tol, self.n_processes)
        scale = np.maximum(1.0, sigma_max)
        flagged = sigma_min <= self.accept_tol * scale
        trace = pd.DataFrame(angles, columns=[f"angle_{i}" for i in range(rank)])
        for i, index in enumerate(self.torsion_indices):
            trace[f"torsion_{i}"] = index
        trace["sigma_min"] = sigma_min
        trace["sigma_max"] = sigma_max
        trace["kernel_dim"] = kernel_dim
        trace["flagged"] = flagged

        shape = (self.samples,) * rank
        if rank == 1:
            points = self._points_on_circle(angles, sigma_min, scale, kernel_dim, flagged)
        elif rank <= MAX_REFINED_RANK:
            points = self._points_on_torus(angles, sigma_min.reshape(shape),
                                           scale.reshape(shape), kernel_dim, flagged)
        else:
            logger.warning(f"Free rank {rank} exceeds {MAX_REFINED_RANK}: grid candidates are "
                           f"returned without refinement")
            points = [SpectrumPoint(self.character(angles[i]), int(kernel_dim[i]),
                                    float(sigma_min[i]), COMPONENT_CONTINUOUS)
                      for i in np.flatnonzero(flagged)]
        return points, trace

    def _points_on_circle(self, angles, sigma_min, scale, kernel_dim, flagged):
        points = []
        continuous = np.zeros(len(flagged), dtype=bool)
        for run in _flagged_runs(flagged):
            if len(run) >= CONTINUOUS_RUN_LENGTH or len(run) == len(flagged):
                continuous[run] = True
                points.extend(SpectrumPoint(self.character(angles[i]), int(kernel_dim[i]),
                                            float(sigma_min[i]), COMPONENT_CONTINUOUS)
                              for i in run)
        if _unflagged_plateau(sigma_min, scale, flagged):
            return points
        for (index,) in _discrete_minima(sigma_min):
            if continuous[index] or not self.is_candidate(sigma_min[index], scale[index]):
                continue
            angle, value = _golden_refine(lambda a: self.sigma([a]), angles[index, 0], self.step)
            if value <= self.accept_tol * scale[index]:
                points.append(SpectrumPoint(self.character([angle]), self.kernel_dim([angle]),
                                            value, COMPONENT_ISOLATED))
        return points

    def _points_on_torus(self, angles, sigma_min, scale, kernel_dim, flagged):
        points = []
        flat_flagged = flagged.reshape(sigma_min.shape)
        if _unflagged_plateau(sigma_min, scale, flagged):
            return points
        for index in _discrete_minima(sigma_min):
            if not self.is_candidate(sigma_min[index], scale[index]):
                continue
            current = [self.axis_angles[i] for i in index]
            value = float(sigma_min[index])
            for _ in range(3):
                for axis in range(len(current)):
                    def along_axis(a, axis=axis):
                        trial = list(current)
                        trial[axis] = a
                        return self.sigma(trial)
                    current[axis], value = _golden_refine(along_axis, current[axis], self.step)
            if value <= self.accept_tol * scale[index]:
                points.append(SpectrumPoint(self.character(current), self.kernel_dim(current),
                                            value, COMPONENT_ISOLATED))
            elif flat_flagged[index]:
                flat = np.ravel_multi_index(index, sigma_min.shape)
                points.append(SpectrumPoint(self.character(angles[flat]), int(kernel_dim[flat]),
                                            float(sigma_min[index]), COMPONENT_CONTINUOUS))
        return points


def _snap_and_merge(G0, points, joint_points, tol):
    """Snap scan points onto nearby joint spectral points, drop duplicates, add missing ones"""
    merged = []
    for point in points:
        for joint in joint_points:
            if point.component == COMPONENT_ISOLATED and point.character.is_close(joint.character,
                                                                                  SNAP_TOL):
                point = SpectrumPoint(joint.character, point.kernel_dim,
                                      _sigma_min(G0, joint.character), COMPONENT_ISOLATED)
                break
        if point.component == COMPONENT_ISOLATED and any(
                point.character.is_close(other.character, SNAP_TOL) for other in merged):
            continue
        merged.append(point)
    for joint in joint_points:
        if not any(joint.character.is_close(point.character, SNAP_TOL) for point in merged):
            _, kernel = rum_membership(G0, joint.character, tol)
            merged.append(SpectrumPoint(joint.character, kernel.shape[1],
                                        _sigma_min(G0, joint.character), COMPONENT_JOINT))
    return merged


def rum_spectrum_scan(G0, samples_per_circle=DEFAULT_SAMPLES, tol=DEFAULT_KERNEL_TOL,
                      accept_tol=SCAN_ACCEPT_TOL, n_processes=None, progress_bar=False):
    """
    Sample the RUM spectrum of a framework over a group with free factors

    Parameters
    ----------
    G0: GainFramework
        The framework
    samples_per_circle: int
        Grid points per circle factor of the dual group
    tol: float
        Kernel tolerance for the joint spectral points added to the result
    accept_tol: float
        A character is accepted when sigma_min <= accept_tol * max(1, sigma_max)
    n_processes: int
        Worker processes for the grid evaluation; default from the environment
    progress_bar: bool
        Show a tqdm bar over the torsion slices

    Returns
    -------
    ScanResult:
        Spectrum points sorted by torsion indices then angles, and the grid trace
    """
    spec = G0.group
    if spec.free_rank == 0:
        raise UsageError(f"group {spec} is finite; use rum_spectrum_finite instead")
    if samples_per_circle < MIN_SAMPLES:
        raise UsageError(f"at least {MIN_SAMPLES} samples per circle are needed, "
                         f"got {samples_per_circle}")

    slices = list(itertools.product(*[range(n) for n in spec.torsion_orders]))
    points, traces = [], []
    for torsion_indices in tqdm(slices, disable=not progress_bar, desc="RUM scan"):
        scanner = _Scanner(G0, samples_per_circle, tuple(torsion_indices), tol, accept_tol,
                           n_processes)
        slice_points, trace = scanner.run()
        points.extend(slice_points)
        traces.append(trace)
    n_scanned = len(slices) * samples_per_circle ** spec.free_rank
    n_found = len(points)

    points = _snap_and_merge(G0, points, joint_spectral_points(G0), tol)
    points.sort(key=lambda point: point.character.sort_key())
    logger.info(f"Scanned {n_scanned} characters: {n_found} scan points, {len(points)} spectrum "
                f"points after snapping to joint spectral points")
    return ScanResult(points=points, trace=pd.concat(traces, ignore_index=True),
                      samples_per_circle=samples_per_circle)


def rum_spectrum(G0, samples_per_circle=DEFAULT_SAMPLES, tol=DEFAULT_KERNEL_TOL, **kwargs):
    """Exact enumeration for finite groups, otherwise the scan; always returns spectrum points"""
    if G0.group.is_finite:
        return rum_spectrum_finite(G0, tol)
    return rum_spectrum_scan(G0, samples_per_circle, tol, **kwargs).points


def joint_spectral_points(G0, extra_generators=None, tol=DEFAULT_CLUSTER_TOL):
    """
    Joint spectral points of the representation

    The joint spectrum of (dtau(g_1), ..., dtau(g_n)) over the standard generators, optionally
    extended by dtau of further group elements, is mapped to characters through
    chi(g_i) = conj(lambda_i) on the standard generators.

    Parameters
    ----------
    G0: GainFramework or RepresentationTau
        Framework (or bare representation)
    extra_generators: list of GroupElement
        Additional elements appended to the generating tuple
    tol: float
        Clustering tolerance of the joint spectrum

    Returns
    -------
    list of JointSpectralPoint:
        One point per distinct character
    """
    tau = G0.tau if isinstance(G0, GainFramework) else G0
    spec = tau.group
    operators = tau.with_extra_generators(extra_generators or [])
    points = []
    for pair in joint_spectrum(operators, tol):
        standard = pair.lambdas[:spec.rank]
        for value, order in zip(standard[spec.free_rank:], spec.torsion_orders):
            if abs(value ** order - 1) > TORSION_ROOT_TOL:
                raise ContractViolationError(
                    f"joint eigenvalue {value} of a torsion generator is not a root of unity of "
                    f"order {order}")
        chi = Character.from_generator_values(spec, np.conj(standard), tol=TORSION_ROOT_TOL)
        for point in points:
            if point.character.is_close(chi, tol):
                point.eigenpair = JointEigenpair(
                    point.eigenpair.lambdas,
                    np.hstack([point.eigenpair.eigenspace, pair.eigenspace]))
                break
        else:
            points.append(JointSpectralPoint(chi, pair))
    return points


def spectrum_bound_report(G0, spectrum_characters, sample_radius=2):
    """
    Counts in the chain |Omega| >= |sigma(T)| >= max |sigma(dtau(gamma))|

    Parameters
    ----------
    G0: GainFramework
        The framework
    spectrum_characters: list of Character
        Detected spectrum
    sample_radius: int
        dtau(gamma) is sampled on the window of this radius

    Returns
    -------
    dict:
        omega_detected, joint_eigenvalues and max_sampled_eigenvalues
    """
    joint = joint_spectrum(G0.tau.with_extra_generators([]))
    sampled = max(len(unitary_eigendecomposition(matrix))
                  for matrix in G0.tau.dtau_many(window(G0.group, sample_radius).coordinates))
    return dict(omega_detected=len(unique_characters(spectrum_characters)),
                joint_eigenvalues=len(joint),
                max_sampled_eigenvalues=sampled)
