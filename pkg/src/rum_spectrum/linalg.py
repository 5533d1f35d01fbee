"""
Dense complex linear algebra: numerical kernels, unitary eigendecompositions and joint spectra of
commuting unitary tuples.

The joint spectrum is built recursively: decompose the first unitary into eigenspaces, restrict the
next unitary of the tuple to each eigenspace (commuting operators leave it invariant) and continue
until the tuple is exhausted. The order of the recursion is the order of the tuple.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from rum_spectrum import LOGGER_BASE_NAME
from rum_spectrum.exceptions import ContractViolationError, StructuralError, UsageError
from rum_spectrum.group import TWO_PI, wrap_angle

logger = logging.getLogger(LOGGER_BASE_NAME)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"

DEFAULT_KERNEL_TOL = 1e-9
DEFAULT_CLUSTER_TOL = 1e-8
UNITARY_TOL = 1e-9
COMMUTATION_TOL = 1e-9


@dataclass
class JointEigenpair:
    """
    A joint eigenvalue of a commuting unitary tuple with its joint eigenspace

    Parameters
    ----------
    lambdas: np.ndarray
        One unit complex number per operator of the tuple
    eigenspace: np.ndarray
        (dim, k) matrix with orthonormal columns spanning the joint eigenspace
    """
    lambdas: np.ndarray
    eigenspace: np.ndarray

    @property
    def dimension(self):
        return self.eigenspace.shape[1]

    def residual(self, operators):
        """max_j max_a ||T_j a - lambda_j a|| over the basis columns a"""
        return max(float(np.max(np.linalg.norm(T @ self.eigenspace - lam * self.eigenspace,
                                               axis=0)))
                   for T, lam in zip(operators, self.lambdas))


def as_complex_matrix(matrix, name="matrix"):
    """Convert to a finite two dimensional complex array"""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2:
        raise StructuralError(f"{name} must be two dimensional, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise StructuralError(f"{name} has non-finite entries")
    return matrix


def rank_threshold(singular_values, tol=DEFAULT_KERNEL_TOL):
    """Singular values at or below this threshold count as zero"""
    sigma_max = singular_values[0] if len(singular_values) else 0.0
    return tol * max(1.0, sigma_max)


def numeric_kernel(matrix, tol=DEFAULT_KERNEL_TOL):
    """
    Orthonormal basis of the numerical kernel

    Parameters
    ----------
    matrix: array_like
        (rows, cols) complex matrix
    tol: float
        Relative tolerance; a singular value sigma is zero when sigma <= tol * max(1, sigma_max)

    Returns
    -------
    np.ndarray:
        (cols, k) matrix with orthonormal columns, k = 0 when the matrix is injective
    """
    matrix = as_complex_matrix(matrix)
    if tol <= 0:
        raise UsageError(f"kernel tolerance must be positive, got {tol}")
    if 0 in matrix.shape:
        raise StructuralError(f"cannot take the kernel of an empty matrix {matrix.shape}")
    _, sigma, vh = scipy.linalg.svd(matrix, full_matrices=True)
    rank = int(np.sum(sigma > rank_threshold(sigma, tol)))
    return vh[rank:].conj().T


def batched_rank_summary(matrices, tol=DEFAULT_KERNEL_TOL):
    """
    Smallest singular value, largest singular value and kernel dimension of a matrix stack

    Parameters
    ----------
    matrices: np.ndarray
        (..., rows, cols) stack
    tol: float
        Relative rank tolerance as in :func:`numeric_kernel`

    Returns
    -------
    tuple:
        (sigma_min, sigma_max, kernel_dim) arrays with the stack shape
    """
    matrices = np.asarray(matrices, dtype=complex)
    rows, cols = matrices.shape[-2:]
    if rows == 0:
        zeros = np.zeros(matrices.shape[:-2])
        return zeros, zeros, np.full(matrices.shape[:-2], cols)
    sigma = np.linalg.svd(matrices, compute_uv=False)
    sigma_max = sigma[..., 0]
    threshold = tol * np.maximum(1.0, sigma_max)
    rank = np.sum(sigma > threshold[..., np.newaxis], axis=-1)
    sigma_min = np.zeros(matrices.shape[:-2]) if rows < cols else sigma[..., -1]
    return sigma_min, sigma_max, cols - rank


def check_unitary(matrix, tol=UNITARY_TOL, name="matrix"):
    matrix = as_complex_matrix(matrix, name=name)
    if matrix.shape[0] != matrix.shape[1]:
        raise StructuralError(f"{name} must be square, got shape {matrix.shape}")
    deviation = np.linalg.norm(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))
    if deviation > tol:
        raise ContractViolationError(f"{name} is not unitary: ||U*U - I|| = {deviation:.3g}")
    return matrix


def cluster_angles(angles, tol=DEFAULT_CLUSTER_TOL):
    """
    Group angles on the circle whose neighbours are closer than `tol`

    Returns
    -------
    list:
        Index arrays, one per cluster, ordered by the wrapped angle of the cluster start
    """
    angles = wrap_angle(np.asarray(angles, dtype=float))
    if angles.size == 0:
        return []
    order = np.argsort(angles, kind="stable")
    sorted_angles = angles[order]
    breaks = np.flatnonzero(np.diff(sorted_angles) >= tol) + 1
    clusters = np.split(order, breaks)
    if len(clusters) > 1 and sorted_angles[0] + TWO_PI - sorted_angles[-1] < tol:
        # the last cluster wraps around through angle zero
        clusters[0] = np.concatenate([clusters.pop(), clusters[0]])
    return clusters


def _unit_mean(values):
    mean = np.mean(values)
    return mean / abs(mean) if abs(mean) > 0 else values[0]


def _eigen_clusters(matrix, cluster_tol):
    # complex Schur form of a normal matrix is diagonal with orthonormal Schur vectors
    triangular, vectors = scipy.linalg.schur(matrix, output="complex")
    eigenvalues = np.diag(triangular)
    return [(_unit_mean(eigenvalues[index]), vectors[:, index])
            for index in cluster_angles(np.angle(eigenvalues), cluster_tol)]


def unitary_eigendecomposition(matrix, cluster_tol=DEFAULT_CLUSTER_TOL):
    """
    Eigenvalues and orthonormal eigenspaces of a unitary matrix

    Parameters
    ----------
    matrix: array_like
        Unitary matrix
    cluster_tol: float
        Eigenvalues closer than this angular distance are merged into one eigenspace

    Returns
    -------
    list:
        (eigenvalue, basis) pairs with mutually orthogonal orthonormal bases
    """
    matrix = check_unitary(matrix)
    return _eigen_clusters(matrix, cluster_tol)


def check_commuting(operators, tol=COMMUTATION_TOL):
    for i, first in enumerate(operators):
        for j in range(i + 1, len(operators)):
            deviation = np.linalg.norm(first @ operators[j] - operators[j] @ first)
            if deviation > tol:
                raise ContractViolationError(
                    f"operators {i} and {j} do not commute: ||T_i T_j - T_j T_i|| = "
                    f"{deviation:.3g}")


def joint_spectrum(operators, tol=DEFAULT_CLUSTER_TOL):
    """
    Joint eigenvalues and joint eigenspaces of a tuple of commuting unitaries

    Parameters
    ----------
    operators: list
        Pairwise commuting unitary (dim, dim) matrices, dim >= 1
    tol: float
        Angular clustering tolerance used at every level of the recursion

    Returns
    -------
    list of JointEigenpair:
        Orthogonal joint eigenspaces whose dimensions add up to dim
    """
    if not operators:
        raise StructuralError("joint spectrum needs at least one operator")
    operators = [check_unitary(T, name=f"operator {i}") for i, T in enumerate(operators)]
    dimension = operators[0].shape[0]
    if dimension == 0:
        raise StructuralError("joint spectrum of a zero dimensional space is undefined")
    if any(T.shape != operators[0].shape for T in operators):
        raise StructuralError("operators of a joint spectrum must share their shape")
    check_commuting(operators)

    pairs = []

    def descend(basis, level, lambdas):
        if level == len(operators):
            pairs.append(JointEigenpair(np.array(lambdas, dtype=complex), basis))
            return
        restricted = basis.conj().T @ operators[level] @ basis
        for _, vectors in _eigen_clusters(restricted, tol):
            sub_basis = basis @ vectors
            # Rayleigh quotient on the whole sub space, projected back to the circle
            value = np.trace(sub_basis.conj().T @ operators[level] @ sub_basis) / sub_basis.shape[1]
            descend(sub_basis, level + 1, lambdas + [value / abs(value)])

    descend(np.eye(dimension, dtype=complex), 0, [])
    logger.debug(f"Joint spectrum of {len(operators)} operators on C^{dimension}: "
                 f"{len(pairs)} joint eigenvalues")
    return pairs
