"""
Finitely generated discrete abelian groups, their characters and Bohr-Bochner windows.

A group is written as Z^r x Z_{n_1} x ... x Z_{n_k}. Elements and characters are immutable value
objects. Coordinates are always ordered free part first, torsion part second, which is also the
order of the standard generators.
"""

import itertools
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from rum_spectrum import LOGGER_BASE_NAME
from rum_spectrum.exceptions import StructuralError, UsageError

logger = logging.getLogger(LOGGER_BASE_NAME)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"

TWO_PI = 2 * np.pi
ANGLE_TOL = 1e-9

PI_TOKEN_REGEXP = re.compile(r"^([+-]?\d*\.?\d*)\*?pi(?:/(\d+(?:\.\d+)?))?$")


def wrap_angle(angle):
    """Reduce an angle (or array of angles) to [0, 2pi)"""
    wrapped = np.mod(angle, TWO_PI)
    # mod can round up to exactly 2pi for tiny negative input
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def angular_distance(alpha, beta):
    """Distance on the circle between two angles, in [0, pi]"""
    delta = np.mod(np.asarray(alpha) - np.asarray(beta), TWO_PI)
    return np.minimum(delta, TWO_PI - delta)


@dataclass(frozen=True)
class AbelianGroupSpec:
    """
    The group Z^r x Z_{n_1} x ... x Z_{n_k}

    Parameters
    ----------
    free_rank: int
        Number of Z factors r
    torsion_orders: tuple of int
        Orders n_i >= 2 of the cyclic factors
    """
    free_rank: int = 0
    torsion_orders: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "free_rank", int(self.free_rank))
        object.__setattr__(self, "torsion_orders", tuple(int(n) for n in self.torsion_orders))
        if self.free_rank < 0:
            raise StructuralError(f"free rank must be non-negative, got {self.free_rank}")
        if self.free_rank + len(self.torsion_orders) < 1:
            raise StructuralError("group needs at least one factor")
        for order in self.torsion_orders:
            if order < 2:
                raise StructuralError(f"torsion orders must be >= 2, got {order}")

    @property
    def torsion_rank(self):
        return len(self.torsion_orders)

    @property
    def rank(self):
        """Number of standard generators"""
        return self.free_rank + self.torsion_rank

    @property
    def is_finite(self):
        return self.free_rank == 0

    @property
    def order(self):
        """Group order, or None for infinite groups"""
        if not self.is_finite:
            return None
        return int(np.prod(self.torsion_orders))

    @property
    def torsion_size(self):
        return int(np.prod(self.torsion_orders)) if self.torsion_orders else 1

    def zero(self):
        return GroupElement(self, (0,) * self.free_rank, (0,) * self.torsion_rank)

    def element(self, free_part=(), torsion_part=()):
        return GroupElement(self, tuple(free_part), tuple(torsion_part))

    def element_from_coordinates(self, coordinates):
        coordinates = [int(c) for c in coordinates]
        if len(coordinates) != self.rank:
            raise StructuralError(f"expected {self.rank} coordinates, got {len(coordinates)}")
        return GroupElement(self, tuple(coordinates[:self.free_rank]),
                            tuple(coordinates[self.free_rank:]))

    def generators(self):
        """The standard generators: unit vectors of the free part, then of the torsion part"""
        return [self.element_from_coordinates(row) for row in np.eye(self.rank, dtype=int)]

    def reduce_coordinates(self, coordinates):
        """Reduce the torsion columns of an integer coordinate array modulo their orders"""
        coordinates = np.array(coordinates, dtype=np.int64, copy=True)
        if self.torsion_rank:
            coordinates[..., self.free_rank:] = np.mod(coordinates[..., self.free_rank:],
                                                       self.torsion_orders)
        return coordinates

    def characters(self):
        """All characters of a finite group in lexicographic torsion-index order"""
        if not self.is_finite:
            raise UsageError("only a finite group has a finite list of characters")
        return [Character(self, (), indices)
                for indices in itertools.product(*[range(n) for n in self.torsion_orders])]

    def check_same(self, other):
        if self != other:
            raise StructuralError(f"group specs differ: {self} versus {other}")

    def to_dict(self):
        return dict(free_rank=self.free_rank, torsion=list(self.torsion_orders))

    @classmethod
    def from_dict(cls, data):
        return cls(free_rank=data.get("free_rank", 0), torsion_orders=tuple(data.get("torsion", ())))

    def __str__(self):
        factors = ["Z"] * self.free_rank + [f"Z{n}" for n in self.torsion_orders]
        return " x ".join(factors)


@dataclass(frozen=True)
class GroupElement:
    """An element (free_part, torsion_part) of an abelian group; torsion entries are reduced"""
    spec: AbelianGroupSpec
    free_part: tuple
    torsion_part: tuple

    def __post_init__(self):
        if len(self.free_part) != self.spec.free_rank:
            raise StructuralError(f"free part {self.free_part} does not match rank "
                                  f"{self.spec.free_rank}")
        if len(self.torsion_part) != self.spec.torsion_rank:
            raise StructuralError(f"torsion part {self.torsion_part} does not match "
                                  f"{self.spec.torsion_orders}")
        object.__setattr__(self, "free_part", tuple(int(m) for m in self.free_part))
        object.__setattr__(self, "torsion_part", tuple(
            int(t) % n for t, n in zip(self.torsion_part, self.spec.torsion_orders)))

    @property
    def coordinates(self):
        return np.array(self.free_part + self.torsion_part, dtype=np.int64)

    @property
    def is_zero(self):
        return not any(self.free_part) and not any(self.torsion_part)

    @property
    def free_sup_norm(self):
        """max |m_l| over the free coordinates (0 for torsion-only groups)"""
        return max((abs(m) for m in self.free_part), default=0)

    @property
    def free_l1_norm(self):
        return sum(abs(m) for m in self.free_part)

    def __add__(self, other):
        return add(self, other)

    def __neg__(self):
        return GroupElement(self.spec, tuple(-m for m in self.free_part),
                            tuple(-t for t in self.torsion_part))

    def __sub__(self, other):
        return add(self, -other)

    def sort_key(self):
        return self.free_part + self.torsion_part

    def to_list(self):
        return list(self.free_part + self.torsion_part)

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.free_part + self.torsion_part) + ")"


def add(a, b):
    """Group law: componentwise sum with the torsion part reduced"""
    a.spec.check_same(b.spec)
    return GroupElement(a.spec,
                        tuple(x + y for x, y in zip(a.free_part, b.free_part)),
                        tuple(x + y for x, y in zip(a.torsion_part, b.torsion_part)))


@dataclass(frozen=True, eq=False)
class Character:
    """
    A character of the dual group

    Each Z factor contributes an angle theta in [0, 2pi) (the value e^{i theta} on its generator),
    each Z_n factor an index j in [0, n) (the value e^{2 pi i j / n}).

    Parameters
    ----------
    spec: AbelianGroupSpec
        The group the character lives on
    free_angles: tuple of float
        One angle per free factor
    torsion_indices: tuple of int
        One index per torsion factor
    """
    spec: AbelianGroupSpec
    free_angles: tuple = ()
    torsion_indices: tuple = ()

    def __post_init__(self):
        if len(self.free_angles) != self.spec.free_rank:
            raise StructuralError(f"expected {self.spec.free_rank} angles, "
                                  f"got {len(self.free_angles)}")
        if len(self.torsion_indices) != self.spec.torsion_rank:
            raise StructuralError(f"expected {self.spec.torsion_rank} torsion indices, "
                                  f"got {len(self.torsion_indices)}")
        angles = tuple(float(wrap_angle(float(a))) for a in self.free_angles)
        if not all(np.isfinite(angles)):
            raise StructuralError(f"character angles must be finite: {self.free_angles}")
        object.__setattr__(self, "free_angles", angles)
        object.__setattr__(self, "torsion_indices", tuple(
            int(j) % n for j, n in zip(self.torsion_indices, self.spec.torsion_orders)))

    @classmethod
    def trivial(cls, spec):
        return cls(spec, (0.0,) * spec.free_rank, (0,) * spec.torsion_rank)

    @classmethod
    def from_generator_values(cls, spec, values, tol=1e-8):
        """
        Build the character taking the given unit values on the standard generators

        Torsion values must be n-th roots of unity within `tol`, otherwise a StructuralError is
        raised.
        """
        values = np.asarray(values, dtype=complex)
        angles = wrap_angle(np.angle(values))
        torsion = []
        for value, angle, order in zip(values[spec.free_rank:], angles[spec.free_rank:],
                                       spec.torsion_orders):
            if abs(value ** order - 1) > tol:
                raise StructuralError(f"value {value} is not a root of unity of order {order}")
            torsion.append(int(np.rint(angle * order / TWO_PI)) % order)
        return cls(spec, tuple(angles[:spec.free_rank]), tuple(torsion))

    @property
    def is_trivial(self):
        return self.is_close(Character.trivial(self.spec))

    def phase(self, coordinates):
        """The real phase of the character on an (N, rank) integer coordinate array"""
        coordinates = np.atleast_2d(np.asarray(coordinates))
        phase = np.zeros(coordinates.shape[0])
        if self.spec.free_rank:
            phase += coordinates[:, :self.spec.free_rank] @ np.array(self.free_angles)
        for column, (index, order) in enumerate(zip(self.torsion_indices, self.spec.torsion_orders)):
            # keep torsion phases exact by reducing the integer product first
            phase += TWO_PI * np.mod(index * coordinates[:, self.spec.free_rank + column],
                                     order) / order
        return phase

    def evaluate_coordinates(self, coordinates):
        """Vectorised evaluation on an (N, rank) coordinate array"""
        return np.exp(1j * self.phase(coordinates))

    def __call__(self, gamma):
        return evaluate_character(self, gamma)

    def generator_values(self):
        """Values on the standard generators"""
        return self.evaluate_coordinates(np.eye(self.spec.rank, dtype=np.int64))

    def conjugate(self):
        return Character(self.spec, tuple(-a for a in self.free_angles),
                         tuple(-j for j in self.torsion_indices))

    def product(self, other):
        self.spec.check_same(other.spec)
        return Character(self.spec,
                         tuple(a + b for a, b in zip(self.free_angles, other.free_angles)),
                         tuple(a + b for a, b in zip(self.torsion_indices, other.torsion_indices)))

    def distance(self, other):
        """Max angular distance over the free factors; inf if the torsion indices differ"""
        self.spec.check_same(other.spec)
        if self.torsion_indices != other.torsion_indices:
            return np.inf
        if not self.free_angles:
            return 0.0
        return float(np.max(angular_distance(self.free_angles, other.free_angles)))

    def is_close(self, other, tol=ANGLE_TOL):
        return self.distance(other) <= tol

    def sort_key(self):
        return self.torsion_indices + self.free_angles

    def to_dict(self):
        return dict(angles=list(self.free_angles), torsion_indices=list(self.torsion_indices))

    @classmethod
    def from_dict(cls, spec, data):
        return cls(spec, tuple(data.get("angles", ())), tuple(data.get("torsion_indices", ())))

    def __repr__(self):
        angles = ",".join(f"{a:.10g}" for a in self.free_angles)
        indices = ",".join(str(j) for j in self.torsion_indices)
        return f"Character(angles=[{angles}], torsion=[{indices}])"


def evaluate_character(chi, gamma):
    """chi(gamma) as a complex number of modulus one"""
    chi.spec.check_same(gamma.spec)
    return complex(chi.evaluate_coordinates(gamma.coordinates[np.newaxis, :])[0])


def unique_characters(characters, tol=ANGLE_TOL):
    """Drop characters that are close to an earlier one, keeping the first occurrence"""
    unique = []
    for chi in characters:
        if not any(chi.is_close(other, tol) for other in unique):
            unique.append(chi)
    return unique


def same_character_sets(first, second, tol=ANGLE_TOL):
    """True if every character of one list is close to one of the other and vice versa"""
    return (all(any(a.is_close(b, tol) for b in second) for a in first) and
            all(any(b.is_close(a, tol) for a in first) for b in second))


@dataclass(frozen=True)
class Window:
    """
    The box H_n = [-n, n]^r x (full torsion part), enumerated in lexicographic order

    Parameters
    ----------
    spec: AbelianGroupSpec
        The group
    radius: int
        Box radius n on every free factor
    """
    spec: AbelianGroupSpec
    radius: int

    def __post_init__(self):
        if int(self.radius) < 0:
            raise StructuralError(f"window radius must be non-negative, got {self.radius}")
        object.__setattr__(self, "radius", int(self.radius))

    @property
    def shape(self):
        return (2 * self.radius + 1,) * self.spec.free_rank + self.spec.torsion_orders

    @property
    def size(self):
        return (2 * self.radius + 1) ** self.spec.free_rank * self.spec.torsion_size

    def __len__(self):
        return self.size

    @cached_property
    def coordinates(self):
        """(size, rank) integer array of all elements in lexicographic order"""
        ranges = ([np.arange(-self.radius, self.radius + 1)] * self.spec.free_rank +
                  [np.arange(n) for n in self.spec.torsion_orders])
        grids = np.meshgrid(*ranges, indexing="ij")
        coordinates = np.stack(grids, axis=-1).reshape(-1, self.spec.rank)
        coordinates.setflags(write=False)
        return coordinates

    def elements(self):
        return [self.spec.element_from_coordinates(row) for row in self.coordinates]

    def __iter__(self):
        return iter(self.elements())

    def contains(self, coordinates):
        """Vectorised membership test for an (N, rank) array of reduced coordinates"""
        coordinates = np.atleast_2d(coordinates)
        return np.all(np.abs(coordinates[:, :self.spec.free_rank]) <= self.radius, axis=1)

    def index_of(self, coordinates):
        """Row index of each coordinate in :attr:`coordinates`, -1 for points outside"""
        coordinates = self.spec.reduce_coordinates(np.atleast_2d(coordinates))
        inside = self.contains(coordinates)
        digits = coordinates.copy()
        digits[:, :self.spec.free_rank] += self.radius
        digits[~inside] = 0
        index = np.ravel_multi_index(tuple(digits.T), self.shape)
        return np.where(inside, index, -1)

    def shrink(self, margin):
        return Window(self.spec, self.radius - margin)


def window(spec, n):
    """The Bohr-Bochner window H_n"""
    if n < 0:
        raise StructuralError(f"window radius must be non-negative, got {n}")
    return Window(spec, n)


def folner_defect(gamma, n):
    """
    Exact value of |(gamma + H_n) \\ H_n| / |H_n|

    Parameters
    ----------
    gamma: GroupElement
        The shift
    n: int
        Window radius

    Returns
    -------
    Fraction:
        The translation defect of the window
    """
    if n < 0:
        raise StructuralError(f"window radius must be non-negative, got {n}")
    width = 2 * n + 1
    overlap = Fraction(1)
    for m in gamma.free_part:
        overlap *= Fraction(max(0, width - abs(m)), width)
    return 1 - overlap


def _parse_angle(token):
    token = token.strip().replace(" ", "")
    match = PI_TOKEN_REGEXP.match(token)
    if match is not None:
        factor, divisor = match.groups()
        if factor in ("", "+"):
            factor = 1.0
        elif factor == "-":
            factor = -1.0
        angle = float(factor) * np.pi
        if divisor is not None:
            angle /= float(divisor)
        return angle
    return float(token)


def parse_character(spec, text):
    """
    Parse a character from text

    Accepted forms are ``angles=pi/2;torsion=1`` (either part may be left out for a group without
    that factor type) or a bare comma separated list with one entry per standard generator, angles
    first then torsion indices, e.g. ``pi,1``. Angles accept plain floats and multiples of pi.
    """
    text = text.strip()
    angles, torsion = [], []
    try:
        if "=" in text:
            for part in text.split(";"):
                if not part.strip():
                    continue
                key, value = part.split("=", 1)
                items = [item for item in value.split(",") if item.strip()]
                key = key.strip().lower()
                if key in ("angles", "angle"):
                    angles = [_parse_angle(item) for item in items]
                elif key in ("torsion", "torsion_indices"):
                    torsion = [int(item) for item in items]
                else:
                    raise UsageError(f"unknown character field '{key}'")
        else:
            items = [item for item in text.split(",") if item.strip()]
            if len(items) != spec.rank:
                raise UsageError(f"character '{text}' needs {spec.rank} entries")
            angles = [_parse_angle(item) for item in items[:spec.free_rank]]
            torsion = [int(item) for item in items[spec.free_rank:]]
        return Character(spec, tuple(angles), tuple(torsion))
    except (ValueError, StructuralError) as err:
        if isinstance(err, UsageError):
            raise
        raise UsageError(f"cannot parse character '{text}': {err}") from err
