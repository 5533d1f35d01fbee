"""
Reading gain frameworks from YAML (or JSON) framework files.

A framework file has the sections

* ``group``: ``free_rank`` and ``torsion`` (list of orders)
* ``representation``: one entry per standard generator with a ``linear`` matrix and an optional
  ``translation`` vector
* ``vertices``: list of vertex ids
* ``edges``: ``id``, ``source``, ``range``, ``gain`` and either an explicit ``phi`` matrix or
  ``derive: true``; cylindrical norms accept a ``block`` (``xy`` or ``z``) per derived edge
* ``placement`` (optional): seed point per vertex
* ``norm`` (optional): ``kind`` euclidean, lq (with ``q``) or cylindrical (with optional ``split``)

Matrix and vector entries are real numbers or [re, im] pairs. Every problem is reported with the
JSON path of the offending entry.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from rum_spectrum import FRAMEWORK_DIRECTORY, LOGGER_BASE_NAME
from rum_spectrum.exceptions import (ContractViolationError, DegenerateConstraintError,
                                     FrameworkFileError, StructuralError, UsageError,
                                     ValidationError)
from rum_spectrum.gain import AffineIsometry, GainEdge, GainFramework, RepresentationTau
from rum_spectrum.geometry import NORM_CYLINDRICAL, NORM_SMOOTH, NormSpec, Placement, derive_constraint
from rum_spectrum.group import AbelianGroupSpec
from rum_spectrum.utils import pairs_to_complex

logger = logging.getLogger(LOGGER_BASE_NAME)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"

FRAMEWORK_SUFFIXES = (".yml", ".yaml", ".json")
REQUIRED_SECTIONS = ("group", "representation", "vertices", "edges")


@dataclass
class FrameworkDocument:
    """
    A parsed framework file

    Parameters
    ----------
    G0: GainFramework
        The gain framework
    placement: Placement
        Seed points, None if the file has none
    norm: NormSpec
        Norm the constraints were derived from, None if the file has none
    file_name: Path
        Origin of the document
    """
    G0: GainFramework
    placement: Placement = None
    norm: NormSpec = None
    file_name: Path = None


def _require_mapping(value, location):
    if not isinstance(value, dict):
        raise FrameworkFileError(f"expected a mapping, got {type(value).__name__}", location)
    return value


def _require_list(value, location):
    if not isinstance(value, list):
        raise FrameworkFileError(f"expected a list, got {type(value).__name__}", location)
    return value


def _parse_integer(value, location, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise FrameworkFileError(f"expected an integer, got {value!r}", location)
    if minimum is not None and value < minimum:
        raise FrameworkFileError(f"expected an integer >= {minimum}, got {value}", location)
    return value


def _parse_vector(value, location, length=None):
    entries = _require_list(value, location)
    vector = []
    for i, entry in enumerate(entries):
        try:
            vector.append(pairs_to_complex(entry))
        except ValueError as err:
            raise FrameworkFileError(str(err), f"{location}[{i}]")
    if length is not None and len(vector) != length:
        raise FrameworkFileError(f"expected {length} entries, got {len(vector)}", location)
    return np.array(vector, dtype=complex)


def _parse_matrix(value, location, shape=None):
    rows = _require_list(value, location)
    if not rows:
        raise FrameworkFileError("matrix has no rows", location)
    matrix = [_parse_vector(row, f"{location}[{i}]") for i, row in enumerate(rows)]
    if len({row.size for row in matrix}) != 1:
        raise FrameworkFileError("matrix rows differ in length", location)
    matrix = np.array(matrix)
    if shape is not None and matrix.shape != shape:
        raise FrameworkFileError(f"expected shape {shape}, got {matrix.shape}", location)
    return matrix


def _parse_group(data):
    location = "$.group"
    data = _require_mapping(data, location)
    free_rank = _parse_integer(data.get("free_rank", 0), f"{location}.free_rank", minimum=0)
    torsion = _require_list(data.get("torsion", []), f"{location}.torsion")
    orders = [_parse_integer(order, f"{location}.torsion[{i}]", minimum=2)
              for i, order in enumerate(torsion)]
    try:
        return AbelianGroupSpec(free_rank, tuple(orders))
    except StructuralError as err:
        raise FrameworkFileError(str(err), location)


def _parse_representation(data, spec):
    location = "$.representation"
    images = _require_list(data, location)
    if len(images) != spec.rank:
        raise FrameworkFileError(f"group {spec} needs {spec.rank} generator images, got "
                                 f"{len(images)}", location)
    isometries = []
    for i, image in enumerate(images):
        here = f"{location}[{i}]"
        image = _require_mapping(image, here)
        if "linear" not in image:
            raise FrameworkFileError("missing key 'linear'", here)
        linear = _parse_matrix(image["linear"], f"{here}.linear")
        translation = None
        if image.get("translation") is not None:
            translation = _parse_vector(image["translation"], f"{here}.translation",
                                        length=linear.shape[0])
        try:
            isometries.append(AffineIsometry(linear, translation))
        except (StructuralError, ContractViolationError) as err:
            raise FrameworkFileError(str(err), here)
    try:
        return RepresentationTau(spec, isometries)
    except (StructuralError, ContractViolationError) as err:
        raise FrameworkFileError(str(err), location)


def _parse_vertices(data):
    location = "$.vertices"
    vertices = _require_list(data, location)
    if not vertices:
        raise FrameworkFileError("at least one vertex is needed", location)
    names = [str(vertex) for vertex in vertices]
    if len(set(names)) != len(names):
        raise FrameworkFileError(f"vertex ids must be unique: {names}", location)
    return names


def _parse_placement(data, vertices, dimension):
    location = "$.placement"
    data = _require_mapping(data, location)
    seeds = dict()
    for vertex in vertices:
        if vertex not in data:
            raise FrameworkFileError(f"no seed point for vertex '{vertex}'", location)
        point = _parse_vector(data[vertex], f"{location}.{vertex}", length=dimension)
        if not np.allclose(point.imag, 0):
            raise FrameworkFileError("seed points must be real", f"{location}.{vertex}")
        seeds[vertex] = point.real
    return Placement(seeds)


def _parse_norm(data, blocks):
    location = "$.norm"
    data = _require_mapping(data, location)
    kind = data.get("kind", "euclidean")
    if kind == NORM_SMOOTH:
        raise FrameworkFileError("smooth_numeric norms need a callable and are only available "
                                 "from the library", f"{location}.kind")
    try:
        return NormSpec(kind=kind, q=data.get("q"), split=data.get("split"), blocks=blocks)
    except ValidationError as err:
        raise FrameworkFileError(str(err), location)


def _parse_gain(value, spec, location):
    entries = _require_list(value, location)
    if len(entries) != spec.rank:
        raise FrameworkFileError(f"gain needs {spec.rank} coordinates, got {len(entries)}",
                                 location)
    coordinates = [_parse_integer(entry, f"{location}[{i}]") for i, entry in enumerate(entries)]
    return spec.element_from_coordinates(coordinates)


def framework_from_dict(data, file_name=None):
    """
    Build a gain framework from the parsed content of a framework file

    Parameters
    ----------
    data: dict
        Content of the framework file
    file_name: Path
        Only stored in the returned document

    Returns
    -------
    FrameworkDocument:
        The framework with its placement and norm

    Raises
    ------
    FrameworkFileError:
        With the JSON path of the first problem found
    """
    data = _require_mapping(data, "$")
    for section in REQUIRED_SECTIONS:
        if section not in data:
            raise FrameworkFileError(f"missing section '{section}'", "$")
    spec = _parse_group(data["group"])
    tau = _parse_representation(data["representation"], spec)
    vertices = _parse_vertices(data["vertices"])

    placement = None
    if data.get("placement") is not None:
        placement = _parse_placement(data["placement"], vertices, tau.dimension)

    raw_edges = _require_list(data["edges"], "$.edges")
    blocks = dict()
    for i, edge in enumerate(raw_edges):
        edge = _require_mapping(edge, f"$.edges[{i}]")
        if "block" in edge:
            blocks[str(edge.get("id", f"e{i + 1}"))] = edge["block"]

    norm = None
    if data.get("norm") is not None:
        norm = _parse_norm(data["norm"], blocks)
    elif blocks:
        raise FrameworkFileError("edge blocks need a cylindrical norm", "$.norm")
    if blocks and norm.kind != NORM_CYLINDRICAL:
        raise FrameworkFileError(f"edge blocks need a cylindrical norm, got '{norm.kind}'",
                                 "$.norm.kind")

    edges = []
    for i, edge in enumerate(raw_edges):
        here = f"$.edges[{i}]"
        for key in ("source", "range", "gain"):
            if key not in edge:
                raise FrameworkFileError(f"missing key '{key}'", here)
        edge_id = str(edge.get("id", f"e{i + 1}"))
        source, target = str(edge["source"]), str(edge["range"])
        for key, vertex in (("source", source), ("range", target)):
            if vertex not in vertices:
                raise FrameworkFileError(f"unknown vertex '{vertex}'", f"{here}.{key}")
        gain = _parse_gain(edge["gain"], spec, f"{here}.gain")
        derive = edge.get("derive", False)
        if derive and "phi" in edge:
            raise FrameworkFileError("give either 'phi' or 'derive: true', not both", here)
        if derive:
            if placement is None or norm is None:
                raise FrameworkFileError("'derive: true' needs a placement and a norm", here)
            try:
                phi = derive_constraint(tau, placement, norm, source, target, gain, edge_id)
            except DegenerateConstraintError as err:
                raise FrameworkFileError(str(err), here)
        elif "phi" in edge:
            phi = _parse_matrix(edge["phi"], f"{here}.phi")
            if phi.shape[1] != tau.dimension:
                raise FrameworkFileError(f"phi needs {tau.dimension} columns, got {phi.shape[1]}",
                                         f"{here}.phi")
        else:
            raise FrameworkFileError("give either 'phi' or 'derive: true'", here)
        try:
            edges.append(GainEdge(id=edge_id, source=source, range=target, gain=gain, phi=phi))
        except (ValidationError, StructuralError) as err:
            raise FrameworkFileError(str(err), here)

    dY = data.get("dY")
    if dY is not None:
        dY = _parse_integer(dY, "$.dY", minimum=1)
    try:
        G0 = GainFramework(vertices=vertices, edges=edges, tau=tau, dY=dY)
    except (ValidationError, StructuralError) as err:
        raise FrameworkFileError(str(err), "$.edges")
    logger.debug(f"Framework over {spec}: {len(vertices)} vertices, {len(edges)} edges, "
                 f"dX = {G0.dX}, dY = {G0.dY}")
    return FrameworkDocument(G0=G0, placement=placement, norm=norm, file_name=file_name)


def load_framework(file_name):
    """
    Read a framework file

    Parameters
    ----------
    file_name: str or Path
        YAML or JSON framework file

    Returns
    -------
    FrameworkDocument:
        The parsed framework
    """
    file_name = Path(file_name)
    logger.info(f"Reading framework {file_name}")
    with open(file_name, "r") as stream:
        try:
            data = yaml.safe_load(stream)
        except yaml.YAMLError as err:
            raise FrameworkFileError(f"cannot parse {file_name}: {err}", "$")
    return framework_from_dict(data, file_name=file_name)


def bundled_frameworks():
    """Names of the frameworks shipped with the package"""
    directory = Path(__file__).parent / FRAMEWORK_DIRECTORY
    return sorted(path.stem for path in directory.iterdir() if path.suffix in FRAMEWORK_SUFFIXES)


def bundled_framework_path(name):
    """Path of a bundled framework file, given with or without suffix"""
    directory = Path(__file__).parent / FRAMEWORK_DIRECTORY
    candidates = [directory / name] + [directory / f"{name}{suffix}"
                                       for suffix in FRAMEWORK_SUFFIXES]
    for path in candidates:
        if path.is_file():
            return path
    raise UsageError(f"no bundled framework '{name}', choose from {bundled_frameworks()}")
