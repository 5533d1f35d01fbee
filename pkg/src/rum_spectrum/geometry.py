"""
Symmetric bar-and-joint frameworks.

Constraint rows are derived from a norm: for a bar with direction d = p_v - p_w the row is the
derivative of the norm at d (or, for the Euclidean norm, the unnormalised vector d itself, which has
the same kernel). The covering framework unrolls a gain framework over a window of the group; the
quotient construction folds a symmetric framework back into a gain framework.
"""

import logging
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from rum_spectrum import LOGGER_BASE_NAME
from rum_spectrum.exceptions import (DegenerateConstraintError, NonSmoothPointError,
                                     StructuralError, UsageError, ValidationError)
from rum_spectrum.flex import default_flex_tol
from rum_spectrum.gain import GainEdge, GainFramework
from rum_spectrum.group import Window, window

logger = logging.getLogger(LOGGER_BASE_NAME)

__author__ = "Eelco van Vliet"
__copyright__ = "Eelco van Vliet"
__license__ = "mit"

NORM_EUCLIDEAN = "euclidean"
NORM_LQ = "lq"
NORM_CYLINDRICAL = "cylindrical"
NORM_SMOOTH = "smooth_numeric"
NORM_KINDS = (NORM_EUCLIDEAN, NORM_LQ, NORM_CYLINDRICAL, NORM_SMOOTH)

BLOCK_NAMES = {"xy": 0, "z": 1, "first": 0, "second": 1}

COINCIDENCE_TOL = 1e-12
SMOOTHNESS_TOL = 1e-6
SYMMETRY_TOL = 1e-8


@dataclass
class NormSpec:
    """
    The norm a symmetric framework is measured in

    Parameters
    ----------
    kind: str
        One of euclidean, lq, cylindrical, smooth_numeric
    q: float
        Exponent of the lq norm, q in (1, inf)
    split: int
        Cylindrical norms: the first block holds coordinates [0, split), the second the rest.
        Default is d - 1 (xy and z in three dimensions)
    blocks: dict
        Cylindrical norms: explicit block (0/1 or xy/z) per edge id
    norm: callable
        smooth_numeric: the norm as a function of a real vector
    """
    kind: str = NORM_EUCLIDEAN
    q: float = None
    split: int = None
    blocks: dict = field(default_factory=dict)
    norm: object = None

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise ValidationError(f"unknown norm kind '{self.kind}', choose from {NORM_KINDS}")
        if self.kind == NORM_LQ:
            if self.q is None or not 1 < float(self.q) < np.inf:
                raise ValidationError(f"the lq norm needs q in (1, inf), got {self.q}")
            self.q = float(self.q)
        if self.kind == NORM_SMOOTH and not callable(self.norm):
            raise ValidationError("a smooth_numeric norm needs a callable norm")
        self.blocks = {str(key): block_index(value) for key, value in self.blocks.items()}

    def value(self, direction):
        direction = np.asarray(direction, dtype=float)
        if self.kind == NORM_EUCLIDEAN:
            return float(np.linalg.norm(direction))
        if self.kind == NORM_LQ:
            return float(np.sum(np.abs(direction) ** self.q) ** (1 / self.q))
        if self.kind == NORM_CYLINDRICAL:
            split = self.split_for(direction)
            return float(max(np.linalg.norm(direction[:split]), np.linalg.norm(direction[split:])))
        return float(self.norm(direction))

    def split_for(self, direction):
        return self.split if self.split is not None else len(direction) - 1

    def functional(self, direction, edge_id=None):
        """Constraint row (1, d) for a bar with direction p_v - p_w"""
        direction = np.asarray(direction, dtype=float)
        if self.kind == NORM_EUCLIDEAN:
            return functional_euclidean(direction, np.zeros_like(direction))
        if self.kind == NORM_LQ:
            return functional_lq(direction, self.q)
        if self.kind == NORM_CYLINDRICAL:
            block = self.blocks.get(str(edge_id)) if edge_id is not None else None
            return functional_cylindrical(direction, self.split_for(direction), block)
        return functional_smooth_numeric(self.norm, direction)

    def to_dict(self):
        data = dict(kind=self.kind)
        if self.kind == NORM_LQ:
            data["q"] = self.q
        if self.kind == NORM_CYLINDRICAL and self.split is not None:
            data["split"] = self.split
        return data


def block_index(block):
    if isinstance(block, str):
        if block not in BLOCK_NAMES:
            raise ValidationError(f"unknown cylindrical block '{block}'")
        return BLOCK_NAMES[block]
    if block not in (0, 1):
        raise ValidationError(f"cylindrical block must be 0 or 1, got {block}")
    return int(block)


def _check_direction(direction):
    if np.linalg.norm(direction) <= COINCIDENCE_TOL:
        raise DegenerateConstraintError("bar endpoints coincide")


def functional_euclidean(pv, pw):
    """Unnormalised Euclidean constraint row (p_v - p_w)^T"""
    direction = np.asarray(pv, dtype=float) - np.asarray(pw, dtype=float)
    _check_direction(direction)
    return direction[np.newaxis, :]


def functional_lq(direction, q):
    """
    Derivative of the lq norm at the bar direction

    row_i = ||d||_q^(1-q) sgn(d_i) |d_i|^(q-1)
    """
    direction = np.asarray(direction, dtype=float)
    if not 1 < q < np.inf:
        raise ValidationError(f"the lq norm needs q in (1, inf), got {q}")
    _check_direction(direction)
    norm = np.sum(np.abs(direction) ** q) ** (1 / q)
    return (norm ** (1 - q) * np.sign(direction) * np.abs(direction) ** (q - 1))[np.newaxis, :]


def functional_cylindrical(direction, split=None, block=None):
    """
    Constraint row of a max-of-two-blocks norm: the projection of d onto its active block

    Parameters
    ----------
    direction: array_like
        Bar direction d
    split: int
        First block is [0, split), second block the remainder; default d - 1
    block: int or str
        Active block. Default: the block with the larger norm, ties to the first block
    """
    direction = np.asarray(direction, dtype=float)
    if split is None:
        split = len(direction) - 1
    parts = (direction[:split], direction[split:])
    if block is None:
        block = 0 if np.linalg.norm(parts[0]) >= np.linalg.norm(parts[1]) else 1
    else:
        block = block_index(block)
    row = np.zeros_like(direction)
    if block == 0:
        row[:split] = parts[0]
    else:
        row[split:] = parts[1]
    if np.linalg.norm(row) <= COINCIDENCE_TOL:
        raise DegenerateConstraintError(f"active block {block} of {direction} vanishes")
    return row[np.newaxis, :]


def functional_smooth_numeric(norm, direction, h=None):
    """
    Numerical derivative of an arbitrary norm at d by central differences

    Smoothness is checked first: forward and backward differences with a step a hundred times
    smaller than h must agree within 1e-6 in every coordinate.
    """
    direction = np.asarray(direction, dtype=float)
    _check_direction(direction)
    if h is None:
        h = 1e-5 * max(1.0, np.linalg.norm(direction))
    h_check = h / 100
    base = norm(direction)
    row = np.empty_like(direction)
    for i in range(direction.size):
        unit = np.zeros_like(direction)
        unit[i] = 1.0
        forward = (norm(direction + h_check * unit) - base) / h_check
        backward = (base - norm(direction - h_check * unit)) / h_check
        if abs(forward - backward) > SMOOTHNESS_TOL:
            raise NonSmoothPointError(f"norm is not differentiable at {direction} along axis {i}: "
                                      f"one-sided derivatives {forward:.6g} and {backward:.6g}")
        row[i] = (norm(direction + h * unit) - norm(direction - h * unit)) / (2 * h)
    return row[np.newaxis, :]


@dataclass
class Placement:
    """
    Seed points of the representative vertices; p_{gamma v} = tau(gamma) p_v

    Parameters
    ----------
    seed_points: dict
        vertex id -> real vector of length d
    """
    seed_points: dict

    def __post_init__(self):
        self.seed_points = {str(key): np.asarray(value, dtype=float).reshape(-1)
                            for key, value in self.seed_points.items()}

    def check(self, G0):
        for vertex in G0.vertices:
            if vertex not in self.seed_points:
                raise ValidationError(f"placement has no seed point for vertex {vertex}")
            if self.seed_points[vertex].shape != (G0.dX,):
                raise StructuralError(f"seed point of {vertex} needs {G0.dX} coordinates")

    def point(self, tau, vertex, gamma):
        return np.real(tau.apply(gamma, self.seed_points[vertex]))


def edge_direction(tau, placement, source, range_vertex, gain):
    """d_e = p_{s(e)} - tau(m_e) p_{r(e)}"""
    return (placement.point(tau, source, tau.group.zero()) -
            placement.point(tau, range_vertex, gain))


def derive_constraint(tau, placement, norm, source, range_vertex, gain, edge_id=None):
    """Constraint map phi_e of a gain edge derived from the placement and the norm"""
    direction = edge_direction(tau, placement, source, range_vertex, gain)
    try:
        return norm.functional(direction, edge_id).astype(complex)
    except DegenerateConstraintError as err:
        raise DegenerateConstraintError(f"edge {edge_id}: {err}") from err


@dataclass
class Bar:
    """A bar of the covering framework from node (v, gamma) to node (w, gamma + m_e)"""
    source: tuple
    range: tuple
    edge_id: str
    phi: np.ndarray


class CoveringFramework(object):
    """
    The symmetric framework obtained by unrolling a gain framework over a window

    Parameters
    ----------
    G0: GainFramework
        The gain framework
    window: Window
        Group elements that get a copy of every vertex
    points: dict
        node -> placed point (None if the framework has no placement)
    bars: list of Bar
        The bars with their constraint rows
    """

    def __init__(self, G0, window, points, bars):
        self.G0 = G0
        self.tau = G0.tau
        self.window = window
        self.points = points
        self.bars = bars
        self.nodes = [(vertex, tuple(int(c) for c in row))
                      for vertex in G0.vertices for row in window.coordinates]

    @property
    def graph(self):
        """Undirected multigraph of the covering with node attribute point"""
        graph = nx.MultiGraph()
        for node in self.nodes:
            graph.add_node(node, point=self.points.get(node))
        for bar in self.bars:
            graph.add_edge(bar.source, bar.range, edge_id=bar.edge_id)
        return graph

    def translation_action(self):
        """The group acting on the nodes by translation; None when the image leaves the window"""

        def act(gamma, node):
            vertex, coordinates = node
            image = self.tau.group.reduce_coordinates(np.array(coordinates) + gamma.coordinates)
            if self.window.index_of(image)[0] < 0:
                return None
            return vertex, tuple(int(c) for c in image)
        return act

    def to_dict(self):
        def node_id(node):
            return f"{node[0]}@{','.join(str(c) for c in node[1])}"
        vertices = []
        for node in self.nodes:
            point = self.points.get(node)
            vertices.append(dict(id=node_id(node), gamma=list(node[1]),
                                 point=None if point is None else [float(x) for x in point]))
        bars = [{"from": node_id(bar.source), "to": node_id(bar.range), "edge": bar.edge_id}
                for bar in self.bars]
        return dict(window_radius=self.window.radius, vertices=vertices, bars=bars)


def build_covering(G0, placement=None, window_=None, norm=None, radius=None):
    """
    Unroll a gain framework over a window

    Every vertex v gets a copy (v, gamma) placed at tau(gamma) p_v. Every edge e gives a bar from
    (s(e), gamma) to (r(e), gamma + m_e) whenever the far end is still inside the window. With a
    norm the bar constraint is regenerated from the placed points, otherwise it is
    phi_e dtau(-gamma).

    Parameters
    ----------
    G0: GainFramework
        The gain framework
    placement: Placement
        Seed points; required when a norm is given
    window_: Window
        The window; alternatively give `radius`
    norm: NormSpec
        Norm used to regenerate constraints
    radius: int
        Window radius if no window is given

    Returns
    -------
    CoveringFramework:
        Placed vertices and bars
    """
    if window_ is None:
        window_ = window(G0.group, radius if radius is not None else 0)
    if norm is not None and placement is None:
        raise UsageError("regenerating constraints from a norm needs a placement")
    if placement is not None:
        placement.check(G0)

    points = dict()
    if placement is not None:
        for vertex in G0.vertices:
            for gamma in window_.elements():
                points[(vertex, tuple(gamma.to_list()))] = placement.point(G0.tau, vertex, gamma)

    bars = []
    coordinates = window_.coordinates
    inverse_parts = G0.tau.dtau_many(-coordinates)
    for edge in G0.edges:
        far = G0.group.reduce_coordinates(coordinates + edge.gain.coordinates)
        inside = window_.index_of(far) >= 0
        for row, far_row, inverse, keep in zip(coordinates, far, inverse_parts, inside):
            if not keep:
                continue
            source = (edge.source, tuple(int(c) for c in row))
            target = (edge.range, tuple(int(c) for c in far_row))
            if norm is not None:
                try:
                    phi = norm.functional(points[source] - points[target], edge.id).astype(complex)
                except DegenerateConstraintError as err:
                    raise DegenerateConstraintError(f"bar {source} - {target}: {err}") from err
            else:
                if placement is not None and np.allclose(points[source], points[target],
                                                         atol=COINCIDENCE_TOL):
                    raise DegenerateConstraintError(f"bar {source} - {target} has coincident "
                                                    f"endpoints")
                phi = edge.phi @ inverse
            bars.append(Bar(source, target, edge.id, phi))
    logger.info(f"Covering over window radius {window_.radius}: "
                f"{len(G0.vertices) * window_.size} vertices, {len(bars)} bars")
    return CoveringFramework(G0, window_, points, bars)


def symmetry_defect(covering):
    """
    Max deviation between the bar constraints and phi_e dtau(-gamma) over all bars

    Bars regenerated from a symmetric norm satisfy the symmetry condition, so the defect is at
    rounding level for Euclidean, lq (signed permutation symmetries) and cylindrical norms.
    """
    edges = {edge.id: edge for edge in covering.G0.edges}
    defect = 0.0
    for bar in covering.bars:
        gamma = covering.tau.group.element_from_coordinates(bar.source[1])
        expected = edges[bar.edge_id].phi @ covering.tau.dtau(-gamma)
        defect = max(defect, float(np.max(np.abs(bar.phi - expected))))
    return defect


def canonical_gain(gain):
    """Of m and -m pick the one whose first non-zero free entry is positive, else smaller torsion"""
    negative = -gain
    for entry in gain.free_part:
        if entry != 0:
            return entry > 0
    return gain.torsion_part <= negative.torsion_part


def _node_label(node):
    return str(node[0]) if isinstance(node, tuple) and len(node) == 2 else str(node)


def quotient_gain_framework(covering, action=None, group_elements=None):
    """
    Fold a symmetric framework into a gain framework

    Parameters
    ----------
    covering: CoveringFramework
        Nodes, bars with constraint rows and the representation tau
    action: callable
        action(gamma, node) -> node, or None when the image is not part of the data. Default: the
        translation action of the covering
    group_elements: list of GroupElement
        Elements used to build the orbits. Default: the whole group when finite, otherwise the
        window of twice the covering radius

    Returns
    -------
    GainFramework:
        One vertex per orbit (represented by its lexicographically smallest node), one edge per bar
        orbit with source at the smaller representative
    """
    spec = covering.tau.group
    if action is None:
        action = covering.translation_action()
    if group_elements is None:
        group_elements = window(spec, 2 * covering.window.radius).elements()
    covers_group = spec.is_finite and len({g for g in group_elements}) == spec.order
    nodes = list(covering.nodes)
    node_set = set(nodes)

    orbit_graph = nx.Graph()
    orbit_graph.add_nodes_from(nodes)
    for node in nodes:
        for gamma in group_elements:
            image = action(gamma, node)
            if image is None:
                if covers_group:
                    raise ValidationError(f"incomplete orbit data: {gamma} maps {node} outside "
                                          f"the supplied vertices")
                continue
            if image not in node_set:
                raise ValidationError(f"incomplete orbit data: image {image} of {node} is not a "
                                      f"vertex")
            if image == node and not gamma.is_zero:
                raise ValidationError(f"action is not free: {gamma} fixes vertex {node}")
            orbit_graph.add_edge(node, image)

    representative, offset = dict(), dict()
    for orbit in nx.connected_components(orbit_graph):
        rep = min(orbit)
        for node in orbit:
            for gamma in group_elements:
                if action(gamma, rep) == node:
                    representative[node], offset[node] = rep, gamma
                    break
            else:
                raise ValidationError(f"incomplete orbit data: {node} is not reached from {rep}")

    edges = dict()
    for bar in covering.bars:
        for end in (bar.source, bar.range):
            if end not in node_set:
                raise ValidationError(f"incomplete orbit data: bar end {end} is not a vertex")
        source, target = representative[bar.source], representative[bar.range]
        gain = offset[bar.range] - offset[bar.source]
        phi = bar.phi @ covering.tau.dtau(offset[bar.source])
        if source == target and (gain + gain).is_zero:
            raise ValidationError(f"action is not free on bars: bar {bar.source} - {bar.range} "
                                  f"is mapped onto itself")
        if source > target or (source == target and not canonical_gain(gain)):
            # reverse the bar: phi_{w,v} = -phi_{v,w}
            phi = -bar.phi @ covering.tau.dtau(offset[bar.range])
            source, target, gain = target, source, -gain
        key = (source, target, gain)
        if key not in edges:
            edges[key] = phi

    representatives = sorted(set(representative.values()))
    labels = {rep: _node_label(rep) for rep in representatives}
    if len(set(labels.values())) != len(labels):
        labels = {rep: str(rep) for rep in representatives}
    gain_edges = []
    for number, key in enumerate(sorted(edges, key=lambda k: (k[0], k[1], k[2].sort_key()))):
        source, target, gain = key
        gain_edges.append(GainEdge(id=f"e{number + 1}", source=labels[source],
                                   range=labels[target], gain=gain, phi=edges[key]))
    logger.info(f"Quotient: {len(representatives)} vertex orbits, {len(gain_edges)} edge orbits")
    return GainFramework(vertices=[labels[rep] for rep in representatives], edges=gain_edges,
                         tau=covering.tau, dY=covering.G0.dY)


def normalised_gain_data(G0):
    """
    Gain data with loops and edge orientations normalised as in the quotient construction

    Returns
    -------
    list:
        Sorted (source, range, gain coordinates) tuples
    """
    data = []
    for edge in G0.edges:
        source, target, gain = edge.source, edge.range, edge.gain
        if source > target or (source == target and not canonical_gain(gain)):
            source, target, gain = target, source, -gain
        data.append((source, target, tuple(gain.to_list())))
    return sorted(data)


def cross_validate_flex(covering, f, tol=None):
    """
    Evaluate every bar constraint on the velocity difference of its endpoints

    Parameters
    ----------
    covering: CoveringFramework
        The covering framework
    f: WindowedField
        Velocities, defined on (at least) the covering window
    tol: float
        Pass threshold. Default: 1e-9 (1 + max ||phi||)

    Returns
    -------
    tuple:
        (max bar residual, pass flag)
    """
    G0 = covering.G0
    if f.window.radius < covering.window.radius:
        raise UsageError(f"field window radius {f.window.radius} is smaller than the covering "
                         f"window radius {covering.window.radius}")
    if tol is None:
        tol = default_flex_tol(G0)
    residual = 0.0
    for bar in covering.bars:
        start = f.values_at(np.array([bar.source[1]]))[0][G0.column_slice(bar.source[0])]
        end = f.values_at(np.array([bar.range[1]]))[0][G0.column_slice(bar.range[0])]
        residual = max(residual, float(np.linalg.norm(bar.phi @ (start - end))))
    return residual, bool(residual <= tol)
