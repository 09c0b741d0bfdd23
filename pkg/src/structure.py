"""
Structure of continuous and discrete tilings

Vertex-sharing classes of a continuous tiling, the common sliding
direction, merging classes into one by sliding, earthquake plates of a
discrete tiling, and periodicity reports.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from src.errors import InvariantViolation, UnsupportedDescription
from src.geometry_core import ORIGIN, IntegerPolygonalSet, PolygonalSet, RationalPoint
from src.lattices import RationalLattice, in_rank_one_span, rational_span_basis
from src.tilings import (Component, PeriodicTiling, ShearedTiling, TilingDesc, along_band_period,
                         lattice_points_in_box, line_points_in_box,
                         anchor_point, as_periodic, band_normal, lattice_period_along)
from src.utils import IntegerUtils, RationalUtils

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


@dataclass(frozen=True)
class VertexShareClass:
    """
    A family of vertex-sharing classes: the class `component` and its
    translates by the tiling lattice. `count` is the number of distinct
    classes in the family, or None when there are infinitely many.
    """
    component: Component
    translations: Tuple[RationalPoint, RationalPoint]
    count: Optional[int]
    members: Tuple[int, ...]

    @property
    def period_basis(self) -> Tuple[RationalPoint, ...]:
        return self.component.periods

    @property
    def positions(self) -> Tuple[RationalPoint, ...]:
        return self.component.base


@dataclass(frozen=True)
class ClassOffset:
    family: int
    copy: int
    offset: Fraction


@dataclass(frozen=True)
class MergeResult:
    tiling: PeriodicTiling
    direction: Optional[Tuple[int, int]]
    offsets: Tuple[ClassOffset, ...]


@dataclass(frozen=True)
class PlateFamily:
    """
    Plates of one quotient component: the representative plate at
    `representative`, periodic under `period_subgroup`, and its translates by
    the tiling lattice
    """
    quotient_component: Tuple[Cell, ...]
    period_subgroup: Tuple[Cell, ...]
    representative: Tuple[Cell, ...]
    lattice_generators: Tuple[Cell, Cell]
    plate_count: Optional[int]
    direction: Cell


class Periodicity(Enum):
    DOUBLY_PERIODIC = 'doubly_periodic'
    SINGLY_PERIODIC = 'singly_periodic'
    WEAKLY_PERIODIC = 'weakly_periodic'
    NOT_PERIODIC = 'not_periodic'


@dataclass(frozen=True)
class PeriodicPiece:
    component: Component
    period: RationalPoint


@dataclass(frozen=True)
class PeriodicityReport:
    classification: Periodicity
    periods: Tuple[RationalPoint, ...]
    pieces: Tuple[PeriodicPiece, ...] = ()


@dataclass(frozen=True)
class _QuotientComponent:
    nodes: Tuple[int, ...]
    positions: Tuple[RationalPoint, ...]
    period_basis: Tuple[RationalPoint, ...]


@dataclass(frozen=True)
class _StripCopy:
    family: int
    copy: int
    lower: Fraction
    upper: Fraction


@dataclass(frozen=True)
class _StripLayout:
    direction: Tuple[int, int]
    normal: Tuple[int, int]
    along_period: RationalPoint
    transverse_step: RationalPoint
    transverse_period: Fraction
    copies: Tuple[_StripCopy, ...]


# ---------------------------------------------------------------------------
# Quotient graphs


def _quotient_components(base: Sequence[RationalPoint], lattice: RationalLattice,
                         displacements: Iterable[RationalPoint], anchor: int = 0) -> List[_QuotientComponent]:
    """
    Connected components of the periodic relation t ~ t' iff t' - t is a
    displacement, computed on the quotient by the lattice. Each component
    records node positions relative to its BFS root and the subgroup of
    lattice vectors generated by its cycles.
    """
    displacements = sorted(set(displacements))
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(len(base)))
    for i, bi in enumerate(base):
        for j, bj in enumerate(base):
            gap = bj - bi
            for d in displacements:
                delta = d - gap
                if i == j and delta == ORIGIN:
                    continue
                if lattice.contains(delta):
                    graph.add_edge(i, j, src=i, delta=delta)

    groups = sorted((sorted(c) for c in nx.connected_components(graph)),
                    key=lambda nodes: (anchor not in nodes, nodes[0]))
    components = []
    for nodes in groups:
        root = anchor if anchor in nodes else nodes[0]
        offsets: Dict[int, RationalPoint] = {root: ORIGIN}
        for u, v in nx.bfs_edges(graph, root):
            edges = graph.get_edge_data(u, v)
            data = edges[min(edges)]
            offsets[v] = offsets[u] + (data['delta'] if data['src'] == u else -data['delta'])
        cycles = []
        for u, v, data in graph.edges(nodes, data=True):
            src = data['src']
            dst = v if src == u else u
            cycles.append(offsets[src] + data['delta'] - offsets[dst])
        basis = tuple(rational_span_basis(c for c in cycles if c != ORIGIN))
        positions = tuple(base[i] + offsets[i] for i in nodes)
        components.append(_QuotientComponent(tuple(nodes), positions, basis))
    return components


def _family_count(lattice: RationalLattice, basis: Sequence[RationalPoint]) -> Optional[int]:
    if len(basis) < 2:
        return None
    index = RationalLattice.from_generators(basis).covolume / lattice.covolume
    return int(index)


def _tiling_vertices(omega: Union[IntegerPolygonalSet, PolygonalSet]) -> List[RationalPoint]:
    return omega.vertices()


def _anchor_index(base: Sequence[RationalPoint], lattice: RationalLattice, anchor: RationalPoint) -> int:
    target = lattice.reduce(anchor)
    for i, b in enumerate(base):
        if lattice.reduce(b) == target:
            return i
    return 0


# ---------------------------------------------------------------------------
# Vertex-sharing classes


def vertex_share_classes(omega: Union[IntegerPolygonalSet, PolygonalSet],
                         tiling: TilingDesc) -> List[VertexShareClass]:
    """
    Classes of the equivalence generated by "Omega + t and Omega + t' share a vertex"

    Args:
        omega: The tile
        tiling: Periodic or unbanded sheared description of a tiling

    Returns:
        Class families, the one containing the anchor translate first

    Raises:
        WindowTooSmall: for banded descriptions
        InvariantViolation: when a class is finite
    """
    periodic = as_periodic(tiling)
    vertices = _tiling_vertices(omega)
    displacements = {v - w for v in vertices for w in vertices}
    anchor = _anchor_index(periodic.base, periodic.lattice, anchor_point(periodic))
    components = _quotient_components(periodic.base, periodic.lattice, displacements, anchor)

    classes = []
    for component in components:
        if not component.period_basis:
            raise InvariantViolation("A vertex-sharing class is finite; the input is not a tiling")
        classes.append(VertexShareClass(
            Component(component.positions, component.period_basis),
            periodic.lattice.generators,
            _family_count(periodic.lattice, component.period_basis),
            component.nodes))
    logger.info(f"Found {len(classes)} vertex-sharing class famil{'y' if len(classes) == 1 else 'ies'}")
    return classes


def _is_single_class(classes: Sequence[VertexShareClass]) -> bool:
    return len(classes) == 1 and classes[0].count == 1


def _normal_of(direction: Tuple[int, int]) -> Tuple[int, int]:
    return direction[1], -direction[0]


def _level(normal: Tuple[int, int], p: RationalPoint) -> Fraction:
    return normal[0] * p.x + normal[1] * p.y


def _strip_layout(omega, classes: Sequence[VertexShareClass], direction: Tuple[int, int]) -> _StripLayout:
    """Order the class strips inside one transverse period and check they abut"""
    lattice = RationalLattice.from_generators(classes[0].translations)
    normal = _normal_of(direction)
    along = lattice_period_along(lattice, direction)
    for family in classes:
        if len(family.period_basis) != 1 or not (
                in_rank_one_span(along, family.period_basis[0])
                and in_rank_one_span(family.period_basis[0], along)):
            raise InvariantViolation("Class period differs from the lattice period along the strips")

    g1, g2 = lattice.generators
    c1, c2 = _level(normal, g1), _level(normal, g2)
    period = RationalUtils.rational_gcd([c1, c2])
    scale = RationalUtils.lcm_of_denominators([c1, c2])
    _, x, y = IntegerUtils.extended_gcd(int(c1 * scale), int(c2 * scale))
    step = g1.scaled(x) + g2.scaled(y)

    vertices = _tiling_vertices(omega)
    extents = []
    for family in classes:
        levels = [_level(normal, q + w) for q in family.positions for w in vertices]
        extents.append((min(levels), max(levels)))

    start = extents[0][0]
    copies = []
    for index, (lower, upper) in enumerate(extents):
        k = -math.floor((lower - start) / period)
        copies.append(_StripCopy(index, k, lower + k * period, upper + k * period))
    copies.sort(key=lambda c: c.lower)

    for current, following in zip(copies, copies[1:]):
        if current.upper != following.lower:
            raise InvariantViolation("Class strips overlap or leave a gap")
    if copies[0].lower != start or copies[-1].upper != start + period:
        raise InvariantViolation("Class strips do not fill one transverse period")
    return _StripLayout(direction, normal, along, step, period, tuple(copies))


def sliding_direction(omega: Union[IntegerPolygonalSet, PolygonalSet],
                      classes: Sequence[VertexShareClass]) -> Optional[Tuple[int, int]]:
    """
    Primitive direction u such that every class union is invariant under
    real translations along u; None for a single class

    Raises:
        InvariantViolation: when the classes are not parallel strips
    """
    if _is_single_class(classes):
        return None
    directions = set()
    for family in classes:
        if len(family.period_basis) != 1:
            raise UnsupportedDescription("A class with a rank-two period group spans several strips")
        period = family.period_basis[0]
        scale = RationalUtils.lcm_of_denominators([period.x, period.y])
        directions.add(IntegerUtils.primitive((int(period.x * scale), int(period.y * scale))))
    if len(directions) != 1:
        raise InvariantViolation("Vertex-sharing classes are not parallel")
    direction = directions.pop()
    _strip_layout(omega, classes, direction)
    logger.info(f"Sliding direction {direction}")
    return direction


# ---------------------------------------------------------------------------
# Merging by sliding


def merge_by_sliding(omega: Union[IntegerPolygonalSet, PolygonalSet], tiling: TilingDesc) -> MergeResult:
    """
    Slide each class along the common direction so that neighbouring strips
    share a vertex, producing a single-class periodic tiling

    Returns:
        MergeResult with the merged tiling and the offset given to each strip
    """
    periodic = as_periodic(tiling)
    classes = vertex_share_classes(omega, periodic)
    if _is_single_class(classes):
        return MergeResult(periodic, None, (ClassOffset(0, 0, Fraction(0)),))

    direction = sliding_direction(omega, classes)
    layout = _strip_layout(omega, classes, direction)
    u = RationalPoint(*direction)
    unit = u.dot(u)
    along_length = layout.along_period.dot(u) / unit
    vertices = _tiling_vertices(omega)

    def coordinates(copy: _StripCopy, level: Fraction) -> Set[Fraction]:
        shift = layout.transverse_step.scaled(copy.copy)
        values = set()
        for q in classes[copy.family].positions:
            for w in vertices:
                p = q + w + shift
                if _level(layout.normal, p) == level:
                    values.add(RationalUtils.floor_mod(p.dot(u) / unit, along_length))
        return values

    copies = list(layout.copies)
    closing = _StripCopy(copies[0].family, copies[0].copy + 1,
                         copies[0].lower + layout.transverse_period, copies[0].upper + layout.transverse_period)
    shifts = [Fraction(0)]
    for current, following in zip(copies, copies[1:] + [closing]):
        mine = coordinates(current, current.upper)
        theirs = coordinates(following, current.upper)
        if not mine or not theirs:
            raise InvariantViolation("No vertex on the line between two strips")
        shifts.append(shifts[-1] + RationalUtils.centered_mod(min(mine) - min(theirs), along_length))

    drift = shifts[-1]
    step = layout.transverse_step + u.scaled(drift)
    merged_lattice = RationalLattice.from_generators([layout.along_period, step])
    base = []
    offsets = []
    for copy, shift in zip(copies, shifts):
        moved = layout.transverse_step.scaled(copy.copy) + u.scaled(shift)
        base.extend(q + moved for q in classes[copy.family].positions)
        offsets.append(ClassOffset(copy.family, copy.copy, shift))
    merged = PeriodicTiling(tuple(sorted(base)), merged_lattice)

    if periodic.contains(ORIGIN) and isinstance(omega, IntegerPolygonalSet):
        if not merged.contains(ORIGIN) or not all(b.is_integer() for b in merged.base) \
                or not merged.lattice.is_integral():
            raise InvariantViolation("Single-class tiling of an integer tile is not integral")
    if not _is_single_class(vertex_share_classes(omega, merged)):
        raise InvariantViolation("Sliding did not merge the vertex-sharing classes")
    logger.info(f"Merged {len(copies)} strips along {direction}; offsets "
                f"{[RationalUtils.format_rational(o.offset) for o in offsets]}")
    return MergeResult(merged, direction, tuple(offsets))


# ---------------------------------------------------------------------------
# Earthquake plates


def earthquake_decomposition(tile: Iterable[Cell], tiling: PeriodicTiling, v: Cell) -> Tuple[PlateFamily, ...]:
    """
    Plates of a discrete periodic tiling: classes of the relation linking
    t and t' when some tile point moved by +-v lands on tile + t'

    Args:
        tile: Finite subset of Z^2
        tiling: Integral periodic tiling by the tile
        v: Nonzero integer direction

    Returns:
        One PlateFamily per component of the quotient graph
    """
    if tuple(v) == (0, 0):
        raise ValueError("earthquake direction must be nonzero")
    points = sorted(set((int(x), int(y)) for x, y in tile))
    vx, vy = int(v[0]), int(v[1])
    differences = {(fx - gx, fy - gy) for fx, fy in points for gx, gy in points}
    displacements = {RationalPoint(dx + vx, dy + vy) for dx, dy in differences}
    displacements |= {RationalPoint(dx - vx, dy - vy) for dx, dy in differences}

    lattice = tiling.lattice
    anchor = _anchor_index(tiling.base, lattice, anchor_point(tiling))
    components = _quotient_components(tiling.base, lattice, displacements, anchor)
    generators = tuple(g.as_int_tuple() for g in lattice.generators)
    families = []
    for component in components:
        families.append(PlateFamily(
            quotient_component=tuple(lattice.reduce(tiling.base[i]).as_int_tuple() for i in component.nodes),
            period_subgroup=tuple(h.as_int_tuple() for h in component.period_basis),
            representative=tuple(p.as_int_tuple() for p in component.positions),
            lattice_generators=generators,
            plate_count=_family_count(lattice, component.period_basis),
            direction=(vx, vy)))
    logger.info(f"Earthquake along {(vx, vy)}: {len(families)} plate famil{'y' if len(families) == 1 else 'ies'}")
    return tuple(families)


def plate_members_in_box(family: PlateFamily, box: Tuple[int, int, int, int]) -> List[Cell]:
    """Translates of the representative plate inside a box"""
    xmin, ymin, xmax, ymax = box
    members = set()
    basis = [RationalPoint(*h) for h in family.period_subgroup]
    if not basis:
        return sorted(p for p in family.representative if xmin <= p[0] <= xmax and ymin <= p[1] <= ymax)
    if len(basis) == 2:
        lattice = RationalLattice.from_generators(basis)
        for p in family.representative:
            for q in lattice_points_in_box(RationalPoint(*p), lattice,
                                    tuple(Fraction(c) for c in box)):
                members.add(q.as_int_tuple())
    else:
        for p in family.representative:
            for q in line_points_in_box(RationalPoint(*p), basis[0], tuple(Fraction(c) for c in box)):
                members.add(q.as_int_tuple())
    return sorted(members)


def plates_refine_classes(plates: Sequence[PlateFamily], classes: Sequence[VertexShareClass],
                          scale: int) -> List[str]:
    """
    Check that every plate of the discretized tiling lies inside one
    vertex-sharing class of the continuous tiling

    Args:
        plates: Plate families of the discrete tile under the scaled tiling
        classes: Vertex-sharing classes of omega under the continuous tiling
        scale: Discretization scale N

    Returns:
        Human-readable violations; empty when the refinement holds
    """
    lattice = RationalLattice.from_generators(classes[0].translations)

    def same_class(t1: RationalPoint, t2: RationalPoint) -> bool:
        for family in classes:
            for q1 in family.positions:
                first = t1 - q1
                if not lattice.contains(first):
                    continue
                for q2 in family.positions:
                    second = t2 - q2
                    if not lattice.contains(second):
                        continue
                    gap = first - second
                    basis = family.period_basis
                    if len(basis) == 2:
                        if RationalLattice.from_generators(basis).contains(gap):
                            return True
                    elif in_rank_one_span(gap, basis[0]) or gap == ORIGIN:
                        return True
        return False

    violations = []
    factor = Fraction(1, scale)
    for index, plate in enumerate(plates):
        translates = [RationalPoint(*p).scaled(factor) for p in plate.representative]
        root = translates[0]
        for t in translates[1:]:
            if not same_class(root, t):
                violations.append(f"plate family {index}: translates {root} and {t} lie in different classes")
        for h in plate.period_subgroup:
            moved = root + RationalPoint(*h).scaled(factor)
            if not same_class(root, moved):
                violations.append(f"plate family {index}: period {h} leaves the class of {root}")
    return violations


# ---------------------------------------------------------------------------
# Periodicity


def _component_periodic(component: Component, h: RationalPoint) -> bool:
    if component.band is not None and component.band.finite_bounds() and component.band.level(h) != 0:
        return False
    lattice = component.lattice()
    for b in component.base:
        moved = b + h
        found = False
        for other in component.base:
            delta = moved - other
            if lattice is not None and lattice.contains(delta):
                found = True
            elif lattice is None and (delta == ORIGIN or in_rank_one_span(delta, component.periods[0])):
                found = True
            if found:
                break
        if not found:
            return False
    return True


def _sheared_periodic(tiling: ShearedTiling, h: RationalPoint) -> bool:
    normal = band_normal(tiling)
    along = RationalPoint(-normal[1], normal[0])
    period = along_band_period(tiling, normal)
    length = period.dot(along)

    for component in tiling.components:
        band = component.band
        unbounded = band is None or band.lower is None or band.upper is None
        if unbounded:
            unbanded = Component(component.base, component.periods, component.slide_offset)
            if not _component_periodic(unbanded, h):
                return False

    bounds = [b for c in tiling.components if c.band is not None for b in c.band.finite_bounds()]
    transverse = max((c.transverse_period(normal) for c in tiling.components), default=Fraction(0))
    margin = abs(_level(normal, h)) + transverse + 1
    lo, hi = min(bounds) - margin, max(bounds) + margin
    norm = along.dot(along)
    nvec = RationalPoint(*normal)
    corners = [(nvec.scaled(level) + along.scaled(mu)).scaled(Fraction(1) / norm)
               for level in (lo, hi) for mu in (Fraction(0), length)]
    box = (min(c.x for c in corners), min(c.y for c in corners),
           max(c.x for c in corners), max(c.y for c in corners))
    for p in tiling.points_in_box(box):
        if not lo <= _level(normal, p) <= hi or not 0 <= p.dot(along) < length:
            continue
        if not tiling.contains(p + h) or not tiling.contains(p - h):
            return False
    return True


def check_periodicity(s: Union[TilingDesc, Component], h: RationalPoint) -> bool:
    """
    Exact test of s + h == s

    Args:
        s: Periodic or sheared description, or a single component
        h: Nonzero rational vector
    """
    if h == ORIGIN:
        raise ValueError("period must be nonzero")
    if isinstance(s, Component):
        return _component_periodic(s, h)
    if isinstance(s, ShearedTiling) and s.is_banded():
        return _sheared_periodic(s, h)
    periodic = as_periodic(s)
    reduced = {periodic.lattice.reduce(b) for b in periodic.base}
    return all(periodic.lattice.reduce(b + h) in reduced for b in periodic.base)


def _component_along_period(component: Component, normal: Tuple[int, int]) -> RationalPoint:
    lattice = component.lattice()
    if lattice is None:
        return component.periods[0]
    return lattice_period_along(lattice, (-normal[1], normal[0]))


def weak_periodic_report(tiling: TilingDesc) -> PeriodicityReport:
    """
    Classify a description: two independent verified periods give
    DoublyPeriodic; otherwise the components are reported with their periods
    """
    if isinstance(tiling, PeriodicTiling) or not tiling.is_banded():
        periodic = as_periodic(tiling)
        periods = periodic.lattice.generators
        if all(check_periodicity(periodic, g) for g in periods):
            return PeriodicityReport(Periodicity.DOUBLY_PERIODIC, tuple(periods))
        raise InvariantViolation("Lattice generators are not periods of their own description")

    normal = band_normal(tiling)
    pieces = []
    for component in tiling.components:
        period = _component_along_period(component, normal)
        if check_periodicity(component, period):
            pieces.append(PeriodicPiece(component, period))
    common = along_band_period(tiling, normal)
    common_verified = check_periodicity(tiling, common)

    if common_verified:
        for component in tiling.components:
            lattice = component.lattice()
            if lattice is None:
                continue
            for g in lattice.generators:
                if _level(normal, g) == 0:
                    continue
                for k in range(1, len(tiling.components) + 2):
                    candidate = g.scaled(k)
                    if check_periodicity(tiling, candidate):
                        return PeriodicityReport(Periodicity.DOUBLY_PERIODIC, (common, candidate), tuple(pieces))

    if len(pieces) != len(tiling.components):
        return PeriodicityReport(Periodicity.NOT_PERIODIC, (), tuple(pieces))
    if len(tiling.components) == 1:
        return PeriodicityReport(Periodicity.SINGLY_PERIODIC, (common,) if common_verified else (), tuple(pieces))
    return PeriodicityReport(Periodicity.WEAKLY_PERIODIC, (common,) if common_verified else (), tuple(pieces))
