"""
Discretization of integer polygonal sets into finite subsets of Z^2

The unit square is cut by every integer translate of every edge of Omega
that passes through its interior. Each clipped translate is a chord of the
square, so the faces of the arrangement are convex and are obtained by
splitting convex polygons line by line. Each face P_i gets a marker set S_i
in {0..N}^2, and Omega becomes the union of N*v + S_i over occupied (v, i).
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from src.config import config
from src.errors import InvalidTilingDescription, TileFormatError
from src.geometry_core import (IntegerPolygonalSet, PointLocation, RationalPoint, Segment,
                               contains_point, orientation)
from src.tilings import (TilingDesc, anchor_point, denominator_lcm, is_integral, scaled, translated,
                         verification_window)

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]
Line = Tuple[int, int, int]

UNIT_SQUARE = (RationalPoint(0, 0), RationalPoint(1, 0), RationalPoint(1, 1), RationalPoint(0, 1))


@dataclass(frozen=True)
class Face:
    """Convex face of the unit-cell partition, counter-clockwise"""
    vertices: Tuple[RationalPoint, ...]
    representative: RationalPoint

    @property
    def boundary(self) -> List[Segment]:
        n = len(self.vertices)
        return [Segment(self.vertices[i], self.vertices[(i + 1) % n]) for i in range(n)]

    @property
    def area(self) -> Fraction:
        n = len(self.vertices)
        return sum((self.vertices[i].cross(self.vertices[(i + 1) % n]) for i in range(n)), Fraction(0)) / 2


@dataclass(frozen=True)
class UnitCellPartition:
    """Faces P_0..P_{M-1} of [0,1]^2 with the marker parameters k and N"""
    faces: Tuple[Face, ...]
    k: int
    scale: int

    @property
    def face_count(self) -> int:
        return len(self.faces)


@dataclass(frozen=True)
class MarkerSet:
    index: int
    points: FrozenSet[Cell]


@dataclass(frozen=True)
class DiscreteTile:
    """Finite subset of Z^2, optionally remembering the polygon it came from"""
    scale: int
    points: FrozenSet[Cell]
    source: Optional[IntegerPolygonalSet] = None
    partition: Optional[UnitCellPartition] = None

    def __len__(self) -> int:
        return len(self.points)

    def sorted_points(self) -> List[Cell]:
        return sorted(self.points)

    def bounding_box(self) -> Tuple[int, int, int, int]:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return min(xs), min(ys), max(xs), max(ys)

    def to_text(self) -> str:
        lines = [f"scale {self.scale}"]
        lines.extend(f"{x} {y}" for x, y in self.sorted_points())
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text: str) -> 'DiscreteTile':
        """Parse the "scale N" header followed by one "x y" line per point"""
        lines = [line.strip() for line in text.splitlines() if line.strip() and not line.strip().startswith('#')]
        if not lines:
            raise TileFormatError("Empty tile file")
        scale = 1
        header = lines[0].split()
        if header[0] == 'scale':
            if len(header) != 2 or not header[1].lstrip('-').isdigit() or int(header[1]) < 1:
                raise TileFormatError(f"Bad scale header: {lines[0]!r}")
            scale = int(header[1])
            lines = lines[1:]
        points = set()
        for number, line in enumerate(lines, start=1):
            parts = line.split()
            if len(parts) != 2:
                raise TileFormatError(f"Line {number}: expected two integers, got {line!r}")
            try:
                points.add((int(parts[0]), int(parts[1])))
            except ValueError:
                raise TileFormatError(f"Line {number}: expected two integers, got {line!r}")
        if not points:
            raise TileFormatError("Tile has no points")
        return cls(scale, frozenset(points))


class VerdictKind(Enum):
    IS_CONTINUOUS_TILING = 'is_continuous_tiling'
    NOT_TILING = 'not_tiling'


@dataclass(frozen=True)
class LiftVerdict:
    kind: VerdictKind
    witness: Optional[Cell] = None
    face: Optional[int] = None
    coverage: Optional[int] = None

    @property
    def is_tiling(self) -> bool:
        return self.kind is VerdictKind.IS_CONTINUOUS_TILING

    def describe(self) -> str:
        if self.is_tiling:
            return "tiling"
        if self.coverage == 0:
            return f"uncovered cell {self.witness}"
        return f"cell {self.witness} face {self.face} covered {self.coverage} times"


# ---------------------------------------------------------------------------
# Parameters and marker sets


def compute_parameters(face_count: int) -> Tuple[int, int]:
    """Smallest k with k^2 >= M, and N = 3k + 4"""
    if face_count < 1:
        raise ValueError("face count must be positive")
    k = math.isqrt(face_count - 1) + 1
    return k, 3 * k + 4


def build_marker_sets(face_count: int, k: int, scale: int) -> List[MarkerSet]:
    """
    Marker sets S_0..S_{M-1} in {0..N}^2

    S_i for i >= 1 is the ring of eight points around (3a, 3b) where
    (a-1) + k(b-1) = i. S_0 is the rest of the N x N block with the two
    outward anchors (N, 1), (1, N) added and the notches (0, 1), (1, 0) removed.
    """
    if k * k < face_count or scale != 3 * k + 4:
        raise ValueError(f"Inconsistent marker parameters M={face_count}, k={k}, N={scale}")
    rings: List[FrozenSet[Cell]] = []
    for i in range(1, face_count):
        a, b = i % k + 1, i // k + 1
        cx, cy = 3 * a, 3 * b
        rings.append(frozenset((cx + dx, cy + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                               if (dx, dy) != (0, 0)))
    block = {(x, y) for x in range(scale) for y in range(scale)}
    for ring in rings:
        block -= ring
    block |= {(scale, 1), (1, scale)}
    block -= {(0, 1), (1, 0)}
    markers = [MarkerSet(0, frozenset(block))]
    markers.extend(MarkerSet(i + 1, ring) for i, ring in enumerate(rings))
    return markers


# ---------------------------------------------------------------------------
# Unit-cell arrangement


def _line_through(p: RationalPoint, q: RationalPoint) -> Line:
    a = int(q.y - p.y)
    b = int(p.x - q.x)
    c = int(a * p.x + b * p.y)
    g = math.gcd(math.gcd(a, b), c)
    a, b, c = a // g, b // g, c // g
    if a < 0 or (a == 0 and b < 0):
        a, b, c = -a, -b, -c
    return a, b, c


def _clip_to_unit_square(p: RationalPoint, q: RationalPoint) -> Optional[Tuple[RationalPoint, RationalPoint]]:
    """Liang-Barsky clip of segment pq to [0,1]^2"""
    t0, t1 = Fraction(0), Fraction(1)
    dx, dy = q.x - p.x, q.y - p.y
    for denom, numer in ((-dx, p.x), (dx, 1 - p.x), (-dy, p.y), (dy, 1 - p.y)):
        if denom == 0:
            if numer < 0:
                return None
            continue
        t = numer / denom
        if denom < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return RationalPoint(p.x + t0 * dx, p.y + t0 * dy), RationalPoint(p.x + t1 * dx, p.y + t1 * dy)


def _crosses_open_cell(p: RationalPoint, q: RationalPoint) -> bool:
    clipped = _clip_to_unit_square(p, q)
    if clipped is None or clipped[0] == clipped[1]:
        return False
    mid = (clipped[0] + clipped[1]).scaled(Fraction(1, 2))
    return 0 < mid.x < 1 and 0 < mid.y < 1


def arrangement_lines(omega: IntegerPolygonalSet) -> List[Line]:
    """Distinct lines of edge translates that pass through the open unit square"""
    lines: Set[Line] = set()
    for edge in omega.edges():
        p, q = edge.a, edge.b
        for zx in range(-int(max(p.x, q.x)), 2 - int(min(p.x, q.x))):
            for zy in range(-int(max(p.y, q.y)), 2 - int(min(p.y, q.y))):
                z = RationalPoint(zx, zy)
                if _crosses_open_cell(p + z, q + z):
                    lines.add(_line_through(p + z, q + z))
    return sorted(lines)


def _split_convex(vertices: Sequence[RationalPoint], line: Line):
    a, b, c = line
    values = [a * v.x + b * v.y - c for v in vertices]
    if all(s >= 0 for s in values) or all(s <= 0 for s in values):
        return [tuple(vertices)]
    positive: List[RationalPoint] = []
    negative: List[RationalPoint] = []
    n = len(vertices)
    for i in range(n):
        v, w = vertices[i], vertices[(i + 1) % n]
        sv, sw = values[i], values[(i + 1) % n]
        if sv >= 0:
            positive.append(v)
        if sv <= 0:
            negative.append(v)
        if (sv > 0 and sw < 0) or (sv < 0 and sw > 0):
            t = sv / (sv - sw)
            cut = v + (w - v).scaled(t)
            positive.append(cut)
            negative.append(cut)
    return [_normalize_face(positive), _normalize_face(negative)]


def _normalize_face(vertices: List[RationalPoint]) -> Tuple[RationalPoint, ...]:
    points: List[RationalPoint] = []
    for v in vertices:
        if not points or points[-1] != v:
            points.append(v)
    if len(points) > 1 and points[0] == points[-1]:
        points.pop()
    changed = True
    while changed and len(points) > 3:
        changed = False
        for i in range(len(points)):
            if orientation(points[i - 1], points[i], points[(i + 1) % len(points)]) == 0:
                del points[i]
                changed = True
                break
    start = points.index(min(points))
    return tuple(points[start:] + points[:start])


def _representative(vertices: Sequence[RationalPoint]) -> RationalPoint:
    """Centroid of the first fan triangle, strictly inside the face"""
    return (vertices[0] + vertices[1] + vertices[2]).scaled(Fraction(1, 3))


def unit_cell_partition(omega: IntegerPolygonalSet) -> UnitCellPartition:
    """
    Partition [0,1]^2 along every integer translate of every edge of omega

    Returns:
        UnitCellPartition with faces sorted by representative point
    """
    edge_count = len(omega.edges())
    if edge_count > config.MAX_ARRANGEMENT_EDGES:
        logger.warning(f"Large arrangement: {edge_count} edges; discretization may be slow")

    lines = arrangement_lines(omega)
    pieces: List[Tuple[RationalPoint, ...]] = [UNIT_SQUARE]
    for line in lines:
        next_pieces = []
        for piece in pieces:
            next_pieces.extend(_split_convex(piece, line))
        pieces = next_pieces

    faces = sorted((Face(p, _representative(p)) for p in pieces), key=lambda f: f.representative)
    k, scale = compute_parameters(len(faces))
    logger.info(f"Unit-cell partition: {len(lines)} lines, M={len(faces)}, k={k}, N={scale}")
    return UnitCellPartition(tuple(faces), k, scale)


# ---------------------------------------------------------------------------
# Occupancy and discretization


def cell_occupancy(omega: IntegerPolygonalSet, partition: UnitCellPartition, v: Cell, i: int) -> bool:
    """True when v + P_i lies inside omega"""
    inner = partition.faces[i].representative + RationalPoint(v[0], v[1])
    return contains_point(omega.base, inner) is PointLocation.INSIDE


def occupancy_table(omega: IntegerPolygonalSet, partition: UnitCellPartition) -> List[Tuple[Cell, int]]:
    """Every occupied (cell, face) pair of omega, in cell then face order"""
    xmin, ymin, xmax, ymax = omega.cell_range()
    table = []
    for vy in range(ymin, ymax + 1):
        for vx in range(xmin, xmax + 1):
            for i in range(partition.face_count):
                if cell_occupancy(omega, partition, (vx, vy), i):
                    table.append(((vx, vy), i))
    return table


def discretize(omega: IntegerPolygonalSet) -> DiscreteTile:
    """
    Build the discrete tile of omega at scale N

    Args:
        omega: Integer polygonal set with (0, 0) as a vertex

    Returns:
        DiscreteTile carrying the partition for rendering and lifting
    """
    partition = unit_cell_partition(omega)
    markers = build_marker_sets(partition.face_count, partition.k, partition.scale)
    n = partition.scale
    points: Set[Cell] = set()
    for (vx, vy), i in occupancy_table(omega, partition):
        points.update((n * vx + sx, n * vy + sy) for sx, sy in markers[i].points)
    logger.info(f"Discretized tile: {len(points)} points at scale {n}")
    return DiscreteTile(n, frozenset(points), omega, partition)


def face_occupancy(omega: IntegerPolygonalSet, partition: UnitCellPartition,
                   translates: Iterable[Cell]) -> Set[Tuple[Cell, int]]:
    """Union over t of the occupied (cell + t, face) pairs"""
    table = occupancy_table(omega, partition)
    occupied: Set[Tuple[Cell, int]] = set()
    for tx, ty in translates:
        occupied.update(((vx + tx, vy + ty), i) for (vx, vy), i in table)
    return occupied


def cover_points(points: Iterable[Cell], translates: Iterable[Cell]) -> Set[Cell]:
    points = list(points)
    covered: Set[Cell] = set()
    for tx, ty in translates:
        covered.update((x + tx, y + ty) for x, y in points)
    return covered


def _owner_among(markers: Sequence[MarkerSet], n: int, point: Cell) -> Optional[int]:
    x, y = point
    vx, vy = x // n, y // n
    for cx, cy in ((vx, vy), (vx - 1, vy), (vx, vy - 1)):
        local = (x - n * cx, y - n * cy)
        for marker in markers:
            if local in marker.points:
                return marker.index
    return None


def marker_owner(tile: DiscreteTile, point: Cell) -> Optional[int]:
    """Face index i whose marker set produced point, when the tile has a partition"""
    if tile.partition is None:
        return None
    markers = build_marker_sets(tile.partition.face_count, tile.partition.k, tile.partition.scale)
    return _owner_among(markers, tile.scale, point)


def marker_owners(tile: DiscreteTile) -> Dict[Cell, Optional[int]]:
    """marker_owner for every point of the tile, building the marker sets once"""
    if tile.partition is None:
        return {p: None for p in tile.points}
    markers = build_marker_sets(tile.partition.face_count, tile.partition.k, tile.partition.scale)
    return {p: _owner_among(markers, tile.scale, p) for p in tile.points}


# ---------------------------------------------------------------------------
# Lifting


def lift_tiling(omega: IntegerPolygonalSet, tiling: TilingDesc,
                partition: Optional[UnitCellPartition] = None) -> LiftVerdict:
    """
    Decide whether omega + T covers the plane exactly once, up to measure zero

    Counts face coverage over a verification window of T. The witness is the
    first bad cell in scanline order.

    Args:
        omega: Integer polygonal set
        tiling: Integral description containing the origin

    Raises:
        InvalidTilingDescription: when T is not integral or misses the origin
    """
    if not is_integral(tiling):
        raise InvalidTilingDescription("Lifting needs an integral translate set")
    if not tiling.contains(RationalPoint(0, 0)):
        raise InvalidTilingDescription("Lifting needs the origin in the translate set")
    partition = partition or unit_cell_partition(omega)
    table = occupancy_table(omega, partition)
    reach = omega.cell_range()
    window = verification_window(tiling, reach)
    cells = set(window.cells)

    counts: Counter = Counter()
    for t in tiling.points_in_box(window.translate_box):
        tx, ty = int(t.x), int(t.y)
        for (vx, vy), i in table:
            cell = (vx + tx, vy + ty)
            if cell in cells:
                counts[(cell, i)] += 1

    for cell in window.cells:
        for i in range(partition.face_count):
            coverage = counts[(cell, i)]
            if coverage != 1:
                verdict = LiftVerdict(VerdictKind.NOT_TILING, cell, i, coverage)
                logger.info(f"Not a tiling: {verdict.describe()}")
                return verdict
    logger.info(f"Continuous tiling verified on {len(window.cells)} window cells")
    return LiftVerdict(VerdictKind.IS_CONTINUOUS_TILING)


def lift_rational_tiling(omega: IntegerPolygonalSet, tiling: TilingDesc) -> Tuple[LiftVerdict, int]:
    """
    Verify a rational description by scaling omega and T by the least common
    denominator and moving a translate to the origin

    Returns:
        (verdict in scaled coordinates, the scale factor used)
    """
    factor = denominator_lcm(tiling)
    shift = anchor_point(tiling)
    moved = translated(tiling, -shift)
    if factor != 1:
        moved = scaled(moved, Fraction(factor))
        omega = IntegerPolygonalSet(omega.base.dilated(factor))
    return lift_tiling(omega, moved), factor
