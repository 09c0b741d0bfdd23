"""
Exact rational geometry for polygonal sets

A polygonal set is a finite union of disjoint open polygons, each an outer
loop with zero or more holes. All coordinates are Fractions; no floating
point arithmetic is used for any predicate.
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, List, Sequence, Tuple, Union

from src.errors import PolygonSyntaxError, ValidationError
from src.utils import RationalUtils

logger = logging.getLogger(__name__)

Rational = Fraction
BoundingBox = Tuple[Fraction, Fraction, Fraction, Fraction]


@dataclass(frozen=True, order=True)
class RationalPoint:
    """A point (or vector) of Q^2"""
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'x', Fraction(self.x))
        object.__setattr__(self, 'y', Fraction(self.y))

    def __add__(self, other: 'RationalPoint') -> 'RationalPoint':
        return RationalPoint(self.x + other.x, self.y + other.y)

    def __sub__(self, other: 'RationalPoint') -> 'RationalPoint':
        return RationalPoint(self.x - other.x, self.y - other.y)

    def __neg__(self) -> 'RationalPoint':
        return RationalPoint(-self.x, -self.y)

    def scaled(self, factor: Union[int, Fraction]) -> 'RationalPoint':
        return RationalPoint(self.x * factor, self.y * factor)

    def dot(self, other: 'RationalPoint') -> Fraction:
        return self.x * other.x + self.y * other.y

    def cross(self, other: 'RationalPoint') -> Fraction:
        return self.x * other.y - self.y * other.x

    def is_integer(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def as_int_tuple(self) -> Tuple[int, int]:
        if not self.is_integer():
            raise ValueError(f"{self} is not an integer point")
        return int(self.x), int(self.y)

    def to_json(self) -> List[str]:
        return [RationalUtils.format_rational(self.x), RationalUtils.format_rational(self.y)]

    @classmethod
    def of(cls, x: Any, y: Any) -> 'RationalPoint':
        return cls(Fraction(x), Fraction(y))

    def __str__(self) -> str:
        return f"({RationalUtils.format_rational(self.x)}, {RationalUtils.format_rational(self.y)})"


ORIGIN = RationalPoint(0, 0)


@dataclass(frozen=True)
class Segment:
    """Closed segment with distinct endpoints"""
    a: RationalPoint
    b: RationalPoint

    def __post_init__(self):
        if self.a == self.b:
            raise ValidationError(f"Degenerate segment at {self.a}")

    @property
    def direction(self) -> RationalPoint:
        return self.b - self.a

    def contains(self, p: RationalPoint) -> bool:
        return _on_segment(self.a, self.b, p)

    def translated(self, v: RationalPoint) -> 'Segment':
        return Segment(self.a + v, self.b + v)


class PointLocation(Enum):
    INSIDE = 'inside'
    OUTSIDE = 'outside'
    BOUNDARY = 'boundary'


Loop = Tuple[RationalPoint, ...]


@dataclass(frozen=True)
class Polygon:
    """Open region bounded by a counter-clockwise outer loop minus clockwise holes"""
    outer: Loop
    holes: Tuple[Loop, ...] = ()

    def loops(self) -> Tuple[Loop, ...]:
        return (self.outer,) + tuple(self.holes)


@dataclass(frozen=True)
class PolygonalSet:
    """Finite union of polygons with pairwise disjoint closures' interiors"""
    polygons: Tuple[Polygon, ...]

    def loops(self) -> List[Loop]:
        return [loop for polygon in self.polygons for loop in polygon.loops()]

    def vertices(self) -> List[RationalPoint]:
        return sorted({v for loop in self.loops() for v in loop})

    def edges(self) -> List[Segment]:
        return [Segment(a, b) for loop in self.loops() for a, b in _loop_edges(loop)]

    def bounding_box(self) -> BoundingBox:
        points = self.vertices()
        return (min(p.x for p in points), min(p.y for p in points),
                max(p.x for p in points), max(p.y for p in points))

    def area(self) -> Fraction:
        return area(self)

    def contains_point(self, p: RationalPoint) -> PointLocation:
        return contains_point(self, p)

    def translated(self, v: RationalPoint) -> 'PolygonalSet':
        return _map_points(self, lambda p: p + v)

    def dilated(self, factor: Union[int, Fraction]) -> 'PolygonalSet':
        if factor <= 0:
            raise ValueError("dilation factor must be positive")
        return _map_points(self, lambda p: p.scaled(factor))

    def is_integer(self) -> bool:
        return all(v.is_integer() for v in self.vertices())


@dataclass(frozen=True)
class IntegerPolygonalSet:
    """Polygonal set with integer vertices, one of which is the origin"""
    base: PolygonalSet

    def __post_init__(self):
        if not self.base.is_integer():
            raise ValidationError("integer polygonal set has a non-integer vertex")
        if ORIGIN not in self.base.vertices():
            raise ValidationError("integer polygonal set must have (0, 0) as a vertex")

    def vertices(self) -> List[RationalPoint]:
        return self.base.vertices()

    def edges(self) -> List[Segment]:
        return self.base.edges()

    def bounding_box(self) -> BoundingBox:
        return self.base.bounding_box()

    def area(self) -> Fraction:
        return area(self.base)

    def cell_range(self) -> Tuple[int, int, int, int]:
        """Integer cells (x, y) whose unit squares meet the bounding box"""
        xmin, ymin, xmax, ymax = self.bounding_box()
        return int(xmin), int(ymin), int(xmax) - 1, int(ymax) - 1


@dataclass(frozen=True)
class AffineNormalization:
    """Map p -> dilation * (p - translation) taking the input to its integer form"""
    translation: RationalPoint
    dilation: int

    def apply(self, p: RationalPoint) -> RationalPoint:
        return (p - self.translation).scaled(self.dilation)

    def invert(self, p: RationalPoint) -> RationalPoint:
        return p.scaled(Fraction(1, self.dilation)) + self.translation


# ---------------------------------------------------------------------------
# Predicates


def orientation(a: RationalPoint, b: RationalPoint, c: RationalPoint) -> Fraction:
    """Twice the signed area of triangle abc; positive for a left turn"""
    return (b - a).cross(c - a)


def _on_segment(a: RationalPoint, b: RationalPoint, p: RationalPoint) -> bool:
    if orientation(a, b, p) != 0:
        return False
    return (min(a.x, b.x) <= p.x <= max(a.x, b.x)) and (min(a.y, b.y) <= p.y <= max(a.y, b.y))


def _loop_edges(loop: Sequence[RationalPoint]):
    n = len(loop)
    for i in range(n):
        yield loop[i], loop[(i + 1) % n]


def signed_area(loop: Sequence[RationalPoint]) -> Fraction:
    total = Fraction(0)
    for a, b in _loop_edges(loop):
        total += a.cross(b)
    return total / 2


def segment_relation(p1: RationalPoint, p2: RationalPoint,
                     q1: RationalPoint, q2: RationalPoint) -> str:
    """
    Classify how two closed segments meet

    Returns:
        'none', 'point' (one common point) or 'overlap' (collinear, positive length)
    """
    d1 = orientation(q1, q2, p1)
    d2 = orientation(q1, q2, p2)
    d3 = orientation(p1, p2, q1)
    d4 = orientation(p1, p2, q2)

    if d1 == 0 and d2 == 0:
        # collinear: compare projections on the dominant axis
        if p1.x != p2.x:
            key = lambda p: p.x
        else:
            key = lambda p: p.y
        lo = max(min(key(p1), key(p2)), min(key(q1), key(q2)))
        hi = min(max(key(p1), key(p2)), max(key(q1), key(q2)))
        if lo < hi:
            return 'overlap'
        if lo == hi:
            return 'point'
        return 'none'

    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return 'point'
    if d1 == 0 and _on_segment(q1, q2, p1):
        return 'point'
    if d2 == 0 and _on_segment(q1, q2, p2):
        return 'point'
    if d3 == 0 and _on_segment(p1, p2, q1):
        return 'point'
    if d4 == 0 and _on_segment(p1, p2, q2):
        return 'point'
    return 'none'


def _locate_in_loop(loop: Sequence[RationalPoint], p: RationalPoint) -> PointLocation:
    inside = False
    for a, b in _loop_edges(loop):
        if _on_segment(a, b, p):
            return PointLocation.BOUNDARY
        if (a.y > p.y) != (b.y > p.y):
            x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if p.x < x_cross:
                inside = not inside
    return PointLocation.INSIDE if inside else PointLocation.OUTSIDE


def contains_point(s: PolygonalSet, p: RationalPoint) -> PointLocation:
    """
    Locate p relative to the open set s

    Args:
        s: Polygonal set
        p: Query point

    Returns:
        INSIDE, OUTSIDE or BOUNDARY
    """
    for polygon in s.polygons:
        location = _locate_in_loop(polygon.outer, p)
        if location is PointLocation.BOUNDARY:
            return location
        if location is PointLocation.OUTSIDE:
            continue
        in_hole = False
        for hole in polygon.holes:
            hole_location = _locate_in_loop(hole, p)
            if hole_location is PointLocation.BOUNDARY:
                return hole_location
            if hole_location is PointLocation.INSIDE:
                in_hole = True
                break
        if not in_hole:
            return PointLocation.INSIDE
    return PointLocation.OUTSIDE


def area(s: PolygonalSet) -> Fraction:
    """Lebesgue measure of s"""
    return sum((signed_area(loop) for loop in s.loops()), Fraction(0))


# ---------------------------------------------------------------------------
# Canonical form and validation


def _dedupe(loop: Sequence[RationalPoint]) -> List[RationalPoint]:
    result: List[RationalPoint] = []
    for p in loop:
        if not result or result[-1] != p:
            result.append(p)
    while len(result) > 1 and result[0] == result[-1]:
        result.pop()
    return result


def _merge_collinear(loop: List[RationalPoint]) -> List[RationalPoint]:
    points = list(loop)
    changed = True
    while changed and len(points) >= 3:
        changed = False
        n = len(points)
        for i in range(n):
            prev, cur, nxt = points[i - 1], points[i], points[(i + 1) % n]
            if orientation(prev, cur, nxt) == 0:
                if (cur - prev).dot(nxt - cur) < 0:
                    raise ValidationError(f"Loop doubles back at {cur}: slit edges are not allowed")
                del points[i]
                changed = True
                break
    return points


def canonical_loop(loop: Sequence[RationalPoint], counter_clockwise: bool) -> Loop:
    """
    Remove repeated and collinear vertices, orient, and rotate to start at the
    lexicographically smallest vertex
    """
    points = _merge_collinear(_dedupe(loop))
    if len(points) < 3:
        raise ValidationError("Loop has fewer than three non-collinear vertices")
    a = signed_area(points)
    if a == 0:
        raise ValidationError("Loop has zero area")
    if (a > 0) != counter_clockwise:
        points.reverse()
    start = points.index(min(points))
    return tuple(points[start:] + points[:start])


def _check_simple(loop: Loop) -> None:
    edges = list(_loop_edges(loop))
    n = len(edges)
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = j == i + 1 or (i == 0 and j == n - 1)
            relation = segment_relation(edges[i][0], edges[i][1], edges[j][0], edges[j][1])
            if adjacent:
                if relation == 'overlap':
                    raise ValidationError(f"Loop overlaps itself near {edges[i][1]}")
                continue
            if relation != 'none':
                raise ValidationError(f"Loop is not simple: edges at {edges[i][0]} and {edges[j][0]} meet")


def _loops_touch(first: Loop, second: Loop) -> str:
    worst = 'none'
    for a, b in _loop_edges(first):
        for c, d in _loop_edges(second):
            relation = segment_relation(a, b, c, d)
            if relation == 'overlap':
                return 'overlap'
            if relation == 'point':
                worst = 'point'
    return worst


def _crosses_properly(a: RationalPoint, b: RationalPoint, c: RationalPoint, d: RationalPoint) -> bool:
    """True when segments ab and cd meet at a single point interior to both"""
    d1, d2 = orientation(c, d, a), orientation(c, d, b)
    d3, d4 = orientation(a, b, c), orientation(a, b, d)
    return d1 * d2 < 0 and d3 * d4 < 0


def _loops_cross(first: Loop, second: Loop) -> bool:
    return any(_crosses_properly(a, b, c, d)
               for a, b in _loop_edges(first) for c, d in _loop_edges(second))


def _polygon_region_location(polygon: Polygon, p: RationalPoint) -> PointLocation:
    return contains_point(PolygonalSet((polygon,)), p)


def _sample_points(loop: Loop, other: Polygon) -> List[RationalPoint]:
    """Vertices of loop and midpoints of its edges split where they meet other's boundary"""
    samples = list(loop)
    cuts = [v for ring in other.loops() for v in ring]
    for a, b in _loop_edges(loop):
        direction = b - a
        length = direction.dot(direction)
        stops = {Fraction(0), Fraction(1)}
        stops.update(direction.dot(v - a) / length for v in cuts if _on_segment(a, b, v))
        stops = sorted(t for t in stops if 0 <= t <= 1)
        for lo, hi in zip(stops, stops[1:]):
            samples.append(a + direction.scaled((lo + hi) / 2))
    return samples


def validate_polygonal_set(s: PolygonalSet) -> None:
    """Raise ValidationError unless s satisfies every polygonal-set invariant"""
    if not s.polygons:
        raise ValidationError("Polygonal set has no polygons")

    for polygon in s.polygons:
        for loop in polygon.loops():
            _check_simple(loop)
        for hole in polygon.holes:
            if _loops_touch(polygon.outer, hole) != 'none':
                raise ValidationError("Hole touches its outer loop")
            if _locate_in_loop(polygon.outer, hole[0]) is not PointLocation.INSIDE:
                raise ValidationError("Hole lies outside its outer loop")
        for i, first in enumerate(polygon.holes):
            for second in polygon.holes[i + 1:]:
                if _loops_touch(first, second) != 'none':
                    raise ValidationError("Holes touch each other")
                if (_locate_in_loop(first, second[0]) is not PointLocation.OUTSIDE
                        or _locate_in_loop(second, first[0]) is not PointLocation.OUTSIDE):
                    raise ValidationError("Nested holes are not allowed")

    for i, first in enumerate(s.polygons):
        for second in s.polygons[i + 1:]:
            for loop_a in first.loops():
                for loop_b in second.loops():
                    if _loops_touch(loop_a, loop_b) == 'overlap':
                        raise ValidationError("Polygons share a boundary segment (slit)")
                    if _loops_cross(loop_a, loop_b):
                        raise ValidationError("Polygon boundaries cross")
            for sample in _sample_points(first.outer, second):
                if _polygon_region_location(second, sample) is PointLocation.INSIDE:
                    raise ValidationError("Polygons overlap")
            for sample in _sample_points(second.outer, first):
                if _polygon_region_location(first, sample) is PointLocation.INSIDE:
                    raise ValidationError("Polygons overlap")


def _canonical_polygon(outer: Sequence[RationalPoint], holes: Iterable[Sequence[RationalPoint]]) -> Polygon:
    canonical_holes = sorted(canonical_loop(h, counter_clockwise=False) for h in holes)
    return Polygon(canonical_loop(outer, counter_clockwise=True), tuple(canonical_holes))


def make_polygonal_set(polygons: Iterable[Tuple[Sequence[RationalPoint], Iterable[Sequence[RationalPoint]]]]) -> PolygonalSet:
    """
    Build a validated canonical polygonal set

    Args:
        polygons: (outer loop, holes) pairs in any orientation

    Returns:
        Canonical PolygonalSet
    """
    built = sorted((_canonical_polygon(outer, holes) for outer, holes in polygons),
                   key=lambda polygon: polygon.outer)
    result = PolygonalSet(tuple(built))
    validate_polygonal_set(result)
    return result


def polygon_from_coords(*loops: Sequence[Tuple[Any, Any]]) -> PolygonalSet:
    """Single-polygon convenience constructor: first loop outer, the rest holes"""
    points = [[RationalPoint.of(x, y) for x, y in loop] for loop in loops]
    return make_polygonal_set([(points[0], points[1:])])


def _map_points(s: PolygonalSet, fn) -> PolygonalSet:
    polygons = []
    for polygon in s.polygons:
        outer = tuple(fn(p) for p in polygon.outer)
        holes = tuple(tuple(fn(p) for p in hole) for hole in polygon.holes)
        polygons.append(Polygon(outer, holes))
    return PolygonalSet(tuple(polygons))


# ---------------------------------------------------------------------------
# JSON input and output


def _parse_loop(raw: Any, where: str) -> List[RationalPoint]:
    if not isinstance(raw, list):
        raise PolygonSyntaxError(f"{where} must be a list of [x, y] pairs")
    points = []
    for index, pair in enumerate(raw):
        if not isinstance(pair, list) or len(pair) != 2:
            raise PolygonSyntaxError(f"{where}[{index}] must be a two-element list")
        points.append(RationalPoint(RationalUtils.parse_rational(pair[0]),
                                    RationalUtils.parse_rational(pair[1])))
    return points


def parse_polygonal_set(text: Union[str, bytes]) -> PolygonalSet:
    """
    Parse polygonal-set JSON into a validated canonical PolygonalSet

    Args:
        text: JSON document {"polygons": [{"outer": [...], "holes": [[...], ...]}, ...]}

    Returns:
        Canonical PolygonalSet
    """
    if isinstance(text, bytes):
        try:
            text = text.decode('utf-8')
        except UnicodeDecodeError as e:
            raise PolygonSyntaxError(f"Input is not UTF-8: {str(e)}")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise PolygonSyntaxError(f"Invalid JSON: {str(e)}")

    if not isinstance(document, dict) or not isinstance(document.get('polygons'), list):
        raise PolygonSyntaxError("Top level must be an object with a 'polygons' list")

    polygons = []
    for index, raw in enumerate(document['polygons']):
        if not isinstance(raw, dict) or 'outer' not in raw:
            raise PolygonSyntaxError(f"polygons[{index}] must be an object with an 'outer' loop")
        outer = _parse_loop(raw['outer'], f"polygons[{index}].outer")
        raw_holes = raw.get('holes', [])
        if not isinstance(raw_holes, list):
            raise PolygonSyntaxError(f"polygons[{index}].holes must be a list")
        holes = [_parse_loop(h, f"polygons[{index}].holes[{j}]") for j, h in enumerate(raw_holes)]
        polygons.append((outer, holes))

    result = make_polygonal_set(polygons)
    logger.debug(f"Parsed polygonal set with {len(result.polygons)} polygon(s), area {area(result)}")
    return result


def serialize_polygonal_set(s: PolygonalSet) -> str:
    """Canonical JSON text; parsing it back yields an equal set"""
    document = {
        'polygons': [
            {
                'outer': [p.to_json() for p in polygon.outer],
                'holes': [[p.to_json() for p in hole] for hole in polygon.holes],
            }
            for polygon in s.polygons
        ]
    }
    return json.dumps(document, separators=(',', ':'))


# ---------------------------------------------------------------------------
# Normalization


def normalize_to_integer(s: PolygonalSet) -> Tuple[IntegerPolygonalSet, AffineNormalization]:
    """
    Translate the smallest vertex to the origin and dilate by the least common
    denominator so every vertex is integral

    Returns:
        (integer set, the normalization applied)
    """
    translation = min(s.vertices())
    shifted = s.translated(-translation)
    coords = [c for v in shifted.vertices() for c in (v.x, v.y)]
    dilation = RationalUtils.lcm_of_denominators(coords)
    normalization = AffineNormalization(translation, dilation)
    integer_set = IntegerPolygonalSet(shifted.dilated(dilation))
    logger.debug(f"Normalized by translation {translation} and dilation {dilation}")
    return integer_set, normalization


def integer_polygonal_set(s: PolygonalSet) -> IntegerPolygonalSet:
    """Wrap s if it already is integral with the origin as a vertex, else normalize"""
    if s.is_integer() and ORIGIN in s.vertices():
        return IntegerPolygonalSet(s)
    return normalize_to_integer(s)[0]


def primitive_direction(v: RationalPoint) -> Tuple[int, int]:
    """Primitive integer vector positively parallel to the rational vector v"""
    scale = math.lcm(v.x.denominator, v.y.denominator)
    x, y = int(v.x * scale), int(v.y * scale)
    g = math.gcd(x, y)
    if g == 0:
        raise ValueError("zero vector has no direction")
    return x // g, y // g
