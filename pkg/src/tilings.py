"""
Descriptions of infinite translate sets T: lattice-periodic, or a finite
union of sheared components confined to parallel bands.

The module also computes finite verification windows: sets of cells on
which exact single coverage implies exact single coverage everywhere.
"""

import json
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from src.errors import (InvalidTilingDescription, InvariantViolation, UnsupportedDescription,
                        WindowTooSmall)
from src.geometry_core import RationalPoint
from src.lattices import Lattice, RationalLattice, in_rank_one_span
from src.utils import IntegerUtils, RationalUtils

logger = logging.getLogger(__name__)

Box = Tuple[Fraction, Fraction, Fraction, Fraction]
IntBox = Tuple[int, int, int, int]
Cell = Tuple[int, int]


@dataclass(frozen=True)
class Band:
    """Points p with lower <= <normal, p> < upper; a None bound is open"""
    normal: Tuple[int, int]
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None

    def __post_init__(self):
        normal = (int(self.normal[0]), int(self.normal[1]))
        if math.gcd(*normal) != 1:
            raise InvalidTilingDescription(f"Band normal {normal} is not primitive")
        object.__setattr__(self, 'normal', normal)
        if self.lower is not None:
            object.__setattr__(self, 'lower', Fraction(self.lower))
        if self.upper is not None:
            object.__setattr__(self, 'upper', Fraction(self.upper))
        if self.lower is not None and self.upper is not None and self.lower >= self.upper:
            raise InvalidTilingDescription(f"Empty band [{self.lower}, {self.upper})")

    def level(self, p: RationalPoint) -> Fraction:
        return self.normal[0] * p.x + self.normal[1] * p.y

    def contains(self, p: RationalPoint) -> bool:
        value = self.level(p)
        if self.lower is not None and value < self.lower:
            return False
        if self.upper is not None and value >= self.upper:
            return False
        return True

    def scaled(self, factor: Fraction) -> 'Band':
        return Band(self.normal,
                    None if self.lower is None else self.lower * factor,
                    None if self.upper is None else self.upper * factor)

    def translated(self, v: RationalPoint) -> 'Band':
        shift = self.level(v)
        return Band(self.normal,
                    None if self.lower is None else self.lower + shift,
                    None if self.upper is None else self.upper + shift)

    def finite_bounds(self) -> List[Fraction]:
        return [b for b in (self.lower, self.upper) if b is not None]


@dataclass(frozen=True)
class Component:
    """
    One sheared piece: base + slide_offset * direction + span(periods),
    restricted to the band when one is given
    """
    base: Tuple[RationalPoint, ...]
    periods: Tuple[RationalPoint, ...]
    slide_offset: Fraction = Fraction(0)
    band: Optional[Band] = None

    def __post_init__(self):
        object.__setattr__(self, 'slide_offset', Fraction(self.slide_offset))
        if not self.base:
            raise InvalidTilingDescription("Component needs at least one base point")
        if not 1 <= len(self.periods) <= 2:
            raise InvalidTilingDescription("Component needs one or two periods")
        if any(p == RationalPoint(0, 0) for p in self.periods):
            raise InvalidTilingDescription("Component period must be nonzero")
        if len(self.periods) == 2 and self.periods[0].cross(self.periods[1]) == 0:
            raise InvalidTilingDescription("Component periods must be independent")

    @property
    def rank(self) -> int:
        return len(self.periods)

    def lattice(self) -> Optional[RationalLattice]:
        if self.rank == 2:
            return RationalLattice.from_generators(self.periods)
        return None

    def shifted_base(self, direction: Tuple[int, int]) -> List[RationalPoint]:
        shift = RationalPoint(direction[0], direction[1]).scaled(self.slide_offset)
        return [b + shift for b in self.base]

    def contains(self, p: RationalPoint, direction: Tuple[int, int]) -> bool:
        if self.band is not None and not self.band.contains(p):
            return False
        lattice = self.lattice()
        for b in self.shifted_base(direction):
            delta = p - b
            if lattice is not None:
                if lattice.contains(delta):
                    return True
            elif in_rank_one_span(delta, self.periods[0]):
                return True
        return False

    def points_in_box(self, box: Box, direction: Tuple[int, int]) -> List[RationalPoint]:
        points: List[RationalPoint] = []
        lattice = self.lattice()
        for b in self.shifted_base(direction):
            if lattice is not None:
                candidates = lattice_points_in_box(b, lattice, box)
            else:
                candidates = line_points_in_box(b, self.periods[0], box)
            points.extend(p for p in candidates if self.band is None or self.band.contains(p))
        return points

    def transverse_period(self, normal: Tuple[int, int]) -> Fraction:
        values = [normal[0] * g.x + normal[1] * g.y for g in self.periods]
        return RationalUtils.rational_gcd(values)


@dataclass(frozen=True)
class PeriodicTiling:
    """base + lattice"""
    base: Tuple[RationalPoint, ...]
    lattice: RationalLattice

    def __post_init__(self):
        if not self.base:
            raise InvalidTilingDescription("Periodic tiling needs at least one base point")

    def contains(self, p: RationalPoint) -> bool:
        return any(self.lattice.contains(p - b) for b in self.base)

    def points_in_box(self, box: Box) -> List[RationalPoint]:
        points: List[RationalPoint] = []
        for b in self.base:
            points.extend(lattice_points_in_box(b, self.lattice, box))
        return points

    def reduced_base(self) -> List[RationalPoint]:
        return sorted(self.lattice.reduce(b) for b in self.base)


@dataclass(frozen=True)
class ShearedTiling:
    """Finite union of components; offsets slide along the primitive direction"""
    components: Tuple[Component, ...]
    direction: Tuple[int, int] = (0, 1)

    def __post_init__(self):
        if not self.components:
            raise InvalidTilingDescription("Sheared tiling needs at least one component")
        object.__setattr__(self, 'direction', IntegerUtils.primitive(self.direction))

    def contains(self, p: RationalPoint) -> bool:
        return any(c.contains(p, self.direction) for c in self.components)

    def points_in_box(self, box: Box) -> List[RationalPoint]:
        points: List[RationalPoint] = []
        for component in self.components:
            points.extend(component.points_in_box(box, self.direction))
        return points

    def is_banded(self) -> bool:
        return any(c.band is not None and c.band.finite_bounds() for c in self.components)


TilingDesc = Union[PeriodicTiling, ShearedTiling]


@dataclass(frozen=True)
class VerificationWindow:
    """Cells to check, in scanline order, and a box holding every relevant translate"""
    cells: Tuple[Cell, ...]
    translate_box: Box


# ---------------------------------------------------------------------------
# Enumeration helpers


def _ceil(value: Fraction) -> int:
    return -math.floor(-value)


def lattice_points_in_box(origin: RationalPoint, lattice: RationalLattice, box: Box) -> List[RationalPoint]:
    xmin, ymin, xmax, ymax = box
    s = lattice.scale
    step_x = s * lattice.lattice.a
    shear = s * lattice.lattice.b
    step_y = s * lattice.lattice.d
    points = []
    for j in range(_ceil((ymin - origin.y) / step_y), math.floor((ymax - origin.y) / step_y) + 1):
        x0 = origin.x + j * shear
        y = origin.y + j * step_y
        for i in range(_ceil((xmin - x0) / step_x), math.floor((xmax - x0) / step_x) + 1):
            points.append(RationalPoint(x0 + i * step_x, y))
    return points


def line_points_in_box(origin: RationalPoint, period: RationalPoint, box: Box) -> List[RationalPoint]:
    xmin, ymin, xmax, ymax = box
    lo, hi = None, None
    for start, step, low, high in ((origin.x, period.x, xmin, xmax), (origin.y, period.y, ymin, ymax)):
        if step == 0:
            if not low <= start <= high:
                return []
            continue
        a, b = (low - start) / step, (high - start) / step
        a, b = min(a, b), max(a, b)
        lo = a if lo is None else max(lo, a)
        hi = b if hi is None else min(hi, b)
    if lo is None or lo > hi:
        return []
    return [origin + period.scaled(j) for j in range(_ceil(lo), math.floor(hi) + 1)]


def lattice_period_along(lattice: RationalLattice, direction: Tuple[int, int]) -> RationalPoint:
    """Shortest lattice vector positively parallel to direction"""
    g1, g2 = lattice.generators
    normal = (direction[1], -direction[0])
    c1 = normal[0] * g1.x + normal[1] * g1.y
    c2 = normal[0] * g2.x + normal[1] * g2.y
    scale = RationalUtils.lcm_of_denominators([c1, c2])
    i, j = int(c2 * scale), -int(c1 * scale)
    g = math.gcd(i, j)
    i, j = i // g, j // g
    vector = g1.scaled(i) + g2.scaled(j)
    if vector.x * direction[0] + vector.y * direction[1] < 0:
        vector = -vector
    return vector


# ---------------------------------------------------------------------------
# Conversions


def denominator_lcm(desc: TilingDesc) -> int:
    values: List[Fraction] = []
    if isinstance(desc, PeriodicTiling):
        values.extend(c for b in desc.base for c in (b.x, b.y))
        values.extend(c for g in desc.lattice.generators for c in (g.x, g.y))
    else:
        for component in desc.components:
            values.extend(c for b in component.shifted_base(desc.direction) for c in (b.x, b.y))
            values.extend(c for g in component.periods for c in (g.x, g.y))
    return RationalUtils.lcm_of_denominators(values)


def is_integral(desc: TilingDesc) -> bool:
    return denominator_lcm(desc) == 1


def scaled(desc: TilingDesc, factor: Fraction) -> TilingDesc:
    factor = Fraction(factor)
    if isinstance(desc, PeriodicTiling):
        return PeriodicTiling(tuple(b.scaled(factor) for b in desc.base), desc.lattice.scaled(factor))
    components = tuple(
        Component(tuple(b.scaled(factor) for b in c.base),
                  tuple(g.scaled(factor) for g in c.periods),
                  c.slide_offset * factor,
                  None if c.band is None else c.band.scaled(factor))
        for c in desc.components)
    return ShearedTiling(components, desc.direction)


def translated(desc: TilingDesc, v: RationalPoint) -> TilingDesc:
    if isinstance(desc, PeriodicTiling):
        return PeriodicTiling(tuple(b + v for b in desc.base), desc.lattice)
    components = tuple(
        Component(tuple(b + v for b in c.base), c.periods, c.slide_offset,
                  None if c.band is None else c.band.translated(v))
        for c in desc.components)
    return ShearedTiling(components, desc.direction)


def anchor_point(desc: TilingDesc) -> RationalPoint:
    """A distinguished translate: the origin if present, else the smallest base point"""
    origin = RationalPoint(0, 0)
    if desc.contains(origin):
        return origin
    if isinstance(desc, PeriodicTiling):
        return min(desc.base)
    candidates = [b for c in desc.components for b in c.shifted_base(desc.direction)
                  if c.band is None or c.band.contains(b)]
    if not candidates:
        raise InvalidTilingDescription("No base point lies inside its band")
    return min(candidates)


def _coset_representatives(sub: RationalLattice, sup: RationalLattice) -> List[RationalPoint]:
    """Representatives of sup / sub, sub a sublattice of sup"""
    ratio = sub.covolume / sup.covolume
    if ratio.denominator != 1:
        raise InvariantViolation("lattice index is not an integer")
    r = int(ratio)
    g1, g2 = sup.generators
    seen = {}
    for j in range(r):
        for i in range(r):
            v = g1.scaled(i) + g2.scaled(j)
            seen.setdefault(sub.reduce(v), v)
    return [seen[k] for k in sorted(seen)]


def as_periodic(desc: TilingDesc) -> PeriodicTiling:
    """
    Rewrite an unbanded description as base + lattice over the common lattice

    Raises:
        WindowTooSmall: for banded descriptions or rank-one components
    """
    if isinstance(desc, PeriodicTiling):
        return desc
    if desc.is_banded():
        raise WindowTooSmall("Banded description has no common period lattice")
    lattices = []
    for component in desc.components:
        lattice = component.lattice()
        if lattice is None:
            raise WindowTooSmall("Rank-one component has no period lattice")
        lattices.append(lattice)
    common = lattices[0]
    for lattice in lattices[1:]:
        common = common.intersection(lattice)
    base: List[RationalPoint] = []
    for component, lattice in zip(desc.components, lattices):
        reps = _coset_representatives(common, lattice)
        for b in component.shifted_base(desc.direction):
            base.extend(b + r for r in reps)
    return PeriodicTiling(tuple(sorted(base)), common)


def band_normal(desc: ShearedTiling) -> Tuple[int, int]:
    normals = {c.band.normal for c in desc.components if c.band is not None}
    if len(normals) != 1:
        raise UnsupportedDescription("All bands must share one normal")
    return normals.pop()


def along_band_period(desc: ShearedTiling, normal: Tuple[int, int]) -> RationalPoint:
    """Least common period of every component along the band direction"""
    along = (-normal[1], normal[0])
    along_vec = RationalPoint(*along)
    multiples = []
    for component in desc.components:
        lattice = component.lattice()
        if lattice is not None:
            period = lattice_period_along(lattice, along)
        else:
            period = component.periods[0]
            if period.cross(along_vec) != 0:
                raise UnsupportedDescription("Rank-one component period is not along its band")
        multiples.append(abs(period.dot(along_vec) / along_vec.dot(along_vec)))
    scale = RationalUtils.lcm_of_denominators(multiples)
    common = math.lcm(*(int(m * scale) for m in multiples))
    return along_vec.scaled(Fraction(common, scale))


# ---------------------------------------------------------------------------
# Verification windows


def verification_window(desc: TilingDesc, reach: IntBox) -> VerificationWindow:
    """
    Finite window for an integral description

    Args:
        desc: Integral tiling description
        reach: (xmin, ymin, xmax, ymax) of the cell offsets a single tile covers

    Returns:
        VerificationWindow with scanline-ordered cells

    Raises:
        WindowTooSmall: when no finite window exists
    """
    if not is_integral(desc):
        raise InvalidTilingDescription("Verification windows need an integral description")
    if isinstance(desc, ShearedTiling) and not desc.is_banded():
        desc = as_periodic(desc)
    if isinstance(desc, PeriodicTiling):
        lattice = desc.lattice.as_integer_lattice()
        cells = tuple(sorted(lattice.coset_representatives(), key=lambda c: (c[1], c[0])))
    else:
        cells = _sheared_window_cells(desc, reach)
    return VerificationWindow(cells, _translate_box(cells, reach))


def _translate_box(cells: Sequence[Cell], reach: IntBox) -> Box:
    rxmin, rymin, rxmax, rymax = reach
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    return (Fraction(min(xs) - rxmax), Fraction(min(ys) - rymax),
            Fraction(max(xs) - rxmin), Fraction(max(ys) - rymin))


def _sheared_window_cells(desc: ShearedTiling, reach: IntBox) -> Tuple[Cell, ...]:
    normal = band_normal(desc)
    along = (-normal[1], normal[0])
    period = along_band_period(desc, normal)
    steps = int(period.dot(RationalPoint(*along)) / (along[0] ** 2 + along[1] ** 2))

    bounds = [b for c in desc.components if c.band is not None for b in c.band.finite_bounds()]
    if not bounds:
        raise WindowTooSmall("Bands have no finite boundary")
    rxmin, rymin, rxmax, rymax = reach
    levels = [normal[0] * x + normal[1] * y for x in (rxmin, rxmax) for y in (rymin, rymax)]
    reach_n = max(levels) - min(levels) + 1
    transverse = max((c.transverse_period(normal) for c in desc.components), default=Fraction(0))
    margin = reach_n + transverse + 1
    lo = math.floor(min(bounds) - margin)
    hi = _ceil(max(bounds) + margin)

    g, s, t = IntegerUtils.extended_gcd(normal[0], normal[1])
    cells = []
    for level in range(lo, hi + 1):
        x0, y0 = s * level, t * level
        for j in range(steps):
            cells.append((x0 + j * along[0], y0 + j * along[1]))
    logger.debug(f"Sheared window: levels {lo}..{hi}, {steps} cells per level")
    return tuple(sorted(cells, key=lambda c: (c[1], c[0])))


# ---------------------------------------------------------------------------
# JSON


def _point(raw: Any, where: str) -> RationalPoint:
    if not isinstance(raw, list) or len(raw) != 2:
        raise InvalidTilingDescription(f"{where} must be a two-element list")
    try:
        return RationalPoint(RationalUtils.parse_rational(raw[0]), RationalUtils.parse_rational(raw[1]))
    except Exception as e:
        raise InvalidTilingDescription(f"{where}: {str(e)}")


def _points(raw: Any, where: str) -> Tuple[RationalPoint, ...]:
    if not isinstance(raw, list):
        raise InvalidTilingDescription(f"{where} must be a list")
    return tuple(_point(p, f"{where}[{i}]") for i, p in enumerate(raw))


def _optional_rational(raw: Any, where: str) -> Optional[Fraction]:
    if raw is None:
        return None
    try:
        return RationalUtils.parse_rational(raw)
    except Exception as e:
        raise InvalidTilingDescription(f"{where}: {str(e)}")


def tiling_from_dict(document: Dict[str, Any]) -> TilingDesc:
    """
    Build a description from its JSON form

    Accepts {"type": "periodic", ...}, {"type": "sheared", ...} and torus
    certificates {"lattice": [[a, b], [0, d]], "translates": [...], "scale": N}.
    """
    if not isinstance(document, dict):
        raise InvalidTilingDescription("Tiling description must be a JSON object")
    try:
        if 'lattice' in document and 'translates' in document:
            lattice = Lattice.from_json(document['lattice'])
            base = _points(document['translates'], 'translates')
            return PeriodicTiling(base, RationalLattice.integer(lattice))

        kind = document.get('type')
        if kind == 'periodic':
            base = _points(document.get('base'), 'base')
            periods = _points(document.get('periods'), 'periods')
            if len(periods) != 2:
                raise InvalidTilingDescription("Periodic tiling needs exactly two periods")
            return PeriodicTiling(base, RationalLattice.from_generators(periods))

        if kind == 'sheared':
            direction = document.get('direction', [0, 1])
            components = []
            for i, raw in enumerate(document.get('components') or []):
                band = None
                if raw.get('band') is not None:
                    raw_band = raw['band']
                    band = Band(tuple(int(c) for c in raw_band['normal']),
                                _optional_rational(raw_band.get('lower'), f"components[{i}].band.lower"),
                                _optional_rational(raw_band.get('upper'), f"components[{i}].band.upper"))
                components.append(Component(
                    _points(raw.get('base'), f"components[{i}].base"),
                    _points(raw.get('periods'), f"components[{i}].periods"),
                    _optional_rational(raw.get('slide_offset', 0), f"components[{i}].slide_offset"),
                    band))
            return ShearedTiling(tuple(components), tuple(int(c) for c in direction))
    except InvalidTilingDescription:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidTilingDescription(f"Malformed tiling description: {str(e)}")
    raise InvalidTilingDescription("Unknown tiling description type")


def parse_tiling(text: Union[str, bytes]) -> TilingDesc:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidTilingDescription(f"Invalid JSON: {str(e)}")
    return tiling_from_dict(document)


def tiling_to_dict(desc: TilingDesc) -> Dict[str, Any]:
    if isinstance(desc, PeriodicTiling):
        return {
            'type': 'periodic',
            'base': [b.to_json() for b in desc.base],
            'periods': [g.to_json() for g in desc.lattice.generators],
        }
    components = []
    for c in desc.components:
        entry: Dict[str, Any] = {
            'base': [b.to_json() for b in c.base],
            'periods': [g.to_json() for g in c.periods],
            'slide_offset': RationalUtils.format_rational(c.slide_offset),
        }
        if c.band is not None:
            entry['band'] = {
                'normal': list(c.band.normal),
                'lower': None if c.band.lower is None else RationalUtils.format_rational(c.band.lower),
                'upper': None if c.band.upper is None else RationalUtils.format_rational(c.band.upper),
            }
        components.append(entry)
    return {'type': 'sheared', 'direction': list(desc.direction), 'components': components}
