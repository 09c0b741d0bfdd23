"""
SVG rendering of polygonal sets, unit-cell partitions, discrete tiles,
tilings and earthquake plates
"""

import logging
import os
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

from jinja2 import Template

from src.config import config
from src.discretizer import DiscreteTile, UnitCellPartition, marker_owners
from src.geometry_core import ORIGIN, IntegerPolygonalSet, PolygonalSet, RationalPoint
from src.lattices import RationalLattice
from src.structure import PlateFamily, VertexShareClass
from src.tilings import TilingDesc

SVG_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{{ width }}" height="{{ height }}" viewBox="0 0 {{ width }} {{ height }}">
  <title>{{ title }}</title>
{% for panel in panels %}  <g id="{{ panel.id }}" transform="translate({{ panel.offset }},0)">
{% for shape in panel.shapes %}    <path d="{{ shape.d }}" fill="{{ shape.fill }}" stroke="{{ stroke }}" stroke-width="1" fill-rule="evenodd"{% if shape.label %} data-label="{{ shape.label }}"{% endif %}/>
{% endfor %}  </g>
{% endfor %}</svg>
"""

Viewport = Tuple[Fraction, Fraction, Fraction, Fraction]


class RenderTarget(Enum):
    POLYGON = 'polygon'
    PARTITION = 'partition'
    TILE = 'tile'
    TILING = 'tiling'
    PLATES = 'plates'


@dataclass(frozen=True)
class RenderSpec:
    target: RenderTarget
    viewport: Optional[Viewport] = None
    cell_pixels: int = 40

    def __post_init__(self):
        if self.cell_pixels <= 0:
            raise ValueError("cell_pixels must be positive")
        if self.viewport is not None:
            xmin, ymin, xmax, ymax = self.viewport
            if xmin >= xmax or ymin >= ymax:
                raise ValueError(f"empty viewport {self.viewport}")


@dataclass
class _Shape:
    d: str
    fill: str
    label: str = ''


@dataclass
class _Panel:
    id: str
    viewport: Viewport
    shapes: List[_Shape]
    offset: float = 0.0


def _fmt(value: float) -> str:
    text = f"{value:.3f}".rstrip('0').rstrip('.')
    return '0' if text in ('-0', '') else text


class SvgRenderer:
    """Deterministic SVG output: same input, byte-identical document"""

    def __init__(self, cell_pixels: Optional[int] = None):
        self.logger = logging.getLogger(__name__)
        self.cell_pixels = cell_pixels or config.get_cell_pixels()
        self.palette = config.get_palette()
        self.template = Template(SVG_TEMPLATE)

    # -- geometry to paths

    def _path(self, loops: Sequence[Sequence[RationalPoint]], viewport: Viewport) -> str:
        xmin, _, _, ymax = viewport
        parts = []
        for loop in loops:
            coords = [f"{_fmt(float((p.x - xmin) * self.cell_pixels))} {_fmt(float((ymax - p.y) * self.cell_pixels))}"
                      for p in loop]
            parts.append('M ' + ' L '.join(coords) + ' Z')
        return ' '.join(parts)

    def _color(self, index: int) -> str:
        return self.palette[index % len(self.palette)]

    def _document(self, panels: List[_Panel], title: str) -> str:
        gap = config.SVG_SETTINGS['panel_gap_cells'] * self.cell_pixels
        offset = 0.0
        height = 0.0
        for panel in panels:
            xmin, ymin, xmax, ymax = panel.viewport
            panel.offset = offset
            offset += float(xmax - xmin) * self.cell_pixels + gap
            height = max(height, float(ymax - ymin) * self.cell_pixels)
        width = offset - gap if panels else 0.0
        return self.template.render(width=_fmt(width), height=_fmt(height), title=title,
                                    panels=[{'id': p.id, 'offset': _fmt(p.offset), 'shapes': p.shapes}
                                            for p in panels],
                                    stroke=config.SVG_SETTINGS['stroke'])

    # -- panels

    def _polygon_panel(self, omega: PolygonalSet, viewport: Optional[Viewport] = None) -> _Panel:
        viewport = viewport or omega.bounding_box()
        shapes = [_Shape(self._path(polygon.loops(), viewport), self._color(0), f"polygon {i}")
                  for i, polygon in enumerate(omega.polygons)]
        return _Panel('polygon', viewport, shapes)

    def _partition_panel(self, partition: UnitCellPartition) -> _Panel:
        viewport = (Fraction(0), Fraction(0), Fraction(1), Fraction(1))
        shapes = [_Shape(self._path([face.vertices], viewport), self._color(i), f"P_{i}")
                  for i, face in enumerate(partition.faces)]
        return _Panel('partition', viewport, shapes)

    def _tile_panel(self, tile: DiscreteTile) -> _Panel:
        n = tile.scale
        xmin, ymin, xmax, ymax = tile.bounding_box()
        viewport = (Fraction(xmin, n), Fraction(ymin, n), Fraction(xmax + 1, n), Fraction(ymax + 1, n))
        owners = marker_owners(tile)
        shapes = []
        for x, y in tile.sorted_points():
            owner = owners[(x, y)]
            square = [RationalPoint(Fraction(x, n), Fraction(y, n)), RationalPoint(Fraction(x + 1, n), Fraction(y, n)),
                      RationalPoint(Fraction(x + 1, n), Fraction(y + 1, n)), RationalPoint(Fraction(x, n), Fraction(y + 1, n))]
            shapes.append(_Shape(self._path([square], viewport), self._color(owner or 0)))
        return _Panel('tile', viewport, shapes)

    def _tiling_panel(self, omega: PolygonalSet, tiling: TilingDesc, viewport: Viewport,
                      color_key: Callable[[RationalPoint], Hashable], panel_id: str) -> _Panel:
        bxmin, bymin, bxmax, bymax = omega.bounding_box()
        xmin, ymin, xmax, ymax = viewport
        translates = sorted(set(tiling.points_in_box((xmin - bxmax, ymin - bymax, xmax - bxmin, ymax - bymin))))
        colors: Dict[Hashable, int] = {}
        shapes = []
        for t in translates:
            key = color_key(t)
            index = colors.setdefault(key, len(colors))
            moved = omega.translated(t)
            for polygon in moved.polygons:
                shapes.append(_Shape(self._path(polygon.loops(), viewport), self._color(index), f"t={t}"))
        return _Panel(panel_id, viewport, shapes)

    # -- public rendering

    def render_polygon(self, omega: PolygonalSet) -> str:
        return self._document([self._polygon_panel(omega)], 'polygonal set')

    def render_partition(self, partition: UnitCellPartition) -> str:
        return self._document([self._partition_panel(partition)], 'unit-cell partition')

    def render_tile(self, tile: DiscreteTile) -> str:
        return self._document([self._tile_panel(tile)], 'discrete tile')

    def render_discretization(self, omega: IntegerPolygonalSet, tile: DiscreteTile) -> str:
        """Side-by-side panels: the set, the unit-cell partition and the discrete tile"""
        panels = [self._polygon_panel(omega.base)]
        if tile.partition is not None:
            panels.append(self._partition_panel(tile.partition))
        panels.append(self._tile_panel(tile))
        return self._document(panels, 'discretization')

    def render_tiling(self, omega: PolygonalSet, tiling: TilingDesc, viewport: Optional[Viewport] = None,
                      classes: Optional[Sequence[VertexShareClass]] = None) -> str:
        """Translates of omega in the viewport, coloured by vertex-sharing class family"""
        viewport = viewport or default_viewport(omega)
        if classes:
            lattice = RationalLattice.from_generators(classes[0].translations)
            key = lambda t: class_key(classes, lattice, t)
        else:
            key = lambda t: 0
        return self._document([self._tiling_panel(omega, tiling, viewport, key, 'tiling')], 'tiling')

    def render_plates(self, omega: PolygonalSet, tiling: TilingDesc, plates: Sequence[PlateFamily],
                      scale: int, shift: RationalPoint = ORIGIN, viewport: Optional[Viewport] = None) -> str:
        """
        Translates coloured by earthquake plate

        Plates live in discrete coordinates: a continuous translate t maps to
        (t - shift) * scale before lookup.
        """
        viewport = viewport or default_viewport(omega)
        key = lambda t: plate_key(plates, (t - shift).scaled(scale))
        return self._document([self._tiling_panel(omega, tiling, viewport, key, 'plates')], 'earthquake plates')

    def render(self, spec: RenderSpec, omega: Optional[IntegerPolygonalSet] = None,
               tile: Optional[DiscreteTile] = None, tiling: Optional[TilingDesc] = None,
               classes: Optional[Sequence[VertexShareClass]] = None,
               plates: Optional[Sequence[PlateFamily]] = None, scale: int = 1,
               shift: RationalPoint = ORIGIN) -> str:
        """
        Render one RenderSpec target from whatever inputs it needs

        Raises:
            ValueError: when an input the target needs is missing
        """
        self.cell_pixels = spec.cell_pixels
        self.logger.debug(f"Rendering target {spec.target.value}")
        if spec.target is RenderTarget.POLYGON:
            _require(omega, 'polygon')
            return self.render_polygon(omega.base)
        if spec.target is RenderTarget.PARTITION:
            _require(tile, 'partition')
            _require(tile.partition, 'partition')
            return self.render_partition(tile.partition)
        if spec.target is RenderTarget.TILE:
            _require(tile, 'tile')
            return self.render_tile(tile)
        _require(omega, spec.target.value)
        _require(tiling, spec.target.value)
        if spec.target is RenderTarget.TILING:
            return self.render_tiling(omega.base, tiling, spec.viewport, classes)
        _require(plates, 'plates')
        return self.render_plates(omega.base, tiling, plates, scale, shift, spec.viewport)

    def write(self, svg: str, path: str) -> str:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(svg)
        self.logger.info(f"SVG written: {path}")
        return path


def _require(value, target: str) -> None:
    if value is None:
        raise ValueError(f"render target '{target}' is missing an input")


def default_viewport(omega: PolygonalSet) -> Viewport:
    xmin, ymin, xmax, ymax = omega.bounding_box()
    w, h = xmax - xmin, ymax - ymin
    return xmin - w, ymin - h, xmax + 2 * w, ymax + 2 * h


def class_key(classes: Sequence[VertexShareClass], lattice: RationalLattice, t: RationalPoint) -> Hashable:
    """Which class family t belongs to, and which copy of it"""
    for index, family in enumerate(classes):
        for q in family.positions:
            delta = t - q
            if not lattice.contains(delta):
                continue
            basis = family.period_basis
            if len(basis) == 2:
                return index, RationalLattice.from_generators(basis).reduce(delta)
            return index, delta.cross(basis[0])
    return -1, None


def plate_key(plates: Sequence[PlateFamily], t: RationalPoint) -> Hashable:
    """Which plate the (scaled) translate t lies on"""
    if not t.is_integer():
        return -1, None
    for index, family in enumerate(plates):
        lattice = RationalLattice.from_generators([RationalPoint(*g) for g in family.lattice_generators])
        for q in family.representative:
            delta = t - RationalPoint(*q)
            if not lattice.contains(delta):
                continue
            basis = [RationalPoint(*h) for h in family.period_subgroup]
            if len(basis) == 2:
                return index, RationalLattice.from_generators(basis).reduce(delta)
            if len(basis) == 1:
                return index, delta.cross(basis[0])
            return index, delta
    return -1, None
