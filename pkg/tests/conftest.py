"""
Shared fixtures: a small corpus of integer polygonal sets, their discrete
tiles, and known tilings
"""

import json
from fractions import Fraction

import pytest

from src.discretizer import discretize
from src.geometry_core import IntegerPolygonalSet, RationalPoint, integer_polygonal_set, polygon_from_coords
from src.lattices import Lattice, RationalLattice
from src.tilings import PeriodicTiling

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
DOMINO = [(0, 0), (2, 0), (2, 1), (0, 1)]
L_TROMINO = [(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]
RIGHT_TRIANGLE = [(0, 0), (1, 0), (0, 1)]
NOTCHED_SQUARE = [(0, 0), (2, 0), (2, 2), (1, 1), (0, 2)]
FIFTEEN_GON = [(0, 0), (6, 0), ('13/2', 1), (6, 2), (5, 3), (4, 3), (4, 2), (3, 2), (3, 3), (2, 3),
               (2, 2), (1, 2), (1, 3), (0, 3), ('1/2', '3/2')]


def make_set(coords) -> IntegerPolygonalSet:
    return integer_polygonal_set(polygon_from_coords(coords))


def periodic(base, periods) -> PeriodicTiling:
    points = tuple(RationalPoint.of(*b) for b in base)
    return PeriodicTiling(points, RationalLattice.from_generators([RationalPoint.of(*g) for g in periods]))


def polygon_json(*loops) -> str:
    outer = [[str(x), str(y)] for x, y in loops[0]]
    holes = [[[str(x), str(y)] for x, y in hole] for hole in loops[1:]]
    return json.dumps({'polygons': [{'outer': outer, 'holes': holes}]})


@pytest.fixture
def unit_square() -> IntegerPolygonalSet:
    return make_set(SQUARE)


@pytest.fixture
def domino() -> IntegerPolygonalSet:
    return make_set(DOMINO)


@pytest.fixture
def l_tromino() -> IntegerPolygonalSet:
    return make_set(L_TROMINO)


@pytest.fixture
def right_triangle() -> IntegerPolygonalSet:
    return make_set(RIGHT_TRIANGLE)


@pytest.fixture
def notched_square() -> IntegerPolygonalSet:
    return make_set(NOTCHED_SQUARE)


@pytest.fixture
def corpus(unit_square, domino, l_tromino, right_triangle, notched_square):
    return {
        'unit_square': unit_square,
        'domino': domino,
        'l_tromino': l_tromino,
        'right_triangle': right_triangle,
        'notched_square': notched_square,
    }


@pytest.fixture
def square_tile(unit_square):
    return discretize(unit_square)


@pytest.fixture
def tromino_tile(l_tromino):
    return discretize(l_tromino)


@pytest.fixture
def row_tile():
    return [(0, 0), (1, 0), (3, 0)]


@pytest.fixture
def integer_lattice() -> RationalLattice:
    return RationalLattice.integer(Lattice(1, 0, 1))


@pytest.fixture
def z2(integer_lattice) -> PeriodicTiling:
    return PeriodicTiling((RationalPoint(0, 0),), integer_lattice)


@pytest.fixture
def column_shift() -> PeriodicTiling:
    """Unit squares in columns, odd columns raised by 1/2"""
    return periodic([(0, 0), (1, Fraction(1, 2))], [(2, 0), (0, 1)])


@pytest.fixture
def tromino_staircase() -> PeriodicTiling:
    """L-trominoes on the lattice spanned by (3, 0) and (1, 1)"""
    return periodic([(0, 0)], [(3, 0), (1, 1)])


@pytest.fixture
def write_file(tmp_path):
    def _write(name: str, text: str) -> str:
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return _write
