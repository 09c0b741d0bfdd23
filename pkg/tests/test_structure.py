import itertools
from fractions import Fraction

import pytest

from src.discretizer import discretize, face_occupancy, lift_tiling
from src.errors import WindowTooSmall
from src.geometry_core import RationalPoint
from src.lattices import RationalLattice, in_rank_one_span
from src.structure import (Periodicity, check_periodicity, earthquake_decomposition, merge_by_sliding,
                           plate_members_in_box, plates_refine_classes, sliding_direction, vertex_share_classes,
                           weak_periodic_report)
from src.tilings import Band, Component, ShearedTiling, scaled
from tests.conftest import make_set, periodic


def P(x, y):
    return RationalPoint.of(x, y)


@pytest.fixture
def vertical_domino():
    return make_set([(0, 0), (1, 0), (1, 2), (0, 2)])


@pytest.fixture
def domino_columns():
    """Vertical dominoes in columns, odd columns raised by 1/3"""
    return periodic([(0, 0), (1, '1/3')], [(2, 0), (0, 2)])


@pytest.fixture
def half_plane_shift():
    """Unit squares; the right half-plane slides up by 1/2"""
    left = Component((P(0, 0),), (P(1, 0), P(0, 1)), band=Band((1, 0), upper=Fraction(0)))
    right = Component((P(0, 0),), (P(1, 0), P(0, 1)), Fraction(1, 2), Band((1, 0), lower=Fraction(0)))
    return ShearedTiling((left, right), (0, 1))


@pytest.fixture
def staggered_dominoes():
    """Vertical dominoes in columns, odd columns raised by 1"""
    return periodic([(0, 0), (1, 1)], [(2, 0), (0, 2)])


@pytest.fixture
def doubled_columns(column_shift):
    """The column shift scaled to an integer tiling by 2x2 squares"""
    return make_set([(0, 0), (2, 0), (2, 2), (0, 2)]), scaled(column_shift, Fraction(2))


def discrete_plates(omega, tiling, direction):
    tile = discretize(omega)
    n = tile.scale
    step = (direction[0] * n, direction[1] * n)
    return tile, earthquake_decomposition(tile.points, scaled(tiling, Fraction(n)), step)


EARTHQUAKE_EXAMPLES = [
    ([(0, 0)], [(0, 0)], [(1, 0), (0, 1)]),
    ([(0, 0), (0, 1)], [(0, 0), (1, 1)], [(2, 0), (0, 2)]),
    ([(0, 0), (1, 0), (0, 1)], [(0, 0)], [(3, 0), (1, 1)]),
]


class TestVertexShareClasses:
    def test_square_lattice_is_one_class(self, unit_square, z2):
        classes = vertex_share_classes(unit_square, z2)
        assert len(classes) == 1
        assert classes[0].count == 1

    def test_shifted_columns_split(self, unit_square, column_shift):
        classes = vertex_share_classes(unit_square, column_shift)
        assert len(classes) == 2
        assert [c.positions for c in classes] == [(P(0, 0),), (P(1, '1/2'),)]
        assert all(c.count is None for c in classes)
        assert all(c.period_basis == (P(0, 1),) for c in classes)

    def test_tromino_staircase_is_one_class(self, l_tromino, tromino_staircase):
        classes = vertex_share_classes(l_tromino, tromino_staircase)
        assert len(classes) == 1
        assert classes[0].count == 1

    def test_banded_description(self, unit_square, half_plane_shift):
        with pytest.raises(WindowTooSmall):
            vertex_share_classes(unit_square, half_plane_shift)


class TestSliding:
    def test_single_class_has_no_direction(self, unit_square, z2):
        assert sliding_direction(unit_square, vertex_share_classes(unit_square, z2)) is None

    def test_columns_slide_vertically(self, unit_square, column_shift):
        classes = vertex_share_classes(unit_square, column_shift)
        assert sliding_direction(unit_square, classes) == (0, 1)

    def test_rows_slide_horizontally(self, unit_square):
        rows = periodic([(0, 0), ('1/2', 1)], [(1, 0), (0, 2)])
        assert sliding_direction(unit_square, vertex_share_classes(unit_square, rows)) == (1, 0)


class TestMerge:
    def test_columns_merge_to_integer_lattice(self, unit_square, column_shift):
        result = merge_by_sliding(unit_square, column_shift)
        assert result.direction == (0, 1)
        assert [o.offset for o in result.offsets] == [Fraction(0), Fraction(-1, 2)]
        assert result.tiling.contains(P(1, 0))
        assert check_periodicity(result.tiling, P(1, 0))
        assert lift_tiling(unit_square, result.tiling).is_tiling

    def test_single_class_is_unchanged(self, l_tromino, tromino_staircase):
        result = merge_by_sliding(l_tromino, tromino_staircase)
        assert result.direction is None
        assert result.tiling == tromino_staircase
        assert [o.offset for o in result.offsets] == [Fraction(0)]

    def test_domino_columns(self, vertical_domino, domino_columns):
        result = merge_by_sliding(vertical_domino, domino_columns)
        assert [o.offset for o in result.offsets] == [Fraction(0), Fraction(-1, 3)]
        assert all(b.is_integer() for b in result.tiling.base)
        assert result.tiling.lattice.is_integral()
        assert lift_tiling(vertical_domino, result.tiling).is_tiling


class TestEarthquakes:
    def test_square_columns(self, z2):
        (family,) = earthquake_decomposition([(0, 0)], z2, (0, 1))
        assert family.period_subgroup == ((0, 1),)
        assert family.plate_count is None
        assert plate_members_in_box(family, (0, 0, 0, 2)) == [(0, 0), (0, 1), (0, 2)]

    def test_staggered_dominoes(self):
        tiling = periodic([(0, 0), (1, 1)], [(2, 0), (0, 2)])
        families = earthquake_decomposition([(0, 0), (0, 1)], tiling, (0, 1))
        assert len(families) == 2
        assert all(f.period_subgroup == ((0, 2),) for f in families)
        assert [f.representative for f in families] == [((0, 0),), ((1, 1),)]

    def test_tromino_staircase_is_one_plate(self, tromino_staircase):
        (family,) = earthquake_decomposition([(0, 0), (1, 0), (0, 1)], tromino_staircase, (0, 1))
        subgroup = RationalLattice.from_generators([P(*h) for h in family.period_subgroup])
        assert subgroup == RationalLattice.from_generators([P(1, 1), P(-1, 2)])
        assert family.plate_count == 1

    def test_families_partition_the_quotient(self):
        tiling = periodic([(0, 0), (1, 1)], [(2, 0), (0, 2)])
        families = earthquake_decomposition([(0, 0), (0, 1)], tiling, (0, 1))
        nodes = [c for f in families for c in f.quotient_component]
        assert sorted(nodes) == sorted(p.as_int_tuple() for p in tiling.reduced_base())

    @pytest.mark.parametrize('tile, base, periods', EARTHQUAKE_EXAMPLES)
    def test_plate_union_is_invariant(self, tile, base, periods):
        span = 3 * max(abs(c) for p in periods for c in p)
        for family in earthquake_decomposition(tile, periodic(base, periods), (0, 1)):
            plate = plate_members_in_box(family, (-2 * span, -2 * span, 2 * span, 2 * span))
            union = {(x + tx, y + ty) for tx, ty in plate for x, y in tile}
            inner = [(x, y) for x, y in union if -span <= x <= span and -span <= y <= span]
            assert inner
            assert all((x, y + 1) in union and (x, y - 1) in union for x, y in inner)

    def test_zero_direction(self, z2):
        with pytest.raises(ValueError):
            earthquake_decomposition([(0, 0)], z2, (0, 0))

    @pytest.mark.parametrize('tile, base, periods, v, box', [
        ([(0, 0)], [(0, 0)], [(1, 0), (0, 1)], (0, 1), (0, 0, 0, 3)),
        ([(0, 0), (0, 1)], [(0, 0), (1, 1)], [(2, 0), (0, 2)], (0, 1), (0, 0, 1, 5)),
        ([(0, 0), (1, 0), (0, 1)], [(0, 0)], [(3, 0), (1, 1)], (0, 1), (-1, -1, 2, 2)),
    ])
    def test_no_smaller_closed_subset(self, tile, base, periods, v, box):
        def linked(t, u):
            moved = {(x + t[0] + s * v[0], y + t[1] + s * v[1]) for x, y in tile for s in (1, -1)}
            return any((x + u[0], y + u[1]) in moved for x, y in tile)

        for family in earthquake_decomposition(tile, periodic(base, periods), v):
            members = plate_members_in_box(family, box)
            assert 1 <= len(members) <= 12
            for size in range(1, len(members)):
                for subset in itertools.combinations(members, size):
                    rest = set(members) - set(subset)
                    assert any(linked(t, u) for t in subset for u in rest)


class TestRefinement:
    def test_vertical_plates_stay_in_their_column(self, doubled_columns):
        omega, tiling = doubled_columns
        tile, plates = discrete_plates(omega, tiling, (0, 1))
        assert plates_refine_classes(plates, vertex_share_classes(omega, tiling), tile.scale) == []

    def test_horizontal_plates_cross_columns(self, doubled_columns):
        omega, tiling = doubled_columns
        tile, plates = discrete_plates(omega, tiling, (1, 0))
        assert plates_refine_classes(plates, vertex_share_classes(omega, tiling), tile.scale)

    @pytest.mark.parametrize('shape, tiling', [
        ('unit_square', 'z2'),
        ('vertical_domino', 'staggered_dominoes'),
        ('l_tromino', 'tromino_staircase'),
    ])
    def test_every_corpus_tiling_is_refined(self, request, shape, tiling):
        omega, desc = request.getfixturevalue(shape), request.getfixturevalue(tiling)
        tile, plates = discrete_plates(omega, desc, (0, 1))
        assert plates_refine_classes(plates, vertex_share_classes(omega, desc), tile.scale) == []


class TestContinuousConsistency:
    def test_square_plates_are_columns(self, unit_square, z2):
        tile, plates = discrete_plates(unit_square, z2, (0, 1))
        (family,) = plates
        assert family.period_subgroup == ((0, tile.scale),)
        assert family.plate_count is None

    def test_column_plates_are_the_sliding_classes(self, doubled_columns):
        omega, tiling = doubled_columns
        tile, plates = discrete_plates(omega, tiling, (0, 1))
        n = tile.scale
        continuous = sorted((tuple(q.scaled(n).as_int_tuple() for q in c.positions),
                             tuple(h.scaled(n).as_int_tuple() for h in c.period_basis))
                            for c in vertex_share_classes(omega, tiling))
        assert sorted((p.representative, p.period_subgroup) for p in plates) == continuous

    @pytest.mark.parametrize('case', ['square', 'columns'])
    def test_plate_unions_slide_continuously(self, case, unit_square, z2, doubled_columns):
        omega, tiling = (unit_square, z2) if case == 'square' else doubled_columns
        tile, plates = discrete_plates(omega, tiling, (0, 1))
        n = tile.scale
        for family in plates:
            members = plate_members_in_box(family, (-4 * n, -6 * n, 4 * n, 6 * n))
            assert all(x % n == 0 and y % n == 0 for x, y in members)
            faces = face_occupancy(omega, tile.partition, [(x // n, y // n) for x, y in members])
            inner = [(cell, i) for cell, i in faces if -3 <= cell[1] <= 3]
            assert inner
            assert all(((cell[0], cell[1] + 1), i) in faces for cell, i in inner)


class TestPeriodicity:
    def test_integer_lattice(self, z2):
        assert check_periodicity(z2, P(1, 0))
        assert not check_periodicity(z2, P('1/2', 0))

    def test_shifted_columns(self, column_shift):
        assert not check_periodicity(column_shift, P(1, 0))
        assert check_periodicity(column_shift, P(2, 0))
        assert check_periodicity(column_shift, P(0, 1))

    def test_single_column(self):
        column = Component((P(0, 0),), (P(0, 1),))
        assert check_periodicity(column, P(0, 5))
        assert not check_periodicity(column, P(1, 0))

    def test_zero_period(self, z2):
        with pytest.raises(ValueError):
            check_periodicity(z2, P(0, 0))

    def test_banded_description(self, half_plane_shift):
        assert check_periodicity(half_plane_shift, P(0, 1))
        assert not check_periodicity(half_plane_shift, P(1, 0))

    @pytest.mark.parametrize('fixture, periods', [
        ('z2', [(1, 0), (0, 1)]),
        ('column_shift', [(2, 0), (0, 1)]),
        ('tromino_staircase', [(3, 0), (1, 1)]),
    ])
    def test_doubly_periodic_reports(self, request, fixture, periods):
        report = weak_periodic_report(request.getfixturevalue(fixture))
        assert report.classification is Periodicity.DOUBLY_PERIODIC
        assert list(report.periods) == [P(*p) for p in periods]

    def test_three_column_offsets_are_lattice_periodic(self):
        offsets = [0, '1/2', '1/4']
        sheared = ShearedTiling(tuple(
            Component((P(i, 0),), (P(3, 0), P(0, 1)), Fraction(offset)) for i, offset in enumerate(offsets)))
        report = weak_periodic_report(sheared)
        assert report.classification is Periodicity.DOUBLY_PERIODIC
        assert list(report.periods) == [P(3, 0), P(0, 1)]

    def test_half_planes_are_weakly_periodic(self, half_plane_shift):
        report = weak_periodic_report(half_plane_shift)
        assert report.classification is Periodicity.WEAKLY_PERIODIC
        assert report.periods == (P(0, 1),)
        assert len(report.pieces) == 2
        assert all(in_rank_one_span(piece.period, P(0, 1)) for piece in report.pieces)
