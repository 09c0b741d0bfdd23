"""
Full-rank sublattices of Z^2 in Hermite normal form, and rational lattices
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from src.geometry_core import RationalPoint
from src.utils import IntegerUtils, RationalUtils

logger = logging.getLogger(__name__)

IntVector = Tuple[int, int]


@dataclass(frozen=True)
class Lattice:
    """
    Sublattice of Z^2 with HNF [[a, b], [0, d]]: generated by the columns
    (a, 0) and (b, d), with a, d >= 1 and 0 <= b < a
    """
    a: int
    b: int
    d: int

    def __post_init__(self):
        if self.a < 1 or self.d < 1 or not 0 <= self.b < self.a:
            raise ValueError(f"Not a Hermite normal form: a={self.a}, b={self.b}, d={self.d}")

    @property
    def hnf(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return (self.a, self.b), (0, self.d)

    @property
    def index(self) -> int:
        return self.a * self.d

    @property
    def generators(self) -> Tuple[IntVector, IntVector]:
        return (self.a, 0), (self.b, self.d)

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        return self.index, self.a, self.b

    def contains(self, p: Sequence[int]) -> bool:
        x, y = int(p[0]), int(p[1])
        if y % self.d:
            return False
        return (x - self.b * (y // self.d)) % self.a == 0

    def reduce(self, p: Sequence[int]) -> IntVector:
        """Representative of p + L in the fundamental domain [0, a) x [0, d)"""
        q, y = divmod(int(p[1]), self.d)
        x = (int(p[0]) - self.b * q) % self.a
        return x, y

    def reduce_array(self, points: np.ndarray) -> np.ndarray:
        """Vectorized reduce for an (n, 2) integer array"""
        q, y = np.divmod(points[:, 1], self.d)
        x = np.mod(points[:, 0] - self.b * q, self.a)
        return np.stack([x, y], axis=1)

    def cell_codes(self, points: np.ndarray) -> np.ndarray:
        """Scanline index y * a + x of each point's representative"""
        reduced = self.reduce_array(points)
        return reduced[:, 1] * self.a + reduced[:, 0]

    def coset_representatives(self) -> List[IntVector]:
        """Fundamental-domain points in scanline order"""
        return [(x, y) for y in range(self.d) for x in range(self.a)]

    def scaled(self, factor: int) -> 'Lattice':
        return Lattice(self.a * factor, self.b * factor, self.d * factor)

    def is_sublattice_of(self, other: 'Lattice') -> bool:
        return all(other.contains(g) for g in self.generators)

    def to_json(self) -> List[List[int]]:
        return [[self.a, self.b], [0, self.d]]

    @classmethod
    def from_json(cls, matrix: Sequence[Sequence[int]]) -> 'Lattice':
        (a, b), (zero, d) = matrix
        if int(zero) != 0:
            raise ValueError("HNF matrix must be upper triangular")
        return cls(int(a), int(b), int(d))

    @classmethod
    def from_generators(cls, vectors: Iterable[Sequence[int]]) -> 'Lattice':
        """
        HNF of the lattice spanned by integer vectors

        Raises:
            ValueError: if the vectors do not span a rank-2 lattice
        """
        basis = integer_span_basis(vectors)
        if len(basis) != 2:
            raise ValueError("Generators do not span a full-rank lattice")
        (a, _), (b, d) = basis
        return cls(a, b, d)

    def __str__(self) -> str:
        return f"<({self.a},0),({self.b},{self.d})>"


def integer_span_basis(vectors: Iterable[Sequence[int]]) -> List[IntVector]:
    """
    Basis of the subgroup of Z^2 generated by the vectors

    Returns:
        [] for the zero group, one primitive-multiple vector for rank 1,
        or the two HNF columns for rank 2
    """
    vectors = [(int(v[0]), int(v[1])) for v in vectors if (int(v[0]), int(v[1])) != (0, 0)]
    if not vectors:
        return []
    # the HNF routine needs at least two columns to process both rows
    columns = vectors if len(vectors) >= 2 else vectors * 2
    matrix = Matrix([[v[0] for v in columns], [v[1] for v in columns]])
    h = hermite_normal_form(matrix)
    basis = [(int(h[0, j]), int(h[1, j])) for j in range(h.shape[1])]
    basis = [v for v in basis if v != (0, 0)]
    if len(basis) == 1:
        x, y = basis[0]
        if x < 0 or (x == 0 and y < 0):
            basis = [(-x, -y)]
    return basis


def rational_span_basis(vectors: Iterable[RationalPoint]) -> List[RationalPoint]:
    """Basis of the subgroup of Q^2 generated by finitely many rational vectors"""
    vectors = list(vectors)
    if not vectors:
        return []
    scale = RationalUtils.lcm_of_denominators(c for v in vectors for c in (v.x, v.y))
    basis = integer_span_basis((int(v.x * scale), int(v.y * scale)) for v in vectors)
    return [RationalPoint(Fraction(x, scale), Fraction(y, scale)) for x, y in basis]


def in_rank_one_span(p: RationalPoint, generator: RationalPoint) -> bool:
    """True when p is an integer multiple of generator"""
    if p.cross(generator) != 0:
        return False
    ratio = p.dot(generator) / generator.dot(generator)
    return ratio.denominator == 1


def enumerate_lattices(max_index: int, min_index: int = 1) -> Iterator[Lattice]:
    """
    Every sublattice of Z^2 with min_index <= index <= max_index, ordered by
    (index, a, b); exactly sigma(n) lattices for each index n
    """
    for n in range(max(1, min_index), max_index + 1):
        for a in IntegerUtils.divisors(n):
            d = n // a
            for b in range(a):
                yield Lattice(a, b, d)


def lattices_of_index(n: int) -> List[Lattice]:
    return list(enumerate_lattices(n, n))


@dataclass(frozen=True)
class RationalLattice:
    """The lattice scale * L for an integer HNF lattice L and positive rational scale"""
    lattice: Lattice
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, 'scale', Fraction(self.scale))
        if self.scale <= 0:
            raise ValueError("lattice scale must be positive")
        # canonical: the integer part is primitive, so equal lattices compare equal
        g = math.gcd(self.lattice.a, self.lattice.b, self.lattice.d)
        if g > 1:
            object.__setattr__(self, 'lattice', Lattice(self.lattice.a // g, self.lattice.b // g,
                                                        self.lattice.d // g))
            object.__setattr__(self, 'scale', self.scale * g)

    @property
    def generators(self) -> Tuple[RationalPoint, RationalPoint]:
        (ax, ay), (bx, by) = self.lattice.generators
        return (RationalPoint(ax * self.scale, ay * self.scale),
                RationalPoint(bx * self.scale, by * self.scale))

    @property
    def covolume(self) -> Fraction:
        return self.lattice.index * self.scale * self.scale

    def reduce(self, p: RationalPoint) -> RationalPoint:
        """Canonical representative of p modulo the lattice"""
        s = self.scale
        height = s * self.lattice.d
        q = math.floor(p.y / height)
        y = p.y - q * height
        x = RationalUtils.floor_mod(p.x - q * s * self.lattice.b, s * self.lattice.a)
        return RationalPoint(x, y)

    def contains(self, p: RationalPoint) -> bool:
        return self.reduce(p) == RationalPoint(0, 0)

    def coordinates(self, p: RationalPoint) -> Optional[Tuple[int, int]]:
        """Integer (i, j) with p = i*g1 + j*g2, or None when p is not a lattice vector"""
        s = self.scale
        j = p.y / (s * self.lattice.d)
        if j.denominator != 1:
            return None
        i = (p.x - j * s * self.lattice.b) / (s * self.lattice.a)
        if i.denominator != 1:
            return None
        return int(i), int(j)

    def is_integral(self) -> bool:
        return all(v.is_integer() for v in self.generators)

    def as_integer_lattice(self) -> Lattice:
        if not self.is_integral():
            raise ValueError(f"{self} is not a sublattice of Z^2")
        return Lattice(int(self.lattice.a * self.scale), int(self.lattice.b * self.scale),
                       int(self.lattice.d * self.scale))

    def scaled(self, factor: Fraction) -> 'RationalLattice':
        return RationalLattice(self.lattice, self.scale * factor)

    def intersection(self, other: 'RationalLattice') -> 'RationalLattice':
        """Common sublattice of two rational lattices"""
        if self == other:
            return self
        scale = RationalUtils.lcm_of_denominators(
            c for v in self.generators + other.generators for c in (v.x, v.y))
        first = RationalLattice(self.lattice, self.scale * scale).as_integer_lattice()
        second = RationalLattice(other.lattice, other.scale * scale).as_integer_lattice()
        m = math.lcm(first.index, second.index)
        vectors = [(m, 0), (0, m)]
        vectors.extend((x, y) for y in range(m) for x in range(m)
                       if first.contains((x, y)) and second.contains((x, y)))
        common = Lattice.from_generators(vectors)
        return RationalLattice(common, Fraction(1, scale))

    @classmethod
    def from_generators(cls, vectors: Iterable[RationalPoint]) -> 'RationalLattice':
        vectors = list(vectors)
        scale = RationalUtils.lcm_of_denominators(c for v in vectors for c in (v.x, v.y))
        lattice = Lattice.from_generators((int(v.x * scale), int(v.y * scale)) for v in vectors)
        return cls(lattice, Fraction(1, scale))

    @classmethod
    def integer(cls, lattice: Lattice) -> 'RationalLattice':
        return cls(lattice, Fraction(1))

    def __str__(self) -> str:
        g1, g2 = self.generators
        return f"<{g1},{g2}>"
