"""
Utility functions for the polytile tiling toolkit
"""

import hashlib
import logging
import math
import os
import re
from datetime import datetime
from fractions import Fraction
from functools import reduce
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from tabulate import tabulate

from src.errors import IrrationalVertexError, PolygonSyntaxError

_INTEGER_RE = re.compile(r'^[+-]?\d+$')
_FRACTION_RE = re.compile(r'^[+-]?\d+\s*/\s*\d+$')
_DECIMAL_RE = re.compile(r'^[+-]?\d*\.\d+$|^[+-]?\d+\.\d*$')
_SYMBOLIC_RE = re.compile(r'[A-Za-z]')


class RationalUtils:
    """Utility functions for exact rational arithmetic"""

    @staticmethod
    def parse_rational(value: Any) -> Fraction:
        """
        Parse a coordinate into an exact rational

        Args:
            value: JSON integer, or a string such as "3", "-1/2" or "0.25"

        Returns:
            Exact Fraction value

        Raises:
            IrrationalVertexError: for floats, nan, inf, exponent or symbolic forms
            PolygonSyntaxError: for anything else that is not a rational literal
        """
        if isinstance(value, bool):
            raise PolygonSyntaxError(f"Boolean is not a coordinate: {value!r}")
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, float):
            raise IrrationalVertexError(
                f"Floating-point coordinate {value!r} is not exact; quote it as a rational string")
        if not isinstance(value, str):
            raise PolygonSyntaxError(f"Coordinate must be a string or integer, got {type(value).__name__}")

        text = value.strip()
        if _INTEGER_RE.match(text):
            return Fraction(int(text))
        if _FRACTION_RE.match(text):
            numerator, denominator = (part.strip() for part in text.split('/'))
            if int(denominator) == 0:
                raise PolygonSyntaxError(f"Zero denominator in coordinate {value!r}")
            return Fraction(int(numerator), int(denominator))
        if _DECIMAL_RE.match(text):
            return Fraction(text)
        if _SYMBOLIC_RE.search(text):
            raise IrrationalVertexError(f"Coordinate {value!r} is not a rational literal")
        raise PolygonSyntaxError(f"Malformed coordinate {value!r}")

    @staticmethod
    def format_rational(value: Fraction) -> str:
        """Format as "p" or "p/q" """
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"

    @staticmethod
    def lcm_of_denominators(values: Iterable[Fraction]) -> int:
        return reduce(math.lcm, (Fraction(v).denominator for v in values), 1)

    @staticmethod
    def rational_gcd(values: Iterable[Fraction]) -> Fraction:
        """Largest positive rational g with every value an integer multiple of g"""
        values = [Fraction(v) for v in values]
        scale = RationalUtils.lcm_of_denominators(values)
        g = reduce(math.gcd, (abs(int(v * scale)) for v in values), 0)
        return Fraction(g, scale)

    @staticmethod
    def floor_mod(value: Fraction, modulus: Fraction) -> Fraction:
        """value reduced into [0, modulus)"""
        return value - math.floor(value / modulus) * modulus

    @staticmethod
    def centered_mod(value: Fraction, modulus: Fraction) -> Fraction:
        """value reduced into [-modulus/2, modulus/2)"""
        half = modulus / 2
        return RationalUtils.floor_mod(value + half, modulus) - half


class IntegerUtils:
    """Utility functions for integer number theory"""

    @staticmethod
    def extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
        """Return (g, x, y) with a*x + b*y == g == gcd(a, b) >= 0"""
        old_r, r = a, b
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r != 0:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        return old_r, old_s, old_t

    @staticmethod
    def divisors(n: int) -> List[int]:
        """Sorted positive divisors of n"""
        small, large = [], []
        for d in range(1, math.isqrt(n) + 1):
            if n % d == 0:
                small.append(d)
                if d != n // d:
                    large.append(n // d)
        return small + large[::-1]

    @staticmethod
    def divisor_sigma(n: int) -> int:
        return sum(IntegerUtils.divisors(n))

    @staticmethod
    def primitive(vector: Sequence[int]) -> Tuple[int, int]:
        """Primitive integer vector with first nonzero coordinate positive"""
        x, y = int(vector[0]), int(vector[1])
        g = math.gcd(x, y)
        if g == 0:
            raise ValueError("zero vector has no primitive direction")
        x, y = x // g, y // g
        if x < 0 or (x == 0 and y < 0):
            x, y = -x, -y
        return x, y


class HashUtils:
    """Stable digests used to bind resume state to a tile"""

    @staticmethod
    def points_digest(points: Iterable[Tuple[int, int]]) -> str:
        text = '\n'.join(f"{x} {y}" for x, y in sorted(points))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


class ReportUtils:
    """Utility functions for report generation"""

    @staticmethod
    def point_to_json(point: Sequence[Any]) -> List[str]:
        return [RationalUtils.format_rational(Fraction(c)) for c in point]

    @staticmethod
    def create_summary_table(stats: Dict[str, Any], title: Optional[str] = None) -> str:
        """
        Render search or analysis statistics as a plain-text table

        Args:
            stats: Mapping of statistic name to value
            title: Optional heading line

        Returns:
            Table text for logging
        """
        rows = [[key.replace('_', ' '), value] for key, value in stats.items()]
        table = tabulate(rows, headers=['statistic', 'value'], tablefmt='simple')
        return f"{title}\n{table}" if title else table


class LoggingUtils:
    """Utility functions for logging"""

    @staticmethod
    def setup_logging(level: str = 'INFO', log_dir: Optional[str] = None) -> None:
        """
        Configure root logging: stderr always, plus a timestamped file when log_dir is set

        Args:
            level: Logging level name
            log_dir: Directory for log files, or None
        """
        handlers: List[logging.Handler] = [logging.StreamHandler()]
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
            handlers.append(logging.FileHandler(
                os.path.join(log_dir, f"polytile_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log")))

        logging.basicConfig(
            level=getattr(logging, level.upper(), logging.INFO),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=handlers,
            force=True,
        )
