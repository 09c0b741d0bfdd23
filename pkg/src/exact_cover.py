"""
Exact cover search with primary and secondary columns
"""

import logging
from collections import defaultdict
from typing import Dict, Generic, Hashable, Iterable, List, Mapping, Optional, Set, Tuple, TypeVar

logger = logging.getLogger(__name__)

Row = TypeVar('Row', bound=Hashable)
Column = TypeVar('Column', bound=Hashable)


class ExactCoverSolver(Generic[Row, Column]):
    """
    Algorithm X over a dict-of-sets matrix

    Every primary column must be covered exactly once; secondary columns at
    most once. Columns are chosen by fewest remaining rows, ties broken by
    column order, and rows are tried in sorted order, so the first solution
    is deterministic.
    """

    def __init__(self, rows: Mapping[Row, Iterable[Column]], primary: Iterable[Column],
                 secondary: Iterable[Column] = ()):
        """
        Args:
            rows: Row key to the columns it occupies
            primary: Columns that must be covered
            secondary: Columns that may be covered at most once
        """
        self.rows: Dict[Row, Tuple[Column, ...]] = {r: tuple(sorted(set(cols))) for r, cols in rows.items()}
        self.primary: Set[Column] = set(primary)
        self.columns: Dict[Column, Set[Row]] = defaultdict(set)
        for column in self.primary:
            self.columns[column]
        for column in secondary:
            self.columns[column]
        for row, cols in self.rows.items():
            for column in cols:
                self.columns[column].add(row)
        self.remaining_primary: Set[Column] = set(self.primary)
        self.nodes = 0

    def _select(self, row: Row) -> List[Set[Row]]:
        removed = []
        for column in self.rows[row]:
            for other in self.columns[column]:
                for other_column in self.rows[other]:
                    if other_column != column:
                        self.columns[other_column].discard(other)
            removed.append(self.columns.pop(column))
            self.remaining_primary.discard(column)
        return removed

    def _deselect(self, row: Row, removed: List[Set[Row]]) -> None:
        for column in reversed(self.rows[row]):
            self.columns[column] = removed.pop()
            if column in self.primary:
                self.remaining_primary.add(column)
            for other in self.columns[column]:
                for other_column in self.rows[other]:
                    if other_column != column:
                        self.columns[other_column].add(other)

    def _search(self, partial: List[Row]) -> Optional[List[Row]]:
        if not self.remaining_primary:
            return list(partial)
        column = min(self.remaining_primary, key=lambda c: (len(self.columns[c]), c))
        for row in sorted(self.columns[column]):
            self.nodes += 1
            removed = self._select(row)
            partial.append(row)
            result = self._search(partial)
            if result is not None:
                return result
            partial.pop()
            self._deselect(row, removed)
        return None

    def solve(self) -> Optional[List[Row]]:
        """First solution in search order, or None"""
        solution = self._search([])
        logger.debug(f"Exact cover search visited {self.nodes} nodes; "
                     f"{'found' if solution is not None else 'no'} solution")
        return solution


class BitmaskCoverSolver(Generic[Row]):
    """
    Exact cover of the columns 0..width-1 with rows stored as integer bitmasks

    Always branches on the lowest uncovered column and tries its rows in sorted
    order. Suited to dense rows, where Algorithm X spends most of its time
    unlinking columns.
    """

    def __init__(self, rows: Mapping[Row, Iterable[int]], width: int):
        self.full = (1 << width) - 1
        self.masks: Dict[Row, int] = {}
        self.by_column: List[List[Row]] = [[] for _ in range(width)]
        for row in sorted(rows):
            mask = 0
            for column in rows[row]:
                bit = 1 << column
                if mask & bit:
                    raise ValueError(f"Row {row!r} lists column {column} twice")
                mask |= bit
                self.by_column[column].append(row)
            self.masks[row] = mask
        self.nodes = 0

    def _search(self, covered: int, partial: List[Row]) -> Optional[List[Row]]:
        if covered == self.full:
            return list(partial)
        column = (~covered & (covered + 1)).bit_length() - 1
        for row in self.by_column[column]:
            mask = self.masks[row]
            if covered & mask:
                continue
            self.nodes += 1
            partial.append(row)
            result = self._search(covered | mask, partial)
            if result is not None:
                return result
            partial.pop()
        return None

    def solve(self, start: Iterable[Row] = ()) -> Optional[List[Row]]:
        """First solution containing every row of `start`, or None"""
        covered = 0
        partial: List[Row] = []
        for row in start:
            if covered & self.masks[row]:
                return None
            covered |= self.masks[row]
            partial.append(row)
        solution = self._search(covered, partial)
        logger.debug(f"Bitmask cover search visited {self.nodes} nodes; "
                     f"{'found' if solution is not None else 'no'} solution")
        return solution
