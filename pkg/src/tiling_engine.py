"""
Tiling decision engine for discrete tiles

Periodic tilings are found as exact covers of a torus Z^2 / L; non-tileability
is certified by a square patch around the origin that cannot be covered.
The two searches interleave round by round, so the engine halts on every
tile for which either certificate exists.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.config import config
from src.errors import InvalidTilingDescription, SessionMismatch
from src.exact_cover import BitmaskCoverSolver, ExactCoverSolver
from src.lattices import Lattice, lattices_of_index
from src.tilings import PeriodicTiling, TilingDesc, is_integral, verification_window
from src.utils import HashUtils, IntegerUtils, ReportUtils

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


@dataclass(frozen=True)
class TorusTiling:
    """Certificate: the tile translated by `translates` tiles Z^2 / lattice"""
    lattice: Lattice
    translates: Tuple[Cell, ...]
    scale: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            'lattice': self.lattice.to_json(),
            'translates': [list(t) for t in self.translates],
            'scale': self.scale,
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'TorusTiling':
        try:
            lattice = Lattice.from_json(document['lattice'])
            translates = tuple(sorted((int(t[0]), int(t[1])) for t in document['translates']))
            scale = int(document.get('scale', 1))
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise InvalidTilingDescription(f"Malformed certificate: {str(e)}")
        return cls(lattice, translates, scale)


class AttemptReason(Enum):
    TILED = 'tiled'
    INDIVISIBLE = 'indivisible'
    COLLAPSED = 'collapsed'
    NO_COVER = 'no_cover'


@dataclass(frozen=True)
class TorusAttempt:
    lattice: Lattice
    reason: AttemptReason
    tiling: Optional[TorusTiling] = None


@dataclass(frozen=True)
class PatchResult:
    radius: int
    tileable: bool
    translates: Optional[Tuple[Cell, ...]] = None
    nodes: int = 0


class Verdict(Enum):
    TILEABLE = 'tileable'
    NOT_TILEABLE = 'not_tileable'
    UNDECIDED = 'undecided'


@dataclass
class SearchStats:
    lattices_tried: int = 0
    lattices_pruned: int = 0
    lattices_collapsed: int = 0
    patches_tried: int = 0
    work_units: int = 0

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


@dataclass
class SearchState:
    """Resumable progress of a decide run"""
    tile_hash: str
    round: int = 1
    lattice_cursor: int = 0
    phase: str = 'lattices'
    stats: SearchStats = field(default_factory=SearchStats)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tile_hash': self.tile_hash,
            'round': self.round,
            'lattice_cursor': self.lattice_cursor,
            'phase': self.phase,
            'stats': self.stats.to_dict(),
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> 'SearchState':
        return cls(
            tile_hash=str(document['tile_hash']),
            round=int(document['round']),
            lattice_cursor=int(document['lattice_cursor']),
            phase=str(document['phase']),
            stats=SearchStats(**document.get('stats', {})),
        )


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    certificate: Optional[TorusTiling] = None
    refutation_radius: Optional[int] = None
    state: Optional[SearchState] = None
    stats: SearchStats = field(default_factory=SearchStats)


def _as_points(tile: Iterable[Cell]) -> List[Cell]:
    points = sorted(set((int(x), int(y)) for x, y in tile))
    if not points:
        raise ValueError("tile must be non-empty")
    return points


def tile_hash(tile: Iterable[Cell]) -> str:
    return HashUtils.points_digest(_as_points(tile))


# ---------------------------------------------------------------------------
# Torus search


def attempt_torus(tile: Iterable[Cell], lattice: Lattice, scale: int = 1) -> TorusAttempt:
    """
    Search for translates of the tile that exactly cover Z^2 / lattice

    Any torus tiling can be shifted to contain the zero translate, so the
    search starts from it.

    Returns:
        TorusAttempt whose reason is TILED, INDIVISIBLE, COLLAPSED or NO_COVER
    """
    points = _as_points(tile)
    if lattice.index % len(points):
        return TorusAttempt(lattice, AttemptReason.INDIVISIBLE)

    tile_array = np.array(points, dtype=np.int64)
    if len(set(lattice.cell_codes(tile_array).tolist())) < len(points):
        return TorusAttempt(lattice, AttemptReason.COLLAPSED)

    representatives = lattice.coset_representatives()
    shifts = np.array(representatives, dtype=np.int64)
    codes = lattice.cell_codes((shifts[:, None, :] + tile_array[None, :, :]).reshape(-1, 2))
    codes = codes.reshape(len(representatives), len(points)).tolist()
    rows = {t: row for t, row in zip(representatives, codes)}

    solver = BitmaskCoverSolver(rows, lattice.index)
    solution = solver.solve(start=[(0, 0)])
    if solution is None:
        return TorusAttempt(lattice, AttemptReason.NO_COVER)
    return TorusAttempt(lattice, AttemptReason.TILED, TorusTiling(lattice, tuple(sorted(solution)), scale))


def tile_torus(tile: Iterable[Cell], lattice: Lattice, scale: int = 1) -> Optional[TorusTiling]:
    """Torus tiling for the lattice, or None"""
    return attempt_torus(tile, lattice, scale).tiling


# ---------------------------------------------------------------------------
# Patch search


def patch_tileable(tile: Iterable[Cell], radius: int) -> PatchResult:
    """
    Whether translates of the tile can cover [-r, r]^2 exactly once without
    overlapping each other anywhere

    Args:
        tile: Finite subset of Z^2
        radius: Non-negative patch radius r
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    points = _as_points(tile)
    core = [(x, y) for y in range(-radius, radius + 1) for x in range(-radius, radius + 1)]
    candidates = {(cx - fx, cy - fy) for cx, cy in core for fx, fy in points}

    rows: Dict[Cell, Tuple[Cell, ...]] = {}
    secondary: Set[Cell] = set()
    core_set = set(core)
    for tx, ty in candidates:
        cells = tuple((fx + tx, fy + ty) for fx, fy in points)
        rows[(tx, ty)] = cells
        secondary.update(c for c in cells if c not in core_set)

    solver = ExactCoverSolver(rows, primary=core, secondary=secondary)
    solution = solver.solve()
    logger.debug(f"Patch search r={radius}: {len(rows)} rows, {solver.nodes} nodes, "
                 f"{'covered' if solution is not None else 'blocked'}")
    if solution is None:
        return PatchResult(radius, False, None, solver.nodes)
    return PatchResult(radius, True, tuple(sorted(solution)), solver.nodes)


# ---------------------------------------------------------------------------
# Verification


def _verify_on_torus(points: List[Cell], lattice: Lattice, translates: Sequence[Cell]) -> bool:
    counts: Dict[Cell, int] = {}
    for tx, ty in translates:
        for fx, fy in points:
            cell = lattice.reduce((fx + tx, fy + ty))
            counts[cell] = counts.get(cell, 0) + 1
            if counts[cell] > 1:
                logger.info(f"Tiling rejected: point {cell} covered more than once")
                return False
    if len(counts) < lattice.index:
        missing = next(c for c in lattice.coset_representatives() if c not in counts)
        logger.info(f"Tiling rejected: point {missing} is not covered")
        return False
    return True


def verify_tiling(tile: Iterable[Cell], tiling: Union[TorusTiling, TilingDesc]) -> bool:
    """
    Naive check that tile + T covers every point of Z^2 exactly once

    Torus certificates and periodic descriptions are checked by counting
    coverage of every coset of their lattice; sheared descriptions by counting
    over one verification window.
    """
    points = _as_points(tile)
    if isinstance(tiling, TorusTiling):
        return _verify_on_torus(points, tiling.lattice, tiling.translates)
    if not is_integral(tiling):
        raise InvalidTilingDescription("Discrete verification needs integer translates")
    if isinstance(tiling, PeriodicTiling):
        base = [(int(p.x), int(p.y)) for p in tiling.base]
        return _verify_on_torus(points, tiling.lattice.as_integer_lattice(), base)

    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    window = verification_window(tiling, (min(xs), min(ys), max(xs), max(ys)))
    cells = set(window.cells)
    counts: Dict[Cell, int] = {c: 0 for c in window.cells}
    for t in tiling.points_in_box(window.translate_box):
        tx, ty = int(t.x), int(t.y)
        for fx, fy in points:
            cell = (fx + tx, fy + ty)
            if cell in cells:
                counts[cell] += 1
    for cell in window.cells:
        if counts[cell] != 1:
            logger.info(f"Tiling rejected: point {cell} covered {counts[cell]} times")
            return False
    return True


# ---------------------------------------------------------------------------
# Decision rounds


class TilingEngine:
    """Round-robin search for a torus certificate or a refuting patch"""

    def __init__(self, threads: Optional[int] = None):
        self.logger = logging.getLogger(__name__)
        self.threads = threads if threads is not None else config.get_thread_count()
        if self.threads < 1:
            self.threads = 1

    def decide(self, tile: Iterable[Cell], budget: Optional[int] = None,
               resume: Optional[SearchState] = None, scale: int = 1) -> Decision:
        """
        Decide tileability of a discrete tile

        Round B tries every lattice of index in ((B-1)|F|, B|F|] in (index, a, b)
        order, then checks whether the radius-B patch can be covered.

        Args:
            tile: Finite subset of Z^2
            budget: Maximum work units this call may spend, or None for unlimited
            resume: State returned by an earlier Undecided result
            scale: Scale recorded in certificates

        Returns:
            Decision: Tileable with a certificate, NotTileable with the radius,
            or Undecided with resumable state
        """
        points = _as_points(tile)
        n = len(points)
        digest = tile_hash(points)
        if resume is not None:
            if resume.tile_hash != digest:
                raise SessionMismatch("Resume state was recorded for a different tile")
            state = SearchState.from_dict(resume.to_dict())
        else:
            state = SearchState(digest)
            state.stats.lattices_pruned = self._pruned_count(1, n)
        stats = state.stats
        remaining = budget

        self.logger.info(f"Deciding tile of {n} points from round {state.round} "
                         f"({state.phase}, cursor {state.lattice_cursor}), threads={self.threads}")

        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            while True:
                r = state.round
                if state.phase == 'lattices':
                    lattices = lattices_of_index(r * n)
                    while state.lattice_cursor < len(lattices):
                        if remaining is not None and remaining <= 0:
                            return self._undecided(state)
                        width = self.threads if remaining is None else min(self.threads, remaining)
                        chunk = lattices[state.lattice_cursor:state.lattice_cursor + width]
                        attempts = list(pool.map(lambda lat: attempt_torus(points, lat, scale), chunk))
                        for attempt in attempts:
                            state.lattice_cursor += 1
                            stats.work_units += 1
                            stats.lattices_tried += 1
                            if remaining is not None:
                                remaining -= 1
                            if attempt.reason is AttemptReason.COLLAPSED:
                                stats.lattices_collapsed += 1
                            self.logger.debug(f"Lattice {attempt.lattice}: {attempt.reason.value}")
                            if attempt.tiling is not None:
                                self.logger.info(f"Found torus tiling on {attempt.lattice} in round {r}")
                                self._log_stats(stats)
                                return Decision(Verdict.TILEABLE, certificate=attempt.tiling, stats=stats)
                    state.phase = 'patch'
                    state.lattice_cursor = 0

                if remaining is not None and remaining <= 0:
                    return self._undecided(state)
                result = patch_tileable(points, r)
                stats.work_units += 1
                stats.patches_tried += 1
                if remaining is not None:
                    remaining -= 1
                if not result.tileable:
                    self.logger.info(f"Patch of radius {r} cannot be covered: not tileable")
                    self._log_stats(stats)
                    return Decision(Verdict.NOT_TILEABLE, refutation_radius=r, stats=stats)
                state.round += 1
                state.phase = 'lattices'
                stats.lattices_pruned += self._pruned_count(state.round, n)

    @staticmethod
    def _pruned_count(round_number: int, size: int) -> int:
        """Lattices skipped in a round: every index strictly between two multiples of |F|"""
        return sum(IntegerUtils.divisor_sigma(i) for i in range((round_number - 1) * size + 1, round_number * size))

    def _undecided(self, state: SearchState) -> Decision:
        self.logger.warning(f"Budget exhausted in round {state.round} ({state.phase}, "
                            f"cursor {state.lattice_cursor})")
        self._log_stats(state.stats)
        return Decision(Verdict.UNDECIDED, state=state, stats=state.stats)

    def _log_stats(self, stats: SearchStats) -> None:
        self.logger.info(ReportUtils.create_summary_table(stats.to_dict(), 'Search statistics'))


def decide(tile: Iterable[Cell], budget: Optional[int] = None, resume: Optional[SearchState] = None,
           threads: Optional[int] = None, scale: int = 1) -> Decision:
    """Convenience wrapper around TilingEngine.decide"""
    return TilingEngine(threads).decide(tile, budget=budget, resume=resume, scale=scale)
