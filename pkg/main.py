"""
polytile
Translational tilings by rational polygonal sets

Discretizes polygonal sets into lattice tiles, decides tileability with a
torus/patch round engine, verifies certificates, analyzes the structure of
given tilings and renders everything as SVG.
"""

import functools
import json
import logging
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
from dotenv import load_dotenv

from src.config import config, describe_settings
from src.discretizer import DiscreteTile, discretize, lift_rational_tiling
from src.errors import (InvalidTilingDescription, InvariantViolation, PolytileError, UnsupportedDescription,
                        WindowTooSmall)
from src.geometry_core import (AffineNormalization, IntegerPolygonalSet, RationalPoint, normalize_to_integer,
                               parse_polygonal_set)
from src.render import RenderSpec, RenderTarget, SvgRenderer, Viewport
from src.session_store import SessionStore
from src.structure import (PlateFamily, PeriodicityReport, VertexShareClass, earthquake_decomposition,
                           merge_by_sliding, plates_refine_classes, sliding_direction, vertex_share_classes,
                           weak_periodic_report)
from src.tiling_engine import TilingEngine, TorusTiling, Verdict, tile_hash, verify_tiling
from src.tilings import TilingDesc, anchor_point, as_periodic, parse_tiling, scaled, tiling_to_dict, translated
from src.utils import LoggingUtils, RationalUtils, ReportUtils

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Input helpers


def _read_text(path: str) -> str:
    with open(path, 'r', encoding='utf-8') as f:
        return f.read()


def load_polygon(path: str) -> Tuple[IntegerPolygonalSet, AffineNormalization]:
    """Parse polygon JSON and normalize it to an integer set with the origin as a vertex"""
    omega, normalization = normalize_to_integer(parse_polygonal_set(_read_text(path)))
    logger.info(f"Loaded {path}: {len(omega.vertices())} vertices, area {omega.area()}")
    return omega, normalization


def load_tile(path: str) -> Tuple[DiscreteTile, Optional[IntegerPolygonalSet]]:
    """Read a .tile file, or discretize a polygon JSON file on the fly"""
    if path.lower().endswith(config.TILE_SUFFIX):
        return DiscreteTile.from_text(_read_text(path)), None
    omega, _ = load_polygon(path)
    return discretize(omega), omega


def load_tiling(path: str, normalization: AffineNormalization) -> TilingDesc:
    """Tiling of the input set, moved into the coordinates of its normalized integer form"""
    desc = parse_tiling(_read_text(path))
    if normalization.dilation != 1:
        desc = scaled(desc, Fraction(normalization.dilation))
    return desc


def parse_vector(text: str) -> Tuple[int, int]:
    try:
        x, y = (int(part) for part in text.split(','))
    except ValueError:
        raise click.BadParameter(f"expected 'x,y' integers, got {text!r}")
    if (x, y) == (0, 0):
        raise click.BadParameter("direction must be nonzero")
    return x, y


def parse_viewport(text: Optional[str]) -> Optional[Viewport]:
    if text is None:
        return None
    try:
        values = tuple(RationalUtils.parse_rational(part.strip()) for part in text.split(','))
    except PolytileError as e:
        raise click.BadParameter(str(e))
    if len(values) != 4:
        raise click.BadParameter("viewport is 'xmin,ymin,xmax,ymax'")
    return values


def _dump(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + '\n'


def _write_or_echo(text: str, out: Optional[str]) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    directory = os.path.dirname(out)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out, 'w', encoding='utf-8') as f:
        f.write(text)
    logger.info(f"Wrote {out}")


def _point_list(points) -> List[List[str]]:
    return [ReportUtils.point_to_json((p.x, p.y)) for p in points]


# ---------------------------------------------------------------------------
# Error handling


def handle_errors(fn: Callable[..., int]) -> Callable[..., int]:
    """Map library exceptions onto exit codes with a one-line diagnostic"""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs) -> int:
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except InvariantViolation as e:
            logger.error(f"Internal invariant violated: {e}")
            click.echo(f"internal error: {e}", err=True)
            return config.exit_code('internal')
        except PolytileError as e:
            logger.error(f"{type(e).__name__}: {e}")
            click.echo(f"error: {e}", err=True)
            return config.exit_code('data_format')
        except OSError as e:
            logger.error(f"I/O error: {e}")
            click.echo(f"error: {e}", err=True)
            return config.exit_code('data_format')
        except Exception as e:
            logger.exception(f"Unexpected failure: {e}")
            click.echo(f"internal error: {e}", err=True)
            return config.exit_code('internal')
    return wrapper


class PolytileGroup(click.Group):
    """Group whose exit status is the integer returned by the subcommand"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            result = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = result if isinstance(result, int) else 0
        except click.UsageError as e:
            e.show()
            code = config.exit_code('usage')
        except click.ClickException as e:
            e.show()
            code = config.exit_code('data_format')
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = config.exit_code('negative')
        if standalone_mode:
            sys.exit(code)
        return code


# ---------------------------------------------------------------------------
# Commands


@click.group(cls=PolytileGroup)
@click.option('--verbose', '-v', is_flag=True, help='Log at DEBUG level.')
def cli(verbose: bool) -> None:
    """Translational tilings by rational polygonal sets."""
    LoggingUtils.setup_logging('DEBUG' if verbose else config.get_log_level(), config.get_log_directory())
    logger.debug(f"Settings: {describe_settings()}")


@cli.command('discretize')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--out', 'out', type=click.Path(dir_okay=False), help='Tile file to write (default: stdout).')
@click.option('--svg', 'svg', type=click.Path(dir_okay=False), help='Write set, partition and tile panels.')
@handle_errors
def cmd_discretize(input_path: str, out: Optional[str], svg: Optional[str]) -> int:
    """Discretize a polygonal set into a lattice tile."""
    omega, _ = load_polygon(input_path)
    tile = discretize(omega)
    _write_or_echo(tile.to_text(), out)
    if svg:
        renderer = SvgRenderer()
        renderer.write(renderer.render_discretization(omega, tile), svg)
    logger.info(f"Discretized at scale {tile.scale}: {len(tile)} points, "
                f"{tile.partition.face_count} faces")
    return config.exit_code('ok')


@cli.command('decide')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--budget', type=click.IntRange(min=0), default=None, help='Maximum work units to spend.')
@click.option('--resume', 'resume', type=click.Path(exists=True, dir_okay=False), help='Resume state file.')
@click.option('--save-state', 'save_state', type=click.Path(dir_okay=False), default=None,
              help='Where to write resume state when undecided.')
@click.option('--emit-certificate', 'certificate_path', type=click.Path(dir_okay=False),
              help='Also write the certificate JSON to this file.')
@click.option('--threads', type=click.IntRange(min=1), default=None, help='Worker threads (default POLYTILE_THREADS).')
@handle_errors
def cmd_decide(input_path: str, budget: Optional[int], resume: Optional[str], save_state: Optional[str],
               certificate_path: Optional[str], threads: Optional[int]) -> int:
    """Decide whether a tile (or polygonal set) tiles the plane by translations."""
    tile, _ = load_tile(input_path)
    engine = TilingEngine(threads)
    state = None
    if resume:
        state = SessionStore(resume).load(expected_hash=tile_hash(tile.points))

    decision = engine.decide(tile.points, budget=budget, resume=state, scale=tile.scale)

    if decision.verdict is Verdict.TILEABLE:
        payload = _dump(decision.certificate.to_dict())
        click.echo(payload, nl=False)
        if certificate_path:
            _write_or_echo(payload, certificate_path)
        return config.exit_code('ok')
    if decision.verdict is Verdict.NOT_TILEABLE:
        click.echo(_dump({'radius': decision.refutation_radius}), nl=False)
        return config.exit_code('negative')

    path = SessionStore(save_state or resume or config.DEFAULT_STATE_FILE).save(decision.state)
    click.echo(_dump({'state': path, 'undecided': True}), nl=False)
    return config.exit_code('undecided')


@cli.command('verify')
@click.argument('tile_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('certificate_path', type=click.Path(exists=True, dir_okay=False))
@handle_errors
def cmd_verify(tile_path: str, certificate_path: str) -> int:
    """Check a certificate against a tile without searching."""
    tile, _ = load_tile(tile_path)
    try:
        document = json.loads(_read_text(certificate_path))
    except json.JSONDecodeError as e:
        raise InvalidTilingDescription(f"Certificate is not JSON: {e}")
    if isinstance(document, dict) and 'lattice' in document:
        certificate = TorusTiling.from_dict(document)
        if certificate.scale != tile.scale:
            click.echo(f"rejected: certificate scale {certificate.scale} differs from tile scale {tile.scale}",
                       err=True)
            return config.exit_code('negative')
        accepted = verify_tiling(tile.points, certificate)
    else:
        accepted = verify_tiling(tile.points, parse_tiling(json.dumps(document)))
    click.echo('accepted' if accepted else 'rejected')
    return config.exit_code('ok') if accepted else config.exit_code('negative')


@dataclass(frozen=True)
class InputFrame:
    """Undoes the working-coordinate map w = factor * (dilation * t - anchor)"""
    factor: int = 1
    dilation: int = 1
    anchor: RationalPoint = RationalPoint(0, 0)

    @property
    def unit(self) -> Fraction:
        return Fraction(1, self.factor * self.dilation)

    def length(self, value: Fraction) -> Fraction:
        return value * self.unit

    def vector(self, v: RationalPoint) -> RationalPoint:
        return v.scaled(self.unit)

    def point(self, p: RationalPoint) -> RationalPoint:
        return p.scaled(self.unit) + self.anchor.scaled(Fraction(1, self.dilation))

    def tiling(self, desc: TilingDesc) -> TilingDesc:
        return scaled(translated(desc, self.anchor.scaled(self.factor)), self.unit)


class StructureAnalyzer:
    """
    Builds the analyze report for a verified tiling. The analysis runs in
    working coordinates; positions, periods and offsets are reported in the
    coordinates of the input files.
    """

    def __init__(self, omega: IntegerPolygonalSet, tiling: TilingDesc, frame: Optional[InputFrame] = None):
        self.logger = logging.getLogger(__name__)
        self.omega = omega
        self.tiling = tiling
        self.frame = frame or InputFrame()
        self.classes: Optional[List[VertexShareClass]] = None
        self.discrete: Optional[DiscreteTile] = None
        self.plates: Optional[Tuple[PlateFamily, ...]] = None

    def _positions(self, points) -> List[List[str]]:
        return _point_list(self.frame.point(p) for p in points)

    def _vectors(self, vectors) -> List[List[str]]:
        return _point_list(self.frame.vector(v) for v in vectors)

    def class_report(self) -> Dict[str, Any]:
        try:
            self.classes = vertex_share_classes(self.omega, self.tiling)
        except WindowTooSmall as e:
            self.logger.info(f"Skipping vertex-sharing classes: {e}")
            return {'classes': None, 'sliding_direction': None, 'merge': None}

        report: Dict[str, Any] = {'classes': [
            {'count': c.count, 'periods': self._vectors(c.period_basis), 'positions': self._positions(c.positions)}
            for c in self.classes]}
        try:
            direction = sliding_direction(self.omega, self.classes)
            merged = merge_by_sliding(self.omega, self.tiling)
            report['sliding_direction'] = list(direction) if direction else None
            report['merge'] = {
                'offsets': [{'copy': o.copy, 'family': o.family,
                             'offset': RationalUtils.format_rational(self.frame.length(o.offset))}
                            for o in merged.offsets],
                'tiling': tiling_to_dict(self.frame.tiling(merged.tiling)),
            }
        except UnsupportedDescription as e:
            self.logger.warning(f"Cannot slide classes: {e}")
            report['sliding_direction'] = None
            report['merge'] = {'unsupported': str(e)}
        return report

    def periodicity_report(self) -> Dict[str, Any]:
        report: PeriodicityReport = weak_periodic_report(self.tiling)
        return {
            'classification': report.classification.value,
            'periods': self._vectors(report.periods),
            'pieces': [{'period': _point_list([self.frame.vector(p.period)])[0],
                        'positions': self._positions(p.component.base)} for p in report.pieces],
        }

    def earthquake_report(self, direction: Tuple[int, int]) -> Dict[str, Any]:
        """Plates of the discrete tile under the scaled tiling, sliding by scale * direction"""
        self.discrete = discretize(self.omega)
        n = self.discrete.scale
        step = (direction[0] * n, direction[1] * n)
        try:
            discrete_tiling = as_periodic(scaled(self.tiling, Fraction(n)))
        except WindowTooSmall as e:
            self.logger.warning(f"Earthquake needs a periodic tiling: {e}")
            return {'direction': list(direction), 'unsupported': str(e)}
        self.plates = earthquake_decomposition(self.discrete.points, discrete_tiling, step)
        violations = plates_refine_classes(self.plates, self.classes, n) if self.classes else []
        return {
            'direction': list(direction),
            'plates': [{'period_subgroup': [list(h) for h in p.period_subgroup],
                        'plate_count': p.plate_count,
                        'representative': [list(q) for q in p.representative]} for p in self.plates],
            'refines_classes': not violations if self.classes else None,
            'scale': n,
            'step': list(step),
            'violations': violations,
        }


@cli.command('analyze')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.argument('tiling_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--earthquake', 'earthquake', default=None, help="Plate direction 'vx,vy' in integer tile coordinates.")
@click.option('--svg', 'svg', type=click.Path(dir_okay=False), help='Write the tiling (plates coloured) as SVG.')
@handle_errors
def cmd_analyze(input_path: str, tiling_path: str, earthquake: Optional[str], svg: Optional[str]) -> int:
    """Verify a tiling and report classes, sliding, periodicity and plates."""
    direction = parse_vector(earthquake) if earthquake else None
    omega, normalization = load_polygon(input_path)
    tiling = load_tiling(tiling_path, normalization)

    verdict, factor = lift_rational_tiling(omega, tiling)
    if not verdict.is_tiling:
        click.echo(f"not a tiling: {verdict.describe()}", err=True)
        return config.exit_code('negative')

    anchor = anchor_point(tiling)
    working_tiling = scaled(translated(tiling, -anchor), Fraction(factor))
    working_omega = omega if factor == 1 else IntegerPolygonalSet(omega.base.dilated(factor))
    frame = InputFrame(factor, normalization.dilation, anchor)
    analyzer = StructureAnalyzer(working_omega, working_tiling, frame)

    report: Dict[str, Any] = {'tiling': {'scale': factor, 'verified': True}}
    report.update(analyzer.class_report())
    report['periodicity'] = analyzer.periodicity_report()
    report['earthquake'] = analyzer.earthquake_report(direction) if direction else None
    click.echo(_dump(report), nl=False)

    if svg:
        renderer = SvgRenderer()
        if analyzer.plates is not None:
            document = renderer.render_plates(working_omega.base, working_tiling, analyzer.plates,
                                              analyzer.discrete.scale)
        else:
            document = renderer.render_tiling(working_omega.base, working_tiling, classes=analyzer.classes)
        renderer.write(document, svg)
    return config.exit_code('ok')


@cli.command('render')
@click.argument('input_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--target', type=click.Choice([t.value for t in RenderTarget]), default=RenderTarget.POLYGON.value)
@click.option('--tiling', 'tiling_path', type=click.Path(exists=True, dir_okay=False),
              help='Tiling description for the tiling and plates targets.')
@click.option('--earthquake', 'earthquake', default=None, help="Plate direction 'vx,vy' for the plates target.")
@click.option('--viewport', default=None, help="Visible region 'xmin,ymin,xmax,ymax'.")
@click.option('--cell-pixels', 'cell_pixels', type=click.IntRange(min=1), default=None)
@click.option('--out', 'out', type=click.Path(dir_okay=False), help='SVG file (default: stdout).')
@handle_errors
def cmd_render(input_path: str, target: str, tiling_path: Optional[str], earthquake: Optional[str],
               viewport: Optional[str], cell_pixels: Optional[int], out: Optional[str]) -> int:
    """Render a set, its partition, its tile, a tiling or earthquake plates as SVG."""
    spec = RenderSpec(RenderTarget(target), parse_viewport(viewport), cell_pixels or config.get_cell_pixels())
    if spec.target in (RenderTarget.TILING, RenderTarget.PLATES) and not tiling_path:
        raise click.UsageError(f"--target {target} needs --tiling")
    if spec.target is RenderTarget.PLATES and not earthquake:
        raise click.UsageError("--target plates needs --earthquake")

    if input_path.lower().endswith(config.TILE_SUFFIX):
        tile, omega, normalization = DiscreteTile.from_text(_read_text(input_path)), None, None
    else:
        omega, normalization = load_polygon(input_path)
        tile = discretize(omega)
    if omega is None and spec.target is not RenderTarget.TILE:
        raise click.UsageError(f"--target {target} needs a polygon JSON input")

    tiling = None
    classes = None
    plates = None
    if tiling_path and omega is not None:
        desc = load_tiling(tiling_path, normalization)
        verdict, factor = lift_rational_tiling(omega, desc)
        if not verdict.is_tiling:
            click.echo(f"not a tiling: {verdict.describe()}", err=True)
            return config.exit_code('negative')
        tiling = scaled(translated(desc, -anchor_point(desc)), Fraction(factor))
        if factor != 1:
            omega = IntegerPolygonalSet(omega.base.dilated(factor))
            tile = discretize(omega)
        analyzer = StructureAnalyzer(omega, tiling)
        analyzer.class_report()
        classes = analyzer.classes
        if spec.target is RenderTarget.PLATES:
            analyzer.earthquake_report(parse_vector(earthquake))
            plates = analyzer.plates

    renderer = SvgRenderer(spec.cell_pixels)
    document = renderer.render(spec, omega=omega, tile=tile, tiling=tiling, classes=classes,
                               plates=plates, scale=tile.scale)
    if out:
        renderer.write(document, out)
    else:
        click.echo(document, nl=False)
    return config.exit_code('ok')


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return the exit status instead of exiting"""
    return cli.main(args=argv, prog_name='polytile', standalone_mode=False)


if __name__ == "__main__":
    sys.exit(main())
