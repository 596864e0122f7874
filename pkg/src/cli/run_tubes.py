"""
Command-Line Front End for the Tube Toolkit
Solves, decisions, sweeps and exports; tables as CSV, records as JSON

Usage:
    python src/cli/run_tubes.py tube --kappa 1 --tau 0 --a 1 --H 2
    python src/cli/run_tubes.py h0 --kappa -1 --tau 1 --a-grid 0.6:50:100:log
    python src/cli/run_tubes.py embed --kappa 4 --tau 0.5 --m 5 --H 1
    python src/cli/run_tubes.py mesh --kappa 4 --tau 0.5 --a 0.25 --H 1 --out tube.obj

stdout carries only data; progress and diagnostics go to stderr.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

sys.path.insert(0, str(Path(__file__).parent.parent / 'geometry'))
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'config'))

from tolerances import TOLERANCES
from errors import (
    EXIT_OK,
    EXIT_USAGE,
    DomainError,
    ExportError,
    NotApplicable,
    NotClosing,
    NoTube,
    TubeToolkitError,
    exit_code_for,
)
from space_core import AmbientSpace, Pitch, berger_pitch, berger_turns
from profile_curve import ModuliPoint, QuadratureSettings, sample_profile
from moduli import RootFindSettings, boundary_H0, classify, moduli_region, tube_energy, tube_family
from analysis import embedded_berger, embedded_noncompact, foliation_decision, solve_x0
from isoperimetric import profile_sweep
from surface_export import sample_surface, write_curve_csv, write_obj

logger = logging.getLogger("run_tubes")

THREADS_ENV = "CMC_TUBES_THREADS"
H0_COLUMNS = ['a', 'H0', 'roots', 'status', 'error']

# argparse destinations a config file may set
CONFIG_KEYS = (
    'tol', 'quad_tol', 'json_output', 'verbose', 'threads', 'scan',
    'kappa', 'tau', 'a', 'm', 'H', 'J', 'a_grid', 'H_grid', 'm_list',
    'nodes', 'res_sigma', 'res_theta',
)


class UsageError(Exception):
    """Bad flags or configuration (exit 64)"""


# ===== Records =====

class RunConfig(BaseModel):
    """JSON configuration file; every field mirrors a command-line flag"""
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    schema_version: str = Field(..., alias='schema', description="Config schema tag")
    tol: Optional[float] = Field(default=None, gt=0, description="Root-find tolerance")
    quad_tol: Optional[float] = Field(default=None, gt=0, description="Quadrature abs/rel tolerance")
    json_output: Optional[bool] = Field(default=None, alias='json', description="Emit JSON instead of CSV/text")
    verbose: Optional[bool] = Field(default=None)
    threads: Optional[int] = Field(default=None, ge=1)
    scan: Optional[int] = Field(default=None, ge=TOLERANCES.MIN_SCAN_POINTS)
    kappa: Optional[float] = None
    tau: Optional[float] = None
    a: Optional[float] = None
    m: Optional[int] = Field(default=None, ge=1)
    H: Optional[float] = None
    J: Optional[float] = None
    a_grid: Optional[str] = None
    H_grid: Optional[str] = None
    m_list: Optional[str] = None
    nodes: Optional[int] = Field(default=None, ge=2)
    res_sigma: Optional[int] = Field(default=None, ge=2)
    res_theta: Optional[int] = Field(default=None, ge=2)

    @field_validator('schema_version')
    @classmethod
    def check_schema(cls, value: str) -> str:
        if value != TOLERANCES.CONFIG_SCHEMA:
            raise ValueError(f"schema must be {TOLERANCES.CONFIG_SCHEMA!r}, got {value!r}")
        return value


class ClassifyRecord(BaseModel):
    kappa: float
    tau: float
    a: float
    H: float
    J: float
    surface_class: str = Field(..., description="SphereType, Helicoid, NodoidI, Tube or NodoidII")
    region: Optional[str] = Field(default=None, description="plus, zero or minus")


class TubeRecord(BaseModel):
    kappa: float
    tau: float
    a: float
    H: float
    J_tube: float
    residual: float
    bracket: List[float]
    roots: List[float]
    multiplicity: int
    r_minus: float
    r_plus: float
    h_max: float


class EmbedRecord(BaseModel):
    kappa: float
    tau: float
    a: float
    H: float
    J_tube: float
    h_max: float
    embedded: bool
    compact: bool
    m: Optional[int] = None
    fiber_length: Optional[float] = None
    height_span: float
    admissible: Optional[bool] = None
    conjugate_admissible: Optional[bool] = None


class FoliationRecord(BaseModel):
    kappa: float
    tau: float
    a: float
    verdict: str
    foliates: bool
    threshold: float
    H_star: Optional[float] = None
    witnesses: Dict[str, float] = Field(default_factory=dict)


class MeshRecord(BaseModel):
    path: str
    vertices: int
    faces: int
    J_tube: float
    theta_span: float


def dump_record(record: BaseModel) -> str:
    """Sorted keys, indent 2, trailing newline"""
    return json.dumps(record.model_dump(mode='json'), sort_keys=True, indent=2) + "\n"


def dump_frame(frame: pd.DataFrame, as_json: bool) -> str:
    if as_json:
        records = json.loads(frame.to_json(orient='records', double_precision=15))
        return json.dumps(records, sort_keys=True, indent=2) + "\n"
    return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")


# ===== Argument parsing =====

def parse_grid(text: str) -> np.ndarray:
    """
    Parse 'lo:hi:n' (linear) or 'lo:hi:n:log' (geometric) into an array

    Raises:
        UsageError: malformed grid
    """
    parts = text.split(':')
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != 'log'):
        raise UsageError(f"grid {text!r} must be lo:hi:n or lo:hi:n:log")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"grid {text!r}: {exc}") from exc
    if n < 1:
        raise UsageError(f"grid {text!r}: n must be >= 1")
    if len(parts) == 4:
        if lo <= 0 or hi <= 0:
            raise UsageError(f"log grid {text!r} needs positive bounds")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def parse_int_list(text: str) -> List[int]:
    try:
        values = [int(item) for item in text.split(',') if item.strip()]
    except ValueError as exc:
        raise UsageError(f"list {text!r}: {exc}") from exc
    if not values or min(values) < 1:
        raise UsageError(f"list {text!r} needs integers >= 1")
    return values


def add_global_flags(parser: argparse.ArgumentParser, default) -> None:
    """Flags accepted both before and after the subcommand"""
    parser.add_argument('--tol', type=float, default=default, help='Root-find tolerance (default from TOLERANCES)')
    parser.add_argument('--quad-tol', dest='quad_tol', type=float, default=default,
                        help='Quadrature absolute and relative tolerance')
    parser.add_argument('--json', dest='json_output', action='store_true', default=default,
                        help='Emit JSON instead of CSV/text')
    parser.add_argument('--config', type=str, default=default, help='JSON config file (flags win)')
    parser.add_argument('--verbose', action='store_true', default=default, help='DEBUG logging')
    parser.add_argument('--threads', type=int, default=default,
                        help=f'Thread count for grid rows (overrides {THREADS_ENV})')
    parser.add_argument('--out', type=str, default=default, help='Output file (default: stdout)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='run_tubes',
        description='Screw-motion CMC tubes in E(kappa, tau)',
    )
    add_global_flags(parser, None)

    # SUPPRESS keeps a flag given before the subcommand when it is not repeated after it
    shared = argparse.ArgumentParser(add_help=False)
    add_global_flags(shared, argparse.SUPPRESS)

    sub = parser.add_subparsers(dest='command', required=True)

    def command(name: str, help_text: str, space: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, parents=[shared])
        if space:
            p.add_argument('--kappa', type=float, default=None)
            p.add_argument('--tau', type=float, default=None)
        return p

    p = command('classify', 'Classify a moduli point (H, J)')
    p.add_argument('--a', type=float, default=None)
    p.add_argument('--H', type=float, default=None)
    p.add_argument('--J', type=float, default=None)

    p = command('tube', 'Solve the tube energy J_tube(H)')
    p.add_argument('--a', type=float, default=None)
    p.add_argument('--H', type=float, default=None)
    p.add_argument('--scan', type=int, default=None, help='Scan points over the energy bracket')

    p = command('h0', 'Boundary points H_0(a) over an a-grid')
    p.add_argument('--a-grid', dest='a_grid', type=str, default=None, help='lo:hi:n[:log]')

    p = command('family', 'Tube energies over an H-grid')
    p.add_argument('--a', type=float, default=None)
    p.add_argument('--H-grid', dest='H_grid', type=str, default=None, help='lo:hi:n[:log]')
    p.add_argument('--scan', type=int, default=None)

    p = command('embed', 'Embeddedness verdict of a tube')
    pitch = p.add_mutually_exclusive_group()
    pitch.add_argument('--a', type=float, default=None)
    pitch.add_argument('--m', type=int, default=None, help='Closing pitch a_{1,m}')
    p.add_argument('--H', type=float, default=None)

    p = command('foliation', 'Foliation decision for 2 tau^2 - a tau kappa = 0')
    p.add_argument('--a', type=float, default=None)

    p = command('isoprofile', 'Volume and area of a_{1,m} tubes over an H-grid')
    p.add_argument('--m-list', dest='m_list', type=str, default=None, help='Comma-separated m values')
    p.add_argument('--H-grid', dest='H_grid', type=str, default=None, help='lo:hi:n[:log]')

    p = command('mesh', 'Export a tube as an OBJ mesh (requires --out)')
    p.add_argument('--a', type=float, default=None)
    p.add_argument('--H', type=float, default=None)
    p.add_argument('--res-sigma', dest='res_sigma', type=int, default=None)
    p.add_argument('--res-theta', dest='res_theta', type=int, default=None)

    command('x0', 'Print the foliation constant x0', space=False)

    p = command('profile', 'Profile curve samples as CSV')
    p.add_argument('--a', type=float, default=None)
    p.add_argument('--H', type=float, default=None)
    p.add_argument('--J', type=float, default=None)
    p.add_argument('--nodes', type=int, default=None)

    return parser


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as handle:
            payload = json.load(handle)
        return RunConfig.model_validate(payload)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise UsageError(f"config {path}: {exc}") from exc


def merge_config(args: argparse.Namespace, config: Optional[RunConfig]) -> argparse.Namespace:
    """Fill unset flags from the config file; flags win"""
    if config is None:
        return args
    for key in CONFIG_KEYS:
        if not hasattr(args, key) or getattr(args, key) is not None:
            continue
        value = getattr(config, key)
        if value is not None:
            setattr(args, key, value)
    return args


def resolve_threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        threads = args.threads
    else:
        raw = os.getenv(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV}={raw!r} is not an integer") from exc
    if threads < 1:
        raise UsageError(f"thread count must be >= 1, got {threads}")
    return threads


def require(args: argparse.Namespace, *names: str) -> None:
    missing = [name for name in names if getattr(args, name, None) is None]
    if missing:
        flags = ', '.join('--' + name.replace('_', '-') for name in missing)
        raise UsageError(f"{args.command}: missing {flags}")


# ===== Commands =====

class Context:
    """Settings shared by every command"""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.as_json = bool(args.json_output)
        self.threads = resolve_threads(args)
        try:
            self.quadrature = (QuadratureSettings(abs_tol=args.quad_tol, rel_tol=args.quad_tol)
                               if args.quad_tol is not None else QuadratureSettings())
            scan = getattr(args, 'scan', None)
            self.root_find = RootFindSettings(
                tol=args.tol if args.tol is not None else TOLERANCES.ROOT_TOL,
                scan_points=scan if scan is not None else TOLERANCES.SCAN_POINTS,
            )
        except DomainError as exc:
            raise UsageError(str(exc)) from exc

    def space(self) -> AmbientSpace:
        require(self.args, 'kappa', 'tau')
        return AmbientSpace(self.args.kappa, self.args.tau)


def cmd_classify(ctx: Context) -> str:
    args = ctx.args
    require(args, 'a', 'H', 'J')
    space, pitch, point = ctx.space(), Pitch(args.a), ModuliPoint(args.H, args.J)
    surface_class = classify(space, pitch, point, settings=ctx.quadrature)
    if not ctx.as_json:
        return surface_class.value + "\n"
    try:
        region = moduli_region(space, pitch, point).value
    except TubeToolkitError:
        region = None
    return dump_record(ClassifyRecord(kappa=space.kappa, tau=space.tau, a=pitch.a, H=point.H, J=point.J,
                                      surface_class=surface_class.value, region=region))


def _tube_record(tube) -> TubeRecord:
    return TubeRecord(
        kappa=tube.space.kappa, tau=tube.space.tau, a=tube.pitch.a, H=tube.H, J_tube=tube.J,
        residual=tube.residual, bracket=list(tube.bracket), roots=list(tube.roots),
        multiplicity=len(tube.roots), r_minus=tube.r_minus, r_plus=tube.r_plus, h_max=tube.h_max,
    )


def cmd_tube(ctx: Context) -> str:
    args = ctx.args
    require(args, 'a', 'H')
    tube = tube_energy(ctx.space(), Pitch(args.a), args.H, ctx.root_find, ctx.quadrature)
    logger.info("✓ J_tube=%.12g at H=%.6g (residual %.3g)", tube.J, tube.H, tube.residual)
    return dump_record(_tube_record(tube))


def _h0_row(space: AmbientSpace, a: float, ctx: Context) -> dict:
    row = {'a': float(a), 'H0': np.nan, 'roots': '', 'status': 'ok', 'error': ''}
    try:
        roots = boundary_H0(space, Pitch(a), ctx.root_find, ctx.quadrature)
        row.update(H0=roots[0], roots=';'.join(f"{root:.17g}" for root in roots))
    except NotApplicable as exc:
        row.update(H0=0.0, status='not_applicable', error=str(exc))
    except NoTube as exc:
        row.update(status='no_tube', error=str(exc))
    except TubeToolkitError as exc:
        logger.warning("H_0 at a=%.6g failed: %s", a, exc)
        row.update(status='error', error=str(exc))
    return row


def cmd_h0(ctx: Context) -> str:
    require(ctx.args, 'a_grid')
    space = ctx.space()
    grid = parse_grid(ctx.args.a_grid)
    rows = Parallel(n_jobs=ctx.threads, prefer="threads")(delayed(_h0_row)(space, a, ctx) for a in grid)
    frame = pd.DataFrame(rows, columns=H0_COLUMNS)
    logger.info("✓ H_0 over %d pitches in %s: %d ok", len(frame), space.label(), int((frame['status'] == 'ok').sum()))
    return dump_frame(frame, ctx.as_json)


def cmd_family(ctx: Context) -> str:
    args = ctx.args
    require(args, 'a', 'H_grid')
    family = tube_family(ctx.space(), Pitch(args.a), parse_grid(args.H_grid),
                         ctx.root_find, ctx.quadrature, n_jobs=ctx.threads)
    return dump_frame(family.to_frame(), ctx.as_json)


def cmd_embed(ctx: Context) -> str:
    args = ctx.args
    require(args, 'H')
    if args.a is None and args.m is None:
        raise UsageError("embed: one of --a, --m is required")
    space = ctx.space()

    m = args.m
    if m is not None:
        pitch = berger_pitch(space, 1, m).pitch
    else:
        pitch = Pitch(args.a)
        if space.is_berger:
            m = berger_turns(space, pitch, n=1)
            if m is None:
                raise NotClosing(f"a={pitch.a} closes no Berger fiber in {space.label()}; the tube is not compact")

    tube = tube_energy(space, pitch, args.H, ctx.root_find, ctx.quadrature)
    common = dict(kappa=space.kappa, tau=space.tau, a=pitch.a, H=tube.H, J_tube=tube.J, h_max=tube.h_max)
    if m is not None:
        verdict = embedded_berger(space, m, tube)
        record = EmbedRecord(**common, embedded=verdict.embedded, compact=True, m=m,
                             fiber_length=verdict.fiber_length, height_span=verdict.height_span,
                             admissible=verdict.admissible, conjugate_admissible=verdict.conjugate_admissible)
    else:
        record = EmbedRecord(**common, embedded=embedded_noncompact(space, pitch, tube), compact=False,
                             height_span=2.0 * tube.h_max)
    logger.info("✓ embedded=%s (a=%.6g, H=%.6g, %s)", record.embedded, pitch.a, tube.H, space.label())
    return dump_record(record)


def cmd_foliation(ctx: Context) -> str:
    require(ctx.args, 'a')
    space, pitch = ctx.space(), Pitch(ctx.args.a)
    verdict = foliation_decision(space, pitch)
    return dump_record(FoliationRecord(
        kappa=space.kappa, tau=space.tau, a=pitch.a, verdict=verdict.verdict.value,
        foliates=verdict.foliates, threshold=verdict.threshold, H_star=verdict.H_star,
        witnesses=verdict.witnesses,
    ))


def cmd_isoprofile(ctx: Context) -> str:
    args = ctx.args
    require(args, 'm_list', 'H_grid')
    specs = [(1, m) for m in parse_int_list(args.m_list)]
    frame = profile_sweep(ctx.space(), specs, parse_grid(args.H_grid),
                          ctx.root_find, ctx.quadrature, n_jobs=ctx.threads)
    return dump_frame(frame, ctx.as_json)


def cmd_mesh(ctx: Context) -> Optional[str]:
    args = ctx.args
    require(args, 'a', 'H', 'out')
    space, pitch = ctx.space(), Pitch(args.a)
    tube = tube_energy(space, pitch, args.H, ctx.root_find, ctx.quadrature)
    grid = sample_surface(space, pitch, tube,
                          args.res_sigma if args.res_sigma is not None else 128,
                          args.res_theta if args.res_theta is not None else 128)
    stats = write_obj(grid, args.out)
    if not ctx.as_json:
        return None
    return dump_record(MeshRecord(path=str(stats.path), vertices=stats.vertices, faces=stats.faces,
                                  J_tube=tube.J, theta_span=float(grid.theta[-1])))


def cmd_x0(ctx: Context) -> str:
    return f"{solve_x0():.12f}\n"


def cmd_profile(ctx: Context) -> str:
    args = ctx.args
    require(args, 'a', 'H', 'J')
    curve = sample_profile(ctx.space(), Pitch(args.a), ModuliPoint(args.H, args.J),
                           n_nodes=args.nodes, settings=ctx.quadrature)
    if ctx.as_json:
        return dump_frame(curve.to_frame(), True)
    return write_curve_csv(curve)


COMMANDS = {
    'classify': cmd_classify,
    'tube': cmd_tube,
    'h0': cmd_h0,
    'family': cmd_family,
    'embed': cmd_embed,
    'foliation': cmd_foliation,
    'isoprofile': cmd_isoprofile,
    'mesh': cmd_mesh,
    'x0': cmd_x0,
    'profile': cmd_profile,
}


def emit(text: Optional[str], out: Optional[str], command: str) -> None:
    if text is None:
        return
    if out is None or command == 'mesh':
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, 'w', newline='\n') as handle:
            handle.write(text)
    except OSError as exc:
        raise ExportError(f"cannot write {out}: {exc}") from exc
    logger.info("✓ wrote %s", out)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand

    Returns:
        0 success, 1 precondition error, 2 numerical failure, 64 usage error
    """
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        config = load_config(args.config) if args.config else None
        args = merge_config(args, config)
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.INFO,
            format='%(levelname)s %(name)s: %(message)s',
            stream=sys.stderr,
            force=True,
        )
        ctx = Context(args)
        emit(COMMANDS[args.command](ctx), args.out, args.command)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        logger.error("%s", exc)
        return EXIT_USAGE
    except TubeToolkitError as exc:
        code = exit_code_for(exc)
        logger.error("%s: %s", type(exc).__name__, exc)
        return code
    return EXIT_OK


def main():
    """Main entry point"""
    sys.exit(run())


if __name__ == "__main__":
    main()
