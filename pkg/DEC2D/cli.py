"""
Command line front end:

    dec2d solve --config example2 --method both --out results/
    dec2d convergence --config example2 --levels 4 --out results/
    dec2d meshgen "disk rings=2 radius=1 dirichlet=10" > disk.mesh
    dec2d sample --config example2 --line "-1,0,1,0,101" --out results/

Exit status: 0 on success, 1 for usage errors, 2 for bad input data,
3 when a solve fails or does not converge.
"""
import argparse
import sys

from loguru import logger

from .errors import (DEC2DError, GeometryError, MeshParseError,
    MeshValidationError, NumericalBreakdownError, ScenarioError,
    SingularSystemError)
from .run_scenarios import cmd_convergence, cmd_meshgen, cmd_sample, cmd_solve
from .scenarios import load_scenario
from .utilities import configure_logging


EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True,
        help='Scenario INI file or preset name (example1, example2, example3)')
    common.add_argument('--method', choices=['dec', 'feml', 'both'],
        help='Overrides [solver] method')
    common.add_argument('--tol', type=float,
        help='Overrides [solver] tol')
    common.add_argument('--out', default='.',
        help='Output directory (default: current directory)')
    common.add_argument('--line', action='append', metavar='x0,y0,x1,y1,n',
        help='Sample line, may be repeated; replaces [output] lines')

    parser = argparse.ArgumentParser(prog='dec2d',
        description='Local DEC and FEML solvers for the 2D anisotropic, '
            'heterogeneous Poisson equation.')
    commands = parser.add_subparsers(dest='command', required=True)
    commands.add_parser('solve', parents=[common],
        help='Solve a scenario and write report, VTK and line samples')
    convergence = commands.add_parser('convergence', parents=[common],
        help='Solve a scenario on successively refined meshes')
    convergence.add_argument('--levels', type=int, default=4,
        help='Number of refinement levels (default: 4)')
    meshgen = commands.add_parser('meshgen',
        help='Write a generated mesh in the mesh file format')
    meshgen.add_argument('spec',
        help='Generator spec, e.g. "disk rings=2 radius=1 dirichlet=10"')
    meshgen.add_argument('--out',
        help='Write <out>/<generator>.mesh instead of printing')
    commands.add_parser('sample', parents=[common],
        help='Solve a scenario and write only its line samples')
    return parser


def run(args) -> int:
    if args.command == 'meshgen':
        text = cmd_meshgen(args.spec, args.out)
        if args.out is None:
            sys.stdout.write(text)
        return EXIT_OK

    config = load_scenario(args.config).with_overrides(method=args.method,
        tol=args.tol, lines=args.line)
    if args.command == 'solve':
        table = cmd_solve(config, args.out)
    elif args.command == 'convergence':
        table = cmd_convergence(config, args.levels, args.out)
    else:
        table = cmd_sample(config, args.out)
    print(table.to_string(index=False))
    if 'converged' in table and not table['converged'].all():
        logger.error('At least one solve did not converge')
        return EXIT_SOLVER
    return EXIT_OK


def main(argv=None) -> int:
    """
    Entry point of the `dec2d` console script.

    @param argv: [`list`] Arguments, defaults to sys.argv[1:]
    @return: [`int`] The exit status
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    configure_logging()
    try:
        return run(args)
    except ScenarioError as e:
        logger.error(f'Usage error: {e}')
        return EXIT_USAGE
    except (MeshParseError, MeshValidationError, GeometryError,
            FileNotFoundError) as e:
        logger.error(f'Invalid input: {e}')
        return EXIT_DATA
    except (SingularSystemError, NumericalBreakdownError) as e:
        logger.error(f'Solver failure: {e}')
        return EXIT_SOLVER
    except DEC2DError as e:
        logger.error(str(e))
        return EXIT_DATA
