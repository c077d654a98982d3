"""Command-line surface: ``python app.py <subcommand> [options]``."""

import argparse
import json
import sys
from typing import List, Optional

from config.constants import EXIT_ERROR
from config.settings import load_settings
from ui.commands import CommandRunner
from utils.errors import TuringFlowError, UsageError
from utils.export import dumps
from utils.logger import configure_logging, get_enhanced_logger

logger = get_enhanced_logger(__name__)

SUBCOMMANDS = ('tm-run', 'tm-encode', 'shift-orbit', 'equiv', 'disk-map', 'suspend', 'return-map', 'gauge',
               'build', 'verify')


class CLIArgumentParser(argparse.ArgumentParser):
    """Parser whose errors surface as UsageError (exit 1) instead of SystemExit(2)."""

    def error(self, message):
        raise UsageError(message, {'usage': self.format_usage().strip()})


def _viscosity(text: str) -> float:
    try:
        nu = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid viscosity: '{text}'")
    if not nu >= 0:
        raise argparse.ArgumentTypeError(f"viscosity must be non-negative, got {text}")
    return nu


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--tol', type=float, default=None,
                        help='Tolerance override (integrator tolerance for disk/return maps)')
    common.add_argument('--samples', type=int, default=None, help='Sample count override')
    common.add_argument('--seeds', type=int, default=None, help='Number of section seed points')
    common.add_argument('--seed', type=int, default=None, help='Random seed')
    common.add_argument('--out', default=None, help='Output directory for reports and CSV dumps')
    common.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING or ERROR')
    common.add_argument('--cache-dir', default=None, help='Structure store directory')
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = CLIArgumentParser(prog='turingflow', description='Turing machines to Navier-Stokes flows.')
    sub = parser.add_subparsers(dest='cmd', parser_class=CLIArgumentParser)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add('tm-run', 'Run a machine on a tape')
    p.add_argument('machine')
    p.add_argument('tape', nargs='?')
    p.add_argument('--horizon', type=int, default=1000)

    p = add('tm-encode', 'Binary description of a machine')
    p.add_argument('machine')
    p.add_argument('tape', nargs='?')

    p = add('shift-orbit', 'Exact orbit of the generalized shift')
    p.add_argument('machine')
    p.add_argument('tape', nargs='?')
    p.add_argument('--horizon', type=int, default=1000)

    p = add('equiv', 'Compare machine halting with the orbit reaching the halting region')
    p.add_argument('machine')
    p.add_argument('tape', nargs='?')
    p.add_argument('--horizon', type=int, default=1000)
    p.add_argument('--window', '-m', type=int, default=8)

    for name, help_text in (('disk-map', 'Time-one map of a Hamiltonian isotopy'),
                            ('suspend', 'Suspension structure of an isotopy'),
                            ('return-map', 'Poincare return map of the suspension')):
        p = add(name, help_text)
        p.add_argument('isotopy', nargs='?')

    p = add('gauge', 'Gauge normalization of a manufactured 1-form')
    p.add_argument('descriptor', nargs='?')

    p = add('build', 'Glue an isotopy into the flat torus and verify the result')
    p.add_argument('descriptor')

    p = add('verify', 'Re-run one named check on a built structure')
    p.add_argument('reference', help='Build descriptor path or structure key')
    p.add_argument('check')
    p.add_argument('--nu', type=_viscosity, action='append', default=None,
                   help='Viscosity for the ns check (repeatable, nu >= 0)')
    return parser


def dispatch(runner: CommandRunner, args: argparse.Namespace):
    if args.cmd == 'tm-run':
        return runner.cmd_tm_run(args.machine, args.tape, args.horizon)
    if args.cmd == 'tm-encode':
        return runner.cmd_tm_encode(args.machine, args.tape)
    if args.cmd == 'shift-orbit':
        return runner.cmd_shift_orbit(args.machine, args.tape, args.horizon)
    if args.cmd == 'equiv':
        return runner.cmd_equiv(args.machine, args.tape, args.horizon, args.window)
    if args.cmd == 'disk-map':
        return runner.cmd_disk_map(args.isotopy)
    if args.cmd == 'suspend':
        return runner.cmd_suspend(args.isotopy)
    if args.cmd == 'return-map':
        return runner.cmd_return_map(args.isotopy)
    if args.cmd == 'gauge':
        return runner.cmd_gauge(args.descriptor)
    if args.cmd == 'build':
        return runner.cmd_build(args.descriptor)
    if args.cmd == 'verify':
        return runner.cmd_verify(args.reference, args.check, args.nu)
    raise UsageError(f"Unknown command: {args.cmd}", {'commands': list(SUBCOMMANDS)})


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.cmd is None:
            raise UsageError("A subcommand is required", {'commands': list(SUBCOMMANDS)})
        configure_logging(args.log_level)
        runner = CommandRunner(load_settings(), out=args.out, cache_dir=args.cache_dir, seed=args.seed,
                               samples=args.samples, tol=args.tol, seeds=args.seeds)
        code, report = dispatch(runner, args)
        runner.write_report(args.cmd.replace('-', '_'), report)
        sys.stdout.write(dumps(report))
        logger.run_event(args.cmd, {'exit_code': code})
        return code
    except TuringFlowError as e:
        sys.stdout.write(dumps(e.to_dict()))
        logger.error("Command failed", error=e.to_dict())
        return EXIT_ERROR
    except json.JSONDecodeError as e:
        sys.stdout.write(dumps({'error': 'JSONDecodeError', 'message': str(e), 'details': {}}))
        return EXIT_ERROR


if __name__ == '__main__':
    raise SystemExit(main())
