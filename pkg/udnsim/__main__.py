"""
Command line front end.

    udnsim run --case B --ttt 1 --density 10 --velocity 50 --iterations 100 --seed 1
    udnsim sweep --preset tables --seed 1 --table-out tables.csv
    udnsim validate --config my.cfg

Values are layered: built-in defaults, then --config, then --set KEY=VALUE, then the dedicated flags.
Exit codes: 0 success, 1 invalid configuration or flags, 2 I/O failure.

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""
import sys
import logging
import argparse
from typing import Optional, Sequence, Dict

from udnsim import settings
from udnsim.config import ConfigError
from udnsim.exp import base_point
from udnsim.exp.batch import SweepSpec, SweepResult, PRESETS, preset_spec, run_sweep, provenance
from udnsim.exp.single import run_cell
from udnsim.results.output import write_result, TraceRecorder
from udnsim.results.tables import write_tables
from udnsim.results.trends import trends
from udnsim.scenario import ScenarioConfig, load_config, format_config, parse_route_label
from udnsim.util import logs, parsers

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2

FLAG_KEYS = dict(case='route', ttt='ttt_tics', density='den_gnb', velocity='velocity_kmh', iterations='iterations',
                 seed='seed')


class CliParser(argparse.ArgumentParser):
    """ Reports bad flags as configuration errors (exit code 1). """

    def error(self, message):
        raise ConfigError.single('arguments', message)


def add_config_args(parser: argparse.ArgumentParser, single_cell: bool):
    parser.add_argument('--config', metavar='PATH', help='Config file (flat key = value lines).')
    parser.add_argument('--set', metavar='KEY=VALUE', action='append', default=[], dest='set_values',
                        help='Override a config key. May be repeated.')
    if single_cell:
        parser.add_argument('--case', help='Route: A, B or custom.')
        parser.add_argument('--ttt', help="Time-to-trigger in tics, or 'inf'.")
        parser.add_argument('--density', help='gNBs per km^2.')
        parser.add_argument('--velocity', help='TU velocity in km/h.')
    parser.add_argument('--iterations', help='Iterations per cell.')
    parser.add_argument('--seed', help='Master seed.')


def add_output_args(parser: argparse.ArgumentParser):
    parser.add_argument('--format', choices=('csv', 'json'), default='csv', help='Result format.')
    parser.add_argument('--out', metavar='PATH', help='Result file (default: standard output).')


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog=settings.NAME, description='5G UDN handover simulator.')
    parser.add_argument('-v', '--verbosity', default='warning', help='Log verbosity (debug..critical or 5..1).')
    parser.add_argument('--log', metavar='PATH', help='Also log to this file.')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    run_parser = sub.add_parser('run', help='Run a single grid cell.')
    add_config_args(run_parser, single_cell=True)
    add_output_args(run_parser)
    run_parser.add_argument('--trace', metavar='PATH',
                            help='Record every tic of every iteration (.csv for CSV, otherwise msgpack).')

    sweep_parser = sub.add_parser('sweep', help='Run a grid of cells.')
    add_config_args(sweep_parser, single_cell=False)
    add_output_args(sweep_parser)
    sweep_parser.add_argument('--preset', choices=tuple(PRESETS), help='Predefined grid.')
    sweep_parser.add_argument('--cases', help="Comma separated routes (e.g., 'A,B').")
    sweep_parser.add_argument('--ttt-list', help="TTT values, e.g. '1:12' or '1,2,4,inf'.")
    sweep_parser.add_argument('--density-list', help="Densities, e.g. '10:50:10'.")
    sweep_parser.add_argument('--velocity-list', help="Velocities in km/h, e.g. '10,30,50'.")
    sweep_parser.add_argument('--crn', action='store_true',
                              help='Common random numbers: reuse the deployments across TTT values.')
    sweep_parser.add_argument('--workers', type=int, help='Worker processes (default: physical core count).')
    sweep_parser.add_argument('--table-out', metavar='PATH',
                              help='Also write the average handover geometry tables to this CSV file.')

    validate_parser = sub.add_parser('validate', help='Parse and print the effective config.')
    add_config_args(validate_parser, single_cell=True)
    return parser


def parse_set_values(items: Sequence[str]) -> Dict[str, str]:
    ret = {}
    for item in items:
        key, sep, value = item.partition('=')
        if not sep or not key.strip():
            raise ConfigError.single('--set', f"expected KEY=VALUE, got '{item}'")
        ret[key.strip()] = value.strip()
    return ret


def resolve_config(args) -> ScenarioConfig:
    overrides = parse_set_values(args.set_values)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return load_config(args.config, overrides)


def _list_arg(name: str, text: Optional[str], item_func):
    if text is None:
        return None
    values = parsers.parameter_list(text, item_func)
    if values is None:
        raise ConfigError.single(name, f"cannot parse list '{text}'")
    return tuple(values)


def sweep_spec(args, cfg: ScenarioConfig) -> SweepSpec:
    lists = dict(
        case_labels=_list_arg('--cases', args.cases, parse_route_label),
        ttt_list=_list_arg('--ttt-list', args.ttt_list, parsers.parameter_ttt),
        density_list=_list_arg('--density-list', args.density_list, parsers.parameter_int),
        velocity_list=_list_arg('--velocity-list', args.velocity_list, parsers.parameter_float),
    )
    common = dict(iterations=cfg.iterations, master_seed=cfg.seed, crn=args.crn)
    if args.preset:
        return preset_spec(args.preset, **lists, **common)

    point = base_point(cfg)
    defaults = dict(case_labels=(point.case,), ttt_list=(point.ttt_tics,), density_list=(point.den_gnb,),
                    velocity_list=(point.velocity_kmh,))
    defaults.update({k: v for k, v in lists.items() if v is not None})
    return SweepSpec(**defaults, **common).validate()


def emit(result: SweepResult, args):
    if args.out:
        write_result(result, args.out, args.format)
    else:
        write_result(result, sys.stdout, args.format)


def command_run(args) -> int:
    cfg = resolve_config(args)
    point = base_point(cfg)
    spec = SweepSpec((point.case,), (point.ttt_tics,), (point.den_gnb,), (point.velocity_kmh,),
                     iterations=cfg.iterations, master_seed=cfg.seed)
    if args.trace:
        with TraceRecorder(args.trace) as recorder:
            cell = run_cell(point, cfg, on_tic=recorder)
    else:
        cell = run_cell(point, cfg)
    emit(SweepResult((cell,), provenance(spec, cfg)), args)
    return EXIT_OK


def command_sweep(args) -> int:
    logger = logging.getLogger("sweep-command")
    cfg = resolve_config(args)
    spec = sweep_spec(args, cfg)
    if args.workers is not None and args.workers < 1:
        raise ConfigError.single('--workers', "at least one worker is required")
    result = run_sweep(spec, cfg, args.workers)
    emit(result, args)
    if args.table_out:
        write_tables(result, args.table_out)
    for t in trends(result, 'ttt_tics'):
        logger.info("Case %s %s: rate vs TTT rho=%.3f over %s point(s)", t.case, dict(t.fixed), t.rho, t.points)
    return EXIT_OK


def command_validate(args) -> int:
    cfg = resolve_config(args)
    sys.stdout.write(format_config(cfg))
    sys.stdout.write(f"# velocity = {cfg.velocity_mps:.2f} m/s\n")
    return EXIT_OK


COMMANDS = dict(run=command_run, sweep=command_sweep, validate=command_validate)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        level = logs.get_verbosity_level(args.verbosity)
    except ValueError as e:
        print(f"{settings.NAME}: error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        logs.start_stdio_logging(level)
        if args.log:
            logs.start_file_logging(args.log, level)
    except OSError as e:
        print(f"{settings.NAME}: error: {e}", file=sys.stderr)
        logs.stop_all_logging()
        return EXIT_IO

    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"{settings.NAME}: invalid configuration:\n{e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        logging.getLogger(settings.NAME).debug("I/O failure", exc_info=True)
        print(f"{settings.NAME}: error: {e}", file=sys.stderr)
        return EXIT_IO
    finally:
        logs.stop_all_logging()


if __name__ == '__main__':
    sys.exit(main())
