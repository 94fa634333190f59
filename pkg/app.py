# Standard library imports
import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

# Third-party imports
import numpy as np
from dotenv import dotenv_values

# Local application imports
import config
from core.errors import NumericalError, UsageError, ValidationError
from core.params import ChannelParams, GdofParams, Units
from core.settings_manager import get_settings
from data.channel import RngSeed, trajectory_rows
from analysis.bounds import BOUND_EVALUATORS
from analysis.immse import QuadratureConfig, immse_integrand_table, effective_precision, PRIOR_VARIANCE
from analysis.achievability import SchemeConfig
from services.sweep_runner import (
    GdofExperiment,
    SweepGrid,
    SweepRunner,
    evaluate_bound,
    run_bound_sweep,
    run_gdof_experiment,
)
from services.immse_verifier import channel_points, failing_rows, log_grid, verify_point
from services.simulation import moment_checks, run_rate_experiment
from reports.csv_generators import (
    BoundCsvGenerator,
    GdofPointCsvGenerator,
    GdofSummaryCsvGenerator,
    IntegrandCsvGenerator,
    MomentCsvGenerator,
    RateCsvGenerator,
    TrajectoryCsvGenerator,
    VerificationCsvGenerator,
    write_output,
)
from utils.performance_monitor import RunPerformanceMonitor

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
INTEGRAND_POINTS = 201


class OwpnArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting with status 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def float_list(text: str) -> List[float]:
    """Comma-separated floats"""
    try:
        return [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def str_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(',') if item.strip()]


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-P', '--power', type=float, help='Average power P')
    common.add_argument('--sigma2', type=float, help='Phase-noise variance per symbol')
    common.add_argument('-L', '--oversampling', type=float, help='Samples per symbol L')
    common.add_argument('--alpha', type=float, help='Oversampling exponent; L = floor(P^alpha)')
    common.add_argument('--units', choices=[u.value for u in Units], help='Reporting units (default nats)')
    common.add_argument('--out', help='Output file (default: stdout)')
    common.add_argument('--seed', type=int, default=config.DEFAULT_SEED, help='RNG seed')
    common.add_argument('--config', help='File of key = value lines supplying any flag')
    common.add_argument('--tol', type=float, help='Tolerance for cross-checks')
    common.add_argument('--pretty', action='store_true', help='Aligned text instead of CSV')
    common.add_argument('-v', '--verbose', action='count', default=0, help='-v INFO, -vv DEBUG')
    return common


def build_parser() -> OwpnArgumentParser:
    common = _common_parser()
    bound_names = sorted(BOUND_EVALUATORS)

    parser = OwpnArgumentParser(
        prog='owpn-lab',
        description='Capacity bounds, GDoF and simulations for the Wiener phase noise channel with oversampling',
    )
    commands = parser.add_subparsers(dest='command', required=True)

    # bound eval | bound sweep
    bound = commands.add_parser('bound', help='Evaluate capacity bounds')
    bound_commands = bound.add_subparsers(dest='subcommand', required=True)

    bound_eval = bound_commands.add_parser('eval', parents=[common], help='One bound at one point')
    bound_eval.add_argument('--bound', choices=bound_names)
    bound_eval.add_argument('--o1', type=float, default=0.0, help='O(1) constant of the old OWPN bound')
    bound_eval.set_defaults(handler=cmd_bound_eval, _parser=bound_eval)

    bound_sweep = bound_commands.add_parser('sweep', parents=[common], help='Bounds over a grid')
    bound_sweep.add_argument('--bounds', type=str_list, help='Comma-separated bound names')
    bound_sweep.add_argument('--p-start', type=float)
    bound_sweep.add_argument('--p-stop', type=float)
    bound_sweep.add_argument('--p-points', type=int)
    bound_sweep.add_argument('--sigma2-list', type=float_list)
    bound_sweep.add_argument('--oversampling-list', type=float_list)
    bound_sweep.add_argument('--alpha-list', type=float_list)
    bound_sweep.add_argument('--o1', type=float, default=0.0)
    bound_sweep.set_defaults(handler=cmd_bound_sweep, _parser=bound_sweep)

    # gdof
    gdof = commands.add_parser('gdof', parents=[common], help='Pre-log slopes against the GDoF curve')
    gdof.add_argument('--alpha-list', type=float_list)
    gdof.add_argument('--p-grid', type=float_list)
    gdof.add_argument('--bounds', type=str_list)
    gdof.add_argument('--summary-out', help='Summary table file (default: after the points on stdout)')
    gdof.set_defaults(handler=cmd_gdof, _parser=gdof)

    # immse verify
    immse = commands.add_parser('immse', help='I-MMSE proof machinery')
    immse_commands = immse.add_subparsers(dest='subcommand', required=True)
    verify = immse_commands.add_parser('verify', parents=[common], help='Cross-check Fisher, quadrature and closed forms')
    verify.add_argument('--a', type=float, help='Increment precision L/sigma2 (with --b)')
    verify.add_argument('--b', type=float, help='Per-sample power P/L (with --a)')
    verify.add_argument('--grid-min', type=float)
    verify.add_argument('--grid-max', type=float)
    verify.add_argument('--grid-points', type=int)
    verify.add_argument('--perturb', type=float, default=0.0, help='Offset added to the quadrature (test hook)')
    verify.add_argument('--dump-integrand', help='Write rho,integrand,J_rho for the first point')
    verify.set_defaults(handler=cmd_immse_verify, _parser=verify)

    # simulate stats | simulate rate
    simulate = commands.add_parser('simulate', help='Monte Carlo runs of the channel')
    simulate_commands = simulate.add_subparsers(dest='subcommand', required=True)
    for mode, handler, help_text in (
        ('stats', cmd_simulate_stats, 'Channel moment checks'),
        ('rate', cmd_simulate_rate, 'Plug-in rate of the shifted-exponential scheme'),
    ):
        sub = simulate_commands.add_parser(mode, parents=[common], help=help_text)
        sub.add_argument('--blocks', type=int, default=100_000, help='Symbols per run')
        sub.add_argument('--shift', type=float, help='Amplitude shift s')
        sub.add_argument('--scale', type=float, help='Amplitude scale lambda (default P/L - s)')
        sub.add_argument('--stream', type=int, default=0, help='RNG stream id')
        sub.set_defaults(handler=handler, _parser=sub)
        if mode == 'stats':
            sub.add_argument('--dump-trajectory', help='Write k,theta,re_y,im_y for every sample')
        else:
            sub.add_argument('--batches', type=int)
            sub.add_argument('--amplitude-bins', type=int)
            sub.add_argument('--phase-bins', type=int)

    return parser


def load_config_file(path: str) -> Dict[str, str]:
    """key = value lines; keys are flag names with dashes or underscores"""
    if not os.path.isfile(path):
        raise UsageError(f"Config file not found: {path}")
    values = dotenv_values(path)
    return {key.strip().lstrip('-').replace('-', '_'): value for key, value in values.items()}


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse the command line; a --config file supplies defaults that
    explicit flags override.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.config:
        return args

    leaf = args._parser
    actions = {action.dest: action for action in leaf._actions}
    overrides = {}
    for dest, raw in load_config_file(args.config).items():
        if dest not in actions or dest in ('help', 'config'):
            raise UsageError(f"Unknown key '{dest}' in {args.config}")
        if raw is None:
            raise UsageError(f"Key '{dest}' in {args.config} has no value")
        action = actions[dest]
        if isinstance(action, argparse._StoreTrueAction):
            overrides[dest] = raw.strip().lower() in ('1', 'true', 'yes', 'on')
        elif isinstance(action, argparse._CountAction):
            overrides[dest] = int(raw)
        else:
            overrides[dest] = raw
    leaf.set_defaults(**overrides)
    logger.debug(f"Defaults from {args.config}: {sorted(overrides)}")
    return parser.parse_args(argv)


def setup_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = getattr(logging, config.get_log_level(), logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _require(args, *names):
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name) is None]
    if missing:
        args._parser.print_usage(sys.stderr)
        raise UsageError(f"missing required flag(s): {', '.join(missing)}")


def channel_params_from_args(args, integer: bool = False) -> ChannelParams:
    """ChannelParams from --power/--sigma2 and either --oversampling or --alpha"""
    _require(args, 'power', 'sigma2')
    units = Units.parse(args.units or Units.NATS)
    if args.alpha is not None:
        if args.oversampling is not None:
            raise UsageError("Give either --oversampling or --alpha, not both")
        return GdofParams(args.alpha).channel_params(args.power, args.sigma2, integer=True, units=units)
    oversampling = 1 if args.oversampling is None else args.oversampling
    params = ChannelParams(args.power, args.sigma2, oversampling, units=units)
    if integer:
        return ChannelParams(args.power, args.sigma2, params.samples_per_symbol, units=units)
    return params


def cmd_bound_eval(args) -> int:
    _require(args, 'bound')
    params = channel_params_from_args(args)
    row = evaluate_bound(args.bound, params, args.alpha, args.o1)
    write_output(BoundCsvGenerator().generate([row], args.pretty), args.out)
    return 0


def cmd_bound_sweep(args) -> int:
    defaults = get_settings().get_sweep_settings()
    sigma2 = args.sigma2_list or ([args.sigma2] if args.sigma2 is not None else defaults.sigma2)
    alphas = args.alpha_list or ([args.alpha] if args.alpha is not None else [])
    oversampling = args.oversampling_list or ([args.oversampling] if args.oversampling is not None else [])
    if not alphas and not oversampling:
        oversampling = defaults.oversampling

    grid = SweepGrid(
        p_start=args.p_start if args.p_start is not None else defaults.p_start,
        p_stop=args.p_stop if args.p_stop is not None else defaults.p_stop,
        p_points=args.p_points if args.p_points is not None else defaults.p_points,
        sigma2=tuple(sigma2),
        bounds=tuple(args.bounds or defaults.bounds),
        oversampling=tuple(oversampling),
        alphas=tuple(alphas),
        units=Units.parse(args.units or defaults.units),
        o1_constant=args.o1,
    )

    monitor = RunPerformanceMonitor('bound sweep')
    with monitor.time_operation('evaluate'):
        rows = run_bound_sweep(grid)
    monitor.count_operation('points', len(rows))
    write_output(BoundCsvGenerator().generate(rows, args.pretty), args.out)
    monitor.log_summary()
    return 0


def cmd_gdof(args) -> int:
    settings = get_settings().get_gdof_settings()
    alphas = args.alpha_list or ([args.alpha] if args.alpha is not None else settings.alphas)
    experiment = GdofExperiment(
        alphas=tuple(alphas),
        p_grid=tuple(args.p_grid or settings.p_grid),
        bounds=tuple(args.bounds or settings.bounds),
        sigma2=args.sigma2 if args.sigma2 is not None else settings.sigma2,
    )

    monitor = RunPerformanceMonitor('gdof')
    with monitor.time_operation('fit'):
        estimates = run_gdof_experiment(experiment)
    monitor.count_operation('slopes', len(estimates))

    tolerance = args.tol if args.tol is not None else settings.slope_tolerance
    for estimate in estimates:
        if estimate.abs_error > tolerance:
            logger.warning(f"{estimate.bound_name} at alpha={estimate.alpha:g}: slope {estimate.slope:.4f} "
                           f"vs target {estimate.target:.4f}")

    points = GdofPointCsvGenerator().generate(estimates, args.pretty)
    summary = GdofSummaryCsvGenerator().generate(estimates, args.pretty)
    if args.summary_out:
        write_output(points, args.out)
        write_output(summary, args.summary_out)
    elif args.out:
        write_output(points, args.out)
        write_output(summary, None)
    else:
        write_output(points + '\n' + summary, None)
    monitor.log_summary()
    return 0


def _verification_points(args):
    if (args.a is None) != (args.b is None):
        raise UsageError("--a and --b go together")
    if args.a is not None:
        return [(args.a, args.b)]
    if args.power is not None:
        _require(args, 'sigma2')
        oversampling = 1 if args.oversampling is None else args.oversampling
        if args.alpha is not None:
            oversampling = GdofParams(args.alpha).oversampling(args.power, integer=False)
        return channel_points([(args.power, args.sigma2, oversampling)])

    grid = get_settings().get_immse_verify_settings()
    return log_grid(
        args.grid_min if args.grid_min is not None else grid.grid_min,
        args.grid_max if args.grid_max is not None else grid.grid_max,
        args.grid_points if args.grid_points is not None else grid.grid_points,
    )


def cmd_immse_verify(args) -> int:
    settings = get_settings()
    tolerance = args.tol if args.tol is not None else settings.get_immse_verify_settings().tolerance
    quad = QuadratureConfig.from_settings(settings)
    fixed_point = settings.get_fixed_point_settings()
    points = _verification_points(args)

    monitor = RunPerformanceMonitor('immse verify')
    with monitor.time_operation('verify'):
        rows = SweepRunner().map(
            lambda point: verify_point(point[0], point[1], args.perturb, quad,
                                       fixed_point.tol, fixed_point.max_iter),
            points,
        )
    monitor.count_operation('points', len(rows))

    if args.dump_integrand:
        a, b = points[0]
        c = effective_precision(a, b)
        rho_max = quad.tail_factor * max(c, 1.0 / PRIOR_VARIANCE)
        table = immse_integrand_table(a, b, np.linspace(0.0, rho_max, INTEGRAND_POINTS))
        write_output(IntegrandCsvGenerator().generate(table), args.dump_integrand)

    write_output(VerificationCsvGenerator().generate(rows, args.pretty), args.out)
    monitor.log_summary()

    failures = failing_rows(rows, tolerance)
    if failures:
        worst = max(failures, key=lambda row: row.max_abs_error)
        logger.error(f"{len(failures)} of {len(rows)} points exceed tolerance {tolerance:g}; "
                     f"worst a={worst.a:g}, b={worst.b:g}: {worst.max_abs_error:.3g}")
        return 2
    return 0


def _scheme_from_args(args, n_blocks: int) -> SchemeConfig:
    defaults = get_settings().get_scheme_settings()
    return SchemeConfig(
        n_blocks=n_blocks,
        shift=args.shift if args.shift is not None else defaults.shift,
        scale=args.scale,
        amplitude_bins=getattr(args, 'amplitude_bins', None) or defaults.amplitude_bins,
        phase_bins=getattr(args, 'phase_bins', None) or defaults.phase_bins,
        seed=RngSeed(args.seed, args.stream),
    )


def cmd_simulate_stats(args) -> int:
    params = channel_params_from_args(args, integer=True)
    scheme = _scheme_from_args(args, args.blocks)

    monitor = RunPerformanceMonitor('simulate stats')
    with monitor.time_operation('simulate'):
        checks, phase, output = moment_checks(params, scheme)
    monitor.count_operation('blocks', args.blocks)

    if args.dump_trajectory:
        write_output(TrajectoryCsvGenerator().generate(trajectory_rows(phase, output)), args.dump_trajectory)

    write_output(MomentCsvGenerator().generate(checks, args.pretty), args.out)
    monitor.log_summary()

    failed = [check.quantity for check in checks if not check.passed]
    if failed:
        logger.error(f"Moment checks failed: {', '.join(failed)}")
        return 2
    return 0


def cmd_simulate_rate(args) -> int:
    params = channel_params_from_args(args, integer=True)
    scheme = _scheme_from_args(args, args.blocks)
    batches = args.batches if args.batches is not None else get_settings().get_scheme_settings().batches

    monitor = RunPerformanceMonitor('simulate rate')
    with monitor.time_operation('simulate'):
        result = run_rate_experiment(params, scheme, batches)
    monitor.count_operation('blocks', args.blocks)

    write_output(RateCsvGenerator().generate([result], args.pretty), args.out)
    monitor.log_summary()
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.

    Returns:
        0 on success, 1 on usage or validation errors, 2 on numerical or
        invariant failures
    """
    try:
        args = parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else 0

    setup_logging(args.verbose)

    try:
        return args.handler(args)
    except ValidationError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        logger.error(f"Invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NumericalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        print(f"internal error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
