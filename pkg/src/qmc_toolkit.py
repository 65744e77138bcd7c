#!/usr/bin/env python3
"""Command-line entry point of the toolkit.

Subcommands:
    gen-points   write a point set as CSV with exact coordinates
    t-param      certify the quality parameter t of generator matrices
    wce          exact worst-case error of a point set
    faber        Faber coefficients and dyadic norms of a test function
    experiment   run a configured sweep into outputs/<name>/

Exit codes: 0 success, 2 configuration error, 3 budget refusal.
"""
import argparse
import sys
from fractions import Fraction
from pathlib import Path

import pandas as pd

from faber import analyze, besov_1inf_norm, dump_coefficients, dyadic_h2_norm
from net_core import (PointSet, elementary_box_t, interlace_matrices, interlaced_t_bound,
                      load_generator_matrices, minimal_t, net_points)
from quadrature_experiments import (TestFunction, build_point_set, random_test_function,
                                    run_experiment)
from tent import tent_function
from utils import (CONSTRUCTIONS, MODES, PROJECT_ROOT, BudgetExceededError, ConfigError,
                   ExperimentConfig, load_config, resolve_path, str_to_bool)
from wce_kernels import wce_squared


def add_point_set_arguments(parser):
    parser.add_argument('-C', '--construction',
                        dest='construction',
                        default='fibonacci',
                        choices=CONSTRUCTIONS,
                        help='Point set construction.')

    parser.add_argument('-N', '--size',
                        dest='size',
                        type=int,
                        default=6,
                        help='n (2^n points) for nets, Halton and Zaremba sets; m for the Fibonacci lattice.')

    parser.add_argument('-M', '--matrix_file',
                        dest='matrix_file',
                        default='',
                        help='Generator-matrix file for construction net.')

    parser.add_argument('-A', '--alpha',
                        dest='alpha',
                        type=int,
                        default=1,
                        help='Interlacing order.')

    parser.add_argument('-D', '--dimension',
                        dest='d',
                        type=int,
                        default=2,
                        help='Dimension of the point set.')

    parser.add_argument('-T', '--tent',
                        dest='tent',
                        type=str_to_bool,
                        default=True,
                        help='Apply the tent transform (true/false).')

    parser.add_argument('-S', '--seed',
                        dest='seed',
                        type=int,
                        default=42,
                        help='Seed of the random digital shift.')

    parser.add_argument('--sequence_to_net',
                        dest='sequence_to_net',
                        action='store_true',
                        help='Use k/2^n as the last interlaced stream.')


def point_set_from_args(args):
    config = ExperimentConfig(construction=args.construction, matrix_file=args.matrix_file,
                              alpha=args.alpha, tent=args.tent, d=args.d, seed=args.seed,
                              n_min=args.size, n_max=args.size, m_min=args.size, m_max=args.size,
                              sequence_to_net=args.sequence_to_net).validate()
    return build_point_set(config, args.size)


def read_points_file(points_path):
    """Read a CSV written by gen-points (columns x1..xd of exact rationals)."""
    points_path = resolve_path(points_path)
    if not points_path.exists():
        raise ConfigError(f'No points file {points_path}')
    points_df = pd.read_csv(points_path, dtype=str)
    columns = [column for column in points_df.columns if column.startswith('x')]
    if not columns:
        raise ConfigError(f'{points_path} has no x1..xd columns')
    try:
        rows = [[Fraction(value) for value in row] for row in points_df[columns].itertuples(index=False)]
    except ValueError as error:
        raise ConfigError(f'{points_path}: {error}') from error
    return PointSet.from_rows(rows, label=points_path.stem)


def gen_points(args):
    P = point_set_from_args(args)
    output_path = Path(args.output_file) if args.output_file else (
        PROJECT_ROOT / 'outputs' / 'points' / f'{args.construction}_{args.size}.csv')
    output_path.parent.mkdir(exist_ok=True, parents=True)
    P.to_frame().to_csv(output_path, index=False)
    print(f'{len(P)} points ({P.label}) written to {output_path}')


def t_param(args):
    G = load_generator_matrices(resolve_path(args.matrix_file))
    if args.n:
        G = G.leading(args.n)
    if args.interlace > 1:
        t_tilde = minimal_t(G)
        G = interlace_matrices(G, args.interlace)
        print(f'Input matrices: t = {t_tilde}, '
              f'bound after interlacing = {interlaced_t_bound(t_tilde, args.interlace, G.d)}')
    t = minimal_t(G)
    print(f'd={G.d} n={G.n} alpha={G.alpha}: minimal t = {t}')
    if args.boxes and G.alpha == 1:
        print(f'Elementary box count: t = {elementary_box_t(net_points(G), G.n)}')


def wce(args):
    P = read_points_file(args.points_file) if args.points_file else point_set_from_args(args)
    result = wce_squared(args.kernel, P, digits=args.digits, mode=args.mode,
                         n_jobs=args.n_jobs, progress=True)
    print(f'{P.label}: N={result.N} d={result.d} kernel={result.kernel.value} engine={result.engine}')
    print(f'squared error = {result.squared_error}')
    print(f'error = {result.error_digits}')


def faber_function(name, d, nodes, seed):
    if name == 'bspline':
        return TestFunction.bspline(d)
    if name == 'pwlinear':
        return random_test_function(d, nodes, seed)
    if name == 'quadratic':
        return TestFunction.custom(lambda x: _product(q * q for q in x), d, Fraction(1, 3) ** d, 'quadratic')
    if name == 'bump':
        return TestFunction.custom(lambda x: _product(q * q * (1 - q) * (1 - q) for q in x), d,
                                   Fraction(1, 30) ** d, 'bump')
    raise ConfigError(f'Unknown function {name!r}')


def _product(values):
    result = Fraction(1)
    for value in values:
        result *= value
    return result


def faber(args):
    f = faber_function(args.function, args.d, args.nodes, args.seed)
    evaluator = tent_function(f) if args.tent else f
    domain_kind = 'periodic' if args.tent else 'nonperiodic'
    coefficients = analyze(evaluator, args.d, args.level, domain_kind, progress=True)
    h2 = dyadic_h2_norm(coefficients)
    b1 = besov_1inf_norm(coefficients)
    print(f'{f.label} {"tent " if args.tent else ""}d={args.d} J={args.level}: {coefficients}')
    print(f'H2 dyadic sup = {h2.root_digits()} at level {h2.argmax}')
    print(f'B1inf dyadic sup = {b1.root_digits()} at level {b1.argmax}')
    if args.output_file:
        print(f'Coefficients written to {dump_coefficients(coefficients, args.output_file)}')


def experiment(args):
    config = load_config(resolve_path(args.config_file))
    if args.n_jobs:
        config.n_jobs = args.n_jobs
    output_dir = Path(args.output_dir) if args.output_dir else None
    records = run_experiment(config, output_dir)
    print(f'{len(records)} records for {config.name}')
    for record in records:
        print(f'  {record.kernel_or_function} N={record.N}: {record.error}')


def build_parser():
    parser = argparse.ArgumentParser(description='Exact quasi-Monte Carlo worst-case errors.')
    subparsers = parser.add_subparsers(dest='command', required=True)

    gen_parser = subparsers.add_parser('gen-points', help='Write a point set as CSV.')
    add_point_set_arguments(gen_parser)
    gen_parser.add_argument('-O', '--output_file',
                            dest='output_file',
                            default='',
                            help='Output CSV (default outputs/points/<construction>_<size>.csv).')
    gen_parser.set_defaults(handler=gen_points)

    t_parser = subparsers.add_parser('t-param', help='Minimal t of generator matrices.')
    t_parser.add_argument('-M', '--matrix_file',
                          dest='matrix_file',
                          required=True,
                          help='Generator-matrix file.')
    t_parser.add_argument('-N', '--n',
                          dest='n',
                          type=int,
                          default=0,
                          help='Use the leading n digits only.')
    t_parser.add_argument('-I', '--interlace',
                          dest='interlace',
                          type=int,
                          default=1,
                          help='Interlace groups of this many matrices before certifying.')
    t_parser.add_argument('-B', '--boxes',
                          dest='boxes',
                          action='store_true',
                          help='Cross-check by counting points in elementary boxes.')
    t_parser.set_defaults(handler=t_param)

    wce_parser = subparsers.add_parser('wce', help='Worst-case error of a point set.')
    add_point_set_arguments(wce_parser)
    wce_parser.add_argument('-P', '--points_file',
                            dest='points_file',
                            default='',
                            help='CSV written by gen-points; overrides the construction options.')
    wce_parser.add_argument('-K', '--kernel',
                            dest='kernel',
                            default='K1',
                            choices=['K1', 'K2', 'K3'],
                            help='Reproducing kernel.')
    wce_parser.add_argument('--mode',
                            dest='mode',
                            default='auto',
                            choices=MODES,
                            help='Arithmetic mode.')
    wce_parser.add_argument('--digits',
                            dest='digits',
                            type=int,
                            default=30,
                            help='Fractional digits of the reported error.')
    wce_parser.add_argument('-J', '--n_jobs',
                            dest='n_jobs',
                            type=int,
                            default=1,
                            help='Parallel workers for the pair sum.')
    wce_parser.set_defaults(handler=wce)

    faber_parser = subparsers.add_parser('faber', help='Faber coefficients and dyadic norms.')
    faber_parser.add_argument('-F', '--function',
                              dest='function',
                              default='bspline',
                              choices=['bspline', 'pwlinear', 'quadratic', 'bump'],
                              help='Test function.')
    faber_parser.add_argument('-D', '--dimension',
                              dest='d',
                              type=int,
                              default=1,
                              help='Dimension.')
    faber_parser.add_argument('-L', '--level',
                              dest='level',
                              type=int,
                              default=6,
                              help='Largest level J per coordinate.')
    faber_parser.add_argument('-T', '--tent',
                              dest='tent',
                              action='store_true',
                              help='Analyse f(|2x-1|) in the periodic basis.')
    faber_parser.add_argument('-K', '--nodes',
                              dest='nodes',
                              type=int,
                              default=3,
                              help='Interior nodes of the pwlinear function.')
    faber_parser.add_argument('-S', '--seed',
                              dest='seed',
                              type=int,
                              default=42,
                              help='Seed of the pwlinear function.')
    faber_parser.add_argument('-O', '--output_file',
                              dest='output_file',
                              default='',
                              help='Write all coefficients to this CSV.')
    faber_parser.set_defaults(handler=faber)

    experiment_parser = subparsers.add_parser('experiment', help='Run a configured sweep.')
    experiment_parser.add_argument('-C', '--config_file',
                                   dest='config_file',
                                   required=True,
                                   help='Experiment configuration file.')
    experiment_parser.add_argument('-O', '--output_dir',
                                   dest='output_dir',
                                   default='',
                                   help='Output directory (default outputs/<name>).')
    experiment_parser.add_argument('-J', '--n_jobs',
                                   dest='n_jobs',
                                   type=int,
                                   default=0,
                                   help='Override n_jobs of the configuration.')
    experiment_parser.set_defaults(handler=experiment)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except ConfigError as error:
        print(f'Configuration error: {error}', file=sys.stderr)
        return 2
    except BudgetExceededError as error:
        print(f'Refused: {error}', file=sys.stderr)
        return 3
    return 0


if __name__ == '__main__':
    sys.exit(main())
