"""QMC rules on test functions, and the experiment driver.

An experiment sweeps the point count (n for nets, Halton and Zaremba sets, m for
the Fibonacci lattice), builds the point set for every size, measures the
worst-case error and/or the integration error of a test function, and writes

    outputs/<name>/records.csv   one row per (series, N)
    outputs/<name>/slopes.csv    least-squares slope of log2(error) against log2(N)
    outputs/<name>/plot.gp       gnuplot script with the data inlined

Everything before the final decimal rendering is exact.
"""
import time
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd
import statsmodels.api as sm
from joblib import Parallel, delayed
from tqdm import tqdm

from exact_core import as_rational, rational_to_digits
from net_core import interlace, load_generator_matrices, net_points, sequence_to_net
from pointsets import apply_digital_shift, fibonacci_lattice, halton2d, random_shift, zaremba_shift
from tent import tent_pullback
from utils import PROJECT_ROOT, RECORD_COLUMNS, SLOPE_COLUMNS, ConfigError, resolve_path
from wce_kernels import wce_squared

RANDOM_NODE_DENOMINATOR = 2 ** 16
BSPLINE_INTEGRAL = Fraction(23, 48)


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear interpolation of values at nodes 0 = x_0 < ... < x_K = 1."""
    nodes: tuple
    values: tuple

    def __post_init__(self):
        if len(self.nodes) != len(self.values) or len(self.nodes) < 2:
            raise ValueError('Need at least two nodes and one value per node')
        if self.nodes[0] != 0 or self.nodes[-1] != 1:
            raise ValueError(f'Nodes must start at 0 and end at 1, got {self.nodes[0]} and {self.nodes[-1]}')
        if any(left >= right for left, right in zip(self.nodes, self.nodes[1:])):
            raise ValueError('Nodes must be strictly increasing')

    def __call__(self, x):
        x = as_rational(x)
        if not 0 <= x <= 1:
            raise ValueError(f'x={x} outside [0, 1]')
        segment = min(bisect_right(self.nodes, x), len(self.nodes) - 1)
        left, right = self.nodes[segment - 1], self.nodes[segment]
        y_left, y_right = self.values[segment - 1], self.values[segment]
        return y_left + (y_right - y_left) * (x - left) / (right - left)

    def integral(self):
        return sum(((right - left) * (y_left + y_right) / 2
                    for left, right, y_left, y_right
                    in zip(self.nodes, self.nodes[1:], self.values, self.values[1:])), Fraction(0))


def bspline_cutout(x):
    """3/4 - x^2 on [0, 1/2] and 9/8 - 3x/2 + x^2/2 on [1/2, 1]."""
    x = as_rational(x)
    if not 0 <= x <= 1:
        raise ValueError(f'x={x} outside [0, 1]')
    if x <= Fraction(1, 2):
        return Fraction(3, 4) - x * x
    return Fraction(9, 8) - 3 * x / 2 + x * x / 2


@dataclass(frozen=True)
class TestFunction:
    """Tensor product test function; ``custom`` wraps any rational evaluator."""
    __test__ = False

    kind: str
    d: int
    factors: tuple = ()
    evaluator: object = None
    integral: object = None
    label: str = ''

    @classmethod
    def piecewise_linear(cls, factors, label='pwlinear'):
        return cls('piecewise_linear_tensor', len(factors), tuple(factors), label=label)

    @classmethod
    def bspline(cls, d):
        return cls('bspline_cutout_tensor', d, (bspline_cutout,) * d, label='bspline')

    @classmethod
    def custom(cls, evaluator, d, integral=None, label='custom'):
        return cls('custom', d, evaluator=evaluator,
                   integral=None if integral is None else as_rational(integral), label=label)

    def __call__(self, x):
        if len(x) != self.d:
            raise ValueError(f'Point of dimension {len(x)} for a {self.d}-dimensional function')
        if self.kind == 'custom':
            return as_rational(self.evaluator(tuple(x)))
        value = Fraction(1)
        for factor, q in zip(self.factors, x):
            value *= factor(q)
        return value


def exact_integral(f):
    """Integral of f over [0,1]^d."""
    if f.kind == 'piecewise_linear_tensor':
        value = Fraction(1)
        for factor in f.factors:
            value *= factor.integral()
        return value
    if f.kind == 'bspline_cutout_tensor':
        return BSPLINE_INTEGRAL ** f.d
    if f.integral is None:
        raise ValueError(f'No exact integral available for custom function {f.label!r}')
    return f.integral


def qmc_estimate(f, P):
    """(1/N) sum_{x in P} f(x)."""
    points = list(P)
    if not points:
        raise ValueError('QMC estimate over an empty point set')
    return sum((as_rational(f(point)) for point in points), Fraction(0)) / len(points)


def random_piecewise_linear(K, seed):
    """Random univariate piecewise linear factor with K interior nodes.

    Interior nodes are K distinct multiples of 2^-16 in (0, 1); values are
    multiples of 2^-16 in [-1, 1]. ``seed`` is an int or a numpy Generator.
    """
    if K < 0:
        raise ValueError(f'K must be >= 0, got {K}')
    rng = np.random.default_rng(seed)
    scale = RANDOM_NODE_DENOMINATOR
    interior = np.sort(rng.choice(np.arange(1, scale), size=K, replace=False)) if K else []
    nodes = (Fraction(0),) + tuple(Fraction(int(a), scale) for a in interior) + (Fraction(1),)
    values = tuple(Fraction(int(v), scale) for v in rng.integers(-scale, scale, size=K + 2, endpoint=True))
    return PiecewiseLinear(nodes, values)


def random_test_function(d, K, seed, label='pwlinear'):
    """Tensor product of d random piecewise linear factors drawn from one generator."""
    rng = np.random.default_rng(seed)
    return TestFunction.piecewise_linear([random_piecewise_linear(K, rng) for _ in range(d)], label)


@dataclass
class ExperimentRecord:
    construction: str
    transform: str
    kernel_or_function: str
    d: int
    N: int
    error: str
    squared_error_num: int
    squared_error_den: int
    seconds: float

    def to_row(self):
        return [getattr(self, column) for column in RECORD_COLUMNS]


def build_point_set(config, size, replicate=0):
    """Point set of the configured construction for sweep value ``size``.

    ``size`` is m for the Fibonacci lattice and n (2^n points) otherwise. Nets are
    built as net_points -> interlace (order alpha) -> optional tent pullback; with
    ``sequence_to_net`` the last coordinate of the interlaced input is k / 2^n.
    """
    if config.construction == 'net':
        P = _interlaced_net(config, size)
    elif config.construction == 'fibonacci':
        P = fibonacci_lattice(size)
    elif config.construction == 'halton':
        P = halton2d(size)
    elif config.construction == 'zaremba':
        P = zaremba_shift(halton2d(size), size)
    elif config.construction == 'halton_shifted':
        P = apply_digital_shift(halton2d(size), random_shift(2, size, config.seed + replicate))
    else:
        raise ConfigError(f'Unknown construction {config.construction!r}')
    if config.tent:
        P = tent_pullback(P)
    return P


def _interlaced_net(config, n):
    G = load_generator_matrices(resolve_path(config.matrix_file))
    if n > G.n:
        raise ConfigError(f'{config.matrix_file} has {G.n} digits, cannot build n={n}')
    G = G.leading(n)
    if G.alpha == config.alpha and G.alpha > 1:
        if G.d < config.d:
            raise ConfigError(f'{config.matrix_file} has {G.d} matrices, need {config.d}')
        return net_points(G.first(config.d))
    if G.alpha != 1:
        raise ConfigError(f'{config.matrix_file} has alpha={G.alpha}, config asks for alpha={config.alpha}')
    streams = config.alpha * config.d
    needed = streams - 1 if config.sequence_to_net else streams
    if G.d < needed:
        raise ConfigError(f'{config.matrix_file} has {G.d} matrices, need {needed}')
    if config.sequence_to_net:
        P = sequence_to_net(net_points(G.first(needed)), n)
    else:
        P = net_points(G.first(needed))
    return interlace(P, config.alpha, n)


def transform_label(config):
    label = 'tent' if config.tent else 'none'
    if config.construction == 'halton_shifted':
        label += f' shift seed={config.seed} R={config.replicates}'
    return label


def average_error(values, digits):
    """Mean of replicate errors.

    ``values`` holds (error_digits, squared_error) pairs. The decimal strings are
    averaged as exact rationals, so the result does not depend on replicate order.
    Returns the rendered mean error and the mean squared error.
    """
    if not values:
        raise ValueError('Nothing to average')
    mean_error = sum((Fraction(error) for error, _ in values), Fraction(0)) / len(values)
    mean_squared = sum((squared for _, squared in values), Fraction(0)) / len(values)
    return rational_to_digits(mean_error, digits), mean_squared


def _wce_cell(config, size, replicate, n_jobs):
    P = build_point_set(config, size, replicate)
    result = wce_squared(config.kernel, P, digits=config.precision_digits, mode=config.mode, n_jobs=n_jobs)
    return len(P), result.error_digits, result.squared_error


def _wce_records(config, size, n_jobs):
    start = time.perf_counter()
    replicates = config.replicates if config.construction == 'halton_shifted' else 1
    if replicates > 1 and n_jobs != 1:
        cells = Parallel(n_jobs=n_jobs)(delayed(_wce_cell)(config, size, r, 1) for r in range(replicates))
    else:
        cells = [_wce_cell(config, size, r, n_jobs) for r in range(replicates)]
    error, squared = average_error([(error, squared) for _, error, squared in cells], config.precision_digits)
    seconds = round(time.perf_counter() - start, 3) if config.timing else 0
    return [ExperimentRecord(config.construction, transform_label(config), config.kernel, config.d,
                             cells[0][0], error, squared.numerator, squared.denominator, seconds)]


def _test_functions(config):
    if config.test_function == 'bspline':
        return [TestFunction.bspline(config.d)]
    return [random_test_function(config.d, config.nodes, config.seed + instance,
                                 label=f'pwlinear K={config.nodes} seed={config.seed + instance}')
            for instance in range(config.instances)]


def _integration_records(config, size, functions):
    """One record per test function; shifted constructions average the exact errors over replicates."""
    records = []
    replicates = config.replicates if config.construction == 'halton_shifted' else 1
    point_sets = [build_point_set(config, size, r) for r in range(replicates)]
    P = point_sets[0]
    for f in functions:
        start = time.perf_counter()
        integral = exact_integral(f)
        errors = [abs(qmc_estimate(f, Q) - integral) for Q in point_sets]
        error = sum(errors, Fraction(0)) / replicates
        squared = sum((e * e for e in errors), Fraction(0)) / replicates
        seconds = round(time.perf_counter() - start, 3) if config.timing else 0
        records.append(ExperimentRecord(config.construction, transform_label(config), f.label, config.d,
                                        len(P), rational_to_digits(error, config.precision_digits),
                                        squared.numerator, squared.denominator, seconds))
    return records


def sweep_sizes(config):
    if config.construction == 'fibonacci':
        return list(range(config.m_min, config.m_max + 1))
    return list(range(config.n_min, config.n_max + 1))


def fit_convergence_rate(N, errors, window=None):
    """OLS fit of log2(error) = slope * log2(N) + intercept.

    Parameters
    ----------
    N: sequence of int
        Point counts.
    errors: sequence of float or str
        Errors; non-positive values are left out.
    window: tuple or None
        (log2 N min, log2 N max); None or -1 entries mean unbounded.

    Returns
    -------
    dict
        slope, intercept, std_err, log2_n_min, log2_n_max, n_points.
    """
    x, y = [], []
    lower, upper = window or (-1, -1)
    for count, error in zip(N, errors):
        error = float(error)
        log_n = float(np.log2(count))
        if error <= 0 or (lower >= 0 and log_n < lower) or (upper >= 0 and log_n > upper):
            continue
        x.append(log_n)
        y.append(float(np.log2(error)))
    if len(x) < 2:
        raise ValueError(f'Need at least two positive errors to fit a rate, got {len(x)}')
    OLS_results = sm.OLS(np.array(y), sm.add_constant(np.array(x))).fit()
    intercept, slope = OLS_results.params
    std_err = float(OLS_results.bse[1]) if len(x) > 2 else float('nan')
    return {'slope': float(slope), 'intercept': float(intercept), 'std_err': std_err,
            'log2_n_min': min(x), 'log2_n_max': max(x), 'n_points': len(x)}


def series_name(record):
    return f'{record.construction} | {record.transform} | {record.kernel_or_function}'


def group_series(records):
    series = {}
    for record in records:
        series.setdefault(series_name(record), []).append(record)
    return series


def write_plot_script(series, plot_path, title):
    """gnuplot script plotting every series on log-log axes, data inlined."""
    lines = [f'set title "{title}"',
             'set logscale xy 2',
             'set xlabel "N"',
             'set ylabel "error"',
             'set key bottom left',
             'set format y "%.0e"']
    plot_terms = []
    for index, (name, records) in enumerate(series.items()):
        lines.append(f'$series{index} << EOD')
        lines.extend(f'{record.N} {record.error}' for record in records)
        lines.append('EOD')
        plot_terms.append(f'$series{index} using 1:2 with linespoints title "{name}"')
    lines.append('plot ' + ', \\\n     '.join(plot_terms))
    plot_path = Path(plot_path)
    plot_path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return plot_path


def run_experiment(config, output_dir=None, progress=True):
    """Run the configured sweep and write records, slopes and the plot script.

    Returns the list of ExperimentRecord in sweep order.
    """
    output_dir = Path(output_dir) if output_dir else PROJECT_ROOT / 'outputs' / config.name
    output_dir.mkdir(exist_ok=True, parents=True)
    functions = _test_functions(config) if config.test_function != 'none' else []

    records = []
    outer_pbar = tqdm(sweep_sizes(config), disable=not progress)
    for size in outer_pbar:
        outer_pbar.set_description(f'{config.name}: size {size}')
        if config.kernel != 'none':
            records.extend(_wce_records(config, size, config.n_jobs))
        if functions:
            records.extend(_integration_records(config, size, functions))

    pd.DataFrame([record.to_row() for record in records], columns=RECORD_COLUMNS).to_csv(
        output_dir / 'records.csv', index=False)

    series = group_series(records)
    window = (config.fit_min, config.fit_max)
    slope_rows = []
    for name, series_records in series.items():
        try:
            fit = fit_convergence_rate([r.N for r in series_records], [r.error for r in series_records], window)
        except ValueError:
            continue
        slope_rows.append([name] + [fit[column] for column in SLOPE_COLUMNS[1:]])
    pd.DataFrame(slope_rows, columns=SLOPE_COLUMNS).to_csv(output_dir / 'slopes.csv', index=False)

    write_plot_script(series, output_dir / 'plot.gp', config.name)
    return records
