"""Worst-case quadrature error in the Sobolev space of dominating mixed smoothness 2.

Three equivalent norms on H^2([0,1]) give the reproducing kernels

    K1(x, y) = 1 + B1(x) B1(y) + B2(x) B2(y) / 4 - B4(|x - y|) / 24
    K2(x, y) = 1 - x - y + 2xy + (x - y)_+^3 / 6 - x (1 - y) (x^2 - 2y + y^2) / 6
    K3(x, y) = 1 + xy + min^3 / 3 - (x + y) min^2 / 2 + xy min

and the squared worst-case error of the equal-weight rule on X is

    C^d - 2/N sum_x prod_i m(x_i) + 1/N^2 sum_{x,y} prod_i K(x_i, y_i)

with C = 1, 61/120, 13/10 and m the kernel mean (m = 1 for K1).

The double sum is the expensive part. When every coordinate is a/D for one common
denominator D <= 2^62 it is evaluated over the integers: D^4 K(a/D, b/D) is an
integer polynomial in a, b, D, evaluated modulo several 31-bit primes with numpy
int64 arrays and recombined with the Chinese remainder theorem. Row blocks are
fixed before dispatch to joblib, so the result does not depend on ``n_jobs``.
Otherwise the sum runs over Fractions, or over 80-digit mpmath floats in
``fixed60`` mode.
"""
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import mpmath
import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from exact_core import as_rational, common_denominator, crt_signed, residue_primes, sqrt_to_digits

RESIDUE_MAX_DENOMINATOR = 2 ** 62
BLOCK_ELEMENTS = 2 ** 20
EXACT_AUTO_MAX_POINTS = 2 ** 13
FIXED_DPS = 80
DEFAULT_DIGITS = 30


class KernelId(Enum):
    K1 = 'K1'
    K2 = 'K2'
    K3 = 'K3'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError as error:
            raise ValueError(f'Unknown kernel {value!r}, expected K1, K2 or K3') from error


# C^d is the double integral of the kernel
INITIAL_TERM = {KernelId.K1: Fraction(1), KernelId.K2: Fraction(61, 120), KernelId.K3: Fraction(13, 10)}

# D^4 K(a/D, b/D) = P(a, b, D) / SCALE, |P| <= BOUND D^4
KERNEL_SCALE = {KernelId.K1: 720, KernelId.K2: 6, KernelId.K3: 6}
KERNEL_BOUND = {KernelId.K1: 1024, KernelId.K2: 64, KernelId.K3: 64}


def bernoulli(poly, x):
    """B1, B2 or B4 at x; ``poly`` is 'B1', 'B2', 'B4' or the integer order."""
    order = int(str(poly).upper().lstrip('B'))
    x = as_rational(x)
    if order == 1:
        return x - Fraction(1, 2)
    if order == 2:
        return x * x - x + Fraction(1, 6)
    if order == 4:
        return x ** 4 - 2 * x ** 3 + x ** 2 - Fraction(1, 30)
    raise ValueError(f'Only B1, B2 and B4 are available, got {poly!r}')


# The closed forms below only use +, -, * and division by integers so that they
# evaluate Fractions, mpmath floats and the polynomials of kernel_mean_check.

def _k1_form(x, y, dist):
    b1x, b1y = 2 * x - 1, 2 * y - 1
    b2x, b2y = 6 * x * x - 6 * x + 1, 6 * y * y - 6 * y + 1
    b4 = 30 * dist ** 4 - 60 * dist ** 3 + 30 * dist ** 2 - 1
    return 1 + b1x * b1y / 4 + b2x * b2y / 144 - b4 / 720


def _k2_form(x, y, positive_part):
    return (1 - x - y + 2 * x * y + positive_part ** 3 / 6
            - x * (1 - y) * (x * x - 2 * y + y * y) / 6)


def _k3_form(x, y, minimum):
    return 1 + x * y + minimum ** 3 / 3 - (x + y) * minimum * minimum / 2 + x * y * minimum


def _evaluate(kernel, x, y, zero):
    if kernel is KernelId.K1:
        return _k1_form(x, y, abs(x - y))
    if kernel is KernelId.K2:
        return _k2_form(x, y, x - y if x > y else zero)
    return _k3_form(x, y, min(x, y))


def kernel1d(kernel, x, y):
    """Exact value of the univariate kernel at (x, y) in [0, 1]^2."""
    kernel = KernelId.parse(kernel)
    x, y = as_rational(x), as_rational(y)
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise ValueError(f'Kernel arguments ({x}, {y}) outside [0, 1]')
    return _evaluate(kernel, x, y, Fraction(0))


def kernel_tensor(kernel, x, y):
    """prod_i K(x_i, y_i)."""
    if len(x) != len(y):
        raise ValueError(f'Dimension mismatch: {len(x)} vs {len(y)}')
    kernel = KernelId.parse(kernel)
    value = Fraction(1)
    for xi, yi in zip(x, y):
        value *= kernel1d(kernel, xi, yi)
    return value


def kernel_numerator(kernel, a, b, D):
    """The integer SCALE * D^4 * K(a/D, b/D), computed with Python ints."""
    kernel = KernelId.parse(kernel)
    if kernel is KernelId.K1:
        u_a = 6 * a * a - 6 * a * D + D * D
        u_b = 6 * b * b - 6 * b * D + D * D
        c = abs(a - b)
        w = 30 * c * c * (c - D) ** 2 - D ** 4
        return 720 * D ** 4 + 180 * D * D * (2 * a - D) * (2 * b - D) + 5 * u_a * u_b - w
    if kernel is KernelId.K2:
        r = max(a - b, 0)
        return (6 * D ** 4 - 6 * (a + b) * D ** 3 + 12 * a * b * D * D + D * r ** 3
                - a * (D - b) * (a * a - 2 * b * D + b * b))
    m = min(a, b)
    return 6 * D ** 4 + 6 * a * b * D * D + D * (2 * m ** 3 - 3 * (a + b) * m * m + 6 * a * b * m)


def single_sum_factor(kernel, x):
    """Closed form of the kernel mean, integral of K(x, y) over y."""
    kernel = KernelId.parse(kernel)
    x = as_rational(x)
    if kernel is KernelId.K1:
        return Fraction(1)
    if kernel is KernelId.K2:
        return Fraction(1, 2) + x / 24 - x ** 3 / 12 + x ** 4 / 24
    return 1 + x / 2 + x ** 2 / 4 - x ** 3 / 6 + x ** 4 / 24


class _RationalPolynomial:
    """Polynomial in one variable with Fraction coefficients, lowest degree first."""

    def __init__(self, coefficients):
        self.coefficients = [Fraction(c) for c in coefficients] or [Fraction(0)]

    @staticmethod
    def _coerce(other):
        if isinstance(other, _RationalPolynomial):
            return other
        return _RationalPolynomial([as_rational(other)])

    def __add__(self, other):
        other = self._coerce(other)
        size = max(len(self.coefficients), len(other.coefficients))
        padded = [self.coefficients[i] if i < len(self.coefficients) else 0 for i in range(size)]
        return _RationalPolynomial([c + (other.coefficients[i] if i < len(other.coefficients) else 0)
                                    for i, c in enumerate(padded)])

    __radd__ = __add__

    def __neg__(self):
        return _RationalPolynomial([-c for c in self.coefficients])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        product = [Fraction(0)] * (len(self.coefficients) + len(other.coefficients) - 1)
        for i, c in enumerate(self.coefficients):
            for j, e in enumerate(other.coefficients):
                product[i + j] += c * e
        return _RationalPolynomial(product)

    __rmul__ = __mul__

    def __truediv__(self, divisor):
        divisor = as_rational(divisor)
        return _RationalPolynomial([c / divisor for c in self.coefficients])

    def __pow__(self, exponent):
        result = _RationalPolynomial([1])
        for _ in range(exponent):
            result = result * self
        return result

    def integrate(self, lower, upper):
        total = Fraction(0)
        for degree, c in enumerate(self.coefficients):
            total += c * (upper ** (degree + 1) - lower ** (degree + 1)) / (degree + 1)
        return total


def kernel_mean_check(kernel, x):
    """Integral of K(x, y) over y in [0, 1] by exact antidifferentiation.

    The kernel is a polynomial in y on [0, x] and on [x, 1]; both pieces are
    integrated symbolically. Used to validate ``single_sum_factor``.
    """
    kernel = KernelId.parse(kernel)
    x = as_rational(x)
    if not 0 <= x <= 1:
        raise ValueError(f'x={x} outside [0, 1]')
    y = _RationalPolynomial([0, 1])
    zero = _RationalPolynomial([0])
    if kernel is KernelId.K1:
        below, above = _k1_form(x, y, x - y), _k1_form(x, y, y - x)
    elif kernel is KernelId.K2:
        below, above = _k2_form(x, y, x - y), _k2_form(x, y, zero)
    else:
        below, above = _k3_form(x, y, y), _k3_form(x, y, x + zero)
    return below.integrate(Fraction(0), x) + above.integrate(x, Fraction(1))


@dataclass
class WceResult:
    """Squared worst-case error of one point set and its decimal square root."""
    squared_error: Fraction
    error_digits: str
    kernel: KernelId
    N: int
    d: int
    exact: bool = True
    engine: str = 'residue'

    def __post_init__(self):
        if self.exact and self.squared_error < 0:
            raise ArithmeticError(f'Negative squared worst-case error {self.squared_error}')

    @property
    def error(self):
        return float(self.error_digits)


def _kernel_residues(kernel, a, b, branch, D, p):
    """SCALE * D^4 * K(a/D, b/D) mod p for a row block and a column range.

    ``a`` has shape (B, 1), ``b`` shape (1, M); ``branch`` holds the exact int64
    |a - b|, (a - b)_+ or min(a, b). Every product of two residues stays below 2^62.
    """
    ap, bp = a % p, b % p
    Dp = D % p
    D2 = Dp * Dp % p
    D4 = D2 * D2 % p
    if kernel is KernelId.K1:
        t2 = (180 * D2 % p) * ((2 * ap - Dp) % p) % p * ((2 * bp - Dp) % p) % p
        u_a = (ap * ap % p * 6 - ap * Dp % p * 6 + D2) % p
        u_b = (bp * bp % p * 6 - bp * Dp % p * 6 + D2) % p
        t3 = u_a * 5 % p * u_b % p
        c = branch % p
        e = (c - Dp) % p
        w = (c * c % p * 30 % p * (e * e % p) - D4) % p
        return (720 * D4 + t2 + t3 - w) % p
    if kernel is KernelId.K2:
        D3 = D2 * Dp % p
        linear = (6 * D3 % p) * ((ap + bp) % p) % p
        quadratic = (12 * D2 % p) * ap % p * bp % p
        r = branch % p
        cubic = r * r % p * r % p * Dp % p
        g = (Dp - bp) % p
        q = (bp * bp % p - (2 * Dp % p) * bp % p) % p
        last = ap * g % p * ((ap * ap % p + q) % p) % p
        return (6 * D4 - linear + quadratic + cubic - last) % p
    m = branch % p
    m2 = m * m % p
    ab = ap * bp % p
    inner = (2 * (m2 * m % p) - (3 * ((ap + bp) % p) % p) * m2 % p + ab * 6 % p * m % p) % p
    return (6 * D4 + (6 * D2 % p) * ab % p + inner * Dp % p) % p


def _branch(kernel, a, b):
    if kernel is KernelId.K1:
        return np.abs(a - b)
    if kernel is KernelId.K2:
        return np.maximum(a - b, 0)
    return np.minimum(a, b)


def _residue_block(kernel, numerators, start, stop, D, primes):
    """Residues of sum_{i in [start, stop), j >= start} w_ij prod_l P(a_il, a_jl), w = 2 above the diagonal."""
    N, d = numerators.shape
    rows = np.arange(start, stop)[:, None]
    cols = np.arange(start, N)[None, :]
    weights = (2 * (cols > rows) + (cols == rows)).astype(np.int64)
    a = numerators[start:stop]
    b = numerators[start:]
    branches = [_branch(kernel, a[:, i, None], b[None, :, i]) for i in range(d)]
    residues = []
    for p in primes:
        product = None
        for i in range(d):
            value = _kernel_residues(kernel, a[:, i, None], b[None, :, i], branches[i], D, p)
            product = value if product is None else product * value % p
        residues.append(int((weights * product).sum() % p))
    return residues


def _row_blocks(N):
    rows_per_block = max(1, BLOCK_ELEMENTS // N)
    return [(start, min(start + rows_per_block, N)) for start in range(0, N, rows_per_block)]


def pair_sum_residue(kernel, points, n_jobs=1, progress=False):
    """sum_{x,y} K^d(x, y) exactly via residues; needs a common denominator <= 2^62."""
    kernel = KernelId.parse(kernel)
    N, d = len(points), len(points[0])
    D = common_denominator(q for point in points for q in point)
    if D > RESIDUE_MAX_DENOMINATOR:
        raise ValueError(f'Common denominator {D} exceeds {RESIDUE_MAX_DENOMINATOR}')
    numerators = np.array([[q.numerator * (D // q.denominator) for q in point] for point in points],
                          dtype=np.int64)
    bound = N * N * (KERNEL_BOUND[kernel] * D ** 4) ** d
    primes = residue_primes(bound)
    blocks = _row_blocks(N)
    partials = Parallel(n_jobs=n_jobs)(
        delayed(_residue_block)(kernel, numerators, start, stop, D, primes)
        for start, stop in tqdm(blocks, disable=not progress, desc=f'{kernel.value} pair sum'))
    residues = [sum(partial[index] for partial in partials) % p for index, p in enumerate(primes)]
    total = crt_signed(residues, primes)
    return Fraction(total, (KERNEL_SCALE[kernel] * D ** 4) ** d)


def _fraction_block(kernel, points, start, stop):
    total = Fraction(0)
    for i in range(start, stop):
        x = points[i]
        total += kernel_tensor(kernel, x, x)
        for j in range(i + 1, len(points)):
            total += 2 * kernel_tensor(kernel, x, points[j])
    return total


def pair_sum_fraction(kernel, points, n_jobs=1, progress=False):
    """sum_{x,y} K^d(x, y) with Fractions, any denominators."""
    kernel = KernelId.parse(kernel)
    blocks = _row_blocks(len(points))
    partials = Parallel(n_jobs=n_jobs)(
        delayed(_fraction_block)(kernel, points, start, stop)
        for start, stop in tqdm(blocks, disable=not progress, desc=f'{kernel.value} pair sum'))
    return sum(partials, Fraction(0))


def _fixed_block(kernel, points, start, stop):
    with mpmath.workdps(FIXED_DPS):
        zero = mpmath.mpf(0)
        converted = [[mpmath.mpf(q.numerator) / q.denominator for q in point] for point in points]
        total = mpmath.mpf(0)
        for i in range(start, stop):
            for j in range(i, len(points)):
                value = mpmath.mpf(1)
                for xi, yi in zip(converted[i], converted[j]):
                    value *= _evaluate(kernel, xi, yi, zero)
                total += value if i == j else 2 * value
        return total


def _mpf_to_fraction(value):
    mantissa, exponent = value.man_exp
    if exponent >= 0:
        return Fraction(int(mantissa) * 2 ** int(exponent))
    return Fraction(int(mantissa), 2 ** int(-exponent))


def pair_sum_fixed(kernel, points, n_jobs=1, progress=False):
    """sum_{x,y} K^d(x, y) in 80-digit floating point; blocks are merged in order."""
    kernel = KernelId.parse(kernel)
    blocks = _row_blocks(len(points))
    partials = Parallel(n_jobs=n_jobs)(
        delayed(_fixed_block)(kernel, points, start, stop)
        for start, stop in tqdm(blocks, disable=not progress, desc=f'{kernel.value} pair sum (fixed)'))
    with mpmath.workdps(FIXED_DPS):
        total = mpmath.mpf(0)
        for partial in partials:
            total += partial
        return _mpf_to_fraction(total)


PAIR_SUM_ENGINES = {'residue': pair_sum_residue, 'fraction': pair_sum_fraction, 'fixed60': pair_sum_fixed}


def select_engine(points, mode='auto'):
    """Engine name for a point list under mode 'exact', 'fixed60' or 'auto'.

    The residue engine is exact and is used whenever the common denominator allows.
    Otherwise 'exact' falls back to Fractions, 'fixed60' to mpmath, and 'auto' to
    Fractions up to 2^13 points and mpmath above.
    """
    if mode not in ('exact', 'fixed60', 'auto'):
        raise ValueError(f'Unknown mode {mode!r}')
    D = common_denominator(q for point in points for q in point)
    if D <= RESIDUE_MAX_DENOMINATOR:
        return 'residue'
    if mode == 'exact' or (mode == 'auto' and len(points) <= EXACT_AUTO_MAX_POINTS):
        return 'fraction'
    return 'fixed60'


def wce_squared(kernel, P, digits=DEFAULT_DIGITS, mode='auto', n_jobs=1, engine=None, progress=False):
    """Squared worst-case error of the equal-weight rule on P.

    Parameters
    ----------
    kernel: KernelId or str
        K1, K2 or K3.
    P: PointSet or sequence of points
        Nonempty, rational coordinates in [0, 1].
    digits: int
        Fractional digits of ``error_digits``.
    mode: str
        'exact', 'fixed60' or 'auto', see ``select_engine``.
    n_jobs: int
        joblib workers for the pair sum; the result does not depend on it.
    engine: str or None
        Force 'residue', 'fraction' or 'fixed60'.
    progress: bool
        Show a tqdm bar over the pair-sum blocks.

    Returns
    -------
    WceResult
    """
    kernel = KernelId.parse(kernel)
    points = [tuple(as_rational(q) for q in point) for point in P]
    if not points:
        raise ValueError('Worst-case error of an empty point set')
    N, d = len(points), len(points[0])
    for point in points:
        if len(point) != d:
            raise ValueError('Points have different dimensions')
        for q in point:
            if not 0 <= q <= 1:
                raise ValueError(f'Coordinate {q} outside [0, 1]')

    engine = engine or select_engine(points, mode)
    if engine == 'fixed60' and mode != 'fixed60':
        warnings.warn(f'{N} points with large denominators: using the 60-digit fixed-point pair sum')
    pair_sum = PAIR_SUM_ENGINES[engine](kernel, points, n_jobs=n_jobs, progress=progress)

    single_sum = Fraction(0)
    for point in points:
        term = Fraction(1)
        for q in point:
            term *= single_sum_factor(kernel, q)
        single_sum += term

    squared = INITIAL_TERM[kernel] ** d - 2 * single_sum / N + pair_sum / (N * N)
    exact = engine != 'fixed60'
    if not exact and squared < 0:
        warnings.warn(f'Fixed-point squared error {float(squared):.3e} is below zero; reporting 0')
        squared = Fraction(0)
    return WceResult(squared, sqrt_to_digits(squared, digits), kernel, N, d, exact, engine)
