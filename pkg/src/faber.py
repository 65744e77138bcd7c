"""Faber-Schauder hierarchical analysis on [0,1]^d and on the torus.

Level j = -1 carries point values (f(0), f(1) per coordinate on [0,1], f(0) on the
torus); level j >= 0 carries -1/2 times the second difference of f at 2^-j k with
step 2^-j-1. Coefficients are computed by sampling f once on the dyadic grid of
level J+1 and applying the univariate transform along every axis in turn.

The dyadic norms are returned in powered form (p-th power of each level quantity)
so that they stay exact rationals; ``LevelNormReport.root_digits`` takes the root
for display only.
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from pathlib import Path

import mpmath
import numpy as np
import pandas as pd
from tqdm import tqdm

from exact_core import as_rational, rational_to_digits, sqrt_to_digits
from utils import BudgetExceededError

FABER_MAX_SAMPLES = 2 ** 22
HALF = Fraction(1, 2)


class FaberCoefficients:
    """Coefficients d_{j,k} for level vectors j with entries in {-1, ..., max_level}.

    ``entries`` maps (j, k) pairs of d-tuples to Rationals; missing entries are zero.
    """
    periodic = False
    domain_kind = 'nonperiodic'

    def __init__(self, d, max_level, entries=None):
        if d < 1:
            raise ValueError(f'Dimension must be >= 1, got {d}')
        if max_level < -1:
            raise ValueError(f'max_level must be >= -1, got {max_level}')
        self.d = d
        self.max_level = max_level
        self.entries = {}
        for (j, k), value in (entries or {}).items():
            j, k = tuple(j), tuple(k)
            self.check_index(j, k)
            self.entries[(j, k)] = as_rational(value)

    @classmethod
    def translations(cls, j):
        """The index set D_j (D_j^per for the periodic container)."""
        if j == -1:
            return range(1) if cls.periodic else range(2)
        if j >= 0:
            return range(2 ** j)
        raise ValueError(f'Level {j} is below -1')

    def check_index(self, j, k):
        if len(j) != self.d or len(k) != self.d:
            raise ValueError(f'Index ({j}, {k}) does not have dimension {self.d}')
        for level, translation in zip(j, k):
            if level > self.max_level:
                raise ValueError(f'Level {level} exceeds max_level {self.max_level}')
            if translation not in self.translations(level):
                raise ValueError(f'Translation {translation} not in the {self.domain_kind} '
                                 f'index set of level {level}')

    def level_vectors(self):
        return product(range(-1, self.max_level + 1), repeat=self.d)

    def translation_vectors(self, j):
        return product(*(self.translations(level) for level in j))

    def __getitem__(self, index):
        j, k = index
        return self.entries.get((tuple(j), tuple(k)), Fraction(0))

    def __len__(self):
        return len(self.entries)

    def nonzero(self):
        return {index: value for index, value in self.entries.items() if value}

    def is_complete(self):
        return all((j, k) in self.entries for j in self.level_vectors() for k in self.translation_vectors(j))

    def __eq__(self, other):
        if not isinstance(other, FaberCoefficients):
            return NotImplemented
        return (type(self) is type(other) and self.d == other.d
                and self.max_level == other.max_level and self.nonzero() == other.nonzero())

    def __repr__(self):
        return (f'{type(self).__name__}(d={self.d}, max_level={self.max_level}, '
                f'{len(self.nonzero())} nonzero of {len(self.entries)})')

    def scaled(self, factor):
        factor = as_rational(factor)
        return type(self)(self.d, self.max_level, {index: factor * value for index, value in self.entries.items()})

    def __add__(self, other):
        if type(self) is not type(other) or self.d != other.d:
            raise ValueError('Can only add coefficients of the same kind and dimension')
        entries = dict(self.entries)
        for index, value in other.entries.items():
            entries[index] = entries.get(index, Fraction(0)) + value
        return type(self)(self.d, max(self.max_level, other.max_level), entries)


class NonperiodicFaberCoefficients(FaberCoefficients):
    periodic = False
    domain_kind = 'nonperiodic'


class PeriodicFaberCoefficients(FaberCoefficients):
    periodic = True
    domain_kind = 'periodic'


def coefficients_class(domain_kind):
    if domain_kind == 'nonperiodic':
        return NonperiodicFaberCoefficients
    if domain_kind == 'periodic':
        return PeriodicFaberCoefficients
    raise ValueError(f'Unknown domain kind {domain_kind!r}, expected nonperiodic or periodic')


def faber_hat(j, k, x, periodic=False):
    """Value of v_{j,k}(x) (or v^per_{j,k}(x) when ``periodic``)."""
    x = as_rational(x)
    if not 0 <= x <= 1:
        raise ValueError(f'x={x} outside [0, 1]')
    kind = PeriodicFaberCoefficients if periodic else NonperiodicFaberCoefficients
    if j < -1 or k not in kind.translations(j):
        raise ValueError(f'Invalid {kind.domain_kind} Faber index (j={j}, k={k})')
    if periodic:
        x = x % 1
    if j == -1:
        if periodic:
            return Fraction(1)
        return max(Fraction(0), 1 - abs(x - k))
    scale = 2 ** (j + 1)
    left = Fraction(k, 2 ** j)
    right = Fraction(k + 1, 2 ** j)
    if x < left or x > right:
        return Fraction(0)
    return scale * min(x - left, right - x)


def _axis_positions(J, periodic):
    """Position of every (j, k) along one axis of the dense coefficient array."""
    positions = [(-1, 0)] if periodic else [(-1, 0), (-1, 1)]
    for j in range(J + 1):
        positions.extend((j, k) for k in range(2 ** j))
    return positions


def _transform_axis(samples, axis, J, periodic):
    a = np.moveaxis(samples, axis, -1)
    G = a.shape[-1]
    out = np.empty(a.shape, dtype=object)
    out[..., 0] = a[..., 0]
    offset = 1
    if not periodic:
        out[..., 1] = a[..., G - 1]
        offset = 2
    for j in range(J + 1):
        span = 2 ** (J + 1 - j)
        start = np.arange(2 ** j) * span
        middle = start + span // 2
        end = start + span
        if periodic:
            end = end % G
        position = offset + 2 ** j - 1
        out[..., position:position + 2 ** j] = (a[..., middle] * 2 - a[..., start] - a[..., end]) * HALF
    return np.moveaxis(out, -1, axis)


def sample_grid(f, d, J, periodic=False, progress=False):
    """Values of f on the level-(J+1) dyadic grid as an object array of Rationals."""
    G = 2 ** (J + 1) if periodic else 2 ** (J + 1) + 1
    if G ** d > FABER_MAX_SAMPLES:
        raise BudgetExceededError(f'Faber analysis refuses {G}^{d} samples (J={J}, d={d})')
    grid = [Fraction(g, 2 ** (J + 1)) for g in range(G)]
    samples = np.empty((G,) * d, dtype=object)
    for index in tqdm(np.ndindex(samples.shape), total=G ** d, disable=not progress, desc='sampling'):
        samples[index] = as_rational(f(tuple(grid[g] for g in index)))
    return samples


def analyze(f, d, J, domain_kind='nonperiodic', progress=False):
    """Faber coefficients of f for all levels up to J in every coordinate.

    Parameters
    ----------
    f: callable
        Takes a d-tuple of Rationals and returns a rational value.
    d: int
        Dimension.
    J: int
        Largest level per coordinate, J >= -1.
    domain_kind: str
        'nonperiodic' ([0,1]^d) or 'periodic' (torus; samples wrap modulo 1).
    progress: bool
        Show a tqdm bar while sampling.

    Returns
    -------
    FaberCoefficients
        Complete table, zero entries included.
    """
    container = coefficients_class(domain_kind)
    if J < -1:
        raise ValueError(f'J must be >= -1, got {J}')
    periodic = container.periodic
    samples = sample_grid(f, d, J, periodic, progress)
    for axis in range(d):
        samples = _transform_axis(samples, axis, J, periodic)
    positions = _axis_positions(J, periodic)
    entries = {}
    for index in np.ndindex(samples.shape):
        pairs = [positions[p] for p in index]
        entries[(tuple(j for j, _ in pairs), tuple(k for _, k in pairs))] = samples[index]
    return container(d, J, entries)


def reconstruct(c, x):
    """sum_{j,k} d_{j,k} v_{j,k}(x) over the stored coefficients."""
    x = tuple(as_rational(q) for q in x)
    if len(x) != c.d:
        raise ValueError(f'Point of dimension {len(x)} for {c.d}-dimensional coefficients')
    total = Fraction(0)
    for (j, k), value in c.entries.items():
        if not value:
            continue
        term = value
        for level, translation, q in zip(j, k, x):
            term *= faber_hat(level, translation, q, c.periodic)
            if not term:
                break
        total += term
    return total


@dataclass
class LevelNormReport:
    """Per-level quantities (p-th powers) of a dyadic B^2_{p,inf} norm truncated at max_level."""
    p: int
    max_level: int
    levels: dict
    sup: Fraction
    argmax: tuple

    def root_digits(self, digits=16):
        """The truncated norm sup_j (...)^(1/p) as a decimal string."""
        if self.p == 1:
            return rational_to_digits(self.sup, digits)
        if self.p == 2:
            return sqrt_to_digits(self.sup, digits)
        with mpmath.workdps(digits + 10):
            root = mpmath.root(mpmath.mpf(self.sup.numerator) / self.sup.denominator, self.p)
            return mpmath.nstr(root, digits + 1, strip_zeros=False)

    def to_frame(self):
        rows = [{'j': ' '.join(str(level) for level in j), 'level_sum': sum(abs(level) for level in j),
                 'numerator': value.numerator, 'denominator': value.denominator}
                for j, value in sorted(self.levels.items())]
        return pd.DataFrame(rows, columns=['j', 'level_sum', 'numerator', 'denominator'])


def level_norms(c, p):
    """2^(|j|_1 (2p - 1)) sum_k |d_{j,k}|^p for every level vector j, with their sup.

    |j|_1 = |j_1| + ... + |j_d|, so a coordinate at level -1 weighs like level 1.
    Levels are visited in lexicographic order; ``argmax`` is the
    first level attaining the sup.
    """
    if p < 1:
        raise ValueError(f'p must be >= 1, got {p}')
    sums = {}
    for (j, _), value in c.entries.items():
        sums[j] = sums.get(j, Fraction(0)) + abs(value) ** p
    levels = {}
    for j in c.level_vectors():
        weight = Fraction(2) ** (sum(abs(level) for level in j) * (2 * p - 1))
        levels[j] = weight * sums.get(j, Fraction(0))
    sup, argmax = Fraction(0), None
    for j in sorted(levels):
        if argmax is None or levels[j] > sup:
            sup, argmax = levels[j], j
    return LevelNormReport(p, c.max_level, levels, sup, argmax)


def dyadic_h2_norm(c):
    """Squared level quantities 2^(3|j|_1) sum_k d_{j,k}^2 and their sup."""
    return level_norms(c, 2)


def besov_1inf_norm(c):
    """Level quantities 2^|j|_1 sum_k |d_{j,k}| and their sup."""
    return level_norms(c, 1)


def dump_coefficients(c, coefficient_path):
    """Write coefficients as CSV: j1..jd, k1..kd, numerator, denominator."""
    rows = []
    for (j, k), value in sorted(c.entries.items()):
        rows.append(list(j) + list(k) + [value.numerator, value.denominator])
    columns = ([f'j{i + 1}' for i in range(c.d)] + [f'k{i + 1}' for i in range(c.d)]
               + ['numerator', 'denominator'])
    coefficient_path = Path(coefficient_path)
    coefficient_path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=columns).to_csv(coefficient_path, index=False)
    return coefficient_path
