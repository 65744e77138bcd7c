"""The tent transform x -> |2x - 1| on points, on functions and on Faber coefficients."""
from dataclasses import dataclass
from itertools import product

from exact_core import as_rational
from faber import NonperiodicFaberCoefficients, PeriodicFaberCoefficients
from net_core import PointSet


@dataclass(frozen=True)
class TentMap:
    """Coordinatewise tent map on [0,1]^d."""
    d: int

    def __call__(self, y):
        if len(y) != self.d:
            raise ValueError(f'Point of dimension {len(y)} for a {self.d}-dimensional tent map')
        return tent_point(y)


def tent_point(y):
    """(|2 y_1 - 1|, ..., |2 y_d - 1|) for coordinates in [0, 1]."""
    out = []
    for q in y:
        q = as_rational(q)
        if not 0 <= q <= 1:
            raise ValueError(f'Coordinate {q} outside [0, 1]')
        out.append(abs(2 * q - 1))
    return tuple(out)


def tent_pullback(P):
    """Image of every point under the tent map; multiplicity and order are kept."""
    points = tuple(tent_point(point) for point in P.points)
    return PointSet(P.d, points, f'{P.label} tent'.strip())


def tent_function(f):
    """The composed evaluator x -> f(|2x - 1|)."""
    def composed(x):
        return f(tent_point(x))
    return composed


def _univariate_sources(j, k):
    """Input coefficients (sign, level, translation) making up output coefficient (j, k)."""
    if j == -1:
        return ((1, -1, 1),)
    if j == 0:
        return ((1, -1, 0), (-1, -1, 1))
    half = 2 ** (j - 1)
    if k < half:
        return ((1, j - 1, half - k - 1),)
    return ((1, j - 1, k - half),)


def tent_coefficient_map(c):
    """Periodic Faber coefficients of f(|2x - 1|) from the nonperiodic ones of f.

    Each output coefficient is an input coefficient moved to the next level (with
    the translations of the left half mirrored), except d_{0,0} which is
    d_{-1,0} - d_{-1,1}. Input levels up to J give output levels up to J + 1.
    """
    if not isinstance(c, NonperiodicFaberCoefficients):
        raise ValueError('tent_coefficient_map needs nonperiodic coefficients')
    if not c.is_complete():
        raise ValueError(f'Coefficients are not complete up to level {c.max_level}')
    out = PeriodicFaberCoefficients(c.d, c.max_level + 1)
    entries = {}
    for j in out.level_vectors():
        for k in out.translation_vectors(j):
            total = 0
            for combination in product(*(_univariate_sources(level, translation) for level, translation in zip(j, k))):
                sign = 1
                for factor_sign, _, _ in combination:
                    sign *= factor_sign
                source = (tuple(level for _, level, _ in combination),
                          tuple(translation for _, _, translation in combination))
                total += sign * c.entries[source]
            entries[(j, k)] = total
    return PeriodicFaberCoefficients(c.d, c.max_level + 1, entries)
