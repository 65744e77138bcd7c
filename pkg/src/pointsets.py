"""Classical two-dimensional point sets and digital shifts.

Fibonacci lattice, base-2 Halton (Hammersley-type) set, the Zaremba point set and
random digital shifts. Random shifts are drawn from numpy's ``default_rng``
(PCG64) seeded with the caller's integer seed, so replicate r of an experiment
seeded with s always uses seed s + r.
"""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from net_core import PointSet, dyadic_digits
from utils import BudgetExceededError

FIBONACCI_MAX_INDEX = 32


def van_der_corput(k, n):
    """Radical inverse of k in base 2 with n digits: sum_j kappa_j 2^(-j-1)."""
    if not 0 <= k < 2 ** n:
        raise ValueError(f'k={k} outside [0, 2^{n})')
    reversed_bits = int(format(k, f'0{n}b')[::-1], 2) if n else 0
    return Fraction(reversed_bits, 2 ** n)


def halton2d(n):
    """The 2^n points (k / 2^n, van_der_corput(k, n))."""
    if n < 1:
        raise ValueError(f'n must be >= 1, got {n}')
    N = 2 ** n
    points = tuple((Fraction(k, N), van_der_corput(k, n)) for k in range(N))
    return PointSet(2, points, f'halton n={n}')


def fibonacci_number(m):
    """F_m with F_1 = F_2 = 1."""
    if m < 1:
        raise ValueError(f'Fibonacci index must be >= 1, got {m}')
    previous, current = 0, 1
    for _ in range(m - 1):
        previous, current = current, previous + current
    return current


def fibonacci_lattice(m):
    """The F_m points (k / F_m, {k F_(m-1) / F_m})."""
    if m < 3:
        raise ValueError(f'fibonacci_lattice needs m >= 3, got {m}')
    if m > FIBONACCI_MAX_INDEX:
        raise BudgetExceededError(f'fibonacci_lattice refuses m={m} > {FIBONACCI_MAX_INDEX}')
    modulus = fibonacci_number(m)
    multiplier = fibonacci_number(m - 1)
    points = tuple((Fraction(k, modulus), Fraction(k * multiplier % modulus, modulus))
                   for k in range(modulus))
    return PointSet(2, points, f'fibonacci m={m} N={modulus}')


@dataclass(frozen=True)
class DigitalShift:
    """Per coordinate, n binary digits sigma_1 ... sigma_n XORed onto a point's digits."""
    d: int
    n: int
    shift_digits: tuple

    def __post_init__(self):
        if len(self.shift_digits) != self.d:
            raise ValueError(f'Expected {self.d} digit vectors, got {len(self.shift_digits)}')
        for digits in self.shift_digits:
            if len(digits) != self.n or set(digits) - {0, 1}:
                raise ValueError(f'Shift digits {digits} are not {self.n} bits')

    @property
    def masks(self):
        """sigma as integers: digit position p (1-indexed) is bit n - p."""
        return tuple(int(''.join(str(bit) for bit in digits), 2) for digits in self.shift_digits)

    def to_string(self):
        return ' '.join(''.join(str(bit) for bit in digits) for digits in self.shift_digits)


def zaremba_digits(n):
    """sigma = 0.1010...: ones at odd 1-indexed positions."""
    return tuple(1 if position % 2 else 0 for position in range(1, n + 1))


def apply_digital_shift(P, shift):
    """XOR the n binary digits of every coordinate with the shift's digits."""
    if P.d != shift.d:
        raise ValueError(f'Shift of dimension {shift.d} applied to a {P.d}-dimensional set')
    scale = 2 ** shift.n
    masks = shift.masks
    points = tuple(tuple(Fraction(dyadic_digits(q, shift.n) ^ mask, scale) for q, mask in zip(point, masks))
                   for point in P.points)
    return PointSet(P.d, points, f'{P.label} shifted {shift.to_string()}'.strip())


def zaremba_shift(P, n=None):
    """Flip every second digit of the y-coordinate, starting with the first.

    n defaults to log2 of the number of points, as for ``halton2d(n)``.
    """
    if P.d != 2:
        raise ValueError(f'zaremba_shift needs a 2-dimensional set, got d={P.d}')
    if n is None:
        n = len(P).bit_length() - 1
    shift = DigitalShift(2, n, ((0,) * n, zaremba_digits(n)))
    return apply_digital_shift(P, shift).relabel(f'zaremba n={n}')


def random_shift(d, n, seed):
    """n independent fair bits per coordinate from ``np.random.default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(d, n))
    return DigitalShift(d, n, tuple(tuple(int(bit) for bit in row) for row in bits))
