"""Exact arithmetic used by every other module.

Rationals are ``fractions.Fraction`` (always in lowest terms with a positive
denominator). GF(2) vectors are packed into Python integers, bit ``c`` holding
column ``c``, so that row operations are single XORs on arbitrary-length words.
Large exact sums are carried out over several 31-bit primes and recombined with
the Chinese remainder theorem (see ``residue_primes`` and ``crt_signed``).
"""
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

Rational = Fraction

# Residues below 2**31 keep every pairwise product below 2**62, inside int64.
RESIDUE_PRIME_CEILING = 2 ** 31


def as_rational(value):
    """Convert ints, strings such as ``'3/8'`` and Fractions to a Rational.

    Floats are refused: every coordinate and kernel argument must be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError('Booleans are not rationals')
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, 'numerator') and hasattr(value, 'denominator') and not isinstance(value, float):
        return Fraction(int(value.numerator), int(value.denominator))
    raise TypeError(f'Cannot convert {value!r} ({type(value).__name__}) to an exact rational')


def common_denominator(values):
    """Least common multiple of the denominators of ``values``."""
    lcm = 1
    for value in values:
        q = value.denominator
        lcm = lcm // gcd(lcm, q) * q
    return lcm


def sqrt_to_digits(x, digits):
    """Square root of a non-negative rational as a decimal string.

    Of the two candidates with ``digits`` fractional digits around sqrt(x), the one
    whose square is closer to x is returned (the smaller one on ties), so that
    ``|s**2 - x| <= 10**-digits * max(1, x)``.
    It deliberately does not round toward zero: truncation can break that bound
    for x < 1.

    Parameters
    ----------
    x: Rational
        Non-negative input.
    digits: int
        Number of digits after the decimal point, at least 1.

    Returns
    -------
    str
        For example ``sqrt_to_digits(Fraction(2), 5) == '1.41421'``.
    """
    x = as_rational(x)
    if x < 0:
        raise ValueError(f'Square root of negative value {x}')
    if digits < 1:
        raise ValueError(f'digits must be >= 1, got {digits}')
    scale = 10 ** (2 * digits)
    numerator, denominator = x.numerator * scale, x.denominator
    root = isqrt(numerator // denominator)
    if (root + 1) ** 2 * denominator - numerator < numerator - root * root * denominator:
        root += 1
    return _scaled_int_to_str(root, digits)


def rational_to_digits(x, digits):
    """Decimal rendering of a rational, truncated after ``digits`` fractional digits."""
    x = as_rational(x)
    if digits < 1:
        raise ValueError(f'digits must be >= 1, got {digits}')
    sign = '-' if x < 0 else ''
    x = abs(x)
    scaled = x.numerator * 10 ** digits // x.denominator
    return sign + _scaled_int_to_str(scaled, digits)


def _scaled_int_to_str(scaled, digits):
    integer_part, fractional_part = divmod(scaled, 10 ** digits)
    return f'{integer_part}.{fractional_part:0{digits}d}'


def pack_bits(bits):
    """Pack a sequence of 0/1 entries (or a '0'/'1' string) into an int, entry c -> bit c."""
    packed = 0
    for column, bit in enumerate(bits):
        bit = int(bit)
        if bit not in (0, 1):
            raise ValueError(f'Entry {bit!r} at column {column} is not a bit')
        packed |= bit << column
    return packed


def gf2_reduce(basis, row):
    """Reduce ``row`` against an XOR basis keyed by leading bit.

    ``basis`` maps the highest set bit of each basis vector to that vector. Returns
    the reduced row; zero means ``row`` lies in the span of the basis.
    """
    while row:
        top = row.bit_length() - 1
        pivot = basis.get(top)
        if pivot is None:
            return row
        row ^= pivot
    return 0


def rank_packed(rows):
    """GF(2) rank of rows already packed into ints."""
    basis = {}
    for row in rows:
        reduced = gf2_reduce(basis, row)
        if reduced:
            basis[reduced.bit_length() - 1] = reduced
    return len(basis)


def rank_gf2(rows):
    """GF(2) rank of a list of equal-length bit vectors.

    Parameters
    ----------
    rows: list of sequences of 0/1
        Vectors of identical length n >= 1 (lists, tuples, arrays or '0'/'1' strings).

    Returns
    -------
    int
        The rank; 0 for an empty list.
    """
    rows = list(rows)
    if not rows:
        return 0
    lengths = {len(row) for row in rows}
    if len(lengths) != 1:
        raise ValueError(f'Vectors have different lengths: {sorted(lengths)}')
    if lengths.pop() < 1:
        raise ValueError('Vectors must have length >= 1')
    return rank_packed(pack_bits(row) for row in rows)


@dataclass(frozen=True)
class BitMatrix:
    """m x n matrix over GF(2), row-major, each row packed into an int."""
    rows: tuple
    n_cols: int

    def __post_init__(self):
        if len(self.rows) < 1 or self.n_cols < 1:
            raise ValueError(f'BitMatrix needs m >= 1 and n >= 1, got {len(self.rows)}x{self.n_cols}')
        for index, row in enumerate(self.rows):
            if row < 0 or row >> self.n_cols:
                raise ValueError(f'Row {index} has bits beyond column {self.n_cols - 1}')

    @classmethod
    def from_strings(cls, lines):
        lines = [line.strip() for line in lines]
        widths = {len(line) for line in lines}
        if len(widths) != 1:
            raise ValueError(f'Rows have different widths: {sorted(widths)}')
        return cls(tuple(pack_bits(line) for line in lines), widths.pop())

    @classmethod
    def identity(cls, n):
        return cls(tuple(1 << r for r in range(n)), n)

    @classmethod
    def reversal(cls, n):
        """Anti-diagonal matrix: row r has its one in column n-1-r."""
        return cls(tuple(1 << (n - 1 - r) for r in range(n)), n)

    @property
    def m(self):
        return len(self.rows)

    @property
    def n(self):
        return self.n_cols

    def __getitem__(self, index):
        r, c = index
        if not (0 <= r < self.m and 0 <= c < self.n_cols):
            raise IndexError(f'Entry ({r}, {c}) outside a {self.m}x{self.n_cols} matrix')
        return (self.rows[r] >> c) & 1

    def to_strings(self):
        return [''.join(str((row >> c) & 1) for c in range(self.n_cols)) for row in self.rows]

    def leading(self, m, n):
        """Top-left m x n block."""
        if m > self.m or n > self.n_cols:
            raise ValueError(f'Cannot take a {m}x{n} block of a {self.m}x{self.n_cols} matrix')
        mask = (1 << n) - 1
        return BitMatrix(tuple(row & mask for row in self.rows[:m]), n)

    def rank(self):
        return rank_packed(self.rows)


def _is_prime(value):
    """Deterministic Miller-Rabin for values below 3.2e9 (bases 2, 3, 5, 7)."""
    if value < 2:
        return False
    for small in (2, 3, 5, 7):
        if value % small == 0:
            return value == small
    d, s = value - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for base in (2, 3, 5, 7):
        x = pow(base, d, value)
        if x in (1, value - 1):
            continue
        for _ in range(s - 1):
            x = x * x % value
            if x == value - 1:
                break
        else:
            return False
    return True


def residue_primes(bound):
    """Descending primes below 2**31 whose product exceeds ``2 * bound``.

    A signed integer of absolute value at most ``bound`` is then determined by its
    residues (see ``crt_signed``).
    """
    primes = []
    product = 1
    candidate = RESIDUE_PRIME_CEILING - 1
    while product <= 2 * bound:
        if _is_prime(candidate):
            primes.append(candidate)
            product *= candidate
        candidate -= 2
    return primes


def crt_signed(residues, primes):
    """Recombine residues into the unique integer of smallest absolute value."""
    modulus = 1
    for p in primes:
        modulus *= p
    value = 0
    for r, p in zip(residues, primes):
        partial = modulus // p
        value = (value + int(r) * partial * pow(partial, -1, p)) % modulus
    if value > modulus // 2:
        value -= modulus
    return value
