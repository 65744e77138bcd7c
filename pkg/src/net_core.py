"""Digital nets in base 2 from generator matrices.

Point k of the net has i-th coordinate sum_r kappa_r 2^-r where kappa = C_i kappa(k)
over GF(2) and kappa(k) holds the binary digits of k, least significant first.
Also contains digital interlacing of order alpha (on points and on matrices), digit
truncation, the sequence-to-net conversion and two certifications of the quality
parameter t: exhaustive search over generator-matrix rows (``minimal_t``) and
direct counting in elementary dyadic boxes (``elementary_box_t``).
"""
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import pandas as pd

from exact_core import BitMatrix, as_rational, gf2_reduce
from utils import BudgetExceededError, ConfigError

# alpha * n above this is refused by minimal_t
MINIMAL_T_MAX_DIGITS = 24
MINIMAL_T_MAX_NODES = 5_000_000


@dataclass(frozen=True)
class GeneratorMatrixSet:
    """d generator matrices over GF(2), each of shape (alpha * n) x n."""
    d: int
    n: int
    alpha: int
    matrices: tuple

    def __post_init__(self):
        if self.d < 1 or self.n < 1 or self.alpha < 1:
            raise ValueError(f'Need d, n, alpha >= 1, got d={self.d}, n={self.n}, alpha={self.alpha}')
        if len(self.matrices) != self.d:
            raise ValueError(f'Expected {self.d} matrices, got {len(self.matrices)}')
        for i, matrix in enumerate(self.matrices):
            if matrix.m != self.alpha * self.n or matrix.n != self.n:
                raise ValueError(f'Matrix {i + 1} has shape {matrix.m}x{matrix.n}, '
                                 f'expected {self.alpha * self.n}x{self.n}')

    @property
    def n_points(self):
        return 2 ** self.n

    def leading(self, n):
        """Restrict every matrix to its leading (alpha * n) x n block.

        For matrices of a digital sequence this gives the net of its first 2^n points.
        """
        if not 1 <= n <= self.n:
            raise ValueError(f'Cannot restrict {self.n}-digit matrices to n={n}')
        return GeneratorMatrixSet(self.d, n, self.alpha,
                                  tuple(matrix.leading(self.alpha * n, n) for matrix in self.matrices))

    def first(self, count):
        """Keep only the first ``count`` matrices."""
        if not 1 <= count <= self.d:
            raise ValueError(f'Cannot keep {count} of {self.d} matrices')
        return GeneratorMatrixSet(count, self.n, self.alpha, self.matrices[:count])


@dataclass(frozen=True)
class PointSet:
    """Ordered multiset of points with exact rational coordinates in [0, 1]."""
    d: int
    points: tuple
    label: str = ''

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f'Dimension must be >= 1, got {self.d}')
        for index, point in enumerate(self.points):
            if len(point) != self.d:
                raise ValueError(f'Point {index} has {len(point)} coordinates, expected {self.d}')
            for q in point:
                if not 0 <= q <= 1:
                    raise ValueError(f'Point {index} has coordinate {q} outside [0, 1]')

    @classmethod
    def from_rows(cls, rows, label=''):
        """Build from any iterable of coordinate sequences (ints, strings or Fractions)."""
        points = tuple(tuple(as_rational(q) for q in row) for row in rows)
        if not points:
            raise ValueError('Cannot infer the dimension of an empty point set')
        return cls(len(points[0]), points, label)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        return self.points[index]

    def column(self, i):
        return [point[i] for point in self.points]

    def relabel(self, label):
        return PointSet(self.d, self.points, label)

    def to_frame(self):
        """One row per point, coordinates written as exact ``numerator/denominator`` strings."""
        columns = {'k': range(len(self.points))}
        for i in range(self.d):
            columns[f'x{i + 1}'] = [str(point[i]) for point in self.points]
        return pd.DataFrame(columns)


def load_generator_matrices(matrix_path):
    """Read a generator-matrix file.

    Line 1 holds ``d n alpha``; then, for each matrix, exactly alpha * n lines of n
    characters from {0, 1}, row 1 (the most significant output digit) first.
    Character c of a row multiplies digit c of k, least significant digit first.
    Blank lines and ``#`` comments may separate matrices but not interrupt one.
    """
    matrix_path = Path(matrix_path)
    try:
        lines = matrix_path.read_text(encoding='utf-8').splitlines()
    except FileNotFoundError as error:
        raise ConfigError(f'No generator-matrix file {matrix_path}') from error

    header_index = next((index for index, line in enumerate(lines)
                         if line.strip() and not line.lstrip().startswith('#')), None)
    if header_index is None:
        raise ConfigError(f'{matrix_path}: empty generator-matrix file')
    try:
        d, n, alpha = (int(token) for token in lines[header_index].split())
    except ValueError as error:
        raise ConfigError(f'{matrix_path}: header must be "d n alpha", got {lines[header_index]!r}') from error
    if d < 1 or n < 1 or alpha < 1:
        raise ConfigError(f'{matrix_path}: d, n, alpha must be >= 1')

    rows_per_matrix = alpha * n
    matrices, current = [], []
    for line_number, line in enumerate(lines[header_index + 1:], start=header_index + 2):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            if current:
                raise ConfigError(f'{matrix_path}:{line_number}: blank line or comment inside matrix {len(matrices) + 1}')
            continue
        if len(stripped) != n or set(stripped) - {'0', '1'}:
            raise ConfigError(f'{matrix_path}:{line_number}: expected {n} characters from {{0,1}}, got {stripped!r}')
        current.append(stripped)
        if len(current) == rows_per_matrix:
            matrices.append(BitMatrix.from_strings(current))
            current = []
    if current or len(matrices) != d:
        raise ConfigError(f'{matrix_path}: expected {d} matrices of {rows_per_matrix} rows, '
                          f'found {len(matrices)} complete matrices')
    return GeneratorMatrixSet(d, n, alpha, tuple(matrices))


def save_generator_matrices(G, matrix_path, comment=''):
    """Write ``G`` in the format read by ``load_generator_matrices``."""
    matrix_path = Path(matrix_path)
    matrix_path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f'{G.d} {G.n} {G.alpha}']
    for i, matrix in enumerate(G.matrices):
        lines.append(f'# matrix {i + 1}' + (f' {comment}' if comment else ''))
        lines.extend(matrix.to_strings())
    matrix_path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return matrix_path


def _column_words(matrix):
    """Column c of ``matrix`` as an int whose bit (m-1-r) is entry (r, c)."""
    m = matrix.m
    words = []
    for c in range(matrix.n):
        word = 0
        for r, row in enumerate(matrix.rows):
            if (row >> c) & 1:
                word |= 1 << (m - 1 - r)
        words.append(word)
    return words


def net_digit_words(G):
    """Per coordinate, the list of 2^n integers y with coordinate y / 2^(alpha n).

    Uses y(k) = y(k with its lowest set bit cleared) XOR column(lowest set bit).
    """
    N = G.n_points
    words_per_coordinate = []
    for matrix in G.matrices:
        columns = _column_words(matrix)
        words = [0] * N
        for k in range(1, N):
            lowest = (k & -k).bit_length() - 1
            words[k] = words[k & (k - 1)] ^ columns[lowest]
        words_per_coordinate.append(words)
    return words_per_coordinate


def net_points(G, label=''):
    """Points of the digital net generated by ``G``, in order k = 0, ..., 2^n - 1.

    Parameters
    ----------
    G: GeneratorMatrixSet
        Generator matrices; coordinates get alpha * n binary digits.
    label: str
        Provenance string stored in the returned PointSet.

    Returns
    -------
    PointSet
        2^n points in dimension G.d.
    """
    denominator = 2 ** (G.alpha * G.n)
    words = net_digit_words(G)
    points = tuple(tuple(Fraction(words[i][k], denominator) for i in range(G.d))
                   for k in range(G.n_points))
    return PointSet(G.d, points, label or f'net d={G.d} n={G.n} alpha={G.alpha}')


def dyadic_digits(q, n):
    """The integer 2^n q, checking that q in [0, 1) has at most n binary digits."""
    q = as_rational(q)
    scaled = q * 2 ** n
    if scaled.denominator != 1 or not 0 <= scaled < 2 ** n:
        raise ValueError(f'Coordinate {q} is not a dyadic rational in [0, 1) with {n} digits')
    return scaled.numerator


def _digits_needed(points):
    n = 1
    for point in points:
        for q in point:
            denominator = q.denominator
            if denominator & (denominator - 1):
                raise ValueError(f'Coordinate {q} is not dyadic')
            n = max(n, denominator.bit_length() - 1)
    return n


def interlace(P, alpha, n=None):
    """Digital interlacing of order ``alpha``.

    Output coordinate i interleaves the digits of input coordinates
    (i-1) alpha + 1, ..., i alpha: digit l of input coordinate (i-1) alpha + s lands
    at position (l-1) alpha + s. ``n`` defaults to the largest digit count present.
    """
    if alpha < 1:
        raise ValueError(f'alpha must be >= 1, got {alpha}')
    if P.d % alpha:
        raise ValueError(f'Column count {P.d} is not divisible by alpha={alpha}')
    if n is None:
        n = _digits_needed(P.points)
    d = P.d // alpha
    m = alpha * n
    denominator = 2 ** m
    out = []
    for point in P.points:
        eta = [dyadic_digits(q, n) for q in point]
        coordinates = []
        for i in range(d):
            word = 0
            for ell in range(1, n + 1):
                for s in range(1, alpha + 1):
                    if (eta[i * alpha + s - 1] >> (n - ell)) & 1:
                        word |= 1 << (m - ((ell - 1) * alpha + s))
            coordinates.append(Fraction(word, denominator))
        out.append(tuple(coordinates))
    return PointSet(d, tuple(out), f'{P.label} interlaced alpha={alpha}'.strip())


def interlace_matrices(G, alpha):
    """Interlace alpha * d square generator matrices into d matrices of shape (alpha n) x n.

    Row (l-1) alpha + s of C_i is row l of the input matrix (i-1) alpha + s, so that
    ``net_points(interlace_matrices(G, alpha)) == interlace(net_points(G), alpha)``.
    """
    if G.alpha != 1:
        raise ValueError('Interlacing needs square (alpha = 1) input matrices')
    if G.d % alpha:
        raise ValueError(f'{G.d} matrices cannot be grouped by alpha={alpha}')
    matrices = []
    for i in range(G.d // alpha):
        group = G.matrices[i * alpha:(i + 1) * alpha]
        rows = tuple(group[s].rows[ell] for ell in range(G.n) for s in range(alpha))
        matrices.append(BitMatrix(rows, G.n))
    return GeneratorMatrixSet(G.d // alpha, G.n, alpha, tuple(matrices))


def truncate_digits(P, n):
    """Keep the first n binary digits of every coordinate: floor(2^n x) / 2^n."""
    scale = 2 ** n
    points = tuple(tuple(Fraction((q.numerator * scale) // q.denominator, scale) for q in point)
                   for point in P.points)
    return PointSet(P.d, points, P.label)


def sequence_to_net(P, n):
    """Turn the first 2^n points of a (d-1)-dimensional sequence into a d-dimensional net.

    Point k becomes (truncated point k, k / 2^n).
    """
    N = 2 ** n
    if len(P) != N:
        raise ValueError(f'sequence_to_net needs exactly 2^{n} = {N} points, got {len(P)}')
    truncated = truncate_digits(P, n)
    points = tuple(point + (Fraction(k, N),) for k, point in enumerate(truncated.points))
    return PointSet(P.d + 1, points, f'{P.label} + k/2^{n}'.strip())


def interlaced_t_bound(t_tilde, alpha, d):
    """Quality parameter guaranteed for the order-alpha interlacing of a (t_tilde, n, alpha d)-net."""
    if t_tilde < 0 or alpha < 1 or d < 0:
        raise ValueError(f'Invalid arguments t_tilde={t_tilde}, alpha={alpha}, d={d}')
    return alpha * t_tilde + d * alpha * (alpha - 1) // 2


def _row_selections(matrix, alpha, n):
    """Candidate row selections of one matrix as (weight, packed rows), lightest first.

    At most n rows are taken from a matrix. Fewer than alpha rows: any index set,
    weight = sum of indices. Otherwise the alpha largest indices j_1 > ... > j_alpha
    give the weight and up to n - alpha further rows come from below j_alpha; only
    maximal fills are listed since a dependent set stays dependent when enlarged.
    Selections heavier than alpha n never count and are left out.
    """
    m = alpha * n
    rows = matrix.rows
    selections = [(0, ())]
    for size in range(1, min(alpha, n + 1)):
        for indices in combinations(range(1, m + 1), size):
            if sum(indices) <= m:
                selections.append((sum(indices), tuple(rows[j - 1] for j in indices)))
    if alpha <= n:
        for top in combinations(range(m, 0, -1), alpha):
            weight = sum(top)
            if weight > m:
                continue
            top_rows = tuple(rows[j - 1] for j in top)
            below = range(1, top[-1])
            for fill in combinations(below, min(n - alpha, len(below))):
                selections.append((weight, top_rows + tuple(rows[j - 1] for j in fill)))
    selections.sort(key=lambda selection: selection[0])
    return selections


def _extend_basis(basis, rows):
    """Add ``rows`` to a copy of ``basis``; None when they make the set dependent."""
    extended = dict(basis)
    for row in rows:
        reduced = gf2_reduce(extended, row)
        if not reduced:
            return None
        extended[reduced.bit_length() - 1] = reduced
    return extended


def minimal_t(G, max_nodes=MINIMAL_T_MAX_NODES):
    """Smallest t for which G generates an order-alpha digital (t, n, d)-net.

    Finds the lightest row selection that is linearly dependent over GF(2); t is
    alpha n minus that weight plus one (0 if no selection of weight <= alpha n is
    dependent). Each matrix contributes at most n rows; for the rows below its
    alpha-th largest index only the largest admissible sets are tried, since they
    carry no extra weight.

    Parameters
    ----------
    G: GeneratorMatrixSet
        Matrices to certify, alpha * n <= 24.
    max_nodes: int
        Search nodes allowed before refusing with BudgetExceededError.

    Returns
    -------
    int
        The quality parameter t in {0, ..., alpha n}.
    """
    m = G.alpha * G.n
    if m > MINIMAL_T_MAX_DIGITS:
        raise BudgetExceededError(f'minimal_t refuses alpha*n = {m} > {MINIMAL_T_MAX_DIGITS}')
    per_matrix = [_row_selections(matrix, G.alpha, G.n) for matrix in G.matrices]
    best = m + 1
    visited = 0

    def search(i, basis, weight):
        nonlocal best, visited
        if i == G.d:
            return
        for selection_weight, rows in per_matrix[i]:
            total = weight + selection_weight
            if total >= best:
                break
            visited += 1
            if visited > max_nodes:
                raise BudgetExceededError(f'minimal_t search exceeded {max_nodes} nodes '
                                          f'(d={G.d}, n={G.n}, alpha={G.alpha})')
            extended = _extend_basis(basis, rows)
            if extended is None:
                best = total
                break
            search(i + 1, extended, total)

    search(0, {}, 0)
    return max(0, m - best + 1)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def elementary_box_t(P, n):
    """Quality parameter of a 2^n-point set by counting points in elementary dyadic boxes.

    Returns the smallest t such that every box prod_i [a_i 2^-l_i, (a_i+1) 2^-l_i)
    with l_1 + ... + l_d = n - t holds exactly 2^t points.
    """
    N = 2 ** n
    if len(P) != N:
        raise ValueError(f'Expected 2^{n} = {N} points, got {len(P)}')
    for point in P.points:
        for q in point:
            if q >= 1:
                raise ValueError(f'Coordinate {q} is outside [0, 1)')
    for t in range(n + 1):
        expected = 2 ** t
        if all(_boxes_balanced(P.points, levels, expected) for levels in _compositions(n - t, P.d)):
            return t
    return n


def _boxes_balanced(points, levels, expected):
    counts = Counter(tuple((q.numerator << level) // q.denominator for q, level in zip(point, levels))
                     for point in points)
    n_boxes = 1 << sum(levels)
    return len(counts) == n_boxes and all(count == expected for count in counts.values())
