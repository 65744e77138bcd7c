from fractions import Fraction

import numpy as np
import pytest

from exact_core import (BitMatrix, as_rational, common_denominator, crt_signed, pack_bits, rank_gf2,
                        rational_to_digits, residue_primes, sqrt_to_digits)


def naive_rank(rows):
    """Textbook Gaussian elimination on lists of 0/1."""
    matrix = [list(row) for row in rows]
    rank = 0
    n_cols = len(matrix[0]) if matrix else 0
    for column in range(n_cols):
        pivot = next((r for r in range(rank, len(matrix)) if matrix[r][column]), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        for r in range(len(matrix)):
            if r != rank and matrix[r][column]:
                matrix[r] = [a ^ b for a, b in zip(matrix[r], matrix[rank])]
        rank += 1
    return rank


class TestRankGF2:

    def test_xor_of_two_rows(self):
        assert rank_gf2([[1, 0, 0], [0, 1, 0], [1, 1, 0]]) == 2

    def test_identity(self):
        assert rank_gf2(['100', '010', '001']) == 3

    def test_empty(self):
        assert rank_gf2([]) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            rank_gf2([[1, 0], [1, 0, 1]])

    @pytest.mark.parametrize('seed', range(5))
    def test_matches_naive_elimination(self, seed):
        rng = np.random.default_rng(seed)
        rows = rng.integers(0, 2, size=(50, 20)).tolist()
        assert rank_gf2(rows) == naive_rank(rows)

    def test_low_rank_random(self):
        rng = np.random.default_rng(11)
        basis = rng.integers(0, 2, size=(4, 20))
        combos = rng.integers(0, 2, size=(30, 4))
        rows = (combos @ basis % 2).tolist()
        assert rank_gf2(rows) == naive_rank(rows) <= 4

    def test_invariant_under_permutation_and_row_xor(self):
        rng = np.random.default_rng(3)
        rows = rng.integers(0, 2, size=(12, 16)).tolist()
        expected = rank_gf2(rows)
        permuted = [rows[i] for i in rng.permutation(len(rows))]
        assert rank_gf2(permuted) == expected
        mixed = [list(row) for row in rows]
        mixed[0] = [a ^ b for a, b in zip(mixed[0], mixed[5])]
        assert rank_gf2(mixed) == expected


class TestSqrtToDigits:

    @pytest.mark.parametrize('x, digits, expected', [
        (Fraction(1, 4), 10, '0.5000000000'),
        (Fraction(2), 5, '1.41421'),
        (Fraction(0), 3, '0.000'),
        (Fraction(9), 2, '3.00'),
    ])
    def test_examples(self, x, digits, expected):
        assert sqrt_to_digits(x, digits) == expected

    def test_rounds_up_when_truncation_breaks_bound(self):
        # sqrt(0.9801) = 0.99; truncating to 0.9 leaves |0.81 - 0.9801| > 0.1
        x = Fraction(9801, 10000)
        assert sqrt_to_digits(x, 1) == '1.0'
        assert abs(Fraction(9, 10) ** 2 - x) > Fraction(1, 10)

    def test_bisection_oracle(self):
        x = Fraction(1, 320)
        low, high = Fraction(0), Fraction(1)
        while high - low > Fraction(1, 10 ** 14):
            middle = (low + high) / 2
            if middle * middle <= x:
                low = middle
            else:
                high = middle
        s = Fraction(sqrt_to_digits(x, 12))
        assert abs(s - low) <= Fraction(1, 10 ** 12)

    def test_error_bound_on_random_rationals(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            x = Fraction(int(rng.integers(0, 10 ** 6)), int(rng.integers(1, 10 ** 4)))
            digits = int(rng.integers(1, 20))
            s = Fraction(sqrt_to_digits(x, digits))
            assert abs(s * s - x) <= Fraction(1, 10 ** digits) * max(1, x)

    def test_negative(self):
        with pytest.raises(ValueError):
            sqrt_to_digits(Fraction(-1, 2), 5)


class TestRationalArithmetic:

    def test_exact_roundtrips(self, rng_fractions):
        values = rng_fractions(200)
        for a, b in zip(values, values[1:]):
            assert (a + b) - b == a
            if b:
                assert (a * b) / b == a

    def test_as_rational_refuses_floats(self):
        with pytest.raises(TypeError):
            as_rational(0.5)
        assert as_rational('3/8') == Fraction(3, 8)

    @pytest.mark.parametrize('x, digits, expected', [
        (Fraction(1, 3), 4, '0.3333'),
        (Fraction(-7, 8), 2, '-0.87'),
        (Fraction(5, 2), 3, '2.500'),
    ])
    def test_rational_to_digits(self, x, digits, expected):
        assert rational_to_digits(x, digits) == expected

    def test_common_denominator(self):
        assert common_denominator([Fraction(1, 4), Fraction(5, 6), Fraction(1)]) == 12


class TestBitMatrix:

    def test_from_strings_and_access(self):
        matrix = BitMatrix.from_strings(['110', '001'])
        assert (matrix.m, matrix.n) == (2, 3)
        assert [matrix[0, c] for c in range(3)] == [1, 1, 0]
        assert matrix.to_strings() == ['110', '001']

    def test_reversal_is_anti_diagonal(self):
        assert BitMatrix.reversal(3).to_strings() == ['001', '010', '100']

    def test_leading_block(self):
        matrix = BitMatrix.from_strings(['101', '011', '111'])
        assert matrix.leading(2, 2).to_strings() == ['10', '01']

    def test_pack_bits_rejects_non_bits(self):
        with pytest.raises(ValueError):
            pack_bits([0, 2])


class TestResidues:

    @pytest.mark.parametrize('value', [0, 1, -1, 2 ** 100 + 17, -(3 ** 70)])
    def test_crt_recovers_signed_integers(self, value):
        primes = residue_primes(abs(value) + 1)
        assert crt_signed([value % p for p in primes], primes) == value

    def test_primes_are_below_ceiling_and_distinct(self):
        primes = residue_primes(2 ** 200)
        assert len(set(primes)) == len(primes)
        assert all(p < 2 ** 31 for p in primes)
