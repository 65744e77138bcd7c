from fractions import Fraction

import numpy as np
import pytest

import wce_kernels
from net_core import PointSet
from pointsets import halton2d
from tent import tent_pullback
from wce_kernels import (KernelId, WceResult, bernoulli, kernel1d, kernel_mean_check, kernel_numerator,
                         kernel_tensor, pair_sum_fixed, pair_sum_fraction, pair_sum_residue, select_engine,
                         single_sum_factor, wce_squared)

KERNELS = ['K1', 'K2', 'K3']


def random_point_set(rng, N, d, max_denominator=64):
    points = []
    for _ in range(N):
        point = []
        for _ in range(d):
            denominator = int(rng.integers(1, max_denominator + 1))
            point.append(Fraction(int(rng.integers(0, denominator + 1)), denominator))
        points.append(tuple(point))
    return PointSet(d, tuple(points))


def brute_force_squared(kernel, P):
    """Literal double sum over all ordered pairs."""
    N, d = len(P), P.d
    initial = {'K1': Fraction(1), 'K2': Fraction(61, 120), 'K3': Fraction(13, 10)}[kernel] ** d
    single = Fraction(0)
    for x in P:
        term = Fraction(1)
        for q in x:
            term *= single_sum_factor(kernel, q)
        single += term
    double = sum((kernel_tensor(kernel, x, y) for x in P for y in P), Fraction(0))
    return initial - 2 * single / N + double / N ** 2


class TestBernoulli:

    @pytest.mark.parametrize('poly, x, expected', [
        ('B2', Fraction(0), Fraction(1, 6)),
        ('B1', Fraction(1, 2), Fraction(0)),
        ('B4', Fraction(1), Fraction(-1, 30)),
        (4, Fraction(1, 2), Fraction(7, 240)),
    ])
    def test_values(self, poly, x, expected):
        assert bernoulli(poly, x) == expected

    def test_unknown_order(self):
        with pytest.raises(ValueError):
            bernoulli('B3', Fraction(0))


class TestKernels:

    def test_k1_origin(self):
        assert kernel1d('K1', 0, 0) == Fraction(151, 120)

    def test_k1_matches_bernoulli_form(self, rng_fractions):
        values = rng_fractions(40)
        for x, y in zip(values, values[1:]):
            expected = (1 + bernoulli(1, x) * bernoulli(1, y) + bernoulli(2, x) * bernoulli(2, y) / 4
                        - bernoulli(4, abs(x - y)) / 24)
            assert kernel1d(KernelId.K1, x, y) == expected

    def test_k2_origin(self):
        assert kernel1d('K2', 0, 0) == 1

    def test_k3_at_zero(self, rng_fractions):
        for x in rng_fractions(20):
            assert kernel1d('K3', x, 0) == 1

    @pytest.mark.parametrize('kernel', KERNELS)
    def test_symmetry(self, kernel, rng_fractions):
        values = rng_fractions(60)
        for x, y in zip(values, values[1:]):
            assert kernel1d(kernel, x, y) == kernel1d(kernel, y, x)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            kernel1d('K2', Fraction(3, 2), 0)

    def test_unknown_kernel(self):
        with pytest.raises(ValueError):
            KernelId.parse('K4')

    def test_tensor(self, rng_fractions):
        x, y = rng_fractions(2)
        assert kernel_tensor('K1', (x,), (y,)) == kernel1d('K1', x, y)
        assert kernel_tensor('K3', (x, y), (0, 0)) == 1
        assert kernel_tensor('K1', (0, 0), (0, 0)) == Fraction(151, 120) ** 2

    def test_tensor_dimension_mismatch(self):
        with pytest.raises(ValueError):
            kernel_tensor('K1', (0, 0), (0,))

    @pytest.mark.parametrize('kernel, scale', [('K1', 720), ('K2', 6), ('K3', 6)])
    def test_integer_numerator(self, kernel, scale):
        rng = np.random.default_rng(5)
        D = 2 ** 20
        for a, b in rng.integers(0, D + 1, size=(50, 2)).tolist():
            expected = scale * D ** 4 * kernel1d(kernel, Fraction(a, D), Fraction(b, D))
            assert kernel_numerator(kernel, a, b, D) == expected


class TestKernelMean:

    @pytest.mark.parametrize('kernel, x, expected', [
        ('K2', Fraction(0), Fraction(1, 2)),
        ('K3', Fraction(0), Fraction(1)),
        ('K1', Fraction(2, 7), Fraction(1)),
    ])
    def test_examples(self, kernel, x, expected):
        assert kernel_mean_check(kernel, x) == expected

    @pytest.mark.parametrize('kernel', KERNELS)
    def test_matches_closed_form(self, kernel):
        rng = np.random.default_rng(17)
        for _ in range(100):
            denominator = int(rng.integers(1, 1000))
            x = Fraction(int(rng.integers(0, denominator + 1)), denominator)
            assert kernel_mean_check(kernel, x) == single_sum_factor(kernel, x)

    def test_k1_is_one(self, rng_fractions):
        for x in rng_fractions(100):
            assert kernel_mean_check('K1', x) == 1


class TestWceSquared:

    @pytest.mark.parametrize('kernel', KERNELS)
    def test_midpoint(self, kernel):
        result = wce_squared(kernel, [(Fraction(1, 2),)])
        assert result.squared_error == Fraction(1, 320)
        assert result.N == 1 and result.d == 1

    def test_midpoint_k2_by_hand(self):
        half = Fraction(1, 2)
        # K(1/2, 1/2) = 1/2 + 1/48; kernel mean at 1/2 = 1/2 + 1/48 - 1/96 + 1/384
        assert kernel1d('K2', half, half) == Fraction(25, 48)
        assert kernel_mean_check('K2', half) == single_sum_factor('K2', half) == Fraction(197, 384)
        assert Fraction(61, 120) - 2 * Fraction(197, 384) + Fraction(25, 48) == Fraction(1, 320)
        assert wce_squared('K2', [(half,)]).squared_error == Fraction(1, 320)

    @pytest.mark.parametrize('kernel', KERNELS)
    @pytest.mark.parametrize('d', [1, 2, 3])
    def test_matches_brute_force(self, kernel, d):
        P = random_point_set(np.random.default_rng(d), 9, d)
        assert wce_squared(kernel, P).squared_error == brute_force_squared(kernel, P)

    @pytest.mark.parametrize('kernel', KERNELS)
    def test_engines_agree(self, kernel):
        P = tent_pullback(halton2d(5))
        points = list(P)
        residue = pair_sum_residue(kernel, points)
        assert residue == pair_sum_fraction(kernel, points)
        fixed = pair_sum_fixed(kernel, points)
        assert abs(fixed - residue) <= residue * Fraction(1, 10 ** 60)

    @pytest.mark.parametrize('n_jobs', [2, 8])
    def test_independent_of_workers(self, monkeypatch, n_jobs):
        monkeypatch.setattr(wce_kernels, 'BLOCK_ELEMENTS', 256)
        P = tent_pullback(halton2d(7))
        serial = wce_squared('K1', P, n_jobs=1)
        parallel = wce_squared('K1', P, n_jobs=n_jobs)
        assert parallel.squared_error == serial.squared_error
        assert parallel.error_digits == serial.error_digits

    def test_fraction_engine_workers(self, monkeypatch):
        monkeypatch.setattr(wce_kernels, 'BLOCK_ELEMENTS', 64)
        P = random_point_set(np.random.default_rng(1), 24, 2)
        assert (wce_squared('K3', P, engine='fraction', n_jobs=2).squared_error
                == wce_squared('K3', P, engine='fraction', n_jobs=1).squared_error)

    def test_nonnegative_on_random_sets(self):
        rng = np.random.default_rng(99)
        for trial in range(500):
            d = 1 + trial % 3
            N = int(rng.integers(1, 7))
            P = random_point_set(rng, N, d, max_denominator=16)
            assert wce_squared(KERNELS[trial % 3], P, digits=5).squared_error >= 0

    def test_order_invariant(self):
        P = random_point_set(np.random.default_rng(4), 15, 2)
        reversed_points = PointSet(2, tuple(reversed(P.points)))
        assert wce_squared('K2', P).squared_error == wce_squared('K2', reversed_points).squared_error

    def test_error_digits(self):
        result = wce_squared('K1', [(Fraction(1, 2),)], digits=12)
        assert result.error_digits == '0.055901699437'
        assert result.error == pytest.approx(0.055901699437)

    def test_empty(self):
        with pytest.raises(ValueError):
            wce_squared('K1', [])

    def test_fixed_mode_is_flagged_inexact(self):
        P = [(Fraction(1, 3),), (Fraction(2, 3),)]
        result = wce_squared('K1', P, mode='fixed60', engine='fixed60')
        assert not result.exact
        assert abs(result.squared_error - wce_squared('K1', P).squared_error) < Fraction(1, 10 ** 60)

    def test_negative_exact_result_is_rejected(self):
        with pytest.raises(ArithmeticError):
            WceResult(Fraction(-1), '0', KernelId.K1, 1, 1)


class TestSelectEngine:

    def test_dyadic_uses_residues(self):
        assert select_engine(list(halton2d(4))) == 'residue'

    def test_large_denominators(self):
        q = Fraction(1, 3 ** 45)
        assert select_engine([(q,)] * 4, 'exact') == 'fraction'
        assert select_engine([(q,)] * 4, 'auto') == 'fraction'
        assert select_engine([(q,)] * 4, 'fixed60') == 'fixed60'
        assert select_engine([(q,)] * (2 ** 13 + 1), 'auto') == 'fixed60'

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            select_engine([(Fraction(0),)], 'float')
