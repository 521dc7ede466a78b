import math

import numpy as np
import pytest

from cmtomo.specialfn import (
    QuadratureRule,
    gauss_hermite,
    gauss_laguerre,
    hermite_eval,
    hermite_functions,
    hermite_sq_density_factor,
    log_factorial,
)

SQRT_PI = math.sqrt(math.pi)


def hermite_int_coeffs(n):
    """Exact integer coefficients of H_n, index = power of y (oracle)."""
    a = [1]
    prev = None
    for k in range(n):
        b = [0] * (len(a) + 1)
        for p, c in enumerate(a):
            b[p + 1] += 2 * c
        if k >= 1:
            for p, c in enumerate(prev):
                b[p] -= 2 * k * c
        prev, a = a, b
    return a


class TestHermiteEval:
    def test_h0_is_one(self):
        assert hermite_eval(0, 3.7) == 1.0

    def test_h1(self):
        assert hermite_eval(1, 1.5) == 3.0

    def test_h3(self):
        # H_3(y) = 8 y^3 - 12 y
        assert hermite_eval(3, 2.0) == 40.0

    @pytest.mark.parametrize("n", [2, 5, 9, 17])
    def test_matches_integer_coefficients(self, n):
        coeffs = hermite_int_coeffs(n)
        for y in (-2.3, 0.0, 0.4, 3.1):
            exact = sum(c * y ** p for p, c in enumerate(coeffs))
            assert hermite_eval(n, y) == pytest.approx(exact, rel=1e-12)

    def test_overflow_signaled(self):
        with pytest.raises(OverflowError):
            hermite_eval(400, 25.0)

    def test_negative_degree_rejected(self):
        with pytest.raises(ValueError):
            hermite_eval(-1, 0.0)


class TestDensityFactor:
    def test_vacuum_at_zero(self):
        assert hermite_sq_density_factor(0, 0.0) == pytest.approx(1.0 / SQRT_PI, rel=1e-14)

    def test_level_one(self):
        want = 2.0 * math.exp(-1.0) / SQRT_PI
        assert hermite_sq_density_factor(1, 1.0) == pytest.approx(want, rel=1e-14)

    def test_level_50_at_zero_bigint_oracle(self):
        # H_{2m}(0) = (-1)^m (2m)!/m!  =>  factor = C(2m, m) / (2^{2m} sqrt(pi))
        want = math.comb(50, 25) / (2 ** 50 * SQRT_PI)
        assert hermite_sq_density_factor(50, 0.0) == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("n", [0, 1, 2, 7, 64, 199, 500])
    def test_parity(self, n):
        ys = np.linspace(0.1, 12.0, 23)
        left = hermite_sq_density_factor(n, -ys)
        right = hermite_sq_density_factor(n, ys)
        np.testing.assert_allclose(left, right, rtol=0, atol=0)

    def test_normalization_sweep(self):
        # one recurrence pass gives every level on the shared grid
        ys = np.arange(-40.0, 40.0, 0.02)
        funcs = hermite_functions(200, ys)
        integrals = np.trapezoid(funcs * funcs, dx=0.02, axis=1)
        np.testing.assert_allclose(integrals, 1.0, atol=1e-9)

    def test_no_overflow_large_n(self):
        vals = hermite_sq_density_factor(500, np.linspace(-45, 45, 301))
        assert np.all(np.isfinite(vals))
        assert np.all(vals >= 0)


def double_factorial_moment(k):
    """integral y^{2k} e^{-y^2} dy = (2k-1)!! sqrt(pi) / 2^k (exact oracle)."""
    acc = 1
    for j in range(1, 2 * k, 2):
        acc *= j
    return acc * SQRT_PI / 2 ** k


class TestGaussHermite:
    def test_m1(self):
        rule = gauss_hermite(1)
        assert rule.nodes[0] == 0.0
        assert rule.weights[0] == pytest.approx(SQRT_PI, rel=1e-15)

    def test_m2(self):
        rule = gauss_hermite(2)
        np.testing.assert_allclose(rule.nodes, [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)
        np.testing.assert_allclose(rule.weights, [SQRT_PI / 2, SQRT_PI / 2], rtol=1e-15)

    def test_m16_y8(self):
        rule = gauss_hermite(16)
        got = rule.integrate(lambda y: y ** 8)
        assert got == pytest.approx(105 * SQRT_PI / 16, rel=1e-12)

    @pytest.mark.parametrize("m", [2, 3, 8, 16, 33, 64])
    def test_all_moments_exact(self, m):
        rule = gauss_hermite(m)
        for k in range(m):  # 2k <= 2m - 1
            got = float(np.sum(rule.weights * rule.nodes ** (2 * k)))
            assert got == pytest.approx(double_factorial_moment(k), rel=1e-12), k

    @pytest.mark.parametrize("m", [128, 256, 512])
    def test_large_rules_low_moments(self, m):
        rule = gauss_hermite(m)
        for k in range(10):
            got = float(np.sum(rule.weights * rule.nodes ** (2 * k)))
            assert got == pytest.approx(double_factorial_moment(k), rel=1e-12)

    @pytest.mark.parametrize("m", [1, 2, 5, 16, 100, 512])
    def test_weight_sum_and_symmetry(self, m):
        rule = gauss_hermite(m)
        assert float(rule.weights.sum()) == pytest.approx(SQRT_PI, abs=1e-12)
        np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1], atol=0)
        assert np.all(np.diff(rule.nodes) > 0)

    def test_odd_moments_vanish(self):
        rule = gauss_hermite(24)
        assert abs(float(np.sum(rule.weights * rule.nodes ** 7))) < 1e-13

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            gauss_hermite(0)
        with pytest.raises(ValueError):
            gauss_hermite(513)

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            QuadratureRule(nodes=np.array([1.0, 0.0]), weights=np.array([1.0, 1.0]))


class TestGaussLaguerre:
    def test_exponential_moments(self):
        rule = gauss_laguerre(12)
        for k in range(8):  # integral u^k e^{-u} du = k!
            got = float(np.sum(rule.weights * rule.nodes ** k))
            assert got == pytest.approx(math.factorial(k), rel=1e-12)


class TestLogFactorial:
    def test_against_bigint(self):
        for n in (0, 1, 5, 170, 1000):
            want = math.log(math.factorial(n)) if n else 0.0
            assert log_factorial(n) == pytest.approx(want, rel=1e-13)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            log_factorial(-1)
