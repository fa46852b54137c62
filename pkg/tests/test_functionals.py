import math

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import two_point_space
from funcineq.functionals import (LogLipProfile, entropy, extract_one_sided_profile, log_lipschitz_constant,
                                  log_lp_norm, lp_norm, moment_curve, moment_log_derivative_check,
                                  negative_moment_reflection_check, variance)
from funcineq.space import SpaceError, grid_coordinates, random_space


def gaussian_expect(fun):
    return quad(lambda x: fun(x) * math.exp(-x * x / 2) / math.sqrt(2 * math.pi), -8, 8, limit=200)[0]


class TestLpNorm:
    def test_constant(self):
        sp = random_space(10, 1)
        for p in (-3.0, -0.5, 0.0, 0.5, 4.0):
            assert lp_norm(sp, np.full(10, 2.5), p) == pytest.approx(2.5, rel=1e-14)

    def test_two_point(self, two_point):
        f = np.array([1.0, math.e])
        assert lp_norm(two_point, f, 0.0) == pytest.approx(math.exp(0.5), rel=1e-15)
        assert lp_norm(two_point, f, 1.0) == pytest.approx((1 + math.e) / 2, rel=1e-15)

    def test_exponential_quadrature(self, exponential_grid):
        x = grid_coordinates(exponential_grid)
        assert lp_norm(exponential_grid, np.exp(x / 4), 2.0) == pytest.approx(0.75 ** -0.5, rel=1e-3)

    def test_no_overflow(self, exponential_grid):
        x = grid_coordinates(exponential_grid)
        val = log_lp_norm(exponential_grid, np.exp(15 * x), 3.0)
        assert math.isfinite(val) and val > 500

    def test_monotone_and_log_convex(self):
        sp = random_space(25, 2)
        f = np.exp(np.random.default_rng(3).normal(size=25))
        curve = moment_curve(sp, f, np.linspace(-3, 3, 25))
        assert curve.is_monotone()
        assert curve.is_log_convex()

    def test_p_to_zero(self):
        sp = random_space(25, 2)
        f = np.exp(np.random.default_rng(3).normal(size=25))
        g = lp_norm(sp, f, 0.0)
        for p in (1e-6, -1e-6):
            assert abs(lp_norm(sp, f, p) - g) <= 1e-4 * g


class TestReflection:
    def test_constant(self):
        assert negative_moment_reflection_check(random_space(5, 0), np.full(5, 3.0), 1.0).passed

    def test_random_field(self):
        sp = random_space(20, 7)
        f = np.exp(np.random.default_rng(0).normal(size=20))
        rep = negative_moment_reflection_check(sp, f, 1.7)
        assert rep.passed and rep.error <= 1e-12

    def test_exponential(self, exponential_grid):
        x = grid_coordinates(exponential_grid)
        assert negative_moment_reflection_check(exponential_grid, np.exp(x), 0.5).passed

    def test_rejects_nonpositive_p(self, two_point):
        with pytest.raises(SpaceError):
            negative_moment_reflection_check(two_point, [1.0, 2.0], 0.0)


class TestEntropyVariance:
    def test_entropy_values(self, two_point):
        assert entropy(two_point, np.ones(2)) == pytest.approx(0.0, abs=1e-16)
        assert entropy(two_point, np.array([1.0, 0.0])) == pytest.approx(0.5 * math.log(2), rel=1e-15)

    def test_entropy_gaussian(self, gaussian_grid):
        x = grid_coordinates(gaussian_grid)
        m = gaussian_expect(math.exp)
        oracle = gaussian_expect(lambda t: math.exp(t) * math.log(math.exp(t) / m))
        assert entropy(gaussian_grid, np.exp(x)) == pytest.approx(oracle, abs=1e-4)

    def test_entropy_errors(self, two_point):
        with pytest.raises(SpaceError):
            entropy(two_point, np.zeros(2))
        with pytest.raises(SpaceError):
            entropy(two_point, np.array([1.0, -1.0]))

    def test_variance(self, two_point, gaussian_grid):
        assert variance(two_point, np.full(2, 4.0)) == 0.0
        assert variance(two_point, np.array([0.0, 1.0])) == pytest.approx(0.25)
        assert variance(gaussian_grid, grid_coordinates(gaussian_grid)) == pytest.approx(1.0, abs=1e-4)


class TestDerivativeIdentity:
    def test_constant(self, two_point):
        rep = moment_log_derivative_check(two_point, np.full(2, 3.0), 1.0)
        assert rep.passed
        assert rep.rhs == pytest.approx(0.0, abs=1e-15)

    def test_two_point(self, two_point):
        rep = moment_log_derivative_check(two_point, np.array([1.0, math.e]), 1.0, h=1e-4)
        assert rep.error <= 1e-6

    def test_gaussian(self, gaussian_grid):
        x = grid_coordinates(gaussian_grid)
        rep = moment_log_derivative_check(gaussian_grid, np.exp(x), 2.0, h=1e-4)
        assert rep.error <= 1e-5
        # d/dt log||e^x||_t = d/dt (t/2) = 1/2
        assert rep.rhs == pytest.approx(0.5, rel=1e-4)

    def test_near_zero_rejected(self, two_point):
        with pytest.raises(SpaceError):
            moment_log_derivative_check(two_point, [1.0, 2.0], 5e-5, h=1e-4)


class TestLogLipschitz:
    def test_basic(self, two_point):
        assert log_lipschitz_constant(two_point, np.full(2, 2.0)) == 0.0
        assert log_lipschitz_constant(two_point, np.array([1.0, math.e])) == pytest.approx(1.0, rel=1e-15)

    def test_line(self, gaussian_coarse):
        x = grid_coordinates(gaussian_coarse)
        assert log_lipschitz_constant(gaussian_coarse, np.exp(0.7 * x)) == pytest.approx(0.7, rel=1e-12)


class TestOneSidedProfile:
    def test_dominated_by_global_constant(self):
        sp = random_space(20, 3)
        f = np.exp(np.random.default_rng(2).normal(size=20))
        prof = extract_one_sided_profile(sp, f)
        assert np.all(prof.L <= log_lipschitz_constant(sp, f) + 1e-12)
        assert prof.holds(sp, f)

    def test_convex_gaussian_square(self, gaussian_coarse):
        x = grid_coordinates(gaussian_coarse)
        prof = extract_one_sided_profile(gaussian_coarse, np.exp(x ** 2 / 2))
        assert np.max(np.abs(prof.L - np.abs(x))) <= 0.01 + 1e-12
        assert prof.holds(gaussian_coarse, np.exp(x ** 2 / 2))

    def test_constant(self):
        sp = random_space(8, 0)
        prof = extract_one_sided_profile(sp, np.full(8, 2.0))
        np.testing.assert_array_equal(prof.L, 0.0)
        np.testing.assert_array_equal(prof.b, 0.0)

    def test_given_L(self):
        sp = random_space(15, 4)
        f = np.exp(2 * np.random.default_rng(5).normal(size=15))
        prof = extract_one_sided_profile(sp, f, "given_L", L=0.5)
        assert prof.holds(sp, f)
        assert np.all(prof.b >= 0) and np.any(prof.b > 0)
        tighter = LogLipProfile(prof.L, np.maximum(prof.b - 1e-3, 0))
        assert not tighter.holds(sp, f)

    def test_asymmetric(self):
        sp = two_point_space()
        prof = extract_one_sided_profile(sp, np.array([1.0, math.e]))
        # only the higher point needs a slope
        np.testing.assert_allclose(prof.L, [0.0, 1.0])
