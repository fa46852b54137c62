import math

import numpy as np
import pytest

from conftest import two_point_space
from funcineq.convex import identity, linear_offset, phi1_scaled, quadratic
from funcineq.space import SpaceError, random_space
from funcineq.transport import (jensen_te_weakening_check, kantorovich_duality_check, nu_family,
                                relative_entropy, te_check, te_report, wasserstein)


def brute_two_point_cost(mu, nu, c):
    """Couplings on two points form a one-parameter family; scan it."""
    lo = max(0.0, nu[0] - mu[1])
    hi = min(nu[0], mu[0])
    best = math.inf
    for a in np.linspace(lo, hi, 100001):
        plan = np.array([[a, nu[0] - a], [mu[0] - a, nu[1] - mu[0] + a]])
        best = min(best, float(np.sum(plan * c)))
    return best


class TestWasserstein:
    def test_identity_coupling(self):
        sp = random_space(8, 1)
        plan = wasserstein(sp, sp.weights)
        assert plan.cost == pytest.approx(0.0, abs=1e-14)
        np.testing.assert_allclose(plan.plan, np.diag(sp.weights), atol=1e-12)

    def test_two_point(self, two_point):
        nu = np.array([0.8, 0.2])
        c = np.array([[0.0, 1.0], [1.0, 0.0]])
        oracle = brute_two_point_cost(two_point.weights, nu, c)
        plan = wasserstein(two_point, nu)
        assert plan.cost == pytest.approx(0.3, abs=1e-12)
        assert plan.cost == pytest.approx(oracle, abs=1e-9)
        assert wasserstein(two_point, nu, cost=quadratic(1.0)).cost == pytest.approx(0.15, abs=1e-12)

    def test_certificate(self):
        rng = np.random.default_rng(0)
        for seed in range(10):
            sp = random_space(12, seed)
            plan = wasserstein(sp, rng.dirichlet(np.ones(12)), cost=quadratic(1.0))
            assert abs(plan.gap) <= 1e-8
            assert plan.marginal_error <= 1e-10
            c = quadratic(1.0)(sp.dist)
            assert np.all(plan.g[:, None] <= plan.f[None, :] + c + 1e-12)

    def test_positive_off_diagonal(self):
        sp = random_space(6, 2)
        nu = np.roll(sp.weights, 1)
        assert wasserstein(sp, nu).cost > 0

    def test_cost_monotone(self):
        sp = random_space(10, 3)
        nu = np.random.default_rng(1).dirichlet(np.ones(10))
        assert wasserstein(sp, nu, cost=quadratic(1.0)).cost <= wasserstein(sp, nu, cost=quadratic(2.0)).cost + 1e-12

    def test_bad_shapes(self, two_point):
        with pytest.raises(SpaceError):
            wasserstein(two_point, [0.2, 0.3, 0.5])
        with pytest.raises(SpaceError):
            wasserstein(two_point, [0.2, 0.8], cost=np.zeros((3, 3)))


class TestRelativeEntropy:
    def test_values(self):
        mu = np.array([0.5, 0.5])
        assert relative_entropy(mu, mu) == 0.0
        assert relative_entropy([1.0, 0.0], mu) == pytest.approx(math.log(2), rel=1e-15)
        expect = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
        assert relative_entropy([0.75, 0.25], mu) == pytest.approx(expect, rel=1e-14)

    def test_gibbs(self):
        rng = np.random.default_rng(4)
        mu = rng.dirichlet(np.ones(7))
        for _ in range(20):
            assert relative_entropy(rng.dirichlet(np.ones(7)), mu) > 0


class TestDuality:
    def test_constant_field(self):
        sp = random_space(15, 3)
        nu = np.random.default_rng(0).dirichlet(np.ones(15))
        rep = kantorovich_duality_check(sp, nu, sp.weights, sp.dist, [np.full(15, 2.0)])
        assert rep.dual_values[0] == pytest.approx(0.0, abs=1e-14)
        assert rep.passed

    def test_random_fields(self):
        sp = random_space(15, 3)
        rng = np.random.default_rng(1)
        nu = rng.dirichlet(np.ones(15))
        fields = [rng.normal(size=15) * s for s in np.linspace(0.1, 4, 40)]
        rep = kantorovich_duality_check(sp, nu, sp.weights, quadratic(1.0)(sp.dist), fields)
        assert rep.max_excess <= 1e-9
        assert abs(rep.optimum_gap) <= 1e-8


class TestTransportEntropy:
    def test_nu_equals_mu(self):
        sp = random_space(6, 0)
        rep = te_report(sp, identity(), quadratic(1.0), sp.weights)
        assert rep.W == pytest.approx(0.0, abs=1e-14) and rep.verdict == "pass"

    def test_point_mass_two_point(self):
        sp = two_point_space((0.3, 0.7))
        for i, other in ((0, 0.7), (1, 0.3)):
            nu = np.eye(2)[i]
            rep = te_report(sp, identity(), identity(), nu)
            W, H = other, math.log(1 / sp.weights[i])
            assert rep.W == pytest.approx(W, abs=1e-12)
            assert rep.H == pytest.approx(H, rel=1e-14)
            assert rep.verdict == ("pass" if W <= H else "fail")

    def test_nontight_slack(self):
        sp = random_space(6, 0)
        rep = te_report(sp, identity(), linear_offset(0.5, 1.0), sp.weights)
        assert rep.Phi_inv_H == pytest.approx(0.5)

    def test_family_order_and_threads(self):
        sp = random_space(8, 2)
        ids, fam = nu_family(sp, "dirichlet", 6, seed=3)
        a = te_check(sp, identity(), quadratic(2.0), fam, ids=ids)
        b = te_check(sp, identity(), quadratic(2.0), fam, ids=ids, max_workers=3)
        assert [r.nu_id for r in a] == ids
        assert [r.W for r in a] == [r.W for r in b]

    def test_families(self):
        sp = random_space(8, 2)
        for kind in ("deltas", "tilts", "dirichlet"):
            ids, fam = nu_family(sp, kind, 5)
            assert len(ids) == len(fam) == 5
            for w in fam:
                assert abs(w.sum() - 1) <= 1e-12
        with pytest.raises(SpaceError):
            nu_family(sp, "uniform", 3)


class TestJensenWeakening:
    def test_two_point_quadratic(self, two_point):
        rep = jensen_te_weakening_check(two_point, quadratic(1.0), [0.8, 0.2])
        assert rep.lhs == pytest.approx(0.045)
        assert rep.rhs == pytest.approx(0.15)
        assert rep.passed

    def test_random_phi1(self):
        sp = random_space(10, 1)
        nu = np.random.default_rng(0).dirichlet(np.ones(10))
        assert jensen_te_weakening_check(sp, phi1_scaled(1.0), nu).passed
        assert jensen_te_weakening_check(sp, quadratic(1.0), sp.weights).passed
