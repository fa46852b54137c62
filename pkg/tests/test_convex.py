import json
import math

import numpy as np
import pytest

from funcineq.convex import (ProfileError, biconjugate_check, compose, conjugate,
                             conjugate_of_composition, generalized_inverse, grid_profile, identity,
                             legendre, linear_offset, parse_profile, phi1, phi1_scaled,
                             profile_from_dict, profile_to_dict, quadratic)

T = np.arange(0.0, 100.0 + 1e-4, 1e-4)


def brute_conjugate(fun, s):
    """sup over t in [0, 100] on a 1e-4 grid."""
    return np.max(s * T - fun(T))


class TestLegendre:
    def test_quadratic_self_conjugate(self):
        s = np.linspace(0, 5, 11)
        np.testing.assert_allclose(legendre(quadratic(1.0), s), s ** 2 / 2, rtol=1e-15)

    def test_identity(self):
        assert legendre(identity(), 0.7) == 0.0
        assert legendre(identity(), 1.0) == 0.0
        assert legendre(identity(), 1.0 + 1e-12) == math.inf

    def test_phi1_against_brute_force(self):
        for s in (0.0, 0.3, 0.75, 1.0):
            np.testing.assert_allclose(legendre(phi1_scaled(1.0), s), brute_conjugate(phi1, s), atol=1e-8)
            np.testing.assert_allclose(legendre(phi1_scaled(1.0), s), s * s / 2, rtol=1e-14)
        assert legendre(phi1_scaled(1.0), 1.01) == math.inf

    def test_linear_offset(self):
        prof = linear_offset(1.5, 2.0)
        np.testing.assert_allclose(legendre(prof, [0.0, 1.0, 2.0]), 1.5)
        assert legendre(prof, 2.5) == math.inf

    def test_grid_profile_matches_brute_force(self):
        knots = np.linspace(0, 10, 41)
        prof = grid_profile(knots, knots ** 2 / 4)
        fun = lambda t: np.interp(t, knots, knots ** 2 / 4, right=np.nan)  # noqa: E731
        tt = T[T <= 10]
        for s in (0.5, 1.3, 3.7):
            np.testing.assert_allclose(legendre(prof, s), np.max(s * tt - fun(tt)), atol=1e-6)

    def test_conjugate_profile(self):
        c = conjugate(quadratic(2.0))
        assert c.finite_everywhere
        np.testing.assert_allclose(c([1.0, 2.0]), [0.25, 1.0])
        assert not conjugate(identity()).finite_everywhere


class TestBiconjugate:
    def test_catalog(self):
        assert biconjugate_check(quadratic(1.0)) <= 1e-9
        assert biconjugate_check(identity()) <= 1e-9
        assert biconjugate_check(phi1_scaled(1.0), step=1e-4) <= 1e-6
        assert biconjugate_check(linear_offset(1.0, 2.0)) <= 1e-9


class TestCompose:
    def test_identity_simplifies(self):
        q = quadratic(3.0)
        assert compose(identity(), q) is q
        p = phi1_scaled(2.0)
        t = np.linspace(0, 5, 11)
        np.testing.assert_allclose(compose(identity(), p)(t), phi1(math.sqrt(2.0) * t))

    def test_linear_offset_growth(self):
        psi = compose(linear_offset(0.5, 3.0), identity())
        np.testing.assert_allclose(psi([0.0, 2.0]), [-0.5, 5.5])
        assert psi.growth_rate == 3.0
        assert not psi.tight

    def test_composite_values_and_tightness(self):
        psi = compose(quadratic(2.0), phi1_scaled(1.0))
        t = np.array([0.0, 0.5, 2.0])
        np.testing.assert_allclose(psi(t), phi1(t) ** 2)
        assert psi.tight
        assert psi.growth_rate == math.inf


class TestConjugateOfComposition:
    def test_identity_quadratic(self):
        np.testing.assert_allclose(conjugate_of_composition(identity(), quadratic(1.0), 1.0), 0.5, rtol=1e-9)

    def test_linear_offset_identity(self):
        for lam in (0.2, 1.0, 2.0):
            np.testing.assert_allclose(conjugate_of_composition(linear_offset(0.8, 2.0), identity(), lam),
                                       0.8, rtol=1e-12)
        assert conjugate_of_composition(linear_offset(0.8, 2.0), identity(), 2.5) == math.inf

    def test_quadratic_outer(self):
        for lam in (0.1, 1.0, 3.0):
            np.testing.assert_allclose(conjugate_of_composition(quadratic(2.0), identity(), lam),
                                       lam ** 2 / 4.0, rtol=1e-9)

    def test_matches_direct_conjugate(self):
        lams = np.logspace(-2, 1, 20)
        for Phi in (quadratic(2.0), phi1_scaled(0.5), linear_offset(0.7, 1.5)):
            for phi in (quadratic(1.0), phi1_scaled(2.0)):
                direct = legendre(compose(Phi, phi), lams)
                via = np.array([conjugate_of_composition(Phi, phi, lam) for lam in lams])
                fin = np.isfinite(direct)
                np.testing.assert_array_equal(fin, np.isfinite(via))
                np.testing.assert_allclose(via[fin], direct[fin], rtol=1e-6, atol=1e-12)


class TestGeneralizedInverse:
    def test_quadratic(self):
        assert generalized_inverse(quadratic(1.0), 2.0) == pytest.approx(2.0, rel=1e-14)

    def test_linear_offset(self):
        for y in (-0.5, 0.0, 3.0):
            assert generalized_inverse(linear_offset(0.5, 2.0), y) == pytest.approx((y + 0.5) / 2.0)

    def test_identity_negative(self):
        assert generalized_inverse(identity(), -1.0) == 0.0

    def test_grid(self):
        prof = grid_profile([0, 1, 2], [0, 1, 3])
        assert generalized_inverse(prof, 2.0) == pytest.approx(1.5)


class TestParsing:
    def test_shorthand(self):
        assert parse_profile("quadratic:2").params == {"lam": 2.0}
        lo = parse_profile("linear_offset:M=1,lambda=2")
        assert lo.params == {"M": 1.0, "lam": 2.0}
        with pytest.raises(ProfileError):
            parse_profile("cubic:1")
        with pytest.raises(ProfileError):
            parse_profile("quadratic:x")

    def test_roundtrip(self, tmp_path):
        prof = compose(quadratic(2.0), phi1_scaled(0.5))
        path = tmp_path / "p.json"
        path.write_text(json.dumps(profile_to_dict(prof)))
        back = parse_profile(str(path))
        t = np.linspace(0, 3, 7)
        np.testing.assert_allclose(back(t), prof(t))
        assert profile_from_dict({"kind": "grid", "knots": [0, 1], "values": [0, 1]}).growth_rate == 1.0

    def test_rejects_nonconvex_grid(self):
        with pytest.raises(ProfileError):
            grid_profile([0, 1, 2], [0, 2, 3])
