import json
import math

import numpy as np
import pytest

from conftest import two_point_space
from funcineq.space import (ScalarField, SpaceError, check_space, discretize_line, grid_coordinates,
                            lipschitz_constant, lipschitz_regularize, load_field, load_space,
                            product_space, random_space, space_to_dict, validate_space)


class TestValidateSpace:
    def test_two_point_valid(self):
        sp = validate_space({"points": ["a", "b"], "dist": [[0, 1], [1, 0]], "weights": [0.5, 0.5]})
        assert sp.n == 2
        np.testing.assert_array_equal(sp.dist, [[0, 1], [1, 0]])

    def test_triangle_violation_names_triple(self):
        raw = {"points": ["1", "2", "3"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
               "weights": [0.2, 0.3, 0.5]}
        with pytest.raises(SpaceError, match=r"triangle.*\b1\b.*\b2\b.*\b3\b"):
            validate_space(raw)

    def test_unnormalised_weights(self):
        with pytest.raises(SpaceError, match="sum"):
            validate_space({"dist": [[0, 1], [1, 0]], "weights": [0.5, 0.6]})

    def test_zero_weight(self):
        with pytest.raises(SpaceError):
            validate_space({"dist": [[0, 1], [1, 0]], "weights": [1.0, 0.0]})

    def test_asymmetric(self):
        with pytest.raises(SpaceError, match="symmetric"):
            validate_space({"dist": [[0, 1], [2, 0]], "weights": [0.5, 0.5]})

    def test_missing_keys(self):
        with pytest.raises(SpaceError, match="weights"):
            validate_space({"dist": [[0, 1], [1, 0]]})
        with pytest.raises(SpaceError, match="dist"):
            validate_space({"weights": [0.5, 0.5]})

    def test_coords_and_roundtrip(self, tmp_path):
        raw = {"points": ["p", "q", "r"], "coords": [[0, 0], [3, 0], [0, 4]], "metric": "l2",
               "weights": [0.2, 0.3, 0.5], "edges": [[0, 1], [1, 2]]}
        sp = validate_space(raw)
        assert sp.dist[1, 2] == pytest.approx(5.0)
        path = tmp_path / "s.json"
        path.write_text(json.dumps(space_to_dict(sp)))
        back = load_space(path)
        np.testing.assert_allclose(back.dist, sp.dist)
        assert back.edges == sp.edges

    def test_field_file(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"values": [1.0, 2.0], "positive": True}))
        assert load_field(path).positive
        with pytest.raises(SpaceError):
            ScalarField(np.array([1.0, -1.0]), positive=True)
        with pytest.raises(SpaceError, match="2 points"):
            ScalarField(np.ones(3)).check_on(two_point_space())


class TestDiscretizeLine:
    def test_gaussian_second_moment(self, gaussian_grid):
        x = grid_coordinates(gaussian_grid)
        assert gaussian_grid.n == 6401
        assert abs(np.dot(gaussian_grid.weights, x ** 2) - 1.0) <= 1e-4

    def test_exponential_mean_zero(self, exponential_grid):
        x = grid_coordinates(exponential_grid)
        assert abs(np.dot(exponential_grid.weights, x)) <= 1e-12

    def test_density_ratio(self, gaussian_coarse):
        x = grid_coordinates(gaussian_coarse)
        w = gaussian_coarse.weights
        i, j = 100, 800
        np.testing.assert_allclose(w[i] / w[j], math.exp(-0.5 * (x[i] ** 2 - x[j] ** 2)), rtol=1e-12)

    def test_degenerate_and_oversized(self):
        with pytest.raises(SpaceError):
            discretize_line("gaussian", 1.0, 3.0)
        with pytest.raises(SpaceError, match="too large"):
            discretize_line("gaussian", 1e4, 1e-3)
        with pytest.raises(SpaceError):
            discretize_line("cauchy", 1.0, 0.1)


class TestProductSpace:
    def test_l1_and_l2_corners(self):
        a = two_point_space()
        p1 = product_space(a, a, "l1")
        p2 = product_space(a, a, "l2")
        assert p1.n == 4
        assert p1.dist[0, 3] == pytest.approx(2.0)
        assert p2.dist[0, 3] == pytest.approx(math.sqrt(2.0))
        np.testing.assert_allclose(p1.weights, 0.25)
        check_space(p1)
        check_space(p2)

    def test_size_limit(self):
        big = discretize_line("gaussian", 1.0, 0.01)
        with pytest.raises(SpaceError, match="limit"):
            product_space(big, big)


class TestRandomSpace:
    def test_deterministic(self):
        a, b = random_space(12, 5), random_space(12, 5)
        np.testing.assert_array_equal(a.dist, b.dist)
        np.testing.assert_array_equal(a.weights, b.weights)

    def test_validates(self):
        sp = random_space(20, 7)
        validate_space(space_to_dict(sp))
        validate_space(space_to_dict(random_space(2, 99)))

    def test_bounds(self):
        with pytest.raises(SpaceError):
            random_space(1, 0)
        with pytest.raises(SpaceError):
            random_space(501, 0)


class TestLipschitzRegularize:
    def test_two_point(self, two_point):
        np.testing.assert_allclose(lipschitz_regularize(two_point, [0.0, 10.0], 1.0), [0.0, 1.0])

    def test_fixed_points_and_constants(self):
        sp = random_space(15, 3)
        g = lipschitz_regularize(sp, np.random.default_rng(0).normal(size=15), 2.0)
        np.testing.assert_allclose(lipschitz_regularize(sp, g, 2.0), g)
        np.testing.assert_allclose(lipschitz_regularize(sp, np.full(15, 3.0), 1.0), 3.0)
        assert lipschitz_constant(sp, g) <= 2.0 + 1e-12

    def test_minorant(self):
        sp = random_space(15, 4)
        g = np.random.default_rng(1).normal(size=15) * 5
        assert np.all(lipschitz_regularize(sp, g, 1.0) <= g)
