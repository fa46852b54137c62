import numpy as np
import pytest

from funcineq.space import MetricMeasureSpace, discretize_line


def two_point_space(w=(0.5, 0.5), d=1.0, edges=None):
    return MetricMeasureSpace(("a", "b"), np.asarray(w, dtype=float),
                              dist_matrix=np.array([[0.0, d], [d, 0.0]]), edges=edges)


@pytest.fixture
def two_point():
    return two_point_space()


@pytest.fixture(scope="session")
def gaussian_grid():
    return discretize_line("gaussian", 8.0, 0.0025)


@pytest.fixture(scope="session")
def gaussian_coarse():
    return discretize_line("gaussian", 8.0, 0.01)


@pytest.fixture(scope="session")
def exponential_grid():
    return discretize_line("two_sided_exponential", 40.0, 0.01)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
