"""Tests for the bounded solvers and the Newton root polish."""

import math

import numpy as np
import pytest

from mindiv.errors import EvaluationError
from mindiv.optimize import solve_1d, solve_2d


def test_quadratic_minimum():
    res = solve_1d(lambda x: (x - 2.0) ** 2, (0.0, 5.0), tol=1e-6)
    assert res.x[0] == pytest.approx(2.0, abs=1e-5)
    assert res.converged


def test_quadratic_with_polish():
    res = solve_1d(
        lambda x: (x - 2.0) ** 2,
        (0.0, 5.0),
        tol=1e-4,
        psi=lambda v: np.array([2.0 * (v[0] - 2.0)]),
        psi_tol=1e-10,
    )
    assert res.x[0] == pytest.approx(2.0, abs=1e-10)
    assert res.converged
    assert res.psi_norm < 1e-10


def test_rosenbrock():
    rosen = lambda v: (1.0 - v[0]) ** 2 + 100.0 * (v[1] - v[0] ** 2) ** 2
    res = solve_2d(rosen, ((-2.0, 2.0), (-1.0, 3.0)), x0=np.array([-1.2, 1.0]), tol=1e-6)
    assert np.allclose(res.x, [1.0, 1.0], atol=1e-5)


def test_nan_objective_raises():
    def bad(x):
        return math.nan if 1.0 < x < 2.0 else (x - 1.5) ** 2

    with pytest.raises(EvaluationError):
        solve_1d(bad, (0.0, 5.0))


def test_boundary_minimum_flagged():
    res = solve_1d(lambda x: x, (0.0, 1.0), tol=1e-8)
    assert res.x[0] == pytest.approx(0.0, abs=1e-5)


def test_iteration_budget_respected():
    # the bracketing scan always runs; the refinement budget is capped
    res = solve_1d(lambda x: (x - 2.0) ** 2, (0.0, 5.0), tol=1e-12, max_iter=3)
    assert res.iterations <= 33 + 10


def test_overflowing_objective_still_bracketed():
    # objective is infinite over most of the box; the scan must find the well
    def spiky(x):
        return math.inf if x > 10.0 else (x - 2.0) ** 2

    res = solve_1d(spiky, (0.0, 200.0), tol=1e-8)
    assert res.x[0] == pytest.approx(2.0, abs=1e-4)
