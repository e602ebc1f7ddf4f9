"""High-accuracy solvers: barrier minimizer, true minimizer, gap certificate."""

import numpy as np
import pytest

from conftest import ball_center, simplex_center

from barrierflow.errors import DimensionTooLarge, MaxItersExceeded
from barrierflow.geometry import SquaredEuclidean, make_geometry
from barrierflow.oracle import (
    default_geometry,
    gap_certificate,
    solve_barrier,
    solve_true,
)
from barrierflow.problem import (
    ConvexProblem,
    EuclideanBall,
    ProblemConstants,
    build_problem,
)


def test_solve_barrier_matches_closed_form_ball(ball_prob, ball_geom):
    res = solve_barrier(ball_prob, ball_geom, 10.0, 0.1)
    expected = ball_center(10.0, 0.1)
    np.testing.assert_allclose(res.point, expected, atol=1e-8)
    np.testing.assert_allclose(
        res.point, [0.23891680, 0.92036107], atol=1e-7
    )
    # the dual estimate is the central-path multiplier 1/(c*(s-g)), which
    # for this problem equals the first coordinate of the minimizer
    assert res.dual_norm_estimate == pytest.approx(expected[0], abs=1e-7)
    assert res.grad_norm <= 1e-10


def test_solve_barrier_matches_closed_form_simplex(simplex_prob, simplex_geom):
    res = solve_barrier(simplex_prob, simplex_geom, 100.0, 0.01)
    np.testing.assert_allclose(res.point, simplex_center(100.0, 0.01), atol=1e-8)


def test_solve_barrier_tracks_tightening_ladder(ball_prob, ball_geom, simplex_prob, simplex_geom):
    # as c grows with s = 1/c the minimizer approaches the true solution and
    # the objective gap stays under the certificate
    for prob, geom in ((ball_prob, ball_geom), (simplex_prob, simplex_geom)):
        true = solve_true(prob)
        prev_gap = np.inf
        for c in [10.0, 100.0, 1e3, 1e4, 1e5, 1e6]:
            s = 1.0 / c
            res = solve_barrier(prob, geom, c, s)
            f_gap = float(prob.objective(res.point)) - true.value
            assert f_gap <= gap_certificate(prob, c, s, res.dual_norm_estimate) + 1e-9
            assert f_gap <= prev_gap + 1e-12
            prev_gap = f_gap


def test_solve_barrier_extreme_weight_approaches_true_solution(ball_prob, ball_geom):
    res = solve_barrier(ball_prob, ball_geom, 1e8, 1e-8)
    assert np.linalg.norm(res.point - np.array([0.0, 1.0])) <= 1e-4


def test_solve_barrier_budget_exhaustion_attaches_best(ball_prob, ball_geom):
    with pytest.raises(MaxItersExceeded) as exc_info:
        solve_barrier(ball_prob, ball_geom, 10.0, 0.1, tol=1e-14, max_iters=3)
    best = exc_info.value.best
    assert best is not None
    assert ball_prob.outer.contains(best.point)


def test_solve_barrier_unconstrained_problem(ball_geom):
    # with no constraints the barrier reduces to the plain objective
    prob = ConvexProblem(
        name="plain-quadratic",
        dim=2,
        objective=lambda x: float(x @ x),
        objective_grad=lambda x: 2.0 * x,
        constraints=[],
        outer=EuclideanBall(2, 2.0),
        constants=ProblemConstants(m_f=2.0, l_f=2.0, l_phi=2.0),
        witness=np.array([0.5, 0.5]),
    )
    res = solve_barrier(prob, SquaredEuclidean(prob.outer), 1.0, 0.0)
    np.testing.assert_allclose(res.point, np.zeros(2), atol=1e-8)


def test_solve_true_closed_form_and_grid_agree(ball_prob, simplex_prob):
    for prob in (ball_prob, simplex_prob):
        analytic = solve_true(prob)
        grid = solve_true(prob, prefer_grid=True)
        assert np.linalg.norm(analytic.point - grid.point) <= 1e-6
        assert abs(analytic.value - grid.value) <= 1e-6
    assert solve_true(ball_prob).value == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(solve_true(ball_prob).point, [0.0, 1.0], atol=1e-9)


def test_solve_true_grid_rejects_high_dimensions():
    prob = ConvexProblem(
        name="plain-quadratic-4d",
        dim=4,
        objective=lambda x: float(x @ x),
        objective_grad=lambda x: 2.0 * x,
        constraints=[],
        outer=EuclideanBall(4, 1.0),
        constants=ProblemConstants(m_f=2.0, l_f=2.0, l_phi=2.0),
        witness=np.zeros(4),
    )
    with pytest.raises(DimensionTooLarge):
        solve_true(prob, prefer_grid=True)


def test_gap_certificate_formula(ball_prob):
    # m/c + s * dual_norm with one constraint
    assert gap_certificate(ball_prob, 10.0, 0.1, 0.5) == pytest.approx(0.15)
    with pytest.raises(ValueError):
        gap_certificate(ball_prob, 10.0, 0.1, -1.0)
    with pytest.raises(ValueError):
        gap_certificate(ball_prob, 0.0, 0.1, 0.5)


def test_default_geometry_matches_outer_set(ball_prob, simplex_prob):
    assert default_geometry(ball_prob).name == "euclidean-ball"
    assert default_geometry(simplex_prob).name == "neg-entropy"
