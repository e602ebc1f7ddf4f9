"""Mirror geometries: maps, divergences, and the mirror-step argmin property."""

import math

import numpy as np
import pytest
from scipy.special import rel_entr

from barrierflow.errors import DomainViolation
from barrierflow.geometry import GEOMETRY_NAMES, make_geometry


def test_registry():
    assert set(GEOMETRY_NAMES) == {"euclidean-ball", "neg-entropy"}
    with pytest.raises(KeyError):
        make_geometry("taxicab", 2)


def test_euclidean_maps_are_identity(ball_geom):
    w = np.array([0.2, -0.4])
    np.testing.assert_allclose(ball_geom.mirror_map(w), w, atol=0.0)
    # inverse map deliberately does not project: flow state may carry
    # momentum outside the ball
    far = np.array([5.0, 0.0])
    np.testing.assert_allclose(ball_geom.inverse_mirror(far), far, atol=0.0)


def test_euclidean_bregman_is_half_squared_distance(ball_geom):
    x, y = np.array([0.3, 0.4]), np.array([0.1, 0.0])
    assert ball_geom.bregman(x, y) == pytest.approx(0.5 * (0.2**2 + 0.4**2), abs=1e-15)
    assert ball_geom.mu == 1.0
    assert ball_geom.m_bound == pytest.approx(8.0)  # 2 * radius^2


def test_euclidean_mirror_step_frozen(ball_geom):
    # interior result: plain gradient step
    out = ball_geom.mirror_step(np.array([0.3, 0.4]), np.array([1.0, -2.0]), 0.1)
    np.testing.assert_allclose(out, np.array([0.2, 0.6]), atol=1e-15)
    # exterior result clamps to the ball
    out2 = ball_geom.mirror_step(np.array([1.8, 0.0]), np.array([-10.0, 0.0]), 0.1)
    np.testing.assert_allclose(out2, np.array([2.0, 0.0]), atol=1e-12)
    with pytest.raises(DomainViolation):
        ball_geom.mirror_step(np.array([5.0, 0.0]), np.zeros(2), 0.1)


def test_entropy_bregman_is_kl(simplex_geom):
    x = np.array([1.0 / 3.0, 2.0 / 3.0])
    y = np.array([0.5, 0.5])
    expected = float(np.sum(rel_entr(x, y)))
    assert simplex_geom.bregman(x, y) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainViolation):
        simplex_geom.bregman(x, np.array([1.0, 0.0]))


def test_entropy_bregman_pinsker_lower_bound(simplex_geom):
    # KL(x, y) >= (1/2) * ||x - y||_1^2: the divergence is 1-strongly convex
    # in the l1 norm over the simplex
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = simplex_geom.set.sample(rng)
        y = np.maximum(simplex_geom.set.sample(rng), 1e-9)
        y = y / y.sum()
        l1 = float(np.abs(x - y).sum())
        assert simplex_geom.bregman(x, y) >= 0.5 * l1 * l1 - 1e-12


def test_entropy_mirror_round_trip(simplex_geom):
    rng = np.random.default_rng(3)
    for _ in range(50):
        z = np.maximum(simplex_geom.set.sample(rng), 1e-9)
        z = z / z.sum()
        back = simplex_geom.inverse_mirror(simplex_geom.mirror_map(z))
        np.testing.assert_allclose(back, z, atol=1e-10)
    assert simplex_geom.m_bound == pytest.approx(math.log(1e6))


def test_entropy_mirror_step_frozen(simplex_geom):
    # softmax(log z - w * grad): with z = (1/2, 1/2), grad = (1, 0), w = 1
    # the logits differ by exactly 1
    out = simplex_geom.mirror_step(np.array([0.5, 0.5]), np.array([1.0, 0.0]), 1.0)
    e = math.exp(-1.0)
    np.testing.assert_allclose(
        out, np.array([e / (1 + e), 1 / (1 + e)]), atol=1e-14
    )
    with pytest.raises(DomainViolation):
        simplex_geom.mirror_step(np.array([0.3, 0.3]), np.zeros(2), 0.1)


def test_entropy_mirror_step_survives_extreme_weights(simplex_geom):
    # huge weighted gradients would underflow the losing coordinate to 0;
    # the result must stay in the open simplex
    out = simplex_geom.mirror_step(np.array([0.5, 0.5]), np.array([2000.0, 0.0]), 1.0)
    assert out.min() > 0.0
    assert abs(out.sum() - 1.0) <= 1e-12
    assert out[1] == pytest.approx(1.0, abs=1e-12)


def test_mirror_step_outputs_stay_in_set(ball_geom, simplex_geom):
    rng = np.random.default_rng(7)
    for geom in (ball_geom, simplex_geom):
        for _ in range(200):
            z = geom.set.sample(rng)
            if isinstance(z, np.ndarray) and geom is simplex_geom:
                z = np.maximum(z, 1e-12)
                z = z / z.sum()
            grad = rng.normal(size=2) * 5.0
            w = float(rng.uniform(0.0, 10.0))
            out = geom.mirror_step(z, grad, w)
            assert geom.set.contains(out, tol=1e-9)


def test_mirror_step_minimizes_linearized_objective(ball_geom, simplex_geom):
    # the step solves argmin_z { w*<grad, z> + V(z, z_k) }: no sampled
    # candidate may beat it by more than 1e-10
    rng = np.random.default_rng(17)
    for geom in (ball_geom, simplex_geom):
        for _ in range(25):
            z = geom.set.sample(rng)
            if geom is simplex_geom:
                z = np.maximum(z, 1e-9)
                z = z / z.sum()
            grad = rng.normal(size=2) * 3.0
            w = float(rng.uniform(0.01, 5.0))
            znew = geom.mirror_step(z, grad, w)
            val = w * float(grad @ znew) + geom.bregman(znew, z)
            cands = np.array([geom.set.sample(rng) for _ in range(2000)])
            vals = w * cands @ grad + np.array(
                [geom.bregman(cand, z) for cand in cands]
            )
            assert val <= float(vals.min()) + 1e-10
