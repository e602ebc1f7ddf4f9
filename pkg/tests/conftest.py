"""Shared fixtures: the two standard problem/geometry pairs and fit helpers.

Closed forms used throughout the suite, derived from the stationarity
condition of the barrier objective for the built-in quadratic problem
(f(x) = x1^2/2 + 3*(x2-1)^2/2, constraint g(x) = x2 - x1 - 1 <= 0):

* On the ball, the interior minimizer satisfies grad f + lam * grad g = 0
  with lam = 1/(c*(s - g)).  Eliminating coordinates gives a quadratic in
  lam whose positive root is

      lam = (-c*s + sqrt((c*s)^2 + 16*c/3)) / (8*c/3)
      xhat = (lam, 1 - lam/3)

* On the simplex (x2 = 1 - x1), the restriction is 2*x1^2 with slack
  s + 2*x1, giving

      x1 = (-c*s + sqrt((c*s)^2 + 4*c)) / (4*c)
"""

import math

import numpy as np
import pytest

from barrierflow.geometry import make_geometry
from barrierflow.problem import build_problem


@pytest.fixture(scope="session")
def ball_geom():
    return make_geometry("euclidean-ball", 2, radius=2.0)


@pytest.fixture(scope="session")
def ball_prob(ball_geom):
    return build_problem("paper-quadratic", ball_geom.set)


@pytest.fixture(scope="session")
def simplex_geom():
    return make_geometry("neg-entropy", 2)


@pytest.fixture(scope="session")
def simplex_prob(simplex_geom):
    return build_problem("paper-quadratic", simplex_geom.set)


def ball_center(c: float, s: float) -> np.ndarray:
    """Closed-form barrier minimizer on the ball (see module docstring)."""
    cs = c * s
    lam = (-cs + math.sqrt(cs * cs + 16.0 * c / 3.0)) / (8.0 * c / 3.0)
    return np.array([lam, 1.0 - lam / 3.0])


def simplex_center(c: float, s: float) -> np.ndarray:
    """Closed-form barrier minimizer on the simplex (see module docstring)."""
    cs = c * s
    x1 = (-cs + math.sqrt(cs * cs + 4.0 * c)) / (4.0 * c)
    return np.array([x1, 1.0 - x1])


def fit_line(x, y):
    """Least-squares line fit; returns (slope, r_squared)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2
