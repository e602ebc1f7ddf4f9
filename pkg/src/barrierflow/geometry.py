"""Mirror-map machinery for the two supported geometries.

Each geometry bundles a strictly convex distance generator h, its Bregman
divergence, the gradient map w = grad h(z) with its inverse, and the mirror
step

    argmin_{z in X} weight * <grad, z> + V_h(z, z_ref),

which is a projected gradient step for the squared Euclidean norm on a ball
and a normalized multiplicative-weights update for negative entropy on the
simplex.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainViolation
from .problem import EuclideanBall, Simplex

_ENTROPY_FLOOR = 1e-300  # floor before logs so boundary points never yield -inf


class SquaredEuclidean:
    """h(x) = ||x||^2 / 2 on a Euclidean ball; V_h is half squared distance."""

    name = "euclidean-ball"

    def __init__(self, ball: EuclideanBall, mu: float = 1.0):
        self.set = ball
        self.mu = float(mu)

    @property
    def m_bound(self) -> float:
        # sup of V_h over the ball pairs: (2R)^2 / 2
        return 2.0 * self.set.radius**2

    def bregman(self, x: np.ndarray, y: np.ndarray) -> float:
        d = x - y
        return 0.5 * float(d @ d)

    def mirror_map(self, z: np.ndarray) -> np.ndarray:
        return np.array(z, dtype=float)

    def inverse_mirror(self, w: np.ndarray) -> np.ndarray:
        # Intentionally not projected: the flow state may carry momentum
        # outside the ball; only mirror steps clamp to the set.
        return np.array(w, dtype=float)

    def mirror_step(self, z: np.ndarray, grad: np.ndarray, weight: float) -> np.ndarray:
        if not self.set.contains(z):
            raise DomainViolation(f"mirror step reference {z} outside the ball")
        return self.set.project(z - weight * grad)


class NegativeEntropy:
    """h(x) = sum x_i log x_i on the simplex; V_h is the KL divergence."""

    name = "neg-entropy"

    def __init__(self, simplex: Simplex, mu: float = 1.0, interior_eps: float = 1e-6):
        self.set = simplex
        self.mu = float(mu)
        self.interior_eps = float(interior_eps)

    @property
    def m_bound(self) -> float:
        # KL is unbounded toward the boundary, so the bound is taken over
        # references in the shrunk simplex {y_i >= interior_eps}.
        return math.log(1.0 / self.interior_eps)

    def bregman(self, x: np.ndarray, y: np.ndarray) -> float:
        if np.any(y <= 0.0):
            raise DomainViolation("entropy divergence needs a positive reference point")
        xpos = np.maximum(x, 0.0)
        xcl = np.maximum(xpos, _ENTROPY_FLOOR)
        val = float(np.sum(xpos * (np.log(xcl) - np.log(y))) - np.sum(x) + np.sum(y))
        return val

    def mirror_map(self, z: np.ndarray) -> np.ndarray:
        return 1.0 + np.log(np.maximum(z, _ENTROPY_FLOOR))

    def inverse_mirror(self, w: np.ndarray) -> np.ndarray:
        e = np.exp(w - 1.0 - np.max(w - 1.0))
        return e / np.sum(e)

    def mirror_step(self, z: np.ndarray, grad: np.ndarray, weight: float) -> np.ndarray:
        if not self.set.contains(z):
            raise DomainViolation(f"mirror step reference {z} outside the simplex")
        logits = np.log(np.maximum(z, _ENTROPY_FLOOR)) - weight * grad
        logits -= np.max(logits)
        e = np.exp(logits)
        # large weighted gradients underflow the losing coordinates to 0.0;
        # keep the result in the open simplex
        e = np.maximum(e, _ENTROPY_FLOOR)
        return e / np.sum(e)


MirrorGeometry = SquaredEuclidean | NegativeEntropy


def make_geometry(name: str, dim: int, radius: float = 1.0, mu: float = 1.0) -> MirrorGeometry:
    """Build a geometry (and its feasible set) from the registry name."""
    if name == "euclidean-ball":
        return SquaredEuclidean(EuclideanBall(dim, radius), mu=mu)
    if name == "neg-entropy":
        return NegativeEntropy(Simplex(dim), mu=mu)
    raise KeyError(f"unknown geometry {name!r}")


GEOMETRY_NAMES = ("euclidean-ball", "neg-entropy")
