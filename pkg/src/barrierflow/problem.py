"""Problem containers and the log-barrier reformulation.

A problem is ``min f(x) s.t. g_i(x) <= 0, x in X`` with smooth convex f and
g_i and a compact convex X (a Euclidean ball or the probability simplex).
The barrier objective relaxes the constraints to ``g_i(x) < s`` and charges

    Phi(x) = f(x) + (1/c) * sum_i -log(s - g_i(x)),

so larger weights c and smaller slacks s tighten the approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainViolation

Fn = Callable[[np.ndarray], float]
GradFn = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# feasible sets


class EuclideanBall:
    """Closed ball {x : ||x||_2 <= radius}."""

    name = "euclidean-ball"

    def __init__(self, dim: int, radius: float):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.dim = int(dim)
        self.radius = float(radius)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        return x.shape[-1] == self.dim and float(np.linalg.norm(x)) <= self.radius + tol

    def project(self, x: np.ndarray) -> np.ndarray:
        nrm = float(np.linalg.norm(x))
        if nrm <= self.radius:
            return np.array(x, dtype=float)
        return x * (self.radius / nrm)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        # uniform over the ball: gaussian direction, radius ~ R * u^(1/n)
        v = rng.standard_normal(self.dim)
        v /= np.linalg.norm(v)
        r = self.radius * rng.random() ** (1.0 / self.dim)
        return r * v


class Simplex:
    """Probability simplex {x : x_i >= 0, sum x_i = 1}."""

    name = "simplex"

    def __init__(self, dim: int):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.dim = int(dim)

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return (
            x.shape[-1] == self.dim
            and abs(float(np.sum(x)) - 1.0) <= max(tol, 1e-12)
            and float(np.min(x)) >= -max(tol, 1e-12)
        )

    def project(self, x: np.ndarray) -> np.ndarray:
        # Euclidean projection via the sorted cumulative-sum threshold rule.
        u = np.sort(x)[::-1]
        css = np.cumsum(u) - 1.0
        ind = np.arange(1, self.dim + 1)
        cond = u - css / ind > 0
        rho = int(np.nonzero(cond)[0][-1])
        theta = css[rho] / (rho + 1.0)
        return np.maximum(x - theta, 0.0)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.dirichlet(np.ones(self.dim))


OuterSet = EuclideanBall | Simplex


# ---------------------------------------------------------------------------
# problem data


@dataclass(frozen=True)
class ProblemConstants:
    """Smoothness/convexity constants used by step-size rules.

    ``l_phi`` is a practical smoothness bound for the barrier objective along
    well-behaved trajectories, not the worst case over a whole sublevel set
    (the barrier curvature blows up like 1/(c*(s-g)^2) near the boundary).
    """

    m_f: float
    l_f: float
    l_phi: float

    def __post_init__(self):
        if not (0 < self.m_f <= self.l_f <= self.l_phi):
            raise ValueError("need 0 < m_f <= l_f <= l_phi")


@dataclass
class ConvexProblem:
    """Objective, constraints and the feasible set, with a strict witness."""

    name: str
    dim: int
    objective: Fn
    objective_grad: GradFn
    constraints: Sequence[tuple[Fn, GradFn]]
    outer: OuterSet
    constants: ProblemConstants
    witness: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.witness = np.asarray(self.witness, dtype=float)
        if self.witness.shape != (self.dim,):
            raise ValueError("witness shape mismatch")
        if not self.outer.contains(self.witness):
            raise ValueError("witness must lie in the feasible set")
        for i, (g, _) in enumerate(self.constraints):
            if not float(g(self.witness)) < 0.0:
                raise ValueError(f"witness must satisfy g_{i} < 0 strictly")
        if not np.all(np.isfinite(self.objective_grad(self.witness))):
            raise ValueError("objective gradient not finite at witness")

    @property
    def m(self) -> int:
        return len(self.constraints)

    def g_values(self, x: np.ndarray) -> np.ndarray:
        return np.array([float(g(x)) for g, _ in self.constraints])


@dataclass(frozen=True)
class BarrierParams:
    """Barrier weight c > 0 and slack s >= 0."""

    c: float
    s: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("barrier weight c must be positive")
        if self.s < 0:
            raise ValueError("slack s must be nonnegative")


@dataclass(frozen=True)
class FeasibilityReport:
    """Constraint values plus the two membership flags, never raising."""

    g_values: np.ndarray
    in_barrier_domain: bool  # all g_i(x) < s, strictly
    in_outer_set: bool


def feasibility_report(prob: ConvexProblem, x: np.ndarray, s: float) -> FeasibilityReport:
    g = prob.g_values(x)
    return FeasibilityReport(
        g_values=g,
        in_barrier_domain=bool(np.all(g < s)),
        in_outer_set=prob.outer.contains(x),
    )


class BarrierObjective:
    """Callable view of Phi for one (c, s) pair.

    Evaluations raise :class:`DomainViolation` outside the open region
    {x in X : g_i(x) < s}; they never return NaN or infinities.
    """

    def __init__(self, prob: ConvexProblem, params: BarrierParams):
        self.prob = prob
        self.params = params

    def _residuals(self, x: np.ndarray) -> np.ndarray:
        if not self.prob.outer.contains(x):
            raise DomainViolation(f"point {x} outside the feasible set")
        u = self.params.s - self.prob.g_values(x)
        if np.any(u <= 0.0):
            raise DomainViolation(
                f"slack residuals {u} not strictly positive at {x} (s={self.params.s})"
            )
        return u

    def in_domain(self, x: np.ndarray) -> bool:
        if not self.prob.outer.contains(x):
            return False
        return bool(np.all(self.prob.g_values(x) < self.params.s))

    def value(self, x: np.ndarray) -> float:
        u = self._residuals(x)
        val = float(self.prob.objective(x)) - float(np.sum(np.log(u))) / self.params.c
        if not math.isfinite(val):
            raise DomainViolation(f"barrier value not finite at {x}")
        return val

    def gradient(self, x: np.ndarray) -> np.ndarray:
        u = self._residuals(x)
        grad = np.array(self.prob.objective_grad(x), dtype=float)
        for (_, dg), ui in zip(self.prob.constraints, u):
            grad += dg(x) / (self.params.c * ui)
        if not np.all(np.isfinite(grad)):
            raise DomainViolation(f"barrier gradient not finite at {x}")
        return grad


def estimate_barrier_smoothness(
    obj: BarrierObjective,
    x: np.ndarray,
    h: float = 1e-5,
    power_iters: int = 60,
    safety: float = 1.25,
    seed: int = 0,
) -> float:
    """Largest-curvature estimate of Phi at x.

    Builds a central-difference Hessian and runs power iteration on it; the
    result is inflated by ``safety`` so step-size rules err conservative.
    """
    n = x.size
    H = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = h
        H[:, j] = (obj.gradient(x + e) - obj.gradient(x - e)) / (2.0 * h)
    H = 0.5 * (H + H.T)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(power_iters):
        w = H @ v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return safety * 0.0
        v = w / lam
    return safety * lam


# ---------------------------------------------------------------------------
# built-in problems


def _quadratic_objective(x):
    return 0.5 * x[..., 0] ** 2 + 1.5 * (x[..., 1] - 1.0) ** 2


def _quadratic_grad(x):
    out = np.empty_like(np.asarray(x, dtype=float))
    out[..., 0] = x[..., 0]
    out[..., 1] = 3.0 * (x[..., 1] - 1.0)
    return out


def _halfplane_g(x):
    return x[..., 1] - x[..., 0] - 1.0


def _halfplane_grad(x):
    out = np.empty_like(np.asarray(x, dtype=float))
    out[..., 0] = -1.0
    out[..., 1] = 1.0
    return out


def build_problem(name: str, outer: OuterSet) -> ConvexProblem:
    """Construct a registered problem instance on the given feasible set."""
    if name != "paper-quadratic":
        raise KeyError(f"unknown problem {name!r}")
    if outer.dim != 2:
        raise ValueError("paper-quadratic is two-dimensional")
    if isinstance(outer, Simplex):
        witness = np.array([0.5, 0.5])
    else:
        witness = np.zeros(2)
    return ConvexProblem(
        name=name,
        dim=2,
        objective=_quadratic_objective,
        objective_grad=_quadratic_grad,
        constraints=[(_halfplane_g, _halfplane_grad)],
        outer=outer,
        constants=ProblemConstants(m_f=1.0, l_f=3.0, l_phi=8.0),
        witness=witness,
    )


PROBLEM_NAMES = ("paper-quadratic",)
