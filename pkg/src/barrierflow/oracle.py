"""High-accuracy reference solvers.

``solve_barrier`` minimizes the barrier objective for one (c, s) pair with
projected/mirror gradient descent and Armijo backtracking. ``solve_true``
returns the constrained minimizer of the original problem, either from a
registered closed form or by brute-force grid refinement. Both feed the
suboptimality certificate m/c + s * ||lambda*||_1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .errors import DimensionTooLarge, DomainViolation, MaxItersExceeded
from .geometry import MirrorGeometry, SquaredEuclidean
from .problem import BarrierObjective, BarrierParams, ConvexProblem, EuclideanBall, Simplex

ARMIJO_SHRINK = 0.5
# Steep enough to reject edge-of-stability steps (along a curvature-lambda
# direction a step t passes only if t*lambda <= 2*(1-ARMIJO_DECREASE), which
# caps the per-step contraction factor at |1-t*lambda| <= 0.4); steps along
# flat directions realize nearly the full predicted decrease and still pass.
ARMIJO_DECREASE = 0.3


@dataclass(frozen=True)
class OracleResult:
    point: np.ndarray
    value: float
    grad_norm: float
    dual_norm_estimate: float
    certificate: str
    iterations: int = 0


def _projected_residual(prob: ConvexProblem, x: np.ndarray, grad: np.ndarray) -> float:
    # Unit-step projected-gradient residual; equals ||grad|| at interior points.
    return float(np.linalg.norm(x - prob.outer.project(x - grad)))


def _dual_estimate(prob: ConvexProblem, x: np.ndarray, params: BarrierParams) -> float:
    u = params.s - prob.g_values(x)
    return float(np.sum(1.0 / (params.c * u)))


def solve_barrier(
    prob: ConvexProblem,
    geom: MirrorGeometry,
    c: float,
    s: float,
    tol: float = 1e-10,
    max_iters: int = 10**6,
    x0: np.ndarray | None = None,
) -> OracleResult:
    """Minimize Phi(.; c, s) over X to a projected-gradient residual <= tol.

    Mirror steps follow the supplied geometry; backtracking halves the step
    until both the sufficient-decrease test and strict slack positivity hold.
    Once value differences fall below float resolution the backtracking
    certifies steps by strict residual decrease instead. Raises
    :class:`MaxItersExceeded` (best point attached) on budget exhaustion.
    """
    params = BarrierParams(c, s)
    obj = BarrierObjective(prob, params)
    x = np.array(prob.witness if x0 is None else x0, dtype=float)
    fx = obj.value(x)
    step = 1.0
    fallback = 1.0 / max(prob.constants.l_phi, 1.0)
    grad = obj.gradient(x)
    residual = _projected_residual(prob, x, grad)
    best_residual = residual
    no_improve = 0
    for it in range(int(max_iters)):
        if residual <= tol:
            return OracleResult(
                point=x,
                value=fx,
                grad_norm=residual,
                dual_norm_estimate=_dual_estimate(prob, x, params),
                certificate="mirror-descent-armijo",
                iterations=it,
            )
        moved = False
        t = step
        noise = 8.0 * np.finfo(float).eps * abs(fx)
        for _ in range(80):
            cand = geom.mirror_step(x, grad, t)
            try:
                fc = obj.value(cand)
            except DomainViolation:
                t *= ARMIJO_SHRINK
                continue
            gdot = float(grad @ (x - cand))
            # the noise floor keeps one-ulp rounding ticks from being
            # mistaken for sufficient decrease at collapsed step sizes
            if gdot > 0.0 and fc <= fx - max(ARMIJO_DECREASE * gdot, noise):
                x, fx = cand, fc
                grad = obj.gradient(x)
                residual = _projected_residual(prob, x, grad)
                step = min(t * 2.0, 1e3)
                moved = True
                break
            t *= ARMIJO_SHRINK
        if not moved:
            # Value differences no longer resolve in floats; certify progress
            # by strict decrease of the projected-gradient residual instead.
            t = max(step, fallback)
            for _ in range(80):
                trial = geom.mirror_step(x, grad, t)
                try:
                    ftrial = obj.value(trial)
                except DomainViolation:
                    t *= ARMIJO_SHRINK
                    continue
                gtrial = obj.gradient(trial)
                rtrial = _projected_residual(prob, trial, gtrial)
                if rtrial < residual:
                    x, fx, grad, residual = trial, ftrial, gtrial, rtrial
                    step = min(t * 2.0, 1e3)
                    moved = True
                    break
                t *= ARMIJO_SHRINK
            if not moved:
                break
        if residual < 0.5 * best_residual:
            best_residual = residual
            no_improve = 0
        else:
            no_improve += 1
            if no_improve > 3000:
                break
    best = OracleResult(
        point=x,
        value=fx,
        grad_norm=residual,
        dual_norm_estimate=_dual_estimate(prob, x, params),
        certificate="mirror-descent-armijo",
        iterations=int(max_iters),
    )
    if residual <= tol:
        return best
    raise MaxItersExceeded(
        f"barrier solve stalled at residual {residual:.3e} (tol {tol:.1e})", best=best
    )


# ---------------------------------------------------------------------------
# true-problem solvers


def _feasible_dual_estimate(prob: ConvexProblem, x: np.ndarray, active_tol: float) -> float:
    """Nonnegative multipliers for near-active constraints via least squares."""
    g = prob.g_values(x)
    active = [i for i in range(prob.m) if abs(g[i]) <= active_tol]
    if not active:
        return 0.0
    A = np.stack([prob.constraints[i][1](x) for i in active], axis=1)
    lam, _ = nnls(A, -prob.objective_grad(x))
    return float(np.sum(lam))


def _analytic_true(prob: ConvexProblem) -> OracleResult | None:
    if prob.name != "paper-quadratic":
        return None
    xstar = np.array([0.0, 1.0])
    if not prob.outer.contains(xstar):
        return None
    if np.any(prob.g_values(xstar) > 0.0):
        return None
    # gradient of f vanishes at (0, 1), so the constraint is active with a
    # zero multiplier and the KKT system closes with lambda* = 0
    return OracleResult(
        point=xstar,
        value=float(prob.objective(xstar)),
        grad_norm=0.0,
        dual_norm_estimate=0.0,
        certificate="analytic-kkt",
    )


def _grid_axes(outer, center: np.ndarray, half: float, points: int) -> list[np.ndarray]:
    axes = []
    if isinstance(outer, EuclideanBall):
        for j in range(outer.dim):
            lo = max(center[j] - half, -outer.radius)
            hi = min(center[j] + half, outer.radius)
            axes.append(np.linspace(lo, hi, points))
    else:
        for j in range(outer.dim - 1):
            lo = max(center[j] - half, 0.0)
            hi = min(center[j] + half, 1.0)
            axes.append(np.linspace(lo, hi, points))
    return axes


def _grid_points(outer, axes: list[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    if isinstance(outer, Simplex):
        last = 1.0 - np.sum(pts, axis=-1, keepdims=True)
        pts = np.concatenate([pts, last], axis=-1)
        keep = pts[:, -1] >= 0.0
    else:
        keep = np.linalg.norm(pts, axis=-1) <= outer.radius
    return pts[keep]


def _batch_eval(fn, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(fn(pts), dtype=float)
        if vals.shape == (pts.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([float(fn(p)) for p in pts])


def _grid_true(prob: ConvexProblem, rounds: int, points: int) -> OracleResult:
    outer = prob.outer
    free_dims = outer.dim if isinstance(outer, EuclideanBall) else outer.dim - 1
    if free_dims > 3:
        raise DimensionTooLarge(
            f"grid search supports at most 3 free dimensions, got {free_dims}"
        )
    if free_dims == 3:
        points = min(points, 61)
    center = np.array(prob.witness, dtype=float)
    half = outer.radius if isinstance(outer, EuclideanBall) else 1.0
    best_x = center.copy()
    best_f = float(prob.objective(best_x))
    spacing = half
    for _ in range(rounds):
        axes = _grid_axes(outer, best_x, half, points)
        pts = _grid_points(outer, axes)
        feas = np.ones(pts.shape[0], dtype=bool)
        for g, _ in prob.constraints:
            feas &= _batch_eval(g, pts) <= 0.0
        pts = pts[feas]
        if pts.shape[0] > 0:
            vals = _batch_eval(prob.objective, pts)
            i = int(np.argmin(vals))
            if vals[i] < best_f:
                best_f = float(vals[i])
                best_x = pts[i].copy()
        spacing = 2.0 * half / (points - 1)
        half /= 10.0
    return OracleResult(
        point=best_x,
        value=best_f,
        grad_norm=float(np.linalg.norm(prob.objective_grad(best_x))),
        dual_norm_estimate=_feasible_dual_estimate(prob, best_x, active_tol=10.0 * spacing),
        certificate="grid-refinement",
    )


def solve_true(
    prob: ConvexProblem,
    rounds: int = 6,
    points: int = 201,
    prefer_grid: bool = False,
) -> OracleResult:
    """Solve the original constrained problem.

    A registered closed form is used when available and valid on the given
    feasible set; otherwise successive grid refinement (each round shrinks
    the box tenfold around the incumbent). Grid search raises
    :class:`DimensionTooLarge` beyond three free dimensions.
    """
    if not prefer_grid:
        res = _analytic_true(prob)
        if res is not None:
            return res
    return _grid_true(prob, rounds, points)


def gap_certificate(prob: ConvexProblem, c: float, s: float, dual_norm: float) -> float:
    """Upper bound on |f(barrier minimizer) - f(true minimizer)|."""
    params = BarrierParams(c, s)  # validates positivity
    if dual_norm < 0:
        raise ValueError("dual norm estimate must be nonnegative")
    return prob.m / params.c + params.s * dual_norm


def default_geometry(prob: ConvexProblem) -> MirrorGeometry:
    """Geometry matching the problem's feasible set."""
    if isinstance(prob.outer, EuclideanBall):
        return SquaredEuclidean(prob.outer)
    from .geometry import NegativeEntropy

    return NegativeEntropy(prob.outer)
