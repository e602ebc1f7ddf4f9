"""Continuous-time accelerated mirror flow over the barrier objective.

The first-order form evolves the primal point X and the dual momentum
W = grad h(Z) of the auxiliary point Z = X + Xdot / beta_dot:

    dX/dt = beta_dot(t) * (inverse_mirror(W) - X)
    dW/dt = -beta_dot(t) * exp(beta(t)) * grad Phi(X)

Integration is classical RK4 with step rejection: any stage that leaves the
open slack region halves the step for that attempt, down to a hard floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, StepCollapse
from .geometry import MirrorGeometry
from .oracle import solve_barrier, solve_true
from .problem import BarrierObjective, BarrierParams, ConvexProblem
from .records import TrajectoryRecord, vector_columns

DT_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# time scalings and barrier modes


@dataclass(frozen=True)
class PolynomialBeta:
    """beta_t = 2p log t for t >= t0 > 0; gap decays like t^(-2p)."""

    p: float
    t0: float = 1.0

    def beta(self, t: float) -> float:
        return 2.0 * self.p * math.log(t)

    def beta_dot(self, t: float) -> float:
        return 2.0 * self.p / t


@dataclass(frozen=True)
class ExponentialBeta:
    """beta_t = 2pt; gap decays like exp(-2pt)."""

    p: float
    t0: float = 0.0

    def beta(self, t: float) -> float:
        return 2.0 * self.p * t

    def beta_dot(self, t: float) -> float:
        return 2.0 * self.p


ContinuousSchedule = PolynomialBeta | ExponentialBeta


@dataclass(frozen=True)
class FixedBarrier:
    """Constant (c, s) while the clock beta_t still accelerates the flow."""

    c: float
    s: float

    def params_at(self, sched: ContinuousSchedule, t: float) -> BarrierParams:
        return BarrierParams(self.c, self.s)


@dataclass(frozen=True)
class ScheduledBarrier:
    """c(t) = exp(beta_t), s(t) = exp(-beta_t): tightening along the flow."""

    def params_at(self, sched: ContinuousSchedule, t: float) -> BarrierParams:
        b = sched.beta(t)
        return BarrierParams(math.exp(b), math.exp(-b))


BarrierMode = FixedBarrier | ScheduledBarrier


@dataclass
class DynamicsState:
    t: float
    x: np.ndarray
    w: np.ndarray


def vector_field(
    prob: ConvexProblem,
    geom: MirrorGeometry,
    sched: ContinuousSchedule,
    mode: BarrierMode,
    t: float,
    x: np.ndarray,
    w: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side (dX, dW) at clock time t; raises DomainViolation off-domain."""
    params = mode.params_at(sched, t)
    obj = BarrierObjective(prob, params)
    grad = obj.gradient(x)
    bdot = sched.beta_dot(t)
    z = geom.inverse_mirror(w)
    dx = bdot * (z - x)
    dw = (-bdot * math.exp(sched.beta(t))) * grad
    return dx, dw


def lyapunov_energy(
    obj: BarrierObjective,
    geom: MirrorGeometry,
    xhat: np.ndarray,
    phi_hat: float,
    x: np.ndarray,
    z: np.ndarray,
    beta: float,
) -> float:
    """exp(beta) * (Phi(x) - Phi(xhat)) + V_h(xhat, z), gap clamped at zero."""
    gap = max(obj.value(x) - phi_hat, 0.0)
    return math.exp(beta) * gap + geom.bregman(xhat, z)


# ---------------------------------------------------------------------------
# integration


def integrate(
    prob: ConvexProblem,
    geom: MirrorGeometry,
    sched: ContinuousSchedule,
    mode: BarrierMode,
    x0: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
    w0: np.ndarray | None = None,
    refresh_every: int = 50,
    record: TrajectoryRecord | None = None,
) -> TrajectoryRecord:
    """Integrate the flow from t0 to t1 with base step dt.

    Parameters
    ----------
    x0, w0
        Initial primal point (must lie strictly inside the slack region) and
        optional dual momentum; ``w0`` defaults to ``mirror_map(x0)``, the
        rest state. Passing the previous segment's record and momentum
        continues an earlier run.
    refresh_every
        In scheduled mode the comparison minimizer drifts with (c, s) and is
        recomputed after this many accepted steps.

    Returns the trajectory record with one row per accepted step. Raises
    :class:`StepCollapse` (partial record attached) when step halving hits
    the floor.
    """
    if isinstance(sched, PolynomialBeta) and t0 < sched.t0:
        raise ValueError(f"polynomial clock starts at t0 >= {sched.t0}")
    if dt <= 0 or t1 <= t0:
        raise ValueError("need dt > 0 and t1 > t0")
    x = np.array(x0, dtype=float)
    w = geom.mirror_map(x) if w0 is None else np.array(w0, dtype=float)

    params0 = mode.params_at(sched, t0)
    obj0 = BarrierObjective(prob, params0)
    if not obj0.in_domain(x):
        raise DomainViolation("initial point outside the open slack region")

    scheduled = isinstance(mode, ScheduledBarrier)
    true_res = solve_true(prob)
    f_star = true_res.value
    xhat_res = solve_barrier(prob, geom, params0.c, params0.s)
    xhat = xhat_res.point
    fresh = record is None
    if fresh:
        n = prob.dim
        record = TrajectoryRecord(
            kind="dynamics",
            columns=["t"]
            + vector_columns("x", n)
            + vector_columns("z", n)
            + ["phi_gap", "f_gap", "g_max", "slack", "lyapunov"],
            metadata={
                "problem": prob.name,
                "geometry": geom.name,
                "schedule": type(sched).__name__,
                "p": sched.p,
                "barrier_mode": "scheduled" if scheduled else "fixed",
                "t0": t0,
                "dt": dt,
                "f_star": f_star,
                "x_star": [float(v) for v in true_res.point],
            },
        )
        if scheduled:
            record.aux["lyapunov_frozen"] = []
            record.aux["xhat_frozen"] = xhat.copy()
    xhat_frozen = record.aux.get("xhat_frozen") if scheduled else xhat

    obj_f = prob.objective

    def emit(t, x, w, xh):
        params = mode.params_at(sched, t)
        obj = BarrierObjective(prob, params)
        z = geom.inverse_mirror(w)
        beta = sched.beta(t)
        phi_hat = obj.value(xh)
        gap = max(obj.value(x) - phi_hat, 0.0)
        g = prob.g_values(x)
        gmax = float(np.max(g)) if g.size else -1.0
        energy = math.exp(beta) * gap + geom.bregman(xh, z)
        record.append(
            [t, *x, *z, gap, float(obj_f(x)) - f_star, gmax, params.s, energy]
        )
        if scheduled:
            phi_fr = obj.value(xhat_frozen)
            gap_fr = max(obj.value(x) - phi_fr, 0.0)
            record.aux["lyapunov_frozen"].append(
                math.exp(beta) * gap_fr + geom.bregman(xhat_frozen, z)
            )

    if fresh:
        emit(t0, x, w, xhat)

    t = t0
    accepted = 0
    while t < t1 - 1e-12:
        h = min(dt, t1 - t)
        while True:
            try:
                k1x, k1w = vector_field(prob, geom, sched, mode, t, x, w)
                k2x, k2w = vector_field(
                    prob, geom, sched, mode, t + 0.5 * h, x + 0.5 * h * k1x, w + 0.5 * h * k1w
                )
                k3x, k3w = vector_field(
                    prob, geom, sched, mode, t + 0.5 * h, x + 0.5 * h * k2x, w + 0.5 * h * k2w
                )
                k4x, k4w = vector_field(
                    prob, geom, sched, mode, t + h, x + h * k3x, w + h * k3w
                )
                xn = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
                wn = w + (h / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
                ok = (
                    np.all(np.isfinite(xn))
                    and np.all(np.isfinite(wn))
                    and BarrierObjective(prob, mode.params_at(sched, t + h)).in_domain(xn)
                )
            except DomainViolation:
                ok = False
            if ok:
                break
            h *= 0.5
            if h < DT_FLOOR:
                exc = StepCollapse(
                    f"step size underflowed at t={t:.6g} "
                    f"(x={x}, slack margin exhausted)"
                )
                exc.partial_record = record
                raise exc
        t += h
        x, w = xn, wn
        accepted += 1
        if scheduled and accepted % refresh_every == 0:
            params = mode.params_at(sched, t)
            xhat = solve_barrier(prob, geom, params.c, params.s, x0=xhat).point
        emit(t, x, w, xhat)

    record.metadata["final_w"] = [float(v) for v in w]
    record.metadata["accepted_steps"] = accepted + int(record.metadata.get("accepted_steps", 0))
    return record


def integrate_piecewise(
    prob: ConvexProblem,
    geom: MirrorGeometry,
    sched: ContinuousSchedule,
    mode: BarrierMode,
    x0: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
    dt_growth: float = 1.0,
    refresh_every: int = 50,
) -> TrajectoryRecord:
    """Run unit-length segments with geometrically scaled base steps.

    ``dt_growth < 1`` shrinks the step on later segments, matching the
    stiffness growth of exp(beta_t) without an adaptive controller.
    """
    if dt_growth == 1.0:
        return integrate(prob, geom, sched, mode, x0, t0, t1, dt, refresh_every=refresh_every)
    record = None
    x = np.array(x0, dtype=float)
    w = None
    seg_start = t0
    i = 0
    while seg_start < t1 - 1e-12:
        seg_end = min(seg_start + 1.0, t1)
        record = integrate(
            prob,
            geom,
            sched,
            mode,
            x,
            seg_start,
            seg_end,
            dt * dt_growth**i,
            w0=w,
            refresh_every=refresh_every,
            record=record,
        )
        x = record.points("x")[-1]
        w = np.array(record.metadata["final_w"])
        seg_start = seg_end
        i += 1
    return record
