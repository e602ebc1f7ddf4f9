"""Discrete-time methods on the barrier objective.

Three updates share one skeleton built from a weight sequence A_k:

* ``agm1_step`` — implicit scheme; x_{k+1} and z_{k+1} are coupled and
  resolved by a damped fixed-point iteration.
* ``agm2_step`` — explicit scheme with an extra gradient-step sequence y_k.
* ``gm_step`` — plain (non-accelerated) mirror scheme.

All use the per-step quantities alpha_k = (A_{k+1}-A_k)/delta and
tau_k = (A_{k+1}-A_k)/(delta A_k); the z-update weight is delta*alpha_k and
the x-mixing weight is delta*tau_k, so delta cancels and only A_k matters.
In scheduled-barrier mode the barrier follows c_k = A_k, s_k = 1/A_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainViolation,
    FixedPointDivergence,
    InfeasibleStart,
    MaxItersExceeded,
    ModeMismatch,
)
from .geometry import MirrorGeometry, SquaredEuclidean
from .oracle import solve_barrier, solve_true
from .problem import BarrierObjective, BarrierParams, ConvexProblem
from .records import TrajectoryRecord, vector_columns

FP_INNER_DAMPINGS = 30
X_UPDATE_DAMPINGS = 30
_FP_STALL_WINDOW = 50


def _fp_floor(x: np.ndarray) -> float:
    """Residual size below which float arithmetic cannot certify progress."""
    return 8.0 * math.sqrt(np.finfo(float).eps) * (1.0 + float(np.linalg.norm(x)))


# ---------------------------------------------------------------------------
# weight schedules


class _ScheduleBase:
    """Derived quantities shared by every A_k variant."""

    delta: float
    k_start: int = 0

    def A(self, k: int) -> float:
        raise NotImplementedError

    def alpha(self, k: int) -> float:
        return (self.A(k + 1) - self.A(k)) / self.delta

    def tau(self, k: int) -> float:
        return (self.A(k + 1) - self.A(k)) / (self.delta * self.A(k))

    def weight_z(self, k: int) -> float:
        """delta * alpha_k, computed without the delta round trip."""
        return self.A(k + 1) - self.A(k)

    def weight_x(self, k: int) -> float:
        """delta * tau_k."""
        return (self.A(k + 1) - self.A(k)) / self.A(k)

    def barrier_at(self, k: int) -> BarrierParams:
        a = self.A(k)
        return BarrierParams(a, 1.0 / a)


@dataclass(frozen=True)
class ExpRate(_ScheduleBase):
    """A_k = exp(2 delta k p): linear (geometric) convergence weights."""

    p: float
    delta: float = 0.1
    k_start: int = 0

    def A(self, k: int) -> float:
        return math.exp(2.0 * self.delta * self.p * k)


@dataclass(frozen=True)
class PolyPower(_ScheduleBase):
    """A_k = (delta k)^(2p), started at k=1 since A_0 would vanish."""

    p: float
    delta: float = 1.0
    k_start: int = 1

    def A(self, k: int) -> float:
        return (self.delta * k) ** (2.0 * self.p)


@dataclass(frozen=True)
class QuadC(_ScheduleBase):
    """A_0 = C and A_k = C k^2 afterwards; the first step degenerates to a
    plain gradient step because A_1 = A_0."""

    C: float
    delta: float = 1.0
    k_start: int = 0

    def A(self, k: int) -> float:
        return self.C if k == 0 else self.C * float(k) * float(k)


@dataclass
class HarmonicSq(_ScheduleBase):
    """A_k = sum_{i<=k} 1/(i+1)^2, bounded above by pi^2/6."""

    delta: float = 1.0
    k_start: int = 0
    _partial: list = field(default_factory=lambda: [1.0], repr=False, compare=False)

    def A(self, k: int) -> float:
        while len(self._partial) <= k:
            i = len(self._partial)
            self._partial.append(self._partial[-1] + 1.0 / ((i + 1) * (i + 1)))
        return self._partial[k]


SCHEDULE_NAMES = ("exp-rate", "poly-power", "quad-c", "harmonic-sq")


def make_schedule(name: str, p: float = 1.0, C: float = 0.1, delta: float = 1.0):
    if name == "exp-rate":
        return ExpRate(p=p, delta=delta)
    if name == "poly-power":
        return PolyPower(p=p, delta=delta)
    if name == "quad-c":
        return QuadC(C=C, delta=delta)
    if name == "harmonic-sq":
        return HarmonicSq(delta=delta)
    raise ValueError(f"unknown schedule {name!r}; choose from {SCHEDULE_NAMES}")


# ---------------------------------------------------------------------------
# single steps


@dataclass
class IterateState:
    k: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class StepInfo:
    damping_events: int = 0
    fp_iterations: int = 0


def _agm1_inner_euclidean(obj, geom, xk, zk, dalpha, dtau, l_phi, fp_tol, fp_max, k):
    """Damped fixed-point iteration with the damping chosen by line search.

    For a Euclidean mirror map the damped update x + theta*(T(x) - x) is a
    gradient step on the prox objective

        psi(x) = 0.5*||x - a||^2 + gamma*dalpha*Phi(x),   a = (dtau*z_k + x_k)/(1+dtau),

    whose minimizer is the fixed point. Backtracking on psi keeps the
    iteration stable even where the barrier curvature exceeds l_phi (near the
    slack boundary); once psi differences fall below float resolution a
    strict drop of the fixed-point residual certifies the move instead.
    """
    gamma = dtau / (1.0 + dtau)
    w = gamma * dalpha
    anchor = (dtau * zk + xk) / (1.0 + dtau)

    def psi(x: np.ndarray) -> float:
        d = x - anchor
        return 0.5 * float(d @ d) + w * obj.value(x)

    theta = min(1.0, 1.0 / (1.0 + w * l_phi))
    xt = xk
    gt = obj.gradient(xt)
    psi_t = psi(xt)
    change = math.inf
    best_resid = math.inf
    stall = 0
    iters = 0
    dampings = 0
    for iters in range(1, fp_max + 1):
        zt = geom.mirror_step(zk, gt, dalpha)
        target = (dtau * zt + xk) / (1.0 + dtau)
        resid = float(np.linalg.norm(target - xt))
        if resid <= fp_tol:
            change = resid
            break
        if resid < 0.9 * best_resid:
            best_resid = resid
            stall = 0
        else:
            stall += 1
            if stall > _FP_STALL_WINDOW:
                # the residual has stopped improving. The line search cannot
                # certify a psi decrease below float resolution, which caps
                # the attainable residual near sqrt(eps*|psi|/theta); accept
                # a stall at that floor, else surface it to the divergence
                # check.
                floor = 4.0 * math.sqrt(
                    8.0
                    * np.finfo(float).eps
                    * (1.0 + abs(psi_t))
                    / (0.3 * max(theta, 1e-8))
                )
                change = 0.0 if resid <= floor else resid
                break
        grad_psi = (xt - anchor) + w * gt
        moved = False
        t = min(1.0, theta * 4.0)
        gcand = None
        for _ in range(2 * FP_INNER_DAMPINGS):
            trial = xt + t * (target - xt)
            try:
                trial_val = psi(trial)
            except DomainViolation:
                t *= 0.5
                dampings += 1
                continue
            gdot = float(grad_psi @ (xt - trial))
            # the decrease test must clear float resolution of psi, else a
            # converged iterate keeps accepting pure-noise moves
            need = max(0.3 * gdot, 8.0 * np.finfo(float).eps * abs(psi_t))
            if gdot > 0.0 and trial_val <= psi_t - need:
                gcand = obj.gradient(trial)
                moved = True
                break
            t *= 0.5
            dampings += 1
        if not moved:
            # psi differences underflow near the solution before the residual
            # does; rerun the ladder accepting a residual contraction
            # commensurate with the damping instead. Kept as a second phase:
            # interleaving would let a marginal residual drop preempt a
            # smaller, far faster Armijo-certified damping.
            t = min(1.0, theta * 4.0)
            for _ in range(2 * FP_INNER_DAMPINGS):
                trial = xt + t * (target - xt)
                try:
                    gtrial = obj.gradient(trial)
                except DomainViolation:
                    t *= 0.5
                    dampings += 1
                    continue
                ztrial = geom.mirror_step(zk, gtrial, dalpha)
                tnext = (dtau * ztrial + xk) / (1.0 + dtau)
                if float(np.linalg.norm(tnext - trial)) <= (1.0 - 0.25 * t) * resid:
                    gcand = gtrial
                    trial_val = psi(trial)
                    moved = True
                    break
                t *= 0.5
                dampings += 1
        if not moved:
            # no damping produces progress: x has stopped moving in floats
            change = 0.0
            break
        change = float(np.linalg.norm(trial - xt))
        xt, gt, psi_t, theta = trial, gcand, trial_val, t
        if change <= fp_tol:
            break
    return xt, gt, change, iters, dampings


def _agm1_inner_adaptive(obj, geom, xk, zk, dalpha, dtau, l_phi, fp_tol, fp_max, k):
    """Damped fixed-point iteration accepting on residual contraction.

    Used for non-Euclidean mirror maps, where the damped update has no
    gradient-descent objective to line-search on. Each sweep tries damping
    factors downward from slightly above the last accepted one and takes
    the first whose damped move contracts the fixed-point residual at a
    rate commensurate with the damping. The global smoothness bound only
    seeds the first sweep: the locally stable damping can be orders of
    magnitude larger (the mirror map's Jacobian shrinks near the simplex
    boundary), and the ladder re-finds it each time.
    """
    gamma = dtau / (1.0 + dtau)
    theta = min(1.0, 1.0 / (1.0 + gamma * dalpha * l_phi))
    xt = xk
    gt = obj.gradient(xt)
    change = math.inf
    best_resid = math.inf
    stall = 0
    iters = 0
    dampings = 0
    for iters in range(1, fp_max + 1):
        zt = geom.mirror_step(zk, gt, dalpha)
        target = (dtau * zt + xk) / (1.0 + dtau)
        resid = float(np.linalg.norm(target - xt))
        if resid <= fp_tol:
            change = resid
            break
        if resid < 0.9 * best_resid:
            best_resid = resid
            stall = 0
        else:
            stall += 1
            if stall > _FP_STALL_WINDOW:
                # the residual has stopped improving; treat it as the float
                # floor when small, else surface it to the divergence check
                change = 0.0 if resid <= _fp_floor(xt) else resid
                break
        moved = False
        saw_feasible = False
        t = min(1.0, theta * 4.0)
        for _ in range(2 * FP_INNER_DAMPINGS):
            trial = xt + t * (target - xt)
            try:
                gtrial = obj.gradient(trial)
            except DomainViolation:
                t *= 0.5
                dampings += 1
                continue
            saw_feasible = True
            ztrial = geom.mirror_step(zk, gtrial, dalpha)
            tnext = (dtau * ztrial + xk) / (1.0 + dtau)
            if float(np.linalg.norm(tnext - trial)) <= (1.0 - 0.25 * t) * resid:
                moved = True
                break
            t *= 0.5
            dampings += 1
        if not moved:
            if not saw_feasible:
                raise DomainViolation(
                    f"fixed-point damping exhausted at k={k}: every trial left the slack region"
                )
            # no damping contracts the residual: x has hit its float floor
            change = 0.0
            break
        change = float(np.linalg.norm(trial - xt))
        xt, gt, theta = trial, gtrial, t
        if change <= fp_tol:
            break
    return xt, gt, change, iters, dampings


def agm1_step(
    obj: BarrierObjective,
    geom: MirrorGeometry,
    state: IterateState,
    sched,
    l_phi: float,
    fp_tol: float = 1e-10,
    fp_max: int = 200,
) -> tuple[IterateState, StepInfo]:
    """One implicit step: solve the coupled pair

        x_new = (dtau * z_new + x_k) / (1 + dtau)
        z_new = mirror_step(z_k, grad Phi(x_new), dalpha)

    by damped fixed-point iteration on x, stopping once the per-iteration
    change of x falls to fp_tol (see the two inner solvers for how the
    damping factor is chosen). Raises FixedPointDivergence when the budget
    ends with the change still above 1000x the tolerance.
    """
    k = state.k
    dalpha = sched.weight_z(k)
    dtau = sched.weight_x(k)
    xk, zk = state.x, state.z
    inner = (
        _agm1_inner_euclidean
        if isinstance(geom, SquaredEuclidean)
        else _agm1_inner_adaptive
    )
    xt, gt, change, iters, dampings = inner(
        obj, geom, xk, zk, dalpha, dtau, l_phi, fp_tol, fp_max, k
    )
    if change > 1e3 * fp_tol:
        raise FixedPointDivergence(
            f"implicit step at k={k} did not settle: last change {change:.3e} "
            f"after {iters} iterations (fp_tol={fp_tol:.1e})"
        )

    # Return the settled x with z rebuilt from its gradient: the z identity
    # then holds exactly and the x-mixing identity to the fixed-point
    # residual. (Re-deriving x from the rebuilt z instead would shift the
    # gradient and leave a dalpha*L*fp_tol error in the z identity.)
    z_new = geom.mirror_step(zk, gt, dalpha)
    new = IterateState(k + 1, xt, xt, z_new)
    return new, StepInfo(damping_events=dampings, fp_iterations=iters)


def _damped_mix(obj: BarrierObjective, raw: np.ndarray, anchor: np.ndarray, k: int):
    """Gradient of Phi at `raw`, halving the move toward `anchor` while the
    point sits outside the open slack region (at most X_UPDATE_DAMPINGS times)."""
    x = raw
    for attempt in range(X_UPDATE_DAMPINGS + 1):
        try:
            return x, obj.gradient(x), attempt
        except DomainViolation:
            x = anchor + 0.5 * (x - anchor)
    raise DomainViolation(
        f"x-update at k={k} stayed outside the slack region after "
        f"{X_UPDATE_DAMPINGS} halvings toward the previous iterate"
    )


def agm2_step(
    obj: BarrierObjective,
    prob: ConvexProblem,
    geom: MirrorGeometry,
    state: IterateState,
    sched,
    eta_k: float,
) -> tuple[IterateState, StepInfo]:
    """One explicit step with the extra gradient sequence:

        x_new = dtau * z_k + (1 - dtau) * y_k
        y_new = project_X(x_new - eta_k * grad Phi(x_new))
        z_new = mirror_step(z_k, grad Phi(x_new), dalpha)

    dtau may exceed 1 early on (extrapolation); if x_new then leaves the
    slack region the move is halved toward y_k and the event counted.
    """
    k = state.k
    dalpha = sched.weight_z(k)
    dtau = sched.weight_x(k)
    raw = dtau * state.z + (1.0 - dtau) * state.y
    x_new, g, dampings = _damped_mix(obj, raw, state.y, k)
    y_new = prob.outer.project(x_new - eta_k * g)
    z_new = geom.mirror_step(state.z, g, dalpha)
    return IterateState(k + 1, x_new, y_new, z_new), StepInfo(damping_events=dampings)


def gm_step(
    obj: BarrierObjective,
    geom: MirrorGeometry,
    state: IterateState,
    sched,
) -> tuple[IterateState, StepInfo]:
    """One non-accelerated step: mix toward z_k, then mirror-update z."""
    k = state.k
    dalpha = sched.weight_z(k)
    dtau = sched.weight_x(k)
    raw = dtau * state.z + (1.0 - dtau) * state.x
    x_new, g, dampings = _damped_mix(obj, raw, state.x, k)
    z_new = geom.mirror_step(state.z, g, dalpha)
    return IterateState(k + 1, x_new, x_new, z_new), StepInfo(damping_events=dampings)


# ---------------------------------------------------------------------------
# run driver


@dataclass
class AlgorithmParams:
    eta: float = 0.25
    eta_mode: str = "constant"  # "constant" | "theory"
    fp_tol: float = 1e-10
    fp_max: int = 200
    barrier_mode: str = "scheduled"  # "scheduled" | "fixed"
    barrier_c: float = 10.0
    barrier_s: float = 0.1
    stop_rule: str = "f-gap"  # "f-gap" | "grad-norm" | "max-iters"
    stop_tol: float = 1e-2
    max_iters: int = 10_000
    refresh_every: int = 25


ALGORITHM_NAMES = ("agm1", "agm2", "gm")


def _eta_at(params: AlgorithmParams, k: int, l_phi: float) -> float:
    if params.eta_mode == "theory":
        return min(params.eta, 1.0 / (max(k, 1) * l_phi))
    return params.eta


def run(
    algorithm: str,
    prob: ConvexProblem,
    geom: MirrorGeometry,
    sched,
    params: AlgorithmParams,
    start: np.ndarray,
) -> TrajectoryRecord:
    """Drive one of the discrete methods from `start` until a stop rule fires.

    Stop rules: "f-gap" compares f(x_k) - f* against stop_tol; "grad-norm"
    compares the barrier gradient norm (fixed-barrier runs only);
    "max-iters" just exhausts the budget. The returned record has one row
    per iterate including the initial one. On a failed step the partially
    built record is attached to the raised error as ``partial_record``.
    """
    if algorithm not in ALGORITHM_NAMES:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    fixed = params.barrier_mode == "fixed"
    if params.stop_rule == "grad-norm" and not fixed:
        raise ModeMismatch("grad-norm stopping needs a fixed barrier")

    k0 = sched.k_start

    def bar(k: int) -> BarrierParams:
        if fixed:
            return BarrierParams(params.barrier_c, params.barrier_s)
        return sched.barrier_at(k)

    start = np.array(start, dtype=float)
    if not prob.outer.contains(start):
        raise InfeasibleStart(f"start {start} lies outside the outer set")
    b0 = bar(k0)
    slack0 = b0.s - prob.g_values(start)
    if start.size and prob.m and np.min(slack0) <= 0.0:
        raise InfeasibleStart(
            f"start violates the initial slack region: min(s0 - g) = {np.min(slack0):.3e}"
        )

    true_res = solve_true(prob)
    f_star = true_res.value
    xhat = solve_barrier(prob, geom, b0.c, b0.s).point
    l_phi = prob.constants.l_phi

    n = prob.dim
    record = TrajectoryRecord(
        kind="algorithm",
        columns=["k"]
        + vector_columns("x", n)
        + vector_columns("y", n)
        + vector_columns("z", n)
        + ["f_gap", "phi_gap", "g_max", "slack", "A_k", "lyapunov", "grad_norm", "damping_events"],
        metadata={
            "algorithm": algorithm,
            "problem": prob.name,
            "geometry": geom.name,
            "schedule": type(sched).__name__,
            "delta": sched.delta,
            "k_start": k0,
            "barrier_mode": params.barrier_mode,
            "barrier_c": params.barrier_c if fixed else None,
            "barrier_s": params.barrier_s if fixed else None,
            "eta": params.eta,
            "eta_mode": params.eta_mode,
            "stop_rule": params.stop_rule,
            "stop_tol": params.stop_tol,
            "max_iters": params.max_iters,
            "f_star": f_star,
            "x_star": [float(v) for v in true_res.point],
            "xhat0": [float(v) for v in xhat],
        },
    )

    f = prob.objective
    lyap_w = "y" if algorithm == "agm2" else "x"

    def emit(st: IterateState, step_bar: BarrierParams, damping: int) -> list:
        rowbar = bar(st.k)
        obj = BarrierObjective(prob, rowbar)
        w = st.y if lyap_w == "y" else st.x
        if not (obj.in_domain(st.x) and obj.in_domain(w)):
            # transiently outside the row's (tighter) slack region: report the
            # barrier actually used to produce this iterate
            obj = BarrierObjective(prob, step_bar)
        phi_gap = max(obj.value(w) - obj.value(xhat), 0.0)
        grad_norm = float(np.linalg.norm(obj.gradient(st.x)))
        a_k = sched.A(st.k)
        energy = a_k * phi_gap + geom.bregman(xhat, st.z)
        g = prob.g_values(st.x)
        gmax = float(np.max(g)) if g.size else -1.0
        f_gap = float(f(st.x)) - f_star
        row = [
            st.k, *st.x, *st.y, *st.z,
            f_gap, phi_gap, gmax, rowbar.s, a_k, energy, grad_norm, damping,
        ]
        record.append(row)
        return row

    state = IterateState(k0, start.copy(), start.copy(), start.copy())
    row = emit(state, b0, 0)
    stopped = "max-iters"
    idx = {name: i for i, name in enumerate(record.columns)}

    def should_stop(row) -> bool:
        if params.stop_rule == "f-gap":
            return row[idx["f_gap"]] <= params.stop_tol
        if params.stop_rule == "grad-norm":
            return row[idx["grad_norm"]] <= params.stop_tol
        return False

    if should_stop(row):
        stopped = params.stop_rule
    else:
        while state.k - k0 < params.max_iters:
            step_bar = bar(state.k)
            obj = BarrierObjective(prob, step_bar)
            try:
                if algorithm == "agm1":
                    state, info = agm1_step(
                        obj, geom, state, sched, l_phi, params.fp_tol, params.fp_max
                    )
                elif algorithm == "agm2":
                    eta_k = _eta_at(params, state.k, l_phi)
                    state, info = agm2_step(obj, prob, geom, state, sched, eta_k)
                else:
                    state, info = gm_step(obj, geom, state, sched)
            except (DomainViolation, FixedPointDivergence) as exc:
                exc.partial_record = record
                raise
            if not fixed and (state.k - k0) % params.refresh_every == 0:
                b = bar(state.k)
                try:
                    xhat = solve_barrier(prob, geom, b.c, b.s, x0=xhat).point
                except MaxItersExceeded as exc:
                    # extreme barrier weights put 1e-10 below the oracle's
                    # float floor; its best point is still a fine comparator
                    # for the diagnostic columns
                    if exc.best is None:
                        raise
                    xhat = exc.best.point
            row = emit(state, step_bar, info.damping_events)
            if should_stop(row):
                stopped = params.stop_rule
                break

    record.metadata["iterations"] = state.k - k0
    record.metadata["stopped"] = stopped
    return record


# ---------------------------------------------------------------------------
# diagnostics


def lyapunov_series(
    record: TrajectoryRecord,
    prob: ConvexProblem,
    geom: MirrorGeometry,
    xhat: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Recompute the discrete energy E_k against a caller-supplied comparator.

    Only meaningful for fixed-barrier trajectories (ModeMismatch otherwise).
    Returns (E, residuals) where residuals[k] = (E_{k+1} - E_k)/delta. Unlike
    the logged `lyapunov` column the gap here is left unclamped, so small
    negative noise at convergence is visible rather than flattened.
    """
    md = record.metadata
    if md.get("barrier_mode") != "fixed":
        raise ModeMismatch("lyapunov_series expects a fixed-barrier trajectory")
    params = BarrierParams(md["barrier_c"], md["barrier_s"])
    obj = BarrierObjective(prob, params)
    phi_hat = obj.value(np.asarray(xhat, dtype=float))
    delta = md["delta"]
    w_prefix = "y" if md.get("algorithm") == "agm2" else "x"
    ws = record.points(w_prefix)
    zs = record.points("z")
    a = record.column("A_k")
    energy = np.empty(len(ws))
    for i, (w, z) in enumerate(zip(ws, zs)):
        energy[i] = a[i] * (obj.value(w) - phi_hat) + geom.bregman(xhat, z)
    resid = np.diff(energy) / delta
    return energy, resid
