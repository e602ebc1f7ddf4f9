"""Flat key=value experiment configuration.

A config file is plain text, one ``key=value`` per line, ``#`` comments
allowed. Keys match :class:`ExperimentConfig` field names exactly, every
field has a default, and serializing then re-parsing a config reproduces the
run bit for bit (the resolved file written next to each trajectory pins the
materialized start point).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .algorithms import SCHEDULE_NAMES, AlgorithmParams, make_schedule
from .dynamics import (
    ExponentialBeta,
    FixedBarrier,
    PolynomialBeta,
    ScheduledBarrier,
)
from .errors import ConfigError
from .geometry import GEOMETRY_NAMES, make_geometry
from .problem import PROBLEM_NAMES, build_problem

CONTINUOUS_SCHEDULES = ("polynomial", "exponential")


@dataclass
class ExperimentConfig:
    problem: str = "paper-quadratic"
    geometry: str = "euclidean-ball"
    radius: float = 3.0
    dim: int = 2
    algorithm: str = "agm2"  # agm1 | agm2 | gm | dynamics
    schedule: str = "quad-c"
    p: float = 1.0
    C: float = 0.1
    delta: float = 1.0
    eta: float = 0.25
    eta_mode: str = "constant"
    fp_tol: float = 1e-10
    fp_max: int = 200
    barrier_mode: str = "scheduled"
    barrier_c: float = 10.0
    barrier_s: float = 0.1
    stop_rule: str = "f-gap"
    stop_tol: float = 1e-2
    max_iters: int = 10_000
    refresh_every: int = 25
    seed: int = 42
    start: str = ""  # comma-separated floats, or empty for a seeded draw
    t0: float = 0.0
    t1: float = 6.0
    dt: float = 0.05
    dt_growth: float = 1.0
    output: str = "out"


_FIELDS = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        kind = _FIELDS[key]
        try:
            if kind == "int":
                setattr(cfg, key, int(value))
            elif kind == "float":
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {value!r} as {kind}") from exc
    validate(cfg)
    return cfg


def config_text(cfg: ExperimentConfig) -> str:
    lines = []
    for f in dataclasses.fields(ExperimentConfig):
        v = getattr(cfg, f.name)
        lines.append(f"{f.name}={repr(v) if isinstance(v, float) else v}")
    return "\n".join(lines) + "\n"


def validate(cfg: ExperimentConfig) -> None:
    def bad(field: str, msg: str):
        raise ConfigError(f"{field}: {msg}")

    if cfg.problem not in PROBLEM_NAMES:
        bad("problem", f"unknown name {cfg.problem!r}; available: {PROBLEM_NAMES}")
    if cfg.geometry not in GEOMETRY_NAMES:
        bad("geometry", f"unknown name {cfg.geometry!r}; available: {GEOMETRY_NAMES}")
    if cfg.radius <= 0:
        bad("radius", "must be positive")
    if cfg.dim < 1:
        bad("dim", "must be at least 1")
    if cfg.algorithm not in ("agm1", "agm2", "gm", "dynamics"):
        bad("algorithm", f"unknown algorithm {cfg.algorithm!r}")
    if cfg.algorithm == "dynamics":
        if cfg.schedule not in CONTINUOUS_SCHEDULES:
            bad("schedule", f"dynamics runs take one of {CONTINUOUS_SCHEDULES}")
        if cfg.t1 <= cfg.t0:
            bad("t1", "must exceed t0")
        if cfg.dt <= 0:
            bad("dt", "must be positive")
        if cfg.dt_growth <= 0:
            bad("dt_growth", "must be positive")
        if cfg.schedule == "polynomial" and cfg.t0 < 1.0:
            bad("t0", "polynomial time scaling starts at t0 >= 1")
    else:
        if cfg.schedule not in SCHEDULE_NAMES:
            bad("schedule", f"discrete runs take one of {SCHEDULE_NAMES}")
    if cfg.p <= 0:
        bad("p", "must be positive")
    if cfg.C <= 0:
        bad("C", "must be positive")
    if cfg.delta <= 0:
        bad("delta", "must be positive")
    if cfg.eta <= 0:
        bad("eta", "must be positive")
    if cfg.eta_mode not in ("constant", "theory"):
        bad("eta_mode", "must be 'constant' or 'theory'")
    if cfg.fp_tol <= 0:
        bad("fp_tol", "must be positive")
    if cfg.fp_max < 1:
        bad("fp_max", "must be at least 1")
    if cfg.barrier_mode not in ("fixed", "scheduled"):
        bad("barrier_mode", "must be 'fixed' or 'scheduled'")
    if cfg.barrier_c <= 0:
        bad("barrier_c", "must be positive")
    if cfg.barrier_s < 0:
        bad("barrier_s", "must be nonnegative")
    if cfg.stop_rule not in ("f-gap", "grad-norm", "max-iters"):
        bad("stop_rule", f"unknown rule {cfg.stop_rule!r}")
    if cfg.stop_rule == "grad-norm" and cfg.barrier_mode != "fixed":
        bad("stop_rule", "grad-norm stopping needs barrier_mode=fixed")
    if cfg.stop_tol <= 0:
        bad("stop_tol", "must be positive")
    if cfg.max_iters < 0:
        bad("max_iters", "must be nonnegative")
    if cfg.refresh_every < 1:
        bad("refresh_every", "must be at least 1")
    if cfg.start:
        try:
            vals = [float(v) for v in cfg.start.split(",")]
        except ValueError:
            bad("start", f"cannot parse {cfg.start!r} as comma-separated floats")
        if len(vals) != cfg.dim:
            bad("start", f"expected {cfg.dim} coordinates, got {len(vals)}")


@dataclass
class ResolvedExperiment:
    cfg: ExperimentConfig
    prob: object
    geom: object
    sched: object
    start: np.ndarray
    params: AlgorithmParams | None  # None for dynamics runs
    mode: object | None = None  # barrier mode object for dynamics runs


def resolve(cfg: ExperimentConfig) -> ResolvedExperiment:
    """Materialize registry objects and the (possibly seeded) start point."""
    validate(cfg)
    geom = make_geometry(cfg.geometry, cfg.dim, radius=cfg.radius)
    prob = build_problem(cfg.problem, geom.set)
    if cfg.start:
        start = np.array([float(v) for v in cfg.start.split(",")])
    else:
        start = prob.outer.sample(np.random.default_rng(cfg.seed))
    if cfg.algorithm == "dynamics":
        if cfg.schedule == "polynomial":
            sched = PolynomialBeta(cfg.p)
        else:
            sched = ExponentialBeta(cfg.p)
        mode = (
            FixedBarrier(cfg.barrier_c, cfg.barrier_s)
            if cfg.barrier_mode == "fixed"
            else ScheduledBarrier()
        )
        return ResolvedExperiment(cfg, prob, geom, sched, start, None, mode)
    sched = make_schedule(cfg.schedule, p=cfg.p, C=cfg.C, delta=cfg.delta)
    params = AlgorithmParams(
        eta=cfg.eta,
        eta_mode=cfg.eta_mode,
        fp_tol=cfg.fp_tol,
        fp_max=cfg.fp_max,
        barrier_mode=cfg.barrier_mode,
        barrier_c=cfg.barrier_c,
        barrier_s=cfg.barrier_s,
        stop_rule=cfg.stop_rule,
        stop_tol=cfg.stop_tol,
        max_iters=cfg.max_iters,
        refresh_every=cfg.refresh_every,
    )
    return ResolvedExperiment(cfg, prob, geom, sched, start, params)


def pinned(cfg: ExperimentConfig, start: np.ndarray) -> ExperimentConfig:
    """Copy of cfg with the materialized start written back, for replay."""
    out = dataclasses.replace(cfg)
    out.start = ",".join(repr(float(v)) for v in start)
    return out


# ---------------------------------------------------------------------------
# presets reproducing the experiment section


PRESETS: dict[str, dict] = {
    # ball geometry, accelerated run toward (0, 1)
    "fig5.1-euclidean": dict(
        algorithm="agm2",
        geometry="euclidean-ball",
        radius=3.0,
        schedule="quad-c",
        C=0.1,
        delta=1.0,
        eta=0.25,
        barrier_mode="scheduled",
        stop_rule="f-gap",
        stop_tol=1e-6,
        max_iters=2000,
        seed=42,
    ),
    # simplex geometry with the entropy mirror map
    "fig5.1-entropy": dict(
        algorithm="agm2",
        geometry="neg-entropy",
        schedule="quad-c",
        C=2.0 / 3.0,
        delta=1.0,
        eta=0.5,
        barrier_mode="scheduled",
        stop_rule="f-gap",
        stop_tol=1e-6,
        max_iters=2000,
        seed=42,
    ),
    # continuous flow that starts outside g <= 0 and tracks the slack schedule
    "fig5.2-dynamics": dict(
        algorithm="dynamics",
        schedule="exponential",
        p=1.0,
        barrier_mode="scheduled",
        start="0.0,1.5",
        t0=0.0,
        t1=6.0,
        dt=0.05,
        dt_growth=0.35,
    ),
    # discrete analogue of the tracking run (infeasible start)
    "fig5.2-agm2": dict(
        algorithm="agm2",
        geometry="euclidean-ball",
        radius=3.0,
        schedule="quad-c",
        C=0.1,
        delta=1.0,
        eta=0.25,
        barrier_mode="scheduled",
        start="0.0,1.4",
        stop_rule="f-gap",
        stop_tol=1e-6,
        max_iters=2000,
    ),
    # head-to-head pair on the unit ball with the loose stopping gap
    "fig5.4-agm2": dict(
        algorithm="agm2",
        geometry="euclidean-ball",
        radius=1.0,
        schedule="quad-c",
        C=0.1,
        delta=1.0,
        eta=0.25,
        barrier_mode="scheduled",
        stop_rule="f-gap",
        stop_tol=1e-2,
        max_iters=10_000,
        seed=42,
    ),
    "fig5.4-gm": dict(
        algorithm="gm",
        geometry="euclidean-ball",
        radius=1.0,
        schedule="harmonic-sq",
        delta=1.0,
        barrier_mode="scheduled",
        stop_rule="f-gap",
        stop_tol=1e-2,
        max_iters=10_000,
        seed=42,
    ),
    # fixed-barrier implicit run with geometric weights (energy-decay study)
    "agm1-exp-fixed": dict(
        algorithm="agm1",
        geometry="euclidean-ball",
        radius=3.0,
        schedule="exp-rate",
        p=1.0,
        delta=0.1,
        barrier_mode="fixed",
        barrier_c=10.0,
        barrier_s=0.1,
        start="1.0,0.0",
        stop_rule="grad-norm",
        stop_tol=2e-4,
        max_iters=300,
        fp_max=300,
    ),
    # explicit method in the conservative step-size regime of its guarantee
    "agm2-theory-fixed": dict(
        algorithm="agm2",
        geometry="euclidean-ball",
        radius=3.0,
        schedule="quad-c",
        C=1.0 / 32.0,
        delta=1.0,
        eta=1.0,
        eta_mode="theory",
        barrier_mode="fixed",
        barrier_c=10.0,
        barrier_s=0.1,
        start="1.0,0.0",
        stop_rule="max-iters",
        max_iters=400,
    ),
    # fixed-barrier flow whose energy must decay monotonically
    "dynamics-fixed-exp": dict(
        algorithm="dynamics",
        schedule="exponential",
        p=1.0,
        barrier_mode="fixed",
        barrier_c=10.0,
        barrier_s=0.1,
        start="0.26,0.93",
        t0=0.0,
        t1=5.6,
        dt=0.04,
        dt_growth=0.3,
    ),
}

PRESET_GROUPS: dict[str, tuple[str, ...]] = {
    "fig5.4-compare": ("fig5.4-agm2", "fig5.4-gm"),
}


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        known = sorted(list(PRESETS) + list(PRESET_GROUPS))
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(known)}")
    cfg = ExperimentConfig(**PRESETS[name])
    validate(cfg)
    return cfg
