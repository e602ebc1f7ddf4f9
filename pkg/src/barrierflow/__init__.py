"""Barrier-approximation solvers driven by accelerated mirror dynamics.

The package splits into small layers: ``problem`` (constrained instances and
the log-barrier surrogate), ``geometry`` (Bregman machinery), ``oracle``
(high-accuracy reference solvers), ``dynamics`` (continuous flow),
``algorithms`` (discrete methods) and ``cli`` (experiment runner).
"""

from .algorithms import (
    ALGORITHM_NAMES,
    SCHEDULE_NAMES,
    AlgorithmParams,
    ExpRate,
    HarmonicSq,
    IterateState,
    PolyPower,
    QuadC,
    agm1_step,
    agm2_step,
    gm_step,
    lyapunov_series,
    make_schedule,
    run,
)
from .config import (
    PRESET_GROUPS,
    PRESETS,
    ExperimentConfig,
    parse_config,
    preset_config,
    resolve,
)
from .dynamics import (
    DynamicsState,
    ExponentialBeta,
    FixedBarrier,
    PolynomialBeta,
    ScheduledBarrier,
    integrate,
    integrate_piecewise,
    lyapunov_energy,
    vector_field,
)
from .errors import (
    BarrierFlowError,
    ConfigError,
    DimensionTooLarge,
    DomainViolation,
    FixedPointDivergence,
    InfeasibleStart,
    InsufficientData,
    MaxItersExceeded,
    ModeMismatch,
    StepCollapse,
)
from .geometry import (
    GEOMETRY_NAMES,
    NegativeEntropy,
    SquaredEuclidean,
    make_geometry,
)
from .oracle import (
    OracleResult,
    default_geometry,
    gap_certificate,
    solve_barrier,
    solve_true,
)
from .problem import (
    PROBLEM_NAMES,
    BarrierObjective,
    BarrierParams,
    ConvexProblem,
    EuclideanBall,
    ProblemConstants,
    Simplex,
    build_problem,
    estimate_barrier_smoothness,
    feasibility_report,
)
from .records import TrajectoryRecord, load_csv

__version__ = "0.1.0"
