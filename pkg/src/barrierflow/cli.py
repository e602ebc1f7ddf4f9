"""Command-line experiment runner.

Subcommands:

* ``run`` — execute one configured experiment (or a named preset) and write
  ``trajectory.csv``, ``config.resolved`` and ``plot.gp`` into the output
  directory.
* ``sweep`` — repeat a base config across values of one numeric field and
  write a one-line-per-run ``summary.csv``.
* ``oracle`` — print the reference solution (and optionally a barrier
  minimizer) as one JSON line.
* ``dynamics`` — shorthand for ``run`` restricted to continuous-flow configs.
* ``rates`` — least-squares rate fit of a gap column from a trajectory CSV.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import algorithms, dynamics
from .config import (
    PRESET_GROUPS,
    ExperimentConfig,
    ResolvedExperiment,
    config_text,
    parse_config,
    pinned,
    preset_config,
    resolve,
)
from .errors import BarrierFlowError, ConfigError, InsufficientData
from .oracle import solve_barrier, solve_true
from .records import TrajectoryRecord, load_csv


# ---------------------------------------------------------------------------
# running experiments


def _execute(res: ResolvedExperiment) -> TrajectoryRecord:
    cfg = res.cfg
    if cfg.algorithm == "dynamics":
        return dynamics.integrate_piecewise(
            res.prob,
            res.geom,
            res.sched,
            res.mode,
            res.start,
            cfg.t0,
            cfg.t1,
            cfg.dt,
            dt_growth=cfg.dt_growth,
            refresh_every=cfg.refresh_every,
        )
    return algorithms.run(cfg.algorithm, res.prob, res.geom, res.sched, res.params, res.start)


def _plot_script(record: TrajectoryRecord) -> str:
    cols = record.columns
    gap_col = "phi_gap" if record.kind == "dynamics" else "f_gap"
    gi = cols.index(gap_col) + 1
    lines = [
        "set datafile separator ','",
        "set terminal pngcairo size 900,600",
        "set key left bottom",
        "set output 'gap.png'",
        "set logscale y",
        f"set ylabel '{gap_col}'",
        f"set xlabel '{cols[0]}'",
        f"plot 'trajectory.csv' skip 1 using 1:{gi} with lines title '{gap_col}'",
    ]
    if "x1" in cols and "x2" not in cols:
        xi = cols.index("x0") + 1
        lines += [
            "set output 'trajectory.png'",
            "unset logscale y",
            "set xlabel 'x0'",
            "set ylabel 'x1'",
            f"plot 'trajectory.csv' skip 1 using {xi}:{xi + 1} with lines title 'iterates'",
        ]
    return "\n".join(lines) + "\n"


def _write_outputs(outdir: str, cfg: ExperimentConfig, start, record: TrajectoryRecord) -> None:
    os.makedirs(outdir, exist_ok=True)
    record.to_csv(os.path.join(outdir, "trajectory.csv"))
    with open(os.path.join(outdir, "config.resolved"), "w", newline="\n") as fh:
        fh.write(config_text(pinned(cfg, start)))
    with open(os.path.join(outdir, "plot.gp"), "w", newline="\n") as fh:
        fh.write(_plot_script(record))


def run_experiment(cfg: ExperimentConfig, outdir: str | None = None) -> TrajectoryRecord:
    """Resolve and execute one experiment, writing its artifacts.

    On a failed run any partially built trajectory is still written before
    the error propagates.
    """
    res = resolve(cfg)
    outdir = outdir or cfg.output
    try:
        record = _execute(res)
    except BarrierFlowError as exc:
        partial = getattr(exc, "partial_record", None)
        if partial is not None:
            _write_outputs(outdir, cfg, res.start, partial)
        raise
    _write_outputs(outdir, cfg, res.start, record)
    return record


# ---------------------------------------------------------------------------
# sweeps


_SWEEP_INT_FIELDS = {"max_iters", "fp_max", "seed", "refresh_every", "dim"}


def sweep(cfg: ExperimentConfig, param: str, values: list[float], outdir: str) -> list[list]:
    """One run per value of ``param``; failures are recorded, not fatal.

    Returns the summary rows (value, iterations_to_tol, final_gap, error);
    ``iterations_to_tol`` is empty when the run never met its stop rule and
    both numeric cells are empty when the run failed outright.
    """
    fmap = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    if param not in fmap:
        raise ConfigError(f"{param}: not a config field")
    if fmap[param] not in ("int", "float"):
        raise ConfigError(f"{param}: only numeric fields are sweepable")
    rows = []
    for i, value in enumerate(values):
        sub = dataclasses.replace(cfg)
        setattr(sub, param, int(value) if param in _SWEEP_INT_FIELDS else float(value))
        sub_out = os.path.join(outdir, f"value-{i}")
        iterations = ""
        final_gap = ""
        error = ""
        try:
            record = run_experiment(sub, sub_out)
        except BarrierFlowError as exc:
            error = f"{type(exc).__name__}: {exc}".replace(",", ";")
        else:
            gap_col = "phi_gap" if record.kind == "dynamics" else "f_gap"
            final_gap = repr(float(record.column(gap_col)[-1]))
            if record.metadata.get("stopped") == cfg.stop_rule:
                iterations = str(int(record.metadata["iterations"]))
        rows.append([repr(float(value)), iterations, final_gap, error])
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "summary.csv"), "w", newline="\n") as fh:
        fh.write("value,iterations_to_tol,final_gap,error\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return rows


# ---------------------------------------------------------------------------
# rate fitting


def report_rates(
    record: TrajectoryRecord,
    model: str,
    window: tuple[float, float],
    column: str = "f_gap",
) -> dict:
    """Fit log(gap) against k (semilog) or log k (loglog) over a window.

    ``column`` may name any trajectory column, or ``dist-to-target`` to fit
    the Euclidean distance of the iterates to the recorded reference point
    (available only on records that carry one in metadata).
    """
    if model not in ("loglog", "semilog"):
        raise ValueError("model must be 'loglog' or 'semilog'")
    idx = record.column(record.columns[0])
    if column == "dist-to-target":
        target = record.metadata.get("x_star")
        if target is None:
            raise InsufficientData("trajectory carries no reference point")
        gap = np.linalg.norm(record.points("x") - np.asarray(target), axis=1)
    else:
        gap = record.column(column)
    lo, hi = window
    mask = (idx >= lo) & (idx <= hi) & (gap > 0.0)
    if model == "loglog":
        mask &= idx > 0.0
    if int(np.sum(mask)) < 10:
        raise InsufficientData(
            f"need at least 10 rows with positive gaps in window [{lo}, {hi}], "
            f"got {int(np.sum(mask))}"
        )
    x = np.log(idx[mask]) if model == "loglog" else idx[mask]
    y = np.log(gap[mask])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "r2": r2, "rows": int(np.sum(mask))}


def record_from_csv(path: str) -> TrajectoryRecord:
    header, data = load_csv(path)
    kind = "dynamics" if header and header[0] == "t" else "algorithm"
    rec = TrajectoryRecord(kind=kind, columns=header)
    for row in data:
        rec.append(list(row))
    return rec


# ---------------------------------------------------------------------------
# argument handling


def _load_cfg(args) -> ExperimentConfig:
    if getattr(args, "preset", None):
        cfg = preset_config(args.preset)
    elif getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    else:
        raise ConfigError("provide --config FILE or --preset NAME")
    if getattr(args, "output", None):
        cfg.output = args.output
    return cfg


def _parse_window(text: str) -> tuple[float, float]:
    try:
        lo, _, hi = text.partition(":")
        return float(lo), float(hi)
    except ValueError as exc:
        raise ConfigError(f"window: expected LO:HI, got {text!r}") from exc


def _cmd_run(args, require_dynamics: bool = False) -> int:
    name = getattr(args, "preset", None)
    if name and name in PRESET_GROUPS:
        base = args.output or "out"
        for member in PRESET_GROUPS[name]:
            cfg = preset_config(member)
            record = run_experiment(cfg, os.path.join(base, member))
            print(
                f"{member}: {record.metadata.get('iterations', len(record) - 1)} iterations, "
                f"stopped={record.metadata.get('stopped', 'end')}"
            )
        return 0
    cfg = _load_cfg(args)
    if require_dynamics and cfg.algorithm != "dynamics":
        raise ConfigError("algorithm: the dynamics subcommand needs algorithm=dynamics")
    record = run_experiment(cfg)
    last = record.rows[-1]
    print(
        f"wrote {cfg.output}/trajectory.csv: {len(record)} rows, "
        f"final {record.columns[0]}={last[0]:g}"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"values: cannot parse {args.values!r}") from exc
    rows = sweep(cfg, args.param, values, cfg.output)
    print(f"wrote {cfg.output}/summary.csv ({len(rows)} runs)")
    return 0


def _cmd_oracle(args) -> int:
    from .geometry import make_geometry
    from .problem import build_problem

    geom = make_geometry(args.geometry, args.dim, radius=args.radius)
    prob = build_problem(args.problem, geom.set)
    res = solve_true(prob)
    out = {
        "problem": args.problem,
        "point": [float(v) for v in res.point],
        "value": res.value,
        "grad_norm": res.grad_norm,
        "dual_norm_estimate": res.dual_norm_estimate,
        "certificate": res.certificate,
    }
    if args.barrier:
        try:
            c, s = (float(v) for v in args.barrier.split(","))
        except ValueError as exc:
            raise ConfigError(f"barrier: expected c,s got {args.barrier!r}") from exc
        bres = solve_barrier(prob, geom, c, s)
        out["barrier_point"] = [float(v) for v in bres.point]
        out["barrier_value"] = bres.value
        out["barrier_grad_norm"] = bres.grad_norm
        out["barrier_dual_norm_estimate"] = bres.dual_norm_estimate
    print(json.dumps(out))
    return 0


def _cmd_rates(args) -> int:
    record = record_from_csv(args.input)
    result = report_rates(record, args.model, _parse_window(args.window), column=args.column)
    print(json.dumps(result))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barrierflow",
        description="Barrier-approximation experiments with accelerated mirror methods.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--preset", help="named preset configuration")
        p.add_argument("--output", help="output directory (overrides config)")

    p_run = sub.add_parser("run", help="execute one experiment")
    add_source(p_run)

    p_dyn = sub.add_parser("dynamics", help="execute a continuous-flow experiment")
    add_source(p_dyn)

    p_sweep = sub.add_parser("sweep", help="repeat an experiment across parameter values")
    add_source(p_sweep)
    p_sweep.add_argument("--param", required=True, help="config field to vary")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")

    p_oracle = sub.add_parser("oracle", help="print reference solutions")
    p_oracle.add_argument("--problem", default="paper-quadratic")
    p_oracle.add_argument("--geometry", default="euclidean-ball")
    p_oracle.add_argument("--radius", type=float, default=3.0)
    p_oracle.add_argument("--dim", type=int, default=2)
    p_oracle.add_argument("--barrier", help="also solve the barrier problem at 'c,s'")

    p_rates = sub.add_parser("rates", help="fit a convergence rate from a trajectory CSV")
    p_rates.add_argument("--input", required=True)
    p_rates.add_argument("--model", choices=("loglog", "semilog"), default="loglog")
    p_rates.add_argument("--window", default="0:1e18", help="index window LO:HI")
    p_rates.add_argument("--column", default="f_gap")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "dynamics":
            return _cmd_run(args, require_dynamics=True)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "rates":
            return _cmd_rates(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BarrierFlowError as exc:
        print(f"run error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
