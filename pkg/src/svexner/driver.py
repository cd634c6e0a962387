"""Drive a configured simulation and write its outputs."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .ader2 import AenoParams, step_second_order
from .config import RunConfig
from .model import FieldState, Frozen, SolverError, cfl_timestep
from .oracles import (
    ErrorReport,
    convergence_table,
    manufactured_cell_averages,
    reference_centered_step,
)
from .presets import build_boundaries, build_closure, build_initial
from .splitting import apply_boundary, gauss_rule, integrate, step_first_order

log = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = ("x", "h", "q", "eta", "H", "u", "Fr", "qb")


@dataclass
class RunResult:
    config: RunConfig
    snapshots: list
    steps: int = 0
    wall_seconds: float = 0.0
    mass_history: list = field(default_factory=list)  # (t, sum h dx, sum eta dx)
    max_surface_dev: float = 0.0
    max_abs_q: float = 0.0
    spin_up_steps: int = 0
    spin_up_residual: float | None = None
    initial: FieldState | None = None

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]


def make_stepper(cfg: RunConfig, closure, bc):
    quad = gauss_rule(cfg.ngp)
    if cfg.scheme == "centered":
        return lambda f, dt: reference_centered_step(f, dt, closure, bc, cfg.g)
    if cfg.order == 1:
        return lambda f, dt: step_first_order(f, dt, closure, quad, bc, cfg.star, cfg.g)
    params = AenoParams(cfg.aeno_tol, cfg.aeno_eps)
    return lambda f, dt: step_second_order(f, dt, closure, quad, bc, params, cfg.star, cfg.g,
                                           zero_slope_retry=cfg.zero_slope_retry)


def spin_up(cfg: RunConfig, f: FieldState, bc) -> tuple[FieldState, int, float]:
    """March the fixed-bed problem until q stops changing.

    Returns the steady field (time reset to 0), the step count and the
    last relative change in q.
    """
    step = make_stepper(replace(cfg, scheme="splitting"), Frozen(), bc)
    change = math.inf
    n = 0
    while n < cfg.spin_up_max_steps:
        dt = cfl_timestep(f, cfg.cfl, cfg.g)
        nxt = step(f, dt)
        n += 1
        change = float(np.max(np.abs(nxt.q - f.q)) / max(np.max(np.abs(nxt.q)), 1e-300))
        f = nxt
        if change < cfg.spin_up_tol:
            break
    else:
        log.warning("spin-up stopped after %d steps with relative change %.3e", n, change)
    f = apply_boundary(f, bc)
    f.t = 0.0
    return f, n, change


def simulate(cfg: RunConfig) -> RunResult:
    """Run one configured simulation in memory."""
    closure = build_closure(cfg)
    bc = build_boundaries(cfg)
    f0 = build_initial(cfg)
    result = RunResult(config=cfg, snapshots=[])
    if cfg.initial == "small_hump":
        f0, result.spin_up_steps, result.spin_up_residual = spin_up(cfg, f0, bc)
    result.initial = f0

    H0 = f0.h + f0.eta
    track_rest = cfg.initial == "lake_at_rest"
    dx = f0.dx
    result.mass_history.append((0.0, float(np.sum(f0.h) * dx), float(np.sum(f0.eta) * dx)))
    out_times = set(cfg.resolved_output_times())

    def on_step(f, dt):
        result.steps += 1
        if track_rest:
            result.max_surface_dev = max(result.max_surface_dev,
                                         float(np.max(np.abs(f.h + f.eta - H0))))
            result.max_abs_q = max(result.max_abs_q, float(np.max(np.abs(f.q))))
        if f.t in out_times:
            result.mass_history.append((f.t, float(np.sum(f.h) * dx), float(np.sum(f.eta) * dx)))

    step = make_stepper(cfg, closure, bc)
    t0 = time.perf_counter()
    try:
        result.snapshots = integrate(f0.with_ghosts(cfg.n_ghost), step, cfg.t_final, cfg.cfl,
                                     sorted(out_times), cfg.g, cfg.max_steps, on_step)
    finally:
        result.wall_seconds = time.perf_counter() - t0
    last = result.snapshots[-1]
    if not result.mass_history or result.mass_history[-1][0] != last.t:
        result.mass_history.append((last.t, float(np.sum(last.h) * dx),
                                    float(np.sum(last.eta) * dx)))
    return result


def manufactured_ladder(cfg: RunConfig, grids=None, variables=("q", "eta")) -> ErrorReport:
    """Error table for the manufactured problem over a doubling grid sequence."""
    grids = tuple(grids or cfg.convergence_grids or (cfg.M,))

    def solve(M):
        c = replace(cfg, M=M, convergence_grids=(), output_times=(), output_interval=None)
        f = simulate(c).final
        return f, manufactured_cell_averages(c.x_left, c.dx, M, f.t)

    return convergence_table(grids, solve, variables)


# ---------------------------------------------------------------------------
# output


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def time_label(t: float) -> str:
    return f"{t:.6g}"


def snapshot_rows(f: FieldState, closure, g: float):
    h, q, eta = f.h, f.q, f.eta
    u = q / h
    fr = np.abs(u) / np.sqrt(g * h)
    qb = np.broadcast_to(closure.flux(u, h), h.shape)
    return np.column_stack([f.x, h, q, eta, h + eta, u, fr, qb])


def write_snapshot(path: Path, f: FieldState, closure, g: float) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_COLUMNS)
        for row in snapshot_rows(f, closure, g):
            w.writerow([_fmt(v) for v in row])


def summary_lines(result: RunResult) -> list[str]:
    cfg = result.config
    lines = [
        f"preset = {cfg.preset}",
        f"scheme = {cfg.scheme}",
        f"order = {cfg.order}",
        f"M = {cfg.M}",
        f"cfl = {cfg.cfl}",
        f"star = {cfg.star}",
        f"ngp = {cfg.ngp}",
        f"steps = {result.steps}",
        f"t_end = {_fmt(result.final.t)}",
        f"wall_seconds = {result.wall_seconds:.3f}",
        f"min_depth = {_fmt(float(np.min(result.final.h)))}",
        f"max_depth = {_fmt(float(np.max(result.final.h)))}",
    ]
    if result.spin_up_residual is not None:
        lines += [f"spin_up_steps = {result.spin_up_steps}",
                  f"spin_up_residual = {result.spin_up_residual:.3e}"]
    if cfg.initial == "lake_at_rest":
        lines += [f"max_abs_H_minus_H0 = {result.max_surface_dev:.3e}",
                  f"max_abs_q = {result.max_abs_q:.3e}"]
    lines.append("mass_history = t, sum(h dx), sum(eta dx)")
    for t, mh, me in result.mass_history:
        lines.append(f"  {_fmt(t)}, {_fmt(mh)}, {_fmt(me)}")
    return lines


def write_outputs(result: RunResult, out: Path) -> list[Path]:
    cfg = result.config
    out.mkdir(parents=True, exist_ok=True)
    closure = build_closure(cfg)
    written = []
    for f in result.snapshots:
        p = out / f"snapshot_{time_label(f.t)}.csv"
        write_snapshot(p, f, closure, cfg.g)
        written.append(p)
    p = out / "summary.txt"
    p.write_text("\n".join(summary_lines(result)) + "\n")
    written.append(p)
    if cfg.plots:
        from .plotting import plot_snapshots

        written.append(plot_snapshots(result.snapshots, out / "profiles.png",
                                      initial=result.initial, title=cfg.preset or cfg.initial))
    return written


def write_report(report: ErrorReport, cfg: RunConfig, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    p = out / "rates.csv"
    p.write_text(report.to_csv())
    s = out / "summary.txt"
    s.write_text(f"preset = {cfg.preset}\norder = {cfg.order}\n\n" + report.to_text())
    written = [p, s]
    if cfg.plots:
        from .plotting import plot_convergence

        written.append(plot_convergence(report, out / "convergence.png"))
    return written


def run(cfg: RunConfig) -> list[Path]:
    """Run ``cfg`` and write all outputs. Raises SolverError on solver failure."""
    out = Path(cfg.out)
    if cfg.convergence_grids or cfg.initial == "manufactured":
        report = manufactured_ladder(cfg)
        written = write_report(report, cfg, out)
        failed = [r for r in report.rows if r.failure]
        if failed:
            raise SolverError(f"M={failed[0].M}: {failed[0].failure}")
        return written
    return write_outputs(simulate(cfg), out)

