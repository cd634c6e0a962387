"""First-order splitting scheme.

Each interface gets a pressure star state, two path-conservative
fluctuations (segment paths through the star states) and an upwind
advection flux. The update is

    Q_i <- Q_i - dt/dx [(D-_{i+1/2} + D+_{i-1/2}) + (F_{i+1/2} - F_{i-1/2})].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .model import (
    G,
    BedloadClosure,
    CellState,
    FieldState,
    PositivityFailure,
    cfl_timestep,
)
from .pressure_riemann import ITERATIVE, StarState, solve_star

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# quadrature along segment paths


@dataclass(frozen=True)
class QuadratureRule:
    points: tuple
    weights: tuple

    @property
    def n(self) -> int:
        return len(self.points)


def gauss_rule(n: int) -> QuadratureRule:
    if n == 1:
        return QuadratureRule((0.5,), (1.0,))
    if n == 2:
        d = 0.5 / math.sqrt(3.0)
        return QuadratureRule((0.5 - d, 0.5 + d), (0.5, 0.5))
    if n == 3:
        d = math.sqrt(15.0) / 10.0
        return QuadratureRule((0.5, 0.5 - d, 0.5 + d), (8.0 / 18.0, 5.0 / 18.0, 5.0 / 18.0))
    raise ValueError(f"nGP must be 1, 2 or 3, got {n}")


GAUSS1 = gauss_rule(1)


def path_mean_depth(h0, h1, quad: QuadratureRule):
    """Quadrature mean of h along the segment from h0 to h1."""
    dh = h1 - h0
    total = 0.0
    for s, w in zip(quad.points, quad.weights):
        total = total + w * (h0 + s * dh)
    return total


# ---------------------------------------------------------------------------
# interface kernels on stacked (3, n) arrays


def segment_fluctuation(Qa, Qb, quad: QuadratureRule, g=G):
    """``P_hat (Qb - Qa)`` with P averaged along the segment Qa -> Qb."""
    dh = Qb[0] - Qa[0]
    dq = Qb[1] - Qa[1]
    deta = Qb[2] - Qa[2]
    hbar = path_mean_depth(Qa[0], Qb[0], quad)
    return np.stack([dq, g * hbar * (dh + deta), np.zeros_like(dq)])


def interface_fluctuations(QL, QR, hsL, hsR, qs, quad: QuadratureRule, g=G):
    """Left- and right-going fluctuations at a batch of interfaces."""
    star_R = np.stack([hsR, qs, QR[2]])
    star_L = np.stack([hsL, qs, QL[2]])
    return segment_fluctuation(QL, star_R, quad, g), segment_fluctuation(star_L, QR, quad, g)


def upwind_advection_flux(QL, QR, qs, closure: BedloadClosure):
    """Advection flux ``q* (0, u, q_b/q)`` with u taken from the upwind side of q*."""
    up = qs >= 0.0
    h = np.where(up, QL[0], QR[0])
    u = np.where(up, QL[1], QR[1]) / h
    ratio = np.broadcast_to(closure.ratio(u, h), np.shape(qs))
    return np.stack([np.zeros_like(qs), qs * u, qs * ratio])


# ---------------------------------------------------------------------------
# single-interface API


@dataclass(frozen=True)
class FluctuationPair:
    d_minus: np.ndarray
    d_plus: np.ndarray


@dataclass(frozen=True)
class AdvectionFlux:
    f: np.ndarray


def _col(s: CellState) -> np.ndarray:
    return s.as_array()


def fluctuations(left: CellState, right: CellState, star: StarState,
                 quad: QuadratureRule = GAUSS1, g: float = G) -> FluctuationPair:
    dm, dp = interface_fluctuations(_col(left), _col(right), star.h_star_L, star.h_star_R,
                                    star.q_star, quad, g)
    return FluctuationPair(np.asarray(dm, dtype=float), np.asarray(dp, dtype=float))


def compatibility_residual(left: CellState, right: CellState, star: StarState,
                           quad: QuadratureRule = GAUSS1, g: float = G) -> np.ndarray:
    pair = fluctuations(left, right, star, quad, g)
    direct = segment_fluctuation(_col(left), _col(right), quad, g)
    return pair.d_minus + pair.d_plus - direct


def advection_flux_first_order(left: CellState, right: CellState, q_star: float,
                               closure: BedloadClosure) -> AdvectionFlux:
    f = upwind_advection_flux(_col(left), _col(right), np.float64(q_star), closure)
    return AdvectionFlux(np.asarray(f, dtype=float))


# ---------------------------------------------------------------------------
# boundary conditions


@dataclass(frozen=True)
class Transmissive:
    pass


@dataclass(frozen=True)
class Reflective:
    pass


@dataclass(frozen=True)
class InflowDischarge:
    q_in: float


@dataclass(frozen=True)
class InflowState:
    """Supercritical inflow: depth and discharge both imposed."""

    h_in: float
    q_in: float


@dataclass(frozen=True)
class FixedDepth:
    h_out: float


@dataclass(frozen=True)
class Periodic:
    pass


Boundary = Union[Transmissive, Reflective, InflowDischarge, InflowState, FixedDepth, Periodic]


@dataclass(frozen=True)
class BoundarySpec:
    left: Boundary = field(default_factory=Transmissive)
    right: Boundary = field(default_factory=Transmissive)

    def __post_init__(self):
        if isinstance(self.left, Periodic) != isinstance(self.right, Periodic):
            raise ValueError("Periodic must be set on both sides or neither")

    @property
    def periodic(self) -> bool:
        return isinstance(self.left, Periodic)


def _fill_side(Q, ng, M, kind, side):
    if side == "left":
        ghosts = [ng - 1 - k for k in range(ng)]          # nearest ghost first
        mirror = [ng + k for k in range(ng)]
    else:
        ghosts = [ng + M + k for k in range(ng)]
        mirror = [ng + M - 1 - k for k in range(ng)]
    edge = mirror[0]
    for gi, mi in zip(ghosts, mirror):
        if isinstance(kind, Transmissive):
            Q[:, gi] = Q[:, edge]
        elif isinstance(kind, Reflective):
            Q[:, gi] = Q[:, mi]
            Q[1, gi] = -Q[1, mi]
        elif isinstance(kind, InflowDischarge):
            Q[:, gi] = Q[:, edge]
            Q[1, gi] = kind.q_in
        elif isinstance(kind, InflowState):
            Q[:, gi] = Q[:, edge]
            Q[0, gi] = kind.h_in
            Q[1, gi] = kind.q_in
        elif isinstance(kind, FixedDepth):
            Q[:, gi] = Q[:, edge]
            Q[0, gi] = kind.h_out
        else:
            raise TypeError(f"unsupported boundary {kind!r}")


def apply_boundary(f: FieldState, bc: BoundarySpec) -> FieldState:
    ng, M = f.n_ghost, f.M
    if M < ng:
        raise ValueError("grid smaller than ghost layer")
    Q = f.Q.copy()
    if bc.periodic:
        Q[:, :ng] = Q[:, M:M + ng]
        Q[:, ng + M:] = Q[:, ng:2 * ng]
    else:
        _fill_side(Q, ng, M, bc.left, "left")
        _fill_side(Q, ng, M, bc.right, "right")
    return FieldState(Q=Q, dx=f.dx, x0=f.x0, n_ghost=ng, t=f.t)


# ---------------------------------------------------------------------------
# update


def check_positive(Qnew: np.ndarray, t: float) -> None:
    h = Qnew[0]
    bad = ~(h > 0.0) | ~np.all(np.isfinite(Qnew), axis=0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise PositivityFailure(cell=i, t=t, h=float(h[i]))


def interface_update(Q_int, Dm, Dp, F, dt, dx):
    """Combine per-interface contributions; arrays hold M+1 interfaces."""
    return Q_int - dt / dx * ((Dm[:, 1:] + Dp[:, :-1]) + (F[:, 1:] - F[:, :-1]))


def step_first_order(f: FieldState, dt: float, closure: BedloadClosure,
                     quad: QuadratureRule = GAUSS1, bc: BoundarySpec = BoundarySpec(),
                     star: str = ITERATIVE, g: float = G) -> FieldState:
    f = apply_boundary(f, bc)
    ng, M = f.n_ghost, f.M
    Q = f.Q
    QL = Q[:, ng - 1:ng + M]
    QR = Q[:, ng:ng + M + 1]
    hsL, hsR, qs = solve_star(QL[0], QL[1], QL[2], QR[0], QR[1], QR[2], star, g)
    Dm, Dp = interface_fluctuations(QL, QR, hsL, hsR, qs, quad, g)
    F = upwind_advection_flux(QL, QR, qs, closure)
    Qnew = interface_update(f.interior, Dm, Dp, F, dt, f.dx)
    check_positive(Qnew, f.t + dt)
    return f.with_interior(Qnew, t=f.t + dt)


# ---------------------------------------------------------------------------
# time loop

Stepper = Callable[[FieldState, float], FieldState]


def integrate(f0: FieldState, step: Stepper, t_final: float, cfl: float = 0.9,
              output_times: Iterable[float] = (), g: float = G,
              max_steps: int | None = None,
              on_step: Callable[[FieldState, float], None] | None = None) -> list[FieldState]:
    """Advance ``f0`` to ``t_final`` landing exactly on every output time.

    Returns the snapshots at the requested output times (``t_final`` is
    always included). ``max_steps`` stops early and returns the last state
    as the final snapshot.
    """
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    targets = sorted({float(t) for t in output_times if 0.0 <= t <= t_final} | {float(t_final)})
    out: list[FieldState] = []
    f = f0
    nsteps = 0
    for target in targets:
        while f.t < target:
            if max_steps is not None and nsteps >= max_steps:
                out.append(f)
                return out
            dt = cfl_timestep(f, cfl, g, t_end=target)
            f = step(f, dt)
            nsteps += 1
            if math.isfinite(target) and target - f.t <= 1e-12 * max(1.0, target):
                f.t = target
            if on_step is not None:
                on_step(f, dt)
        out.append(f)
    return out


def run_first_order(f0: FieldState, closure: BedloadClosure, t_final: float,
                    bc: BoundarySpec = BoundarySpec(), cfl: float = 0.9,
                    quad: QuadratureRule = GAUSS1, star: str = ITERATIVE, g: float = G,
                    output_times: Sequence[float] = (), max_steps: int | None = None,
                    on_step=None) -> list[FieldState]:
    def step(f, dt):
        return step_first_order(f, dt, closure, quad, bc, star, g)

    return integrate(f0.with_ghosts(1), step, t_final, cfl, output_times, g, max_steps, on_step)
