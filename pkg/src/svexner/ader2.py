"""Second-order ADER extension with AENO slopes and a HEOC interface solver.

One step:

1. AENO slope per cell, componentwise on (h, q, eta).
2. Boundary-extrapolated values evolved half a step with the split
   Cauchy-Kovalevskaya terms (advection flux difference, pressure matrix).
3. Pressure star states from the evolved values at each interface.
4. Fluctuations along segment paths between evolved values and star states.
5. Upwind advection flux on the evolved values.
6. In-cell smooth non-conservative term ``H_i``.
7. Conservative-plus-fluctuation update with ``- dt H_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    G,
    BedloadClosure,
    CellState,
    FieldState,
    PositivityFailure,
    advection_flux_exact,
    apply_pressure,
)
from .pressure_riemann import ITERATIVE, StarState, solve_star, star_state
from .splitting import (
    GAUSS1,
    BoundarySpec,
    QuadratureRule,
    apply_boundary,
    check_positive,
    integrate,
    interface_fluctuations,
    interface_update,
    upwind_advection_flux,
)


@dataclass(frozen=True)
class AenoParams:
    tol: float = 1e-4
    eps: float = 1.0

    def __post_init__(self):
        if not (self.tol > 0 and self.eps > 0):
            raise ValueError("AENO tol and eps must be positive")


@dataclass(frozen=True)
class EvolvedBoundaryPair:
    q_tilde_L: CellState
    q_tilde_R: CellState


def aeno_beta(r, eps):
    return (1.0 - r) / np.sqrt(eps * eps + (r - 1.0) ** 2)


def aeno_blend(d_minus, d_plus, params: AenoParams):
    """Blend one-sided slopes; works elementwise on arrays of any shape."""
    r = np.abs(d_minus) / (np.abs(d_plus) + params.tol)
    beta = aeno_beta(r, params.eps)
    return 0.5 * (1.0 + beta) * d_minus + 0.5 * (1.0 - beta) * d_plus


def aeno_slope(q_prev: CellState, q_curr: CellState, q_next: CellState, dx: float,
               params: AenoParams = AenoParams()) -> np.ndarray:
    a, b, c = q_prev.as_array(), q_curr.as_array(), q_next.as_array()
    return aeno_blend((b - a) / dx, (c - b) / dx, params)


def _evolve(Q, slope, dx, dt, closure, g):
    """Extrapolated and half-step evolved boundary values: (QL, QR, QtL, QtR)."""
    QL = Q - 0.5 * dx * slope
    QR = Q + 0.5 * dx * slope
    grad = (advection_flux_exact(QR, closure) - advection_flux_exact(QL, closure)) / dx
    QtL = QL - 0.5 * dt * grad - 0.5 * dt * apply_pressure(QL[0], slope, g)
    QtR = QR - 0.5 * dt * grad - 0.5 * dt * apply_pressure(QR[0], slope, g)
    return QL, QR, QtL, QtR


def extrapolate_and_evolve(q: CellState, slope, dx: float, dt: float,
                           closure: BedloadClosure, g: float = G) -> EvolvedBoundaryPair:
    Q = q.as_array()[:, None]
    S = np.asarray(slope, dtype=float)[:, None]
    QL, QR, QtL, QtR = _evolve(Q, S, dx, dt, closure, g)
    for arr in (QL, QR, QtL, QtR):
        check_positive(arr, dt / 2)
    return EvolvedBoundaryPair(CellState.from_array(QtL[:, 0]), CellState.from_array(QtR[:, 0]))


def grp_star(q_tilde_R_of_i: CellState, q_tilde_L_of_next: CellState,
             solver: str = ITERATIVE, g: float = G) -> StarState:
    return star_state(q_tilde_R_of_i, q_tilde_L_of_next, solver, g)


def _h_term(Q, slope, QtL, QtR, dx, dt, g):
    hc = Q[0] - 0.5 * dt * slope[1]
    return apply_pressure(hc, (QtR - QtL) / dx, g), hc


def h_i_term(q: CellState, slope, pair: EvolvedBoundaryPair, dx: float, dt: float,
             g: float = G) -> np.ndarray:
    Q = q.as_array()[:, None]
    S = np.asarray(slope, dtype=float)[:, None]
    H, hc = _h_term(Q, S, pair.q_tilde_L.as_array()[:, None], pair.q_tilde_R.as_array()[:, None],
                    dx, dt, g)
    check_positive(np.stack([hc, hc, hc]), dt / 2)
    return H[:, 0]


def step_second_order(f: FieldState, dt: float, closure: BedloadClosure,
                      quad: QuadratureRule = GAUSS1, bc: BoundarySpec = BoundarySpec(),
                      params: AenoParams = AenoParams(), star: str = ITERATIVE,
                      g: float = G, zero_slopes: bool = False,
                      zero_slope_retry: bool = False) -> FieldState:
    if f.n_ghost != 2:
        f = f.with_ghosts(2)
    f = apply_boundary(f, bc)
    Q = f.Q
    M, dx = f.M, f.dx
    t_half = f.t + 0.5 * dt

    # cells 1..M+2 of the padded array: interior plus one ghost per side
    Qc = Q[:, 1:-1]
    if zero_slopes:
        slope = np.zeros_like(Qc)
    else:
        slope = aeno_blend((Qc - Q[:, :-2]) / dx, (Q[:, 2:] - Qc) / dx, params)

    QLb, QRb, QtL, QtR = _evolve(Qc, slope, dx, dt, closure, g)
    try:
        for arr in (QLb, QRb, QtL, QtR):
            check_positive(arr, t_half)
    except PositivityFailure:
        if not zero_slope_retry:
            raise
        return step_second_order(f, dt, closure, quad, bc, params, star, g, zero_slopes=True)

    # interface j sits between padded cells j and j+1 of the slope arrays
    AL = QtR[:, :-1]
    AR = QtL[:, 1:]
    hsL, hsR, qs = solve_star(AL[0], AL[1], AL[2], AR[0], AR[1], AR[2], star, g)
    Dm, Dp = interface_fluctuations(AL, AR, hsL, hsR, qs, quad, g)
    F = upwind_advection_flux(AL, AR, qs, closure)

    inner = slice(1, M + 1)
    H, hc = _h_term(Qc[:, inner], slope[:, inner], QtL[:, inner], QtR[:, inner], dx, dt, g)
    if np.any(~(hc > 0)):
        i = int(np.flatnonzero(~(hc > 0))[0])
        raise PositivityFailure(cell=i, t=t_half, h=float(hc[i]))

    Qnew = interface_update(f.interior, Dm, Dp, F, dt, dx) - dt * H
    check_positive(Qnew, f.t + dt)
    return f.with_interior(Qnew, t=f.t + dt)


def run_second_order(f0: FieldState, closure: BedloadClosure, t_final: float,
                     bc: BoundarySpec = BoundarySpec(), cfl: float = 0.9,
                     quad: QuadratureRule = GAUSS1, params: AenoParams = AenoParams(),
                     star: str = ITERATIVE, g: float = G,
                     output_times: Sequence[float] = (), max_steps: int | None = None,
                     on_step=None, zero_slope_retry: bool = False) -> list[FieldState]:
    def step(f, dt):
        return step_second_order(f, dt, closure, quad, bc, params, star, g,
                                 zero_slope_retry=zero_slope_retry)

    return integrate(f0.with_ghosts(2), step, t_final, cfl, output_times, g, max_steps, on_step)
