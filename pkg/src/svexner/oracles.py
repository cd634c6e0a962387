"""Reference solutions and error metrology.

Everything here is independent of the splitting scheme: a manufactured
smooth solution, the classical exact Riemann solver for the fixed-bed
shallow water equations, a centred Rusanov-type scheme, steady backwater
profiles from the Bernoulli invariant, and convergence tables.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import (
    G,
    BedloadClosure,
    CellState,
    FieldState,
    CounterFlux,
    SolverError,
    max_fixed_bed_speed,
)
from .splitting import BoundarySpec, apply_boundary, check_positive


class UnsupportedInput(ValueError):
    pass


# ---------------------------------------------------------------------------
# manufactured solution


@dataclass(frozen=True)
class ManufacturedParams:
    h0: float = 5.0
    c0: float = 0.01
    T_p: float = 10.0
    L_w: float = 250.0

    def __post_init__(self):
        if not self.h0 > self.c0 > 0:
            raise ValueError("need h0 > c0 > 0")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.L_w

    @property
    def omega(self) -> float:
        return 2.0 * math.pi / self.T_p

    @property
    def celerity(self) -> float:
        return self.omega / self.k


def manufactured_state(x, t, p: ManufacturedParams = ManufacturedParams()):
    """Point values ``(h, q, eta, q_b)``; ``q_b = -q`` closes the bed equation."""
    s = np.sin(p.k * np.asarray(x, dtype=float) - p.omega * t)
    h = p.h0 + p.c0 * s
    q = p.celerity * p.h0 + p.c0 * p.celerity * s
    return h, q, -h, -q


def manufactured_cell_state(x, t, p: ManufacturedParams = ManufacturedParams()):
    h, q, eta, qb = manufactured_state(x, t, p)
    if np.ndim(h):
        raise ValueError("cell state needs scalar x")
    return CellState(float(h), float(q), float(eta)), float(qb)


def manufactured_cell_averages(x0: float, dx: float, M: int, t: float,
                               p: ManufacturedParams = ManufacturedParams()) -> np.ndarray:
    """Exact cell averages of (h, q, eta) on a uniform grid."""
    xl = x0 + np.arange(M) * dx
    xr = xl + dx
    mean_sin = (np.cos(p.k * xl - p.omega * t) - np.cos(p.k * xr - p.omega * t)) / (p.k * dx)
    h = p.h0 + p.c0 * mean_sin
    q = p.celerity * h
    return np.vstack([h, q, -h])


MANUFACTURED_CLOSURE = CounterFlux()


# ---------------------------------------------------------------------------
# exact fixed-bed Riemann solver


class ExactSWERiemann:
    """Exact solution of the shallow water Riemann problem on a flat fixed bed.

    Calling the instance with an array of similarity coordinates ``x/t``
    returns ``(h, u)``.
    """

    def __init__(self, hL: float, uL: float, hR: float, uR: float, g: float = G,
                 tol: float = 1e-14, max_iter: int = 100):
        if not (hL > 0 and hR > 0):
            raise UnsupportedInput("both depths must be positive")
        self.hL, self.uL, self.hR, self.uR, self.g = hL, uL, hR, uR, g
        self.cL, self.cR = math.sqrt(g * hL), math.sqrt(g * hR)
        if 2.0 * (self.cL + self.cR) <= uR - uL:
            raise UnsupportedInput("data generate a dry region")

        h = (0.5 * (self.cL + self.cR) - 0.25 * (uR - uL)) ** 2 / g
        for _ in range(max_iter):
            fL, dL = self._branch(h, hL)
            fR, dR = self._branch(h, hR)
            step = (fL + fR + uR - uL) / (dL + dR)
            h_new = max(h - step, 1e-3 * h)
            if abs(h_new - h) <= tol * 0.5 * (h_new + h):
                h = h_new
                break
            h = h_new
        self.h_star = h
        fL, _ = self._branch(h, hL)
        fR, _ = self._branch(h, hR)
        self.u_star = 0.5 * (uL + uR) + 0.5 * (fR - fL)
        self.c_star = math.sqrt(g * h)

    def _branch(self, h, hK):
        g = self.g
        if h > hK:
            ge = math.sqrt(0.5 * g * (h + hK) / (h * hK))
            f = (h - hK) * ge
            d = ge - 0.25 * g * (h - hK) / (ge * h * h)
        else:
            cK = math.sqrt(g * hK)
            f = 2.0 * (math.sqrt(g * h) - cK)
            d = math.sqrt(g / h)
        return f, d

    def depth_function(self, h: float) -> float:
        return self._branch(h, self.hL)[0] + self._branch(h, self.hR)[0] + self.uR - self.uL

    @property
    def left_shock(self) -> bool:
        return self.h_star > self.hL

    @property
    def right_shock(self) -> bool:
        return self.h_star > self.hR

    def shock_speed(self, side: str) -> float:
        if side == "left":
            return self.uL - self.cL * math.sqrt(0.5 * self.h_star * (self.h_star + self.hL)) / self.hL
        return self.uR + self.cR * math.sqrt(0.5 * self.h_star * (self.h_star + self.hR)) / self.hR

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        g = self.g
        h = np.empty_like(xi)
        u = np.empty_like(xi)
        left = xi <= self.u_star

        # left of the contact
        if self.left_shock:
            s = self.shock_speed("left")
            pre = left & (xi < s)
            post = left & ~pre
            h[pre], u[pre] = self.hL, self.uL
            h[post], u[post] = self.h_star, self.u_star
        else:
            head, tail = self.uL - self.cL, self.u_star - self.c_star
            pre = left & (xi < head)
            fan = left & (xi >= head) & (xi < tail)
            post = left & (xi >= tail)
            h[pre], u[pre] = self.hL, self.uL
            u[fan] = (self.uL + 2.0 * self.cL + 2.0 * xi[fan]) / 3.0
            h[fan] = (self.uL + 2.0 * self.cL - xi[fan]) ** 2 / (9.0 * g)
            h[post], u[post] = self.h_star, self.u_star

        right = ~left
        if self.right_shock:
            s = self.shock_speed("right")
            post = right & (xi > s)
            pre = right & ~post
            h[post], u[post] = self.hR, self.uR
            h[pre], u[pre] = self.h_star, self.u_star
        else:
            head, tail = self.uR + self.cR, self.u_star + self.c_star
            post = right & (xi > head)
            fan = right & (xi <= head) & (xi > tail)
            pre = right & (xi <= tail)
            h[post], u[post] = self.hR, self.uR
            u[fan] = (self.uR - 2.0 * self.cR + 2.0 * xi[fan]) / 3.0
            h[fan] = (-self.uR + 2.0 * self.cR + xi[fan]) ** 2 / (9.0 * g)
            h[pre], u[pre] = self.h_star, self.u_star
        return h, u

    def sample(self, x, t, x0: float = 0.0):
        if t <= 0:
            x = np.asarray(x, dtype=float)
            return np.where(x < x0, self.hL, self.hR), np.where(x < x0, self.uL, self.uR)
        return self((np.asarray(x, dtype=float) - x0) / t)


def exact_swe_riemann(hL, uL, hR, uR, g=G) -> ExactSWERiemann:
    return ExactSWERiemann(hL, uL, hR, uR, g)


# ---------------------------------------------------------------------------
# centred reference scheme


def reference_centered_step(f: FieldState, dt: float, closure: BedloadClosure,
                            bc: BoundarySpec = BoundarySpec(), g: float = G) -> FieldState:
    """First-order centred flux with Rusanov dissipation on (h + eta, q, eta).

    The free-surface and discharge rows are damped with the fixed-bed speed;
    the bed row with that speed scaled by the local bedload intensity. At
    rest both vanish, and the centred momentum flux cancels the interface
    average of ``g h d(eta)``, so quiescent water over any bed is preserved.
    """
    f = apply_boundary(f.with_ghosts(1), bc)
    Q = f.Q
    M, dx = f.M, f.dx
    QL, QR = Q[:, :M + 1], Q[:, 1:M + 2]

    def phys(S):
        h, q = S[0], S[1]
        u = q / h
        return np.stack([q, q * u + 0.5 * g * h * h, closure.flux(u, h) * np.ones_like(q)]), u

    FL, uL = phys(QL)
    FR, uR = phys(QR)
    s = np.maximum(max_fixed_bed_speed(QL, g), max_fixed_bed_speed(QR, g))
    psi_max = np.maximum(np.abs(closure.derivative(uL, QL[0]) / QL[0]),
                         np.abs(closure.derivative(uR, QR[0]) / QR[0]))
    s_bed = s * np.minimum(psi_max, 1.0)

    dH = (QR[0] + QR[2]) - (QL[0] + QL[2])
    dq = QR[1] - QL[1]
    deta = QR[2] - QL[2]
    flux = 0.5 * (FL + FR)
    flux[0] -= 0.5 * (s * dH - s_bed * deta)
    flux[1] -= 0.5 * s * dq
    flux[2] -= 0.5 * s_bed * deta

    # non-conservative g h d(eta): interface average split evenly to both sides
    bterm = g * 0.5 * (QL[0] + QR[0]) * deta
    Qnew = f.interior - dt / dx * (flux[:, 1:] - flux[:, :-1])
    Qnew[1] -= dt / dx * 0.5 * (bterm[1:] + bterm[:-1])
    check_positive(Qnew, f.t + dt)
    return f.with_interior(Qnew, t=f.t + dt)


# ---------------------------------------------------------------------------
# backwater profiles


def bernoulli_depth(specific_energy, q, g=G, branch="subcritical", tol=1e-14, max_iter=100):
    """Depth with ``h + q^2/(2 g h^2) = specific_energy`` on the requested branch."""
    e = np.atleast_1d(np.asarray(specific_energy, dtype=float))
    hc = (q * q / g) ** (1.0 / 3.0)
    if np.any(e < 1.5 * hc * (1 - 1e-14)):
        raise UnsupportedInput("flow is choked: specific energy below critical")
    if q == 0:
        return e.copy()
    if branch == "subcritical":
        h = e.copy()
    elif branch == "supercritical":
        h = 0.9 * abs(q) / np.sqrt(2.0 * g * e)
    else:
        raise ValueError(branch)
    for _ in range(max_iter):
        phi = h + q * q / (2.0 * g * h * h) - e
        dphi = 1.0 - q * q / (g * h ** 3)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dphi != 0, phi / dphi, 0.0)
        h = h - step
        if np.all(np.abs(step) <= tol * h):
            break
    return h


def backwater_profile(q_in: float, h_out: float, eta, dx: float, x0: float = 0.0,
                      g: float = G, n_ghost: int = 1) -> FieldState:
    """Frictionless subcritical steady state controlled by the outlet depth."""
    eta = np.asarray(eta, dtype=float)
    energy = h_out + eta[-1] + q_in * q_in / (2.0 * g * h_out * h_out)
    h = bernoulli_depth(energy - eta, q_in, g, "subcritical")
    if np.any(q_in / h >= np.sqrt(g * h)):
        raise UnsupportedInput("profile is not subcritical everywhere")
    return FieldState.from_interior(h, np.full_like(h, q_in), eta, dx, x0, n_ghost)


def supercritical_profile(q_in: float, h_in: float, eta, dx: float, x0: float = 0.0,
                          g: float = G, n_ghost: int = 1) -> FieldState:
    """Frictionless supercritical steady state controlled by the inflow state."""
    eta = np.asarray(eta, dtype=float)
    energy = h_in + eta[0] + q_in * q_in / (2.0 * g * h_in * h_in)
    h = bernoulli_depth(energy - eta, q_in, g, "supercritical")
    return FieldState.from_interior(h, np.full_like(h, q_in), eta, dx, x0, n_ghost)


# ---------------------------------------------------------------------------
# norms and convergence tables


@dataclass
class ErrorRow:
    M: int
    l1: dict
    linf: dict
    cpu_seconds: float = 0.0
    rate_l1: dict = field(default_factory=dict)
    rate_linf: dict = field(default_factory=dict)
    failure: str | None = None


@dataclass
class ErrorReport:
    variables: tuple
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["M"]
        for v in self.variables:
            header += [f"{v}_L1", f"{v}_rate_L1", f"{v}_Linf", f"{v}_rate_Linf"]
        w.writerow(header + ["cpu_s"])
        for r in self.rows:
            line = [r.M]
            for v in self.variables:
                line += [f"{r.l1[v]:.6e}", _fmt_rate(r.rate_l1.get(v)),
                         f"{r.linf[v]:.6e}", _fmt_rate(r.rate_linf.get(v))]
            w.writerow(line + [f"{r.cpu_seconds:.3f}"])
        return buf.getvalue()

    def to_text(self) -> str:
        cols = ["M"]
        for v in self.variables:
            cols += [f"L1({v})", "O(L1)", f"Linf({v})", "O(Linf)"]
        cols.append("CPU[s]")
        lines = ["".join(f"{c:>12}" for c in cols)]
        for r in self.rows:
            cells = [f"{r.M:>12d}"]
            for v in self.variables:
                cells += [f"{r.l1[v]:>12.2E}", f"{_fmt_rate(r.rate_l1.get(v)):>12}",
                          f"{r.linf[v]:>12.2E}", f"{_fmt_rate(r.rate_linf.get(v)):>12}"]
            cells.append(f"{r.cpu_seconds:>12.2f}")
            lines.append("".join(cells))
        for r in self.rows:
            if r.failure:
                lines.append(f"M={r.M} failed: {r.failure}")
        return "\n".join(lines) + "\n"


def _fmt_rate(r):
    return "-" if r is None else f"{r:.2f}"


VARIABLE_ROWS = {"h": 0, "q": 1, "eta": 2}


def error_norms(numerical: FieldState, exact: np.ndarray,
                variables: Sequence[str] = ("q", "eta")) -> ErrorRow:
    """L1 (mean absolute error) and Linf norms of the interior error.

    ``exact`` holds reference cell values with shape ``(3, M)``.
    """
    exact = np.asarray(exact, dtype=float)
    if exact.shape != numerical.interior.shape:
        raise ValueError(f"grid mismatch: {exact.shape} vs {numerical.interior.shape}")
    err = np.abs(numerical.interior - exact)
    l1 = {v: float(np.sum(err[VARIABLE_ROWS[v]]) * numerical.dx / numerical.length)
          for v in variables}
    linf = {v: float(np.max(err[VARIABLE_ROWS[v]])) for v in variables}
    return ErrorRow(M=numerical.M, l1=l1, linf=linf)


def observed_rate(e_coarse: float, e_fine: float) -> float:
    if not (e_coarse > 0 and e_fine > 0 and math.isfinite(e_coarse) and math.isfinite(e_fine)):
        return math.nan
    return math.log2(e_coarse / e_fine)


def fill_rates(rows: list, variables: Sequence[str]) -> None:
    for prev, row in zip(rows, rows[1:]):
        if row.M != 2 * prev.M:
            raise ValueError(f"grid sequence must double: {prev.M} -> {row.M}")
        row.rate_l1 = {v: observed_rate(prev.l1[v], row.l1[v]) for v in variables}
        row.rate_linf = {v: observed_rate(prev.linf[v], row.linf[v]) for v in variables}


def convergence_table(grids: Sequence[int],
                      solve: Callable[[int], tuple[FieldState, np.ndarray]],
                      variables: Sequence[str] = ("q", "eta")) -> ErrorReport:
    """Run ``solve(M)`` on each grid and tabulate errors and observed orders.

    ``solve`` returns the numerical field and the exact reference values.
    A solver failure on one grid is recorded on its row (norms become NaN)
    and the ladder continues.
    """
    grids = list(grids)
    for a, b in zip(grids, grids[1:]):
        if b != 2 * a:
            raise ValueError(f"grid sequence must double: {a} -> {b}")
    rows = []
    for M in grids:
        t0 = time.process_time()
        try:
            numerical, exact = solve(M)
            row = error_norms(numerical, exact, variables)
        except SolverError as exc:
            nan = {v: math.nan for v in variables}
            row = ErrorRow(M=M, l1=dict(nan), linf=dict(nan), failure=str(exc))
        row.cpu_seconds = time.process_time() - t0
        rows.append(row)
    fill_rates(rows, variables)
    return ErrorReport(tuple(variables), rows)
