"""Domain types, bedload closures and eigenstructure diagnostics.

State vectors are ordered ``(h, q, eta)``: depth, unit discharge and bed
elevation. Grid fields are stored as a ``(3, n)`` float array that includes
ghost cells on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

G = 9.806

ArrayLike = Union[float, np.ndarray]


class SolverError(RuntimeError):
    """Base class for failures raised while advancing a solution."""


class PositivityFailure(SolverError):
    def __init__(self, cell: int, t: float, h: float):
        self.cell = cell
        self.t = t
        self.h = h
        super().__init__(f"non-positive depth h={h!r} in cell {cell} at t={t!r}")


class StarFailure(SolverError):
    """The pressure Riemann problem has no admissible star state."""

    def __init__(self, message: str, left=None, right=None):
        self.left = left
        self.right = right
        super().__init__(f"{message} (left={left}, right={right})")


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class CellState:
    h: float
    q: float
    eta: float

    def __post_init__(self):
        vals = (self.h, self.q, self.eta)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite cell state {vals}")
        if self.h <= 0.0:
            raise ValueError(f"depth must be positive, got h={self.h}")

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.q, self.eta], dtype=float)

    @classmethod
    def from_array(cls, v) -> "CellState":
        return cls(float(v[0]), float(v[1]), float(v[2]))

    @property
    def u(self) -> float:
        return self.q / self.h

    def primitive(self, g: float = G) -> "PrimitiveState":
        c = math.sqrt(g * self.h)
        u = self.q / self.h
        return PrimitiveState(h=self.h, u=u, eta=self.eta, c=c, froude=u / c)


@dataclass(frozen=True)
class PrimitiveState:
    h: float
    u: float
    eta: float
    c: float
    froude: float


@dataclass(frozen=True)
class Eigenvalues3:
    lambda1: float
    lambda2: float
    lambda3: float
    all_real: bool = True

    def as_tuple(self):
        return (self.lambda1, self.lambda2, self.lambda3)


@dataclass
class FieldState:
    """Cell averages on a uniform grid, ghost cells included.

    ``Q`` has shape ``(3, M + 2 * n_ghost)``; rows are ``h, q, eta``.
    """

    Q: np.ndarray
    dx: float
    x0: float = 0.0
    n_ghost: int = 1
    t: float = 0.0

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        if self.Q.ndim != 2 or self.Q.shape[0] != 3:
            raise ValueError("Q must have shape (3, n)")
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if self.n_ghost not in (1, 2):
            raise ValueError("n_ghost must be 1 or 2")
        if self.M < 1:
            raise ValueError("at least one interior cell is required")
        inner = self.interior
        if not np.all(np.isfinite(inner)):
            raise ValueError("non-finite interior state")
        if np.any(inner[0] <= 0.0):
            raise ValueError("interior depths must be positive")

    @classmethod
    def from_interior(cls, h, q, eta, dx, x0=0.0, n_ghost=1, t=0.0) -> "FieldState":
        h, q, eta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (h, q, eta)))
        inner = np.vstack([h, q, eta])
        Q = np.pad(inner, ((0, 0), (n_ghost, n_ghost)), mode="edge")
        return cls(Q=Q, dx=float(dx), x0=float(x0), n_ghost=n_ghost, t=float(t))

    @property
    def M(self) -> int:
        return self.Q.shape[1] - 2 * self.n_ghost

    @property
    def interior(self) -> np.ndarray:
        return self.Q[:, self.n_ghost:self.n_ghost + self.M]

    @property
    def h(self) -> np.ndarray:
        return self.interior[0]

    @property
    def q(self) -> np.ndarray:
        return self.interior[1]

    @property
    def eta(self) -> np.ndarray:
        return self.interior[2]

    @property
    def x(self) -> np.ndarray:
        """Interior cell centres."""
        return self.x0 + (np.arange(self.M) + 0.5) * self.dx

    @property
    def length(self) -> float:
        return self.M * self.dx

    def cell(self, i: int) -> CellState:
        return CellState.from_array(self.interior[:, i])

    def with_interior(self, inner: np.ndarray, t: float | None = None) -> "FieldState":
        Q = self.Q.copy()
        Q[:, self.n_ghost:self.n_ghost + self.M] = inner
        return replace(self, Q=Q, t=self.t if t is None else t)

    def with_ghosts(self, n_ghost: int) -> "FieldState":
        if n_ghost == self.n_ghost:
            return self
        return FieldState.from_interior(*self.interior, dx=self.dx, x0=self.x0,
                                        n_ghost=n_ghost, t=self.t)


# ---------------------------------------------------------------------------
# bedload closures


def _signed_power(u, m):
    return np.sign(u) * np.abs(u) ** m


@dataclass(frozen=True)
class Grass:
    """Power law ``q_b = A_g u^m`` with ``u^m`` read as ``sign(u)|u|^m``."""

    A_g: float
    m: float

    def __post_init__(self):
        if self.A_g < 0 or not self.m > 1:
            raise ValueError("Grass closure needs A_g >= 0 and m > 1")

    def flux(self, u, h):
        return self.A_g * _signed_power(u, self.m)

    def derivative(self, u, h):
        return self.m * self.A_g * np.abs(u) ** (self.m - 1.0)

    def ratio(self, u, h):
        # q_b / q, continuous through u = 0
        return self.A_g * np.abs(u) ** (self.m - 1.0) / h


@dataclass(frozen=True)
class ThresholdGrass:
    """``q_b = A_g max(u - u_cr, 0)^m`` with a fixed critical velocity."""

    A_g: float
    m: float
    u_cr: float

    def __post_init__(self):
        if self.A_g < 0 or not self.m > 1:
            raise ValueError("ThresholdGrass closure needs A_g >= 0 and m > 1")

    @classmethod
    def from_reference(cls, A_g: float, m: float, psi_u: float, u_ref: float, h_ref: float):
        """Pick ``u_cr`` so that the bedload intensity at the reference flow equals ``psi_u``."""
        excess = (psi_u * h_ref / (m * A_g)) ** (1.0 / (m - 1.0))
        return cls(A_g=A_g, m=m, u_cr=u_ref - excess)

    def flux(self, u, h):
        return self.A_g * np.maximum(u - self.u_cr, 0.0) ** self.m

    def derivative(self, u, h):
        return self.m * self.A_g * np.maximum(u - self.u_cr, 0.0) ** (self.m - 1.0)

    def ratio(self, u, h):
        u = np.asarray(u, dtype=float)
        qb = self.flux(u, h)
        safe = np.where(u == 0.0, 1.0, u)
        return np.where(u == 0.0, 0.0, qb / (safe * h))


@dataclass(frozen=True)
class CounterFlux:
    """``q_b = -q``; only meaningful for the manufactured-solution test."""

    def flux(self, u, h):
        return -np.asarray(u) * h

    def derivative(self, u, h):
        return -np.asarray(h) * np.ones_like(np.asarray(u, dtype=float))

    def ratio(self, u, h):
        return -np.ones_like(np.asarray(u, dtype=float) * h)


@dataclass(frozen=True)
class Frozen:
    """Fixed bed."""

    def flux(self, u, h):
        return np.zeros_like(np.asarray(u, dtype=float) * h)

    derivative = flux
    ratio = flux


BedloadClosure = Union[Grass, ThresholdGrass, CounterFlux, Frozen]


def bedload_flux(u, closure: BedloadClosure, h=1.0):
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite velocity")
    out = closure.flux(u, h)
    return float(out) if np.ndim(out) == 0 else out


def psi(u, h, closure: BedloadClosure):
    """Bedload intensity d q_b / d q at fixed depth."""
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(h))):
        raise ValueError("non-finite input")
    out = closure.derivative(u, h) / h
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# eigenstructure


def characteristic_polynomial(lam, u, h, psi_value, g=G):
    gh = g * h
    return lam ** 3 - 2 * u * lam ** 2 + (u * u / gh - psi_value - 1.0) * gh * lam + u * gh * psi_value


def full_system_eigenvalues(s: CellState, closure: BedloadClosure, g: float = G) -> Eigenvalues3:
    """Roots of the characteristic polynomial of the full coupled system.

    Diagnostic only. Uses the trigonometric form for three real roots and
    polishes each root with Newton steps. If the cubic has a complex pair,
    the result is flagged with ``all_real=False`` and the complex roots are
    reported by their real part.
    """
    u = s.q / s.h
    ps = psi(u, s.h, closure)
    gh = g * s.h
    a = -2.0 * u
    b = u * u - gh * (1.0 + ps)
    c = u * gh * ps

    p = b - a * a / 3.0
    r = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    disc = 4.0 * p ** 3 + 27.0 * r * r
    scale = max(1.0, abs(u) ** 3, gh ** 1.5)

    if p < 0 and disc <= 1e-14 * scale ** 2:
        amp = 2.0 * math.sqrt(-p / 3.0)
        arg = (3.0 * r / (2.0 * p)) * math.sqrt(-3.0 / p)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [amp * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
        all_real = True
    else:
        cr = np.roots([1.0, a, b, c])
        roots = [float(z.real) for z in cr]
        all_real = bool(np.all(np.abs(cr.imag) <= 1e-12 * math.sqrt(scale)))

    def poly(x):
        return ((x + a) * x + b) * x + c

    def dpoly(x):
        return (3.0 * x + 2.0 * a) * x + b

    polished = []
    for x in roots:
        for _ in range(3):
            d = dpoly(x)
            if d == 0.0:
                break
            step = poly(x) / d
            x -= step
            if abs(step) <= 1e-16 * max(1.0, abs(x)):
                break
        polished.append(x)
    polished.sort()
    return Eigenvalues3(*polished, all_real=all_real)


def pressure_matrix(s: CellState, g: float = G) -> np.ndarray:
    c2 = g * s.h
    return np.array([[0.0, 1.0, 0.0], [c2, 0.0, c2], [0.0, 0.0, 0.0]])


def apply_pressure(h, v, g=G):
    """Product ``P(h) v`` for stacked vectors ``v`` of shape ``(3, ...)``."""
    return np.stack([v[1], g * h * (v[0] + v[2]), np.zeros_like(v[1])])


def advection_flux_exact(Q: np.ndarray, closure: BedloadClosure) -> np.ndarray:
    """Physical advection flux ``(0, q^2/h, q_b)`` for stacked states."""
    h, q = Q[0], Q[1]
    u = q / h
    return np.stack([np.zeros_like(q), q * u, closure.flux(u, h) * np.ones_like(q)])


def max_fixed_bed_speed(s, g: float = G):
    """|u| + sqrt(g h). Accepts a CellState or a stacked ``(3, n)`` array."""
    if isinstance(s, CellState):
        return abs(s.q) / s.h + math.sqrt(g * s.h)
    Q = np.asarray(s)
    return np.abs(Q[1]) / Q[0] + np.sqrt(g * Q[0])


def cfl_timestep(f: FieldState, cfl: float, g: float = G, t_end: float | None = None) -> float:
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    speed = float(np.max(max_fixed_bed_speed(f.interior, g)))
    dt = cfl * f.dx / speed
    if t_end is not None and f.t + dt > t_end:
        dt = t_end - f.t
    return dt
