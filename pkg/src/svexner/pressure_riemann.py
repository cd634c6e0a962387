"""Star states of the pressure subsystem.

The pressure subsystem has waves of speed -c, 0 and +c, so the interface
state is always the star state and no sampling is needed. Across the outer
waves ``(2/3) sqrt(g) h^1.5 +- q`` is invariant; across the stationary
contact ``q`` and ``h + eta`` are continuous. This leaves

    h*L^1.5 + h*R^1.5 = K,     h*L - h*R = eta_R - eta_L,

solved either exactly (Newton with a bisection fallback) or with a closed
form obtained by linearising the first equation about the zero-jump depth.

All array kernels accept scalars or numpy arrays of matching shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import G, CellState, StarFailure

LINEARIZED = "linearized"
ITERATIVE = "iterative"
STAR_SOLVERS = (LINEARIZED, ITERATIVE)

DEPTH_FLOOR = 1e-10


@dataclass(frozen=True)
class StarState:
    h_star_L: float
    h_star_R: float
    q_star: float
    eta_L: float
    eta_R: float

    @property
    def left(self) -> CellState:
        return CellState(self.h_star_L, self.q_star, self.eta_L)

    @property
    def right(self) -> CellState:
        return CellState(self.h_star_R, self.q_star, self.eta_R)


@dataclass(frozen=True)
class RiemannInputs:
    left: CellState
    right: CellState
    g: float = G

    @property
    def K(self) -> float:
        return invariant_constant(self.left.h, self.left.q, self.right.h, self.right.q, self.g)

    @property
    def delta_eta(self) -> float:
        return self.right.eta - self.left.eta


def invariant_constant(hL, qL, hR, qR, g=G):
    return 1.5 / math.sqrt(g) * (qL - qR) + hL ** 1.5 + hR ** 1.5


def zero_jump_depth(hL, qL, hR, qR, g=G):
    """Closed-form star depth when the bed jump vanishes."""
    base = 0.75 / math.sqrt(g) * (qL - qR) + 0.5 * (hL ** 1.5 + hR ** 1.5)
    out = np.where(base > 0, np.abs(base) ** (2.0 / 3.0), np.nan)
    return float(out) if out.ndim == 0 else out


def star_discharge(hL, qL, hR, qR, hsL, hsR, g=G):
    return 0.5 * (qL + qR) + math.sqrt(g) / 3.0 * (
        (hL ** 1.5 - hsL ** 1.5) - (hR ** 1.5 - hsR ** 1.5))


def _fail(msg, hL, qL, etaL, hR, qR, etaR, bad):
    idx = int(np.flatnonzero(np.atleast_1d(bad))[0])
    pick = lambda a: float(np.atleast_1d(a)[idx]) if np.ndim(a) else float(a)  # noqa: E731
    raise StarFailure(msg, left=(pick(hL), pick(qL), pick(etaL)),
                      right=(pick(hR), pick(qR), pick(etaR)))


def solve_linearized(hL, qL, etaL, hR, qR, etaR, g=G):
    """Closed-form star depths and discharge. Returns ``(hsL, hsR, qs)``."""
    deta = etaR - etaL
    K = invariant_constant(hL, qL, hR, qR, g)
    hhat = zero_jump_depth(hL, qL, hR, qR, g)
    with np.errstate(invalid="ignore", divide="ignore"):
        hsL = 0.5 * (K / np.sqrt(hhat) + deta)
    hsR = hsL - deta
    bad = ~((hsL > 0) & (hsR > 0) & np.isfinite(hsL) & np.isfinite(hsR))
    if np.any(bad):
        _fail("linearized star state is not positive", hL, qL, etaL, hR, qR, etaR, bad)
    return hsL, hsR, star_discharge(hL, qL, hR, qR, hsL, hsR, g)


def _depth_residual(h, deta, K):
    return h ** 1.5 + (h - deta) ** 1.5 - K


def solve_iterative(hL, qL, etaL, hR, qR, etaR, g=G, tol=1e-12, max_iter=50):
    """Exact star depths by Newton iteration. Returns ``(hsL, hsR, qs)``.

    The residual is increasing and convex in ``h*L`` on its domain
    ``h*L > max(deta, 0)``, so Newton iterates stay admissible after the
    first step. One polishing step is taken after the tolerance is met so
    that quiescent data land on the data depths to rounding.
    """
    scalar = np.ndim(hL) == 0 and np.ndim(hR) == 0
    hL_, qL_, etaL_, hR_, qR_, etaR_ = (np.atleast_1d(np.asarray(a, dtype=float))
                                        for a in (hL, qL, etaL, hR, qR, etaR))
    deta = etaR_ - etaL_
    K = invariant_constant(hL_, qL_, hR_, qR_, g)
    lo = np.maximum(deta, 0.0)

    admissible = np.isfinite(K) & (K > np.abs(deta) ** 1.5)
    if not np.all(admissible):
        _fail("no positive star depths", hL_, qL_, etaL_, hR_, qR_, etaR_, ~admissible)

    hhat = zero_jump_depth(hL_, qL_, hR_, qR_, g)
    h = np.where(np.isfinite(hhat), hhat, 1.0) + lo
    h = np.maximum(h, lo + 1e-12)

    scale = np.maximum(1.0, K)
    done = np.zeros(h.shape, dtype=bool)
    for _ in range(max_iter):
        f = _depth_residual(h, deta, K)
        converged = np.abs(f) <= tol * scale
        df = 1.5 * (np.sqrt(h) + np.sqrt(h - deta))
        step = np.where(done, 0.0, f / df)
        h = h - step
        h = np.where(h <= lo, 0.5 * (lo + (h + step)), h)
        done |= converged
        if np.all(done):
            break

    f = _depth_residual(h, deta, K)
    bad = ~(np.abs(f) <= tol * scale) | ~np.isfinite(h)
    if np.any(bad):
        h[bad] = _bisect(deta[bad], K[bad], lo[bad], tol)
    hsL = h
    hsR = hsL - deta
    if np.any(hsR <= 0) or np.any(hsL <= 0):
        _fail("star depth reached the depth floor", hL_, qL_, etaL_, hR_, qR_, etaR_,
              (hsR <= 0) | (hsL <= 0))
    qs = star_discharge(hL_, qL_, hR_, qR_, hsL, hsR, g)
    if scalar:
        return float(hsL[0]), float(hsR[0]), float(qs[0])
    return hsL, hsR, qs


def _bisect(deta, K, lo, tol):
    a = lo + DEPTH_FLOOR
    b = np.maximum(a, (K + 1.0) ** (2.0 / 3.0) + np.abs(deta))
    fa = _depth_residual(a, deta, K)
    fb = _depth_residual(b, deta, K)
    if np.any(fa > 0) or np.any(fb < 0):
        raise StarFailure("no sign change for star depth bracket")
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = _depth_residual(mid, deta, K)
        left = fm > 0
        b = np.where(left, mid, b)
        a = np.where(left, a, mid)
        if np.all(b - a <= 1e-15 * b):
            break
    return 0.5 * (a + b)


def solve_star(hL, qL, etaL, hR, qR, etaR, method=ITERATIVE, g=G):
    if method == LINEARIZED:
        return solve_linearized(hL, qL, etaL, hR, qR, etaR, g)
    if method == ITERATIVE:
        return solve_iterative(hL, qL, etaL, hR, qR, etaR, g)
    raise ValueError(f"unknown star solver {method!r}")


def _as_star(left: CellState, right: CellState, hsL, hsR, qs) -> StarState:
    return StarState(float(hsL), float(hsR), float(qs), left.eta, right.eta)


def star_state_linearized(left: CellState, right: CellState, g: float = G) -> StarState:
    return _as_star(left, right, *solve_linearized(left.h, left.q, left.eta,
                                                   right.h, right.q, right.eta, g))


def star_state_iterative(left: CellState, right: CellState, tol: float = 1e-12,
                         max_iter: int = 50, g: float = G) -> StarState:
    return _as_star(left, right, *solve_iterative(left.h, left.q, left.eta, right.h, right.q,
                                                  right.eta, g, tol=tol, max_iter=max_iter))


def star_state(left: CellState, right: CellState, method: str = ITERATIVE, g: float = G) -> StarState:
    return _as_star(left, right, *solve_star(left.h, left.q, left.eta,
                                             right.h, right.q, right.eta, method, g))


def riemann_invariant_residuals(left: CellState, right: CellState, star: StarState, g: float = G):
    """Mismatch of the left/right wave invariants and the contact relation."""
    a = 2.0 / 3.0 * math.sqrt(g)
    r_left = abs(a * left.h ** 1.5 + left.q - a * star.h_star_L ** 1.5 - star.q_star)
    r_right = abs(a * right.h ** 1.5 - right.q - a * star.h_star_R ** 1.5 + star.q_star)
    r_contact = abs((star.h_star_L + star.eta_L) - (star.h_star_R + star.eta_R))
    return r_left, r_right, r_contact
