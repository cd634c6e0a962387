"""Named test setups and the builders that turn a RunConfig into solver inputs."""

from __future__ import annotations

import math

import numpy as np

from .config import ConfigError, RunConfig
from .model import CounterFlux, FieldState, Frozen, Grass, ThresholdGrass
from .oracles import (
    UnsupportedInput,
    backwater_profile,
    manufactured_cell_averages,
    supercritical_profile,
)
from .splitting import (
    BoundarySpec,
    FixedDepth,
    InflowDischarge,
    InflowState,
    Periodic,
    Reflective,
    Transmissive,
)

LADDER = (20, 40, 80, 160, 320, 640, 1280)

PRESETS: dict[str, dict] = {
    "c_property": dict(
        initial="lake_at_rest", closure="grass", A_g=0.01, m=1.5, H0=1.0, eta_max=0.2,
        x_left=-10.0, x_right=10.0, M=100, t_final=1e6, max_steps=1000,
        bc_left="reflective", bc_right="reflective", order=2, aeno_eps=0.5,
    ),
    "convergence_aeno": dict(
        initial="manufactured", closure="counter_flux", x_left=0.0, x_right=500.0,
        t_final=10.0, bc_left="periodic", bc_right="periodic", order=2,
        aeno_tol=1e-4, aeno_eps=1.0, convergence_grids=LADDER,
    ),
    "riemann_movable": dict(
        initial="riemann", closure="grass", A_g=0.01, m=3.0,
        left_state=(2.0, 0.5, 3.0), right_state=(2.0, 4.34297, 2.84751),
        x_left=-15.0, x_right=15.0, M=200, t_final=2.0, order=2, aeno_eps=0.5,
    ),
    "riemann_fixed": dict(
        initial="riemann", closure="grass", A_g=0.0, m=3.0,
        left_state=(1.0, 0.0, 0.0), right_state=(0.1, 0.0, 0.0),
        x_left=-15.0, x_right=15.0, M=100, t_final=2.0, order=2, aeno_eps=0.5,
    ),
    "hump_long": dict(
        initial="backwater", closure="threshold_grass", A_g=0.01, m=1.5, psi_u=1e-3,
        q_in=0.6263, h_out=1.0, h_ref=1.0, eta_max=0.2,
        x_left=-10.0, x_right=10.0, M=100, t_final=1000.0, output_interval=250.0,
        bc_left="inflow_discharge", bc_right="fixed_depth", order=2, aeno_eps=0.5,
    ),
    "hump_small": dict(
        initial="small_hump", closure="threshold_grass", A_g=0.01, m=1.5, psi_u=1e-2,
        froude=1.2, h_ref=1.0, eta_max=1e-5,
        x_left=-10.0, x_right=10.0, M=800, t_final=6.0, output_interval=2.0,
        bc_left="auto", bc_right="auto", order=2, aeno_eps=0.5,
    ),
}
PRESETS["hump_small_supercritical"] = dict(PRESETS["hump_small"])
PRESETS["hump_small_near_critical"] = dict(PRESETS["hump_small"], froude=0.99)


def hump(x, eta_max):
    return eta_max * np.exp(-np.asarray(x, dtype=float) ** 2)


def cell_centres(cfg: RunConfig) -> np.ndarray:
    return cfg.x_left + (np.arange(cfg.M) + 0.5) * cfg.dx


def reference_discharge(cfg: RunConfig) -> float:
    """Discharge used for the threshold closure and small-hump boundaries."""
    if cfg.initial == "small_hump":
        return cfg.froude * math.sqrt(cfg.g * cfg.h_ref) * cfg.h_ref
    if cfg.q_in is None:
        raise ConfigError("q_in is needed to set the reference flow", "q_in")
    return cfg.q_in


def build_closure(cfg: RunConfig):
    if cfg.closure == "grass":
        return Frozen() if cfg.A_g == 0 else Grass(cfg.A_g, cfg.m)
    if cfg.closure == "threshold_grass":
        u_ref = reference_discharge(cfg) / cfg.h_ref
        return ThresholdGrass.from_reference(cfg.A_g, cfg.m, cfg.psi_u, u_ref, cfg.h_ref)
    if cfg.closure == "counter_flux":
        return CounterFlux()
    return Frozen()


def _parse_boundary(text: str, cfg: RunConfig, side: str):
    name, _, arg = text.partition(":")
    vals = [float(v) for v in arg.split(",") if v.strip()] if arg else []
    key = f"bc_{side}"
    try:
        if name == "transmissive":
            return Transmissive()
        if name == "reflective":
            return Reflective()
        if name == "periodic":
            return Periodic()
        if name == "inflow_discharge":
            return InflowDischarge(vals[0] if vals else reference_discharge(cfg))
        if name == "inflow_state":
            h, q = vals if vals else (cfg.h_ref, reference_discharge(cfg))
            return InflowState(h, q)
        if name == "fixed_depth":
            return FixedDepth(vals[0] if vals else cfg.h_out)
    except ValueError:
        raise ConfigError(f"{key}: bad boundary arguments {arg!r}", key) from None
    raise ConfigError(f"{key}: unknown boundary {name!r}", key)


def build_boundaries(cfg: RunConfig) -> BoundarySpec:
    left, right = cfg.bc_left, cfg.bc_right
    if cfg.initial == "small_hump":
        # characteristic counting: two inflow conditions when supercritical
        if left == "auto":
            left = "inflow_state" if cfg.froude > 1 else "inflow_discharge"
        if right == "auto":
            right = "transmissive" if cfg.froude > 1 else f"fixed_depth:{cfg.h_ref}"
    try:
        return BoundarySpec(_parse_boundary(left, cfg, "left"), _parse_boundary(right, cfg, "right"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "bc_left") from None


def build_initial(cfg: RunConfig) -> FieldState:
    """Initial field; small-hump spin-up to a fixed-bed steady state happens in the driver."""
    ng, dx, x = cfg.n_ghost, cfg.dx, cell_centres(cfg)
    if cfg.initial == "lake_at_rest":
        eta = hump(x, cfg.eta_max)
        h = cfg.H0 - eta
        if np.any(h <= 0):
            raise ConfigError("H0 must exceed the bed everywhere", "H0")
        return FieldState.from_interior(h, np.zeros_like(h), eta, dx, cfg.x_left, ng)
    if cfg.initial == "manufactured":
        h, q, eta = manufactured_cell_averages(cfg.x_left, dx, cfg.M, 0.0)
        return FieldState.from_interior(h, q, eta, dx, cfg.x_left, ng)
    if cfg.initial == "riemann":
        left = x < cfg.x_split
        cols = [np.where(left, a, b) for a, b in zip(cfg.left_state, cfg.right_state)]
        if np.any(cols[0] <= 0):
            raise ConfigError("Riemann depths must be positive", "left_state")
        return FieldState.from_interior(*cols, dx, cfg.x_left, ng)
    try:
        if cfg.initial == "backwater":
            return backwater_profile(cfg.q_in, cfg.h_out, hump(x, cfg.eta_max), dx,
                                     cfg.x_left, cfg.g, ng)
        q = reference_discharge(cfg)
        eta = hump(x, cfg.eta_max)
        if cfg.froude > 1:
            return supercritical_profile(q, cfg.h_ref, eta, dx, cfg.x_left, cfg.g, ng)
        return backwater_profile(q, cfg.h_ref, eta, dx, cfg.x_left, cfg.g, ng)
    except UnsupportedInput as exc:
        raise ConfigError(f"initial profile: {exc}", "initial") from None
