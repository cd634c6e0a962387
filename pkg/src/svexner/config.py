"""Run configuration: a flat key=value schema shared by files, presets and flags.

A config file holds one ``key = value`` per line; ``#`` starts a comment.
Lists are comma separated. Resolution order is preset, then file, then
command-line flags, each layer overriding the previous one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .model import G
from .pressure_riemann import STAR_SOLVERS

log = logging.getLogger(__name__)

CLOSURES = ("grass", "threshold_grass", "counter_flux", "frozen")
INITIALS = ("riemann", "lake_at_rest", "manufactured", "backwater", "small_hump")
SCHEMES = ("splitting", "centered")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


def _opt_int(text: str):
    return None if text.strip().lower() in ("", "none") else int(text)


def _key(default, parse, required=False):
    return field(default=default, metadata={"parse": parse, "required": required})


@dataclass(frozen=True)
class RunConfig:
    preset: str | None = _key(None, str)
    initial: str | None = _key(None, str, required=True)
    scheme: str = _key("splitting", str)
    order: int = _key(1, int)
    reconstruction: str = _key("aeno", str)
    closure: str | None = _key(None, str, required=True)
    A_g: float = _key(0.01, float)
    m: float = _key(1.5, float)
    psi_u: float | None = _key(None, _opt_float)
    g: float = _key(G, float)
    cfl: float = _key(0.9, float)
    M: int | None = _key(None, _opt_int, required=True)
    x_left: float | None = _key(None, _opt_float, required=True)
    x_right: float | None = _key(None, _opt_float, required=True)
    t_final: float | None = _key(None, _opt_float, required=True)
    bc_left: str = _key("transmissive", str)
    bc_right: str = _key("transmissive", str)
    output_times: tuple = _key((), _floats)
    output_interval: float | None = _key(None, _opt_float)
    aeno_tol: float = _key(1e-4, float)
    aeno_eps: float = _key(1.0, float)
    star: str = _key("iterative", str)
    ngp: int = _key(1, int)
    out: str = _key("out", str)
    max_steps: int | None = _key(None, _opt_int)
    zero_slope_retry: bool = _key(False, _bool)
    plots: bool = _key(True, _bool)
    # initial-condition parameters
    left_state: tuple = _key((), _floats)
    right_state: tuple = _key((), _floats)
    x_split: float = _key(0.0, float)
    H0: float = _key(1.0, float)
    eta_max: float = _key(0.2, float)
    q_in: float | None = _key(None, _opt_float)
    h_out: float = _key(1.0, float)
    h_ref: float = _key(1.0, float)
    froude: float | None = _key(None, _opt_float)
    spin_up_max_steps: int = _key(20000, int)
    spin_up_tol: float = _key(1e-10, float)
    convergence_grids: tuple = _key((), _ints)

    @property
    def n_ghost(self) -> int:
        return 2 if self.order == 2 else 1

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.M

    def resolved_output_times(self) -> tuple:
        times = set(self.output_times)
        if self.output_interval:
            k = 1
            while k * self.output_interval < self.t_final * (1 - 1e-12):
                times.add(k * self.output_interval)
                k += 1
        times.add(self.t_final)
        return tuple(sorted(t for t in times if 0 <= t <= self.t_final))


KEYS = {f.name: f for f in fields(RunConfig)}
REQUIRED = tuple(name for name, f in KEYS.items() if f.metadata["required"])


def parse_value(key: str, text: str) -> Any:
    if key not in KEYS:
        raise ConfigError(f"unknown key {key!r}", key)
    try:
        return KEYS[key].metadata["parse"](text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}", key) from None


def parse_text(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def load_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return parse_text(text)


def _validate(cfg: RunConfig) -> None:
    missing = [k for k in REQUIRED if getattr(cfg, k) is None]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing), missing[0])

    def check(ok, key, msg):
        if not ok:
            raise ConfigError(f"{key}: {msg}", key)

    check(cfg.initial in INITIALS, "initial", f"must be one of {INITIALS}")
    check(cfg.closure in CLOSURES, "closure", f"must be one of {CLOSURES}")
    check(cfg.scheme in SCHEMES, "scheme", f"must be one of {SCHEMES}")
    check(cfg.order in (1, 2), "order", "must be 1 or 2")
    check(cfg.reconstruction == "aeno", "reconstruction",
          "only aeno is supported (eno is out of scope)")
    check(cfg.scheme == "splitting" or cfg.order == 1, "order",
          "the centered scheme is first order only")
    check(cfg.star in STAR_SOLVERS, "star", f"must be one of {STAR_SOLVERS}")
    check(cfg.ngp in (1, 2, 3), "ngp", "must be 1, 2 or 3")
    check(0 < cfg.cfl <= 1, "cfl", "must lie in (0, 1]")
    check(cfg.g > 0, "g", "must be positive")
    check(cfg.M >= 4 + 2 * cfg.n_ghost, "M", f"must be at least {4 + 2 * cfg.n_ghost}")
    check(cfg.x_right > cfg.x_left, "x_right", "must exceed x_left")
    check(cfg.t_final >= 0, "t_final", "must be non-negative")
    check(cfg.aeno_tol > 0 and cfg.aeno_eps > 0, "aeno_eps", "AENO parameters must be positive")
    check(cfg.max_steps is None or cfg.max_steps > 0, "max_steps", "must be positive")
    check(cfg.output_interval is None or cfg.output_interval > 0, "output_interval",
          "must be positive")
    check(all(t >= 0 for t in cfg.output_times), "output_times", "must be non-negative")
    if cfg.closure == "threshold_grass":
        check(cfg.psi_u is not None and cfg.psi_u > 0, "psi_u", "threshold_grass needs psi_u > 0")
    if cfg.closure in ("grass", "threshold_grass"):
        check(cfg.A_g >= 0 and cfg.m > 1, "m", "Grass needs A_g >= 0 and m > 1")
    if cfg.initial == "riemann":
        check(len(cfg.left_state) == 3, "left_state", "needs three values h,q,eta")
        check(len(cfg.right_state) == 3, "right_state", "needs three values h,q,eta")
    if cfg.initial == "backwater":
        check(cfg.q_in is not None, "q_in", "backwater needs q_in")
    if cfg.initial == "small_hump":
        check(cfg.froude is not None and cfg.froude > 0, "froude", "small_hump needs froude > 0")
    grids = cfg.convergence_grids
    if grids:
        check(cfg.initial == "manufactured", "convergence_grids",
              "only the manufactured problem has an exact solution")
        check(all(b == 2 * a for a, b in zip(grids, grids[1:])), "convergence_grids",
              "each grid must double the previous one")


def resolve(*layers: Mapping[str, Any]) -> RunConfig:
    """Merge layers (later wins) on top of the named preset and validate."""
    from .presets import PRESETS

    merged: dict = {}
    for layer in layers:
        for k, v in layer.items():
            if k not in KEYS:
                raise ConfigError(f"unknown key {k!r}", k)
            if v is not None:
                merged[k] = v
    base: dict = {}
    name = merged.get("preset")
    if name is not None:
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "preset")
        base = dict(PRESETS[name])
        # an explicit grid on a ladder preset selects that single grid
        if "M" in merged and "convergence_grids" not in merged:
            base.pop("convergence_grids", None)
    cfg = replace(RunConfig(), **{**base, **merged})
    if cfg.M is None and cfg.convergence_grids:
        cfg = replace(cfg, M=cfg.convergence_grids[-1])
    _validate(cfg)
    for f in fields(RunConfig):
        log.debug("config %s = %r", f.name, getattr(cfg, f.name))
    return cfg
