"""Flat ``key = value`` run configuration with strict validation."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Optional


class ConfigError(Exception):
    pass


_LIMITERS = ("none", "low", "fct.scale", "fct.cs", "mcl.scale", "mcl.cs")
_ENUMS = {
    "model": ("advection", "burgers", "euler"),
    "velocity": ("translation", "rotation"),
    "limiter": _LIMITERS,
    "system_limiter": ("sequential", "synchronized"),
    "idp_fix": ("bisection",),
    "bounds": ("auto", "barstate", "stencil"),
    "rs_operator": ("clip", "scale"),
    "rk": ("euler", "ssp2", "ssp3"),
    "benchmark": ("constant", "advected_gaussian", "solid_body_rotation",
                  "burgers_riemann", "dmr"),
    "body": ("smooth", "slotted"),
}


@dataclass
class RunConfig:
    benchmark: str = "constant"
    mesh: Optional[str] = None           # mesh file path; None -> generated
    h: Optional[float] = None            # target cell size for generated meshes
    model: Optional[str] = None          # None -> benchmark default
    gamma: float = 1.4
    velocity: Optional[str] = None
    vx: float = 1.0
    vy: float = 1.0
    body: str = "smooth"
    limiter: str = "mcl.cs"
    system_limiter: str = "sequential"
    idp_fix: str = "bisection"
    bounds: str = "auto"
    rs_operator: str = "clip"
    cfl: float = 0.5
    t_end: Optional[float] = None        # None -> benchmark default
    rk: str = "ssp2"
    dt_max: Optional[float] = None
    out: str = "out"
    output_every_t: Optional[float] = None
    audit_every: int = 1
    audit_bound_tol: float = 1e-10
    audit_cons_tol: float = 1e-10
    seed: int = 0

    def effective_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_FLOAT_KEYS = {"h", "gamma", "vx", "vy", "cfl", "t_end", "dt_max",
               "output_every_t", "audit_bound_tol", "audit_cons_tol"}
_INT_KEYS = {"audit_every", "seed"}
_STR_KEYS = {"mesh", "out"}


def parse_config(text: str) -> RunConfig:
    """Parse and validate the flat configuration format.

    Unknown keys and malformed or out-of-range values are hard errors.
    """
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {ln}: expected 'key = value', got {body!r}")
        key, _, val = body.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in known:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        if not val:
            raise ConfigError(f"line {ln}: empty value for {key!r}")
        if key in _ENUMS:
            if val not in _ENUMS[key]:
                raise ConfigError(
                    f"line {ln}: invalid {key} = {val!r}; "
                    f"valid values: {', '.join(_ENUMS[key])}")
            values[key] = val
        elif key in _FLOAT_KEYS:
            try:
                values[key] = float(eval_fraction(val))
            except ValueError:
                raise ConfigError(f"line {ln}: bad number {val!r} for {key}") from None
        elif key in _INT_KEYS:
            try:
                values[key] = int(val)
            except ValueError:
                raise ConfigError(f"line {ln}: bad integer {val!r} for {key}") from None
        elif key in _STR_KEYS:
            values[key] = val
        else:
            raise ConfigError(f"line {ln}: key {key!r} is not settable")

    cfg = RunConfig(**values)
    if not 0.0 < cfg.cfl <= 1.0:
        raise ConfigError("cfl must lie in (0, 1]")
    if cfg.gamma <= 1.0:
        raise ConfigError("gamma must exceed 1")
    if cfg.h is not None and cfg.h <= 0:
        raise ConfigError("h must be positive")
    if cfg.audit_every < 0:
        raise ConfigError("audit_every must be >= 0")
    return cfg


def eval_fraction(val: str) -> float:
    """Accept plain floats and simple fractions like ``1/32``."""
    if "/" in val:
        num, _, den = val.partition("/")
        return float(num) / float(den)
    return float(val)
