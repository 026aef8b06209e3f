"""Spatial schemes built from the element assembly and the limiters.

Four operators share one assembly pass:

* ``low``: element-based Rusanov method (forward set of bar states),
* ``none``: stabilized Galerkin (lumped derivative variant, unlimited),
* ``mcl.*``: monolithic convex limiting inserted into the semi-discrete RHS,
* ``fct.*``: two-stage predictor/corrector, applied per forward-Euler stage.

Semi-discrete operators expose ``rhs``; FCT exposes the full stage map
``step``. ``dt_bound`` yields the largest IDP-safe forward-Euler step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import assemble
from .limiting import (LimiterConfig, limit_scalar_contributions,
                       limit_system_contributions, local_bounds)
from .mesh import MeshSystem
from .models import TINY


class CFLError(Exception):
    """Raised when a step size violates the low-order CFL condition."""


SCHEME_KEYS = ("none", "low", "fct.scale", "fct.cs", "mcl.scale", "mcl.cs")


def parse_limiter_key(key: str):
    """Split a config limiter key into (driver, scalar limiter kind)."""
    if key in ("none", "low"):
        return key, None
    driver, _, kind = key.partition(".")
    if driver not in ("fct", "mcl") or kind not in ("scale", "cs"):
        raise ValueError(f"unknown limiter {key!r}; valid: {', '.join(SCHEME_KEYS)}")
    return driver, kind


def _scatter(ms: MeshSystem, contrib, bwork, shape):
    rhs = np.zeros(shape)
    np.add.at(rhs, ms.elem_dofs, contrib)
    if bwork is not None:
        rhs[bwork.dofs] += bwork.flux_term
    return rhs


def _component_bounds(ms: MeshSystem, field_dof, work, bwork, mode):
    """Per-DOF (lo, hi) for every conserved component."""
    m = field_dof.shape[-1]
    out = []
    for k in range(m):
        extra_dofs = bwork.dofs if bwork is not None else None
        extra_vals = bwork.bar_states[:, k] if bwork is not None else None
        out.append(local_bounds(ms, field_dof[:, k], work.bar_states[..., k],
                                mode, extra_dofs, extra_vals))
    return out


@dataclass
class SpatialScheme:
    """One configured spatial operator over a fixed mesh system."""

    ms: MeshSystem
    model: object
    limiter: str = "mcl.cs"
    lcfg: LimiterConfig = field(default_factory=LimiterConfig)
    bc: object = None             # callable or None (periodic / closed)
    last_alpha: np.ndarray | None = None
    last_bounds: list | None = None

    def __post_init__(self):
        self.driver, kind = parse_limiter_key(self.limiter)
        if kind is not None:
            self.lcfg.kind = kind

    @property
    def is_step_map(self) -> bool:
        return self.driver == "fct"

    def dt_bound(self, u: np.ndarray, t: float = 0.0) -> float:
        """max dt with 2 dt/m_i * sum_e d^e (+ boundary viscosity) <= 1."""
        work, bwork = assemble(self.ms, self.model, u, t, self.bc,
                               with_antidiffusion=False)
        return self._dt_from_work(work, bwork)

    def _dt_from_work(self, work, bwork) -> float:
        denom = np.zeros(self.ms.n_dofs)
        np.add.at(denom, self.ms.elem_dofs,
                  np.broadcast_to(2.0 * work.d[:, None], self.ms.elem_dofs.shape))
        if bwork is not None:
            denom[bwork.dofs] += bwork.visc
        if denom.max() <= 0.0:
            return np.inf
        mask = denom > 0
        return float((self.ms.lumped_mass[mask] / denom[mask]).min())

    # --- semi-discrete operators -----------------------------------------

    def rhs(self, u: np.ndarray, t: float = 0.0) -> np.ndarray:
        if self.driver == "low":
            work, bwork = assemble(self.ms, self.model, u, t, self.bc,
                                   with_antidiffusion=False)
            total = _scatter(self.ms, work.r_rusanov, bwork, u.shape)
            return total / self.ms.lumped_mass[:, None]
        if self.driver == "none":
            work, bwork = assemble(self.ms, self.model, u, t, self.bc)
            total = _scatter(self.ms, work.r_rusanov + work.f_anti, bwork, u.shape)
            return total / self.ms.lumped_mass[:, None]
        if self.driver == "mcl":
            return self._mcl_rhs(u, t)
        raise ValueError(f"{self.limiter!r} is not a semi-discrete scheme")

    def _mcl_rhs(self, u: np.ndarray, t: float) -> np.ndarray:
        ms = self.ms
        work, bwork = assemble(ms, self.model, u, t, self.bc)
        gamma = 2.0 * np.maximum(work.d, TINY)[:, None] * np.ones((1, 3))
        active = work.d > 0
        f_in = np.where(active[:, None, None], work.f_anti, 0.0)

        mode = self.lcfg.bounds_mode("mcl")
        bounds = _component_bounds(ms, u, work, bwork, mode)
        self.last_bounds = bounds
        if self.model.m == 1:
            lo, hi = bounds[0]
            res = limit_scalar_contributions(ms, f_in[..., 0],
                                             work.bar_states[..., 0], gamma,
                                             lo, hi, self.lcfg)
            f_star = res.f_star[..., None]
        else:
            res = limit_system_contributions(ms, self.model, f_in,
                                             work.bar_states, gamma, bounds,
                                             self.lcfg)
            f_star = res.f_star
        f_star = np.where(active[:, None, None], f_star, 0.0)
        self.last_alpha = res.alpha
        total = _scatter(ms, work.r_rusanov + f_star, bwork, u.shape)
        return total / ms.lumped_mass[:, None]

    # --- FCT stage map ----------------------------------------------------

    def step(self, u: np.ndarray, t: float, dt: float) -> np.ndarray:
        """One full forward-Euler stage of the FCT scheme."""
        if self.driver != "fct":
            raise ValueError(f"{self.limiter!r} has no two-stage step map")
        ms = self.ms
        work, bwork = assemble(ms, self.model, u, t, self.bc)
        if dt > self._dt_from_work(work, bwork) * (1.0 + 1e-9):
            raise CFLError(f"dt = {dt:g} violates the low-order CFL condition")

        low = _scatter(ms, work.r_rusanov, bwork, u.shape)
        u_low = u + dt * low / ms.lumped_mass[:, None]

        gamma = np.broadcast_to((ms.geometry.m_elem / dt)[:, None], (ms.n_elements, 3))
        base = u_low[ms.elem_dofs]
        mode = self.lcfg.bounds_mode("fct")
        # For barstate bounds the reference must cover both u and u_low, so
        # lo and hi come from separate passes over the pointwise min/max.
        if mode == "barstate":
            bounds = []
            for k in range(u.shape[-1]):
                extra_dofs = bwork.dofs if bwork is not None else None
                extra_vals = bwork.bar_states[:, k] if bwork is not None else None
                lo, _ = local_bounds(ms, np.minimum(u, u_low)[:, k],
                                     work.bar_states[..., k], mode,
                                     extra_dofs, extra_vals)
                _, hi = local_bounds(ms, np.maximum(u, u_low)[:, k],
                                     work.bar_states[..., k], mode,
                                     extra_dofs, extra_vals)
                bounds.append((lo, hi))
        else:
            bounds = _component_bounds(ms, u_low, work, bwork, mode)
        self.last_bounds = bounds

        if self.model.m == 1:
            lo, hi = bounds[0]
            res = limit_scalar_contributions(ms, work.f_anti[..., 0],
                                             base[..., 0], gamma, lo, hi,
                                             self.lcfg)
            f_star = res.f_star[..., None]
        else:
            res = limit_system_contributions(ms, self.model, work.f_anti,
                                             base, gamma, bounds, self.lcfg)
            f_star = res.f_star
        self.last_alpha = res.alpha
        corr = _scatter(ms, f_star, None, u.shape)
        return u_low + dt * corr / ms.lumped_mass[:, None]

    def stage_map(self):
        """Forward-Euler stage map usable by the SSP integrators."""
        if self.is_step_map:
            return self.step

        def fe(u, t, dt):
            return u + dt * self.rhs(u, t)

        return fe
