"""Benchmark registry: meshes, initial data, boundary conditions and exact
solutions for the built-in test problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import RunConfig, ConfigError
from .mesh import Mesh, structured_rect
from .models import Euler, make_model


@dataclass
class Benchmark:
    id: str
    model: object
    mesh: Mesh
    u0: Callable[[np.ndarray], np.ndarray]            # x (N, 2) -> (N, m)
    bc: Optional[Callable] = None                     # see assembly.boundary_terms
    exact: Optional[Callable] = None                  # (x, t) -> (N, m)
    t_end: float = 1.0
    periodic: bool = True


def _cells(h: float, length: float) -> int:
    return max(1, round(length / h))


def moving_shock_state(model: Euler, mach: float, rho1: float, p1: float,
                       direction: np.ndarray) -> np.ndarray:
    """Post-shock conserved state behind a shock moving with the given Mach
    number into quiescent gas (rho1, p1, v=0), from the Rankine-Hugoniot
    jump conditions. ``direction`` is the unit shock-propagation direction."""
    g = model.gamma
    c1 = np.sqrt(g * p1 / rho1)
    m2 = mach * mach
    rho2 = rho1 * (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0)
    p2 = p1 * (2.0 * g * m2 - (g - 1.0)) / (g + 1.0)
    vn = 2.0 * (m2 - 1.0) / ((g + 1.0) * mach) * c1
    v = vn * np.asarray(direction, dtype=float)
    return model.conserved(rho2, v, p2)


def _gaussian(x: np.ndarray, center=(0.5, 0.5), sigma: float = 0.15) -> np.ndarray:
    r2 = (x[..., 0] - center[0]) ** 2 + (x[..., 1] - center[1]) ** 2
    return np.exp(-0.5 * r2 / sigma ** 2)[..., None]


def _wrap_unit(x: np.ndarray) -> np.ndarray:
    return x - np.floor(x)


def make_benchmark(cfg: RunConfig, mesh: Optional[Mesh] = None) -> Benchmark:
    """Instantiate a registered benchmark, honoring config overrides for the
    model, velocity field and resolution."""
    name = cfg.benchmark
    maker = _REGISTRY.get(name)
    if maker is None:
        raise ConfigError(f"unknown benchmark {name!r}")
    return maker(cfg, mesh)


def _advection_model(cfg: RunConfig):
    vel = cfg.velocity or "translation"
    if vel == "translation":
        return make_model("advection", velocity=vel, vx=cfg.vx, vy=cfg.vy)
    return make_model("advection", velocity=vel)


def _bench_constant(cfg: RunConfig, mesh: Optional[Mesh]) -> Benchmark:
    model_name = cfg.model or "advection"
    model = _advection_model(cfg) if model_name == "advection" \
        else make_model(model_name, gamma=cfg.gamma)
    h = cfg.h or 1 / 16
    if mesh is None:
        n = _cells(h, 1.0)
        mesh = structured_rect(n, n, periodic=True)

    if model.m == 1:
        def u0(x):
            return np.ones(x.shape[:-1] + (1,))
    else:
        state = model.conserved(1.0, [0.3, -0.2], 1.0)

        def u0(x):
            return np.broadcast_to(state, x.shape[:-1] + (4,)).copy()

    def exact(x, t):
        return u0(x)

    return Benchmark(id="constant", model=model, mesh=mesh, u0=u0,
                     exact=exact, t_end=cfg.t_end or 1.0, periodic=True)


def _bench_advected_gaussian(cfg: RunConfig, mesh: Optional[Mesh]) -> Benchmark:
    vel = cfg.velocity or "translation"
    model = _advection_model(cfg)
    h = cfg.h or 1 / 32
    if mesh is None:
        n = _cells(h, 1.0)
        mesh = structured_rect(n, n, periodic=True)

    def u0(x):
        return _gaussian(x)

    exact = None
    if vel == "translation":
        v = np.array([cfg.vx, cfg.vy])

        def exact(x, t):
            return u0(_wrap_unit(x - v * t))
    elif vel == "rotation":
        def exact(x, t):
            ang = -2.0 * np.pi * t
            c, s = np.cos(ang), np.sin(ang)
            dx = x - 0.5
            back = np.stack([c * dx[..., 0] - s * dx[..., 1],
                             s * dx[..., 0] + c * dx[..., 1]], axis=-1) + 0.5
            return u0(back)

    return Benchmark(id="advected_gaussian", model=model, mesh=mesh, u0=u0,
                     exact=exact, t_end=cfg.t_end or 1.0, periodic=True)


def _bench_solid_body_rotation(cfg: RunConfig, mesh: Optional[Mesh]) -> Benchmark:
    model = make_model("advection", velocity="rotation")
    h = cfg.h or 1 / 32
    if mesh is None:
        n = _cells(h, 1.0)
        mesh = structured_rect(n, n, periodic=False)

    if cfg.body == "smooth":
        def u0(x):
            r = np.sqrt((x[..., 0] - 0.5) ** 2 + (x[..., 1] - 0.75) ** 2)
            val = np.where(r < 0.15, 0.5 * (1.0 + np.cos(np.pi * r / 0.15)), 0.0)
            return val[..., None]
    else:
        def u0(x):
            dx = x[..., 0] - 0.5
            dy = x[..., 1] - 0.75
            inside = (dx ** 2 + dy ** 2 < 0.15 ** 2)
            slot = (np.abs(dx) < 0.025) & (x[..., 1] < 0.85)
            return (inside & ~slot).astype(float)[..., None]

    def exact(x, t):
        ang = -2.0 * np.pi * t
        c, s = np.cos(ang), np.sin(ang)
        dx = x - 0.5
        back = np.stack([c * dx[..., 0] - s * dx[..., 1],
                         s * dx[..., 0] + c * dx[..., 1]], axis=-1) + 0.5
        return u0(back)

    velocity = model.velocity

    def bc(x, t, u_in, nhat, tags):
        # zero inflow, copy at outflow
        inflow = np.sum(velocity(x) * nhat, axis=-1) < 0.0
        return np.where(inflow[:, None], 0.0, u_in)

    return Benchmark(id="solid_body_rotation", model=model, mesh=mesh, u0=u0,
                     bc=bc, exact=exact, t_end=cfg.t_end or 1.0, periodic=False)


def _bench_burgers_riemann(cfg: RunConfig, mesh: Optional[Mesh]) -> Benchmark:
    model = make_model("burgers")
    h = cfg.h or 1 / 32
    if mesh is None:
        n = _cells(h, 1.0)
        mesh = structured_rect(n, n, periodic=True)

    def u0(x):
        inside = ((np.abs(x[..., 0] - 0.5) < 0.25)
                  & (np.abs(x[..., 1] - 0.5) < 0.25))
        return np.where(inside, 0.8, -0.2)[..., None]

    return Benchmark(id="burgers_riemann", model=model, mesh=mesh, u0=u0,
                     t_end=cfg.t_end or 0.5, periodic=True)


# Double Mach reflection: Mach-10 shock at 60 degrees over a reflecting wall
# starting at x = 1/6 (Woodward-Colella configuration).
_DMR_X0 = 1.0 / 6.0
_DMR_MACH = 10.0
_DMR_RHO1 = 1.4
_DMR_P1 = 1.0
_SQRT3 = np.sqrt(3.0)


def dmr_states(model: Euler):
    pre = model.conserved(_DMR_RHO1, [0.0, 0.0], _DMR_P1)
    direction = np.array([_SQRT3 / 2.0, -0.5])    # unit normal of the 60-deg front
    post = moving_shock_state(model, _DMR_MACH, _DMR_RHO1, _DMR_P1, direction)
    return pre, post


def dmr_shock_indicator(x: np.ndarray, t: float) -> np.ndarray:
    """True where (x, y) is still ahead (pre-shock) of the moving front."""
    # front: (sqrt3/2) x - y/2 = sqrt3/12 + 10 t
    return (_SQRT3 / 2.0) * x[..., 0] - 0.5 * x[..., 1] > _SQRT3 * _DMR_X0 / 2.0 \
        + 10.0 * t


def _bench_dmr(cfg: RunConfig, mesh: Optional[Mesh]) -> Benchmark:
    model = Euler(gamma=cfg.gamma)
    pre, post = dmr_states(model)
    h = cfg.h or 1 / 32
    if mesh is None:
        mesh = structured_rect(_cells(h, 4.0), _cells(h, 1.0),
                               0.0, 4.0, 0.0, 1.0, periodic=False)

    def u0(x):
        ahead = dmr_shock_indicator(x, 0.0)
        return np.where(ahead[..., None], pre, post)

    def bc(x, t, u_in, nhat, tags):
        u_ext = u_in.copy()
        left = x[:, 0] <= 0.0 + 1e-12
        bottom = x[:, 1] <= 0.0 + 1e-12
        top = x[:, 1] >= 1.0 - 1e-12
        inflow_bottom = bottom & (x[:, 0] < _DMR_X0)
        wall = bottom & ~inflow_bottom
        u_ext[left | inflow_bottom] = post
        if top.any():
            ahead = dmr_shock_indicator(x[top], t)
            u_ext[top] = np.where(ahead[:, None], pre, post)
        if wall.any():
            # mirror the momentum about the wall normal
            mom = u_in[wall, 1:3]
            n = nhat[wall]
            u_ext[wall, 1:3] = mom - 2.0 * np.sum(mom * n, axis=-1,
                                                  keepdims=True) * n
        # right edge keeps u_ext = u_in (outflow)
        return u_ext

    return Benchmark(id="dmr", model=model, mesh=mesh, u0=u0, bc=bc,
                     t_end=cfg.t_end or 0.2, periodic=False)


_REGISTRY = {
    "constant": _bench_constant,
    "advected_gaussian": _bench_advected_gaussian,
    "solid_body_rotation": _bench_solid_body_rotation,
    "burgers_riemann": _bench_burgers_riemann,
    "dmr": _bench_dmr,
}

BENCHMARK_IDS = tuple(sorted(_REGISTRY))
