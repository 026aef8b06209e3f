"""Flux models: linear advection, 2D Burgers and the compressible Euler system.

Each model provides the flux tensor f(u), a guaranteed directional wave-speed
bound for Riemann data, and admissibility checks against its convex invariant
set. All functions are vectorized over leading axes and pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class AdmissibilityError(Exception):
    """Raised when a state required to be admissible is not."""


# Division guard: magnitudes below this are treated as exactly zero.
TINY = 1e-300


@dataclass
class LinearAdvection:
    """Scalar transport with a (possibly position-dependent) velocity field.

    ``velocity(x)`` maps (..., 2) positions to (..., 2) velocities; the
    default is uniform translation. The invariant set is the global interval
    [u_min, u_max], normally set from the initial condition.
    """

    velocity: Callable[[np.ndarray], np.ndarray] = None
    u_min: float = -np.inf
    u_max: float = np.inf
    m: int = 1
    kind: str = "linear_advection"

    def __post_init__(self):
        if self.velocity is None:
            v = np.array([1.0, 0.0])
            self.velocity = lambda x: np.broadcast_to(v, x.shape).copy()

    def flux(self, u: np.ndarray, x: np.ndarray) -> np.ndarray:
        """f(u) = v(x) u, returned as (..., m, 2)."""
        v = self.velocity(np.asarray(x, dtype=float))
        return u[..., :, None] * v[..., None, :]

    def max_wave_speed(self, ul, ur, n, x) -> np.ndarray:
        v = self.velocity(np.asarray(x, dtype=float))
        lam = np.abs(np.sum(v * n, axis=-1))
        return lam * np.ones(np.broadcast(ul[..., 0], lam).shape)

    def phi_values(self, u: np.ndarray) -> np.ndarray:
        """Quasi-concave constraint values; nonnegative iff admissible."""
        return np.stack([u[..., 0] - self.u_min, self.u_max - u[..., 0]], axis=-1)

    def admissible(self, u: np.ndarray, slack: float = 0.0) -> np.ndarray:
        return np.all(self.phi_values(u) >= -slack, axis=-1)

    def set_global_bounds(self, u0: np.ndarray) -> None:
        self.u_min = float(u0.min())
        self.u_max = float(u0.max())


@dataclass
class Burgers2D:
    """Scalar conservation law with convex flux f(u) = (u^2/2, u^2/2)."""

    u_min: float = -np.inf
    u_max: float = np.inf
    m: int = 1
    kind: str = "burgers_2d"

    def flux(self, u: np.ndarray, x: np.ndarray = None) -> np.ndarray:
        half = 0.5 * u[..., :] ** 2
        return np.stack([half, half], axis=-1)

    def max_wave_speed(self, ul, ur, n, x=None) -> np.ndarray:
        # Directional speed is u (n1 + n2); for convex flux the maximum over
        # the Riemann fan is attained at an endpoint of [min, max](ul, ur).
        s = np.abs(n[..., 0] + n[..., 1])
        return s * np.maximum(np.abs(ul[..., 0]), np.abs(ur[..., 0]))

    def phi_values(self, u: np.ndarray) -> np.ndarray:
        return np.stack([u[..., 0] - self.u_min, self.u_max - u[..., 0]], axis=-1)

    def admissible(self, u: np.ndarray, slack: float = 0.0) -> np.ndarray:
        return np.all(self.phi_values(u) >= -slack, axis=-1)

    def set_global_bounds(self, u0: np.ndarray) -> None:
        self.u_min = float(u0.min())
        self.u_max = float(u0.max())


@dataclass
class Euler:
    """Compressible Euler equations in 2D, conserved variables (rho, mx, my, E).

    The invariant set is {rho > 0, p > 0}, expressed through the quasi-concave
    functions rho and rho * e_int (internal energy density).
    """

    gamma: float = 1.4
    m: int = 4
    kind: str = "euler"

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError("Euler model requires gamma > 1")

    def primitives(self, u: np.ndarray):
        """Return (rho, v, p, c) with v of shape (..., 2)."""
        rho = u[..., 0]
        v = u[..., 1:3] / rho[..., None]
        p = self.pressure(u)
        c = np.sqrt(self.gamma * p / rho)
        return rho, v, p, c

    def pressure(self, u: np.ndarray) -> np.ndarray:
        rho = u[..., 0]
        kinetic = 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho
        return (self.gamma - 1.0) * (u[..., 3] - kinetic)

    def internal_energy_density(self, u: np.ndarray) -> np.ndarray:
        rho = u[..., 0]
        return u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho

    def conserved(self, rho, v, p) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        v = np.asarray(v, dtype=float)
        p = np.asarray(p, dtype=float)
        E = p / (self.gamma - 1.0) + 0.5 * rho * np.sum(v ** 2, axis=-1)
        return np.stack([rho, rho * v[..., 0], rho * v[..., 1], E], axis=-1)

    def flux(self, u: np.ndarray, x: np.ndarray = None) -> np.ndarray:
        rho = u[..., 0]
        if np.any(rho <= 0):
            raise AdmissibilityError("Euler flux evaluated at rho <= 0")
        v = u[..., 1:3] / rho[..., None]
        p = self.pressure(u)
        f = np.empty(u.shape + (2,))
        f[..., 0, :] = u[..., 1:3]
        f[..., 1, :] = u[..., 1, None] * v
        f[..., 1, 0] += p
        f[..., 2, :] = u[..., 2, None] * v
        f[..., 2, 1] += p
        f[..., 3, :] = (u[..., 3, None] + p[..., None]) * v
        return f

    def max_wave_speed(self, ul, ur, n, x=None) -> np.ndarray:
        # Simple Rusanov-type bound max(|v.n| + c) over the two states; the
        # estimator is deliberately swappable behind this method.
        _, vl, _, cl = self.primitives(ul)
        _, vr, _, cr = self.primitives(ur)
        sl = np.abs(np.sum(vl * n, axis=-1)) + cl
        sr = np.abs(np.sum(vr * n, axis=-1)) + cr
        return np.maximum(sl, sr)

    def phi_values(self, u: np.ndarray) -> np.ndarray:
        return np.stack([u[..., 0], self.internal_energy_density(u)], axis=-1)

    def admissible(self, u: np.ndarray, slack: float = 0.0) -> np.ndarray:
        return np.all(self.phi_values(u) >= -slack, axis=-1)

    def set_global_bounds(self, u0: np.ndarray) -> None:
        # Systems are constrained through phi_values, not a global interval.
        pass


def require_admissible(model, u: np.ndarray, slack: float = 0.0, what: str = "state"):
    ok = model.admissible(u, slack)
    if not np.all(ok):
        bad = int(np.argmin(np.asarray(ok).ravel()))
        raise AdmissibilityError(f"non-admissible {what} (first offender index {bad})")


# --- named velocity fields for advection benchmarks ----------------------

def translation_velocity(vx: float = 1.0, vy: float = 1.0):
    v = np.array([vx, vy])

    def field_fn(x):
        return np.broadcast_to(v, x.shape).copy()

    return field_fn


def rotation_velocity(cx: float = 0.5, cy: float = 0.5, omega: float = 2.0 * np.pi):
    """Rigid rotation about (cx, cy); one full turn takes 2*pi/omega."""

    def field_fn(x):
        out = np.empty_like(x, dtype=float)
        out[..., 0] = -omega * (x[..., 1] - cy)
        out[..., 1] = omega * (x[..., 0] - cx)
        return out

    return field_fn


VELOCITY_FIELDS = {
    "translation": translation_velocity,
    "rotation": rotation_velocity,
}


def make_model(name: str, gamma: float = 1.4,
               velocity: Optional[str] = None, **vparams):
    """Build a model from configuration keys."""
    if name == "advection":
        factory = VELOCITY_FIELDS.get(velocity or "translation")
        if factory is None:
            raise ValueError(
                f"unknown velocity field {velocity!r}; "
                f"valid: {sorted(VELOCITY_FIELDS)}")
        return LinearAdvection(velocity=factory(**vparams))
    if name == "burgers":
        return Burgers2D()
    if name == "euler":
        return Euler(gamma=gamma)
    raise ValueError(f"unknown model {name!r}; valid: advection, burgers, euler")
