"""Auditing and diagnostics: invariant checks per step, residual-distribution
weights, error norms and the CSV trace.

Audits recompute everything from the state; they never read scheme internals,
so running them cannot perturb the solver trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .mesh import MeshSystem


class AuditError(Exception):
    pass


@dataclass
class RdWeights:
    r_plus: np.ndarray            # (E, m)
    r_minus: np.ndarray           # (E, m)
    beta_plus: np.ndarray         # (E, 3, m)
    beta_minus: np.ndarray        # (E, 3, m)


def rd_weights(residuals: np.ndarray) -> RdWeights:
    """Signed-fluctuation decomposition of per-element nodal residuals.

    residuals: (..., 3) or (..., 3, m). beta_{i,+} = max(0, r_i)/r_+ when
    r_+ > 0, else 0; reconstruction beta_{i,+-} r_+- recovers r_i exactly.
    """
    r = np.asarray(residuals, dtype=float)
    if r.shape[-1] == 3:
        r = r[..., None]          # promote scalars to m = 1
    elif r.ndim < 2 or r.shape[-2] != 3:
        raise ValueError("residuals must have a local-node axis of length 3")
    pos = np.maximum(r, 0.0)
    neg = np.minimum(r, 0.0)
    r_plus = pos.sum(axis=-2)
    r_minus = neg.sum(axis=-2)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta_plus = np.where(r_plus[..., None, :] > 0,
                             pos / r_plus[..., None, :], 0.0)
        beta_minus = np.where(r_minus[..., None, :] < 0,
                              neg / r_minus[..., None, :], 0.0)
    return RdWeights(r_plus=r_plus, r_minus=r_minus,
                     beta_plus=beta_plus, beta_minus=beta_minus)


@dataclass
class StepReport:
    t: float
    dt: float
    comp_min: np.ndarray
    comp_max: np.ndarray
    totals: np.ndarray            # sum_i m_i u_i per component
    bound_violation: float
    bound_node: int
    zerosum_defect: float
    zerosum_element: int
    admissible: bool
    alpha_mean: float
    alpha_min: float

    def csv_row(self) -> str:
        vals = [self.t, self.dt, *self.comp_min, *self.comp_max, *self.totals,
                self.bound_violation, self.zerosum_defect, self.alpha_mean]
        return ",".join(f"{v:.17g}" for v in vals)


def csv_header(m: int) -> str:
    cols = ["t", "dt"]
    cols += [f"min_u{k}" for k in range(m)]
    cols += [f"max_u{k}" for k in range(m)]
    cols += [f"total_u{k}" for k in range(m)]
    cols += ["bound_violation", "zerosum_defect", "alpha_mean"]
    return ",".join(cols)


def audit_step(ms: MeshSystem, model, u: np.ndarray, t: float, dt: float,
               bounds: Optional[list] = None,
               f_star: Optional[np.ndarray] = None,
               alpha: Optional[np.ndarray] = None,
               bound_tol: float = 1e-10,
               conservation_ref: Optional[np.ndarray] = None,
               conservation_tol: float = 1e-10,
               raise_on_failure: bool = True,
               check_admissibility: bool = True) -> StepReport:
    """Recompute all audited quantities from the state and optional context.

    ``bounds`` is a per-component list of per-DOF (lo, hi) to check the state
    against; ``f_star`` (E, 3, m) is checked for the per-element zero sum;
    ``conservation_ref`` triggers a relative drift check of the totals.
    """
    if not np.all(np.isfinite(u)):
        raise AuditError(f"non-finite state at t = {t:g}")
    totals = (ms.lumped_mass[:, None] * u).sum(axis=0)

    worst_violation = 0.0
    worst_node = -1
    if bounds is not None:
        for k, (lo, hi) in enumerate(bounds):
            over = np.maximum(u[:, k] - hi, lo - u[:, k])
            node = int(np.argmax(over))
            if over[node] > worst_violation:
                worst_violation = float(over[node])
                worst_node = node

    worst_zerosum = 0.0
    worst_elem = -1
    if f_star is not None and f_star.size:
        defect = np.abs(f_star.sum(axis=1)).max(axis=-1)
        worst_elem = int(np.argmax(defect))
        worst_zerosum = float(defect[worst_elem])

    admissible = bool(np.all(model.admissible(u, bound_tol)))

    alpha_mean = float(np.mean(alpha)) if alpha is not None else float("nan")
    alpha_min = float(np.min(alpha)) if alpha is not None else float("nan")

    report = StepReport(t=t, dt=dt, comp_min=u.min(axis=0), comp_max=u.max(axis=0),
                        totals=totals, bound_violation=worst_violation,
                        bound_node=worst_node, zerosum_defect=worst_zerosum,
                        zerosum_element=worst_elem, admissible=admissible,
                        alpha_mean=alpha_mean, alpha_min=alpha_min)

    if raise_on_failure:
        if worst_violation > bound_tol:
            raise AuditError(
                f"bound violation {worst_violation:g} at node {worst_node}, t = {t:g}")
        if conservation_ref is not None:
            scale = np.maximum(np.abs(conservation_ref), 1e-300)
            drift = np.abs(totals - conservation_ref) / scale
            if drift.max() > conservation_tol:
                k = int(np.argmax(drift))
                raise AuditError(
                    f"conservation drift {drift[k]:g} in component {k}, t = {t:g}")
        if check_admissibility and not admissible:
            raise AuditError(f"inadmissible state at t = {t:g}")
    return report


def error_norms(ms: MeshSystem, u: np.ndarray,
                exact: Callable[[np.ndarray, float], np.ndarray],
                t: float) -> dict:
    """Lumped-mass L1/L2/Linf nodal error norms against an exact solution."""
    diff = np.abs(u - exact(ms.dof_coords, t))
    w = ms.lumped_mass[:, None]
    return {
        "l1": (w * diff).sum(axis=0),
        "l2": np.sqrt((w * diff ** 2).sum(axis=0)),
        "linf": diff.max(axis=0),
    }
