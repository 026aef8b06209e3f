"""End-to-end run loop: configuration -> benchmark -> time loop -> artifacts."""

from __future__ import annotations

import pathlib
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .benchmarks import Benchmark, make_benchmark
from .config import RunConfig
from .diagnostics import AuditError, StepReport, audit_step, csv_header, error_norms
from .limiting import LimiterConfig
from .mesh import MeshSystem, build_system, read_mesh
from .schemes import SpatialScheme
from .timestepping import TimeControls, compute_dt, ssp_rk_step


@dataclass
class RunResult:
    u: np.ndarray
    t: float
    steps: int
    wall_time: float
    ms: MeshSystem
    model: object
    bench: Benchmark
    norms: Optional[dict]
    reports: list


def setup(cfg: RunConfig):
    """Build benchmark, mesh system and the configured spatial scheme."""
    mesh = None
    if cfg.mesh is not None:
        mesh = read_mesh(pathlib.Path(cfg.mesh).read_text())
    bench = make_benchmark(cfg, mesh)
    ms = build_system(bench.mesh)
    model = bench.model
    u0 = np.asarray(bench.u0(ms.dof_coords), dtype=float)
    model.set_global_bounds(u0)
    lcfg = LimiterConfig(system=cfg.system_limiter, bounds=cfg.bounds,
                         rs_operator=cfg.rs_operator, idp=cfg.idp_fix)
    scheme = SpatialScheme(ms=ms, model=model, limiter=cfg.limiter,
                           lcfg=lcfg, bc=bench.bc)
    return bench, ms, model, scheme, u0


def _global_bounds(model, m: int):
    if m != 1:
        return None
    return [(np.array(model.u_min), np.array(model.u_max))]


def run(cfg: RunConfig, out_dir=None, quiet: bool = True) -> RunResult:
    """Execute the configured run and write VTK, CSV and summary artifacts."""
    from .vtk_io import write_vtk

    out = pathlib.Path(out_dir if out_dir is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(cfg.effective_text())

    bench, ms, model, scheme, u = setup(cfg)
    t_end = cfg.t_end if cfg.t_end is not None else bench.t_end
    controls = TimeControls(cfl=cfg.cfl, t_end=t_end, scheme=cfg.rk,
                            dt_max=cfg.dt_max)

    totals0 = (ms.lumped_mass[:, None] * u).sum(axis=0)
    gbounds = _global_bounds(model, model.m)
    # The unlimited Galerkin scheme makes no invariant-domain claim, so its
    # bound violations are recorded but not fatal.
    idp_claim = cfg.limiter != "none"

    csv_path = out / "diagnostics.csv"
    csv_lines = [csv_header(model.m)]
    reports: list[StepReport] = []

    def audit(t, dt):
        bounds = None
        if gbounds is not None and idp_claim:
            lo, hi = gbounds[0]
            bounds = [(np.full(ms.n_dofs, lo), np.full(ms.n_dofs, hi))]
        report = audit_step(
            ms, model, u, t, dt, bounds=bounds,
            alpha=scheme.last_alpha,
            bound_tol=cfg.audit_bound_tol,
            conservation_ref=totals0 if bench.periodic else None,
            conservation_tol=cfg.audit_cons_tol,
            check_admissibility=idp_claim)
        reports.append(report)
        csv_lines.append(report.csv_row())

    snap = 0

    def snapshot():
        nonlocal snap
        write_vtk(out / f"state_{snap:06d}.vtk", ms, u, model)
        snap += 1

    t0_wall = time.perf_counter()
    t = 0.0
    step = 0
    audit(t, 0.0)
    snapshot()
    next_out = cfg.output_every_t if cfg.output_every_t else None

    stage = scheme.stage_map()
    while t < t_end - 1e-14 * max(t_end, 1.0):
        dt = compute_dt(scheme.dt_bound(u, t), controls.cfl, t, t_end,
                        controls.dt_max)
        u = ssp_rk_step(controls.scheme, stage, u, t, dt)
        t += dt
        step += 1
        if idp_claim and not np.all(model.admissible(u, cfg.audit_bound_tol)):
            raise AuditError(f"inadmissible state after step {step}, t = {t:g}")
        if cfg.audit_every and step % cfg.audit_every == 0:
            audit(t, dt)
        if next_out is not None and t >= next_out - 1e-14:
            snapshot()
            next_out += cfg.output_every_t
        if not quiet and step % 50 == 0:
            print(f"step {step:6d}  t = {t:.6f}  dt = {dt:.3e}")
    wall = time.perf_counter() - t0_wall

    snapshot()
    csv_path.write_text("\n".join(csv_lines) + "\n")

    norms = None
    if bench.exact is not None:
        norms = error_norms(ms, u, bench.exact, t)

    summary = [
        f"benchmark = {bench.id}",
        f"limiter = {cfg.limiter}",
        f"steps = {step}",
        f"t_final = {t:.17g}",
        f"wall_time_s = {wall:.3f}",
    ]
    if norms is not None:
        for key in ("l1", "l2", "linf"):
            summary.append(f"{key} = " + " ".join(f"{v:.6e}" for v in norms[key]))
    (out / "summary.txt").write_text("\n".join(summary) + "\n")

    return RunResult(u=u, t=t, steps=step, wall_time=wall, ms=ms, model=model,
                     bench=bench, norms=norms, reports=reports)
