"""Semi-discrete DG-P1 right-hand side, SSP-RK3 stepping and steady iteration."""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import entropy as ent
from .dgfield import DGField, taylor_mass
from .fluxes import CFLError, FaceSystem, cfl_max_dt, face_flux_P0, face_flux_P1
from .limiters import (LimiterConfig, apply_flux_limiter, local_bounds_cellavg,
                       slope_limit_dc, slope_limit_fcl, slope_limit_fcn, slope_limit_sc)
from .mesh import Mesh, StencilTable

SSP_WEIGHTS = ((0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0))


class DivergenceError(RuntimeError):
    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = history


@dataclass
class RunReport:
    steps: int = 0
    time: float = 0.0
    rhs_evals: int = 0
    umin: float = np.inf
    umax: float = -np.inf
    residuals: list = dc_field(default_factory=list)
    converged: bool = None
    wall: float = 0.0
    entropy_violation: float = -np.inf   # max over faces of residual/scale
    alpha_min: float = 1.0

    def track(self, avg):
        self.umin = min(self.umin, float(avg.min()))
        self.umax = max(self.umax, float(avg.max()))

    def summary(self):
        out = {"steps": self.steps, "time": self.time, "rhs_evals": self.rhs_evals,
               "min": self.umin, "max": self.umax, "wall_seconds": round(self.wall, 3)}
        if self.residuals:
            out["residual"] = self.residuals[-1]
            out["converged"] = self.converged
        if np.isfinite(self.entropy_violation):
            out["entropy_violation"] = self.entropy_violation
        return out


@dataclass
class StageWorkspace:
    """What one forward-Euler stage computed, kept for diagnostics."""

    limited: DGField
    rhs: np.ndarray
    alpha: np.ndarray
    UP0: np.ndarray
    umin: np.ndarray = None
    umax: np.ndarray = None
    nu: np.ndarray = None


class Solver:
    """DG-P1 discretization of one problem with one limiter configuration."""

    def __init__(self, mesh: Mesh, law, inflow=None, config: LimiterConfig = None, stencils=None):
        self.mesh = mesh
        self.law = law
        self.config = config or LimiterConfig()
        self.config.validate_for(law)
        self.system = FaceSystem(mesh, law, inflow)
        self.stencils = stencils if stencils is not None else StencilTable(mesh, self.config.stencil)
        self.mass = taylor_mass(mesh)
        pts, wts = mesh.cell_quadrature(2)
        self._vol_x = pts
        self._vol_w = wts
        self._vol_off = pts - mesh.centroid[:, None, :]
        self.diagnose_entropy = False
        self.last_stage = None
        self._p0 = None

    def low_order_faces(self, field: DGField):
        """P0 face data; slope limiting keeps the averages, so the last result is reused."""
        if self._p0 is not None and np.array_equal(self._p0[0], field.avg):
            return self._p0[1]
        lo = face_flux_P0(self.system, field)
        self._p0 = (field.avg.copy(), lo)
        return lo

    # -- slope limiting ------------------------------------------------------
    def slope_limit(self, field: DGField, dt) -> DGField:
        kind = self.config.slope_limiter
        if kind in ("none", "dc-m"):
            return field
        if kind == "p0":
            return field.scaled(0.0)
        if kind == "sc":
            return field.scaled(slope_limit_sc(self.mesh, field))
        if kind == "dc":
            return field.with_slopes(slope_limit_dc(self.system, field, self.stencils))
        lo = self.low_order_faces(field)
        UP0 = field.avg - dt / self.mesh.area * self.mesh.cell_sum(lo.H * self.mesh.length,
                                                                  -lo.H * self.mesh.length)
        umin, umax = local_bounds_cellavg(self.stencils, field.avg, self.system)
        if kind == "fc-l":
            beta = slope_limit_fcl(self.system, field, UP0, umin, umax, dt, lo=lo)
        else:
            lam = np.ones(self.mesh.n_faces) if getattr(self.law, "speed", None) == "global" else None
            beta = slope_limit_fcn(self.system, field, UP0, umin, umax, dt, lam_max=lam, lo=lo)
        return field.scaled(beta)

    # -- right-hand side -----------------------------------------------------
    def volume_term(self, field: DGField):
        off = self._vol_off
        c = field.coeffs
        u = c[0][:, None] + c[1][:, None] * off[..., 0] + c[2][:, None] * off[..., 1]
        f = self.law.flux(u, self._vol_x)
        wf = self._vol_w[..., None] * f
        return (((wf[:, 0] + wf[:, 1]) + wf[:, 2]) + wf[:, 3]).T

    def rhs(self, field: DGField, dt, alpha=None, check=True):
        """Moments R = M dU/dt of the limited scheme for an already slope-limited field.

        ``alpha`` overrides the flux-correction factors (diagnostics, tests).
        Returns (R, workspace).
        """
        mesh, system = self.mesh, self.system
        lo = self.low_order_faces(field)
        hi = face_flux_P1(system, field)
        cfg = self.config
        res = apply_flux_limiter(system, field, cfg.flux_limiter if alpha is None else "none", dt,
                                 self.stencils, lo=lo, hi=hi, check=check)
        a = res.alpha if alpha is None else np.broadcast_to(np.asarray(alpha, dtype=float), res.alpha.shape)
        if cfg.entropy:
            a = np.minimum(a, ent.entropy_alpha_cap(system, lo, res.F))
        Hq = a[:, None] * hi.Hq + (1.0 - a)[:, None] * lo.Hq
        SH = system.face_sum(Hq)
        R = np.empty((3, mesh.n_cells))
        R[0] = -mesh.cell_sum(SH, -SH)
        vol = self.volume_term(field)
        for k in (0, 1):
            own = system.face_sum(mesh.offset_owner[..., k] * Hq)
            nbr = system.face_sum(mesh.offset_neighbor[..., k] * Hq)
            R[k + 1] = vol[k] - mesh.cell_sum(own, -nbr)
        ws = StageWorkspace(field, R, a, res.UP0)
        ws.lo, ws.H_star = lo, SH / mesh.length
        return R, ws

    # -- one forward-Euler stage --------------------------------------------
    def stage(self, field: DGField, dt, limit_slopes=True):
        """Forward-Euler update; returns (new field, slope-limited input, workspace)."""
        limited = self.slope_limit(field, dt) if limit_slopes else field
        R, ws = self.rhs(limited, dt)
        mass = self.mass
        new = np.empty_like(limited.coeffs)
        new[0] = limited.avg + dt * R[0] / mass[0]
        num = limited.grad + dt * R[1:] / mass[1:]
        den = np.ones(self.mesh.n_cells)
        cfg = self.config
        if cfg.slope_limiter == "dc-m":
            target = slope_limit_dc(self.system, limited, self.stencils)
            num = num + cfg.gamma * dt * target
            den = den + cfg.gamma * dt
        if cfg.entropy:
            pair = self.law.entropy
            P = ent.entropy_production(pair, limited, R, mass)
            G = ent.entropy_face_flux(self.system, ws.lo, ws.H_star) * self.mesh.length
            Gsum = self.mesh.cell_sum(G, -G)
            D = ent.slope_dissipation_norm(pair, limited, mass)
            nu = ent.slope_penalty_rate(P, Gsum, D)
            den = den + nu * pair.dv(limited.avg) * dt
            ws.nu = nu
        new[1:] = num / den
        self.last_stage = ws
        return DGField(self.mesh, new), limited, ws

    # -- SSP-RK3 -------------------------------------------------------------
    def step(self, field: DGField, dt, report: RunReport = None):
        cfg = self.config
        per_stage = cfg.slope_cadence == "stage"
        u0 = field
        if not per_stage:
            u0 = self.slope_limit(field, dt)
        stage_in = u0
        base = None
        first = None
        for s, (a, b) in enumerate(SSP_WEIGHTS):
            out, limited, ws = self.stage(stage_in, dt, limit_slopes=per_stage)
            if s == 0:
                base = limited
                first = ws
            if report is not None:
                report.rhs_evals += 1
                report.track(out.avg)
                report.alpha_min = min(report.alpha_min, float(ws.alpha.min()))
                if self.diagnose_entropy and cfg.entropy:
                    r, scale = ent.entropy_condition_residual(self.system, ws.lo, ws.H_star)
                    report.entropy_violation = max(report.entropy_violation, float((r / scale).max()))
            if s == 0:
                stage_in = out
            else:
                stage_in = DGField(self.mesh, a * base.coeffs + b * out.coeffs)
            if report is not None and s > 0:
                report.track(stage_in.avg)
        if report is not None:
            report.steps += 1
        return stage_in, first

    def finalize(self, field: DGField, dt):
        """Apply the slope limiter once more so the returned field is limited."""
        if self.config.slope_limiter in ("none", "dc-m"):
            return field
        return self.slope_limit(field, dt)

    def max_dt(self, field: DGField, safety=0.9, dt_cap=np.inf):
        return cfl_max_dt(self.system, field, safety, dt_cap)


def semidiscrete_rhs(solver: Solver, field: DGField, dt=None, alpha=None):
    """Taylor-moment RHS of the (flux-limited) scheme for a given field."""
    if dt is None:
        dt = solver.max_dt(field, 1.0, 1.0)
    R, _ = solver.rhs(field, dt, alpha=alpha, check=False)
    return R


def ssprk3_step(solver: Solver, field: DGField, dt, report: RunReport = None):
    out, _ = solver.step(field, dt, report)
    return out


def _progress(stream, every, n, msg):
    if stream is not None and every and n % every == 0:
        print(msg, file=stream, flush=True)


def run_transient(solver: Solver, field: DGField, final_time, dt, progress=None, every=100):
    """Advance to ``final_time`` with fixed dt, shortening the last step."""
    report = RunReport()
    report.track(field.avg)
    t0 = time.perf_counter()
    t = 0.0
    n_full = int(np.floor(final_time / dt + 1e-9))
    steps = [dt] * n_full
    rest = final_time - n_full * dt
    if rest > 1e-12 * final_time:
        steps.append(rest)
    for n, h in enumerate(steps, 1):
        field = ssprk3_step(solver, field, h, report)
        t += h
        if not np.all(np.isfinite(field.coeffs)):
            raise DivergenceError(f"non-finite values at step {n}", [])
        _progress(progress, every, n, f"step {n:6d}  t = {t:.6f}  min = {report.umin:.6e}  max = {report.umax:.6e}")
    report.time = final_time
    report.wall = time.perf_counter() - t0
    return solver.finalize(field, dt), report


def steady_solve(solver: Solver, field: DGField, dt, tol=1e-10, max_steps=200000, progress=None,
                 every=500, stall_window=5000):
    """Pseudo-time iteration until sum |K| |U*_i0 - U_i0| at stage 1 drops below tol.

    Stops early (not converged) when the residual has not improved for
    ``stall_window`` steps.
    """
    report = RunReport()
    report.track(field.avg)
    t0 = time.perf_counter()
    best, best_step = np.inf, 0
    initial = None
    for n in range(1, max_steps + 1):
        field, ws = solver.step(field, dt, report)
        r = float(dt * np.abs(ws.rhs[0]).sum())
        report.residuals.append(r)
        if initial is None:
            initial = max(r, 1e-300)
        if not np.isfinite(r) or r > 1e6 * initial:
            raise DivergenceError(f"steady iteration diverged at step {n} (residual {r:.3e})",
                                  report.residuals)
        if r < best * (1.0 - 1e-3):
            best, best_step = r, n
        _progress(progress, every, n, f"step {n:7d}  residual = {r:.3e}  min = {report.umin:.6e}  max = {report.umax:.6e}")
        if r < tol:
            report.converged = True
            break
        if n - best_step > stall_window:
            report.converged = False
            break
    else:
        report.converged = False
    report.time = report.steps * dt
    report.wall = time.perf_counter() - t0
    return solver.finalize(field, dt), report


def solver_for_case(case, nx, config: LimiterConfig):
    from .mesh import build_uniform_mesh
    nx, ny = case.cells(nx)
    mesh = build_uniform_mesh(case.bounds, nx, ny)
    return Solver(mesh, case.law, case.inflow, config)
