"""Flux limiters (localized FCT, MCL) and slope limiters (FC-L, FC-N, SC, DC, DC-M).

Flux limiters return one correction factor per face; symmetry
alpha_ij = alpha_ji holds because each bounding flux already takes the
minimum of the headroom in both adjacent cells.  Slope limiters never touch
the cell averages.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgfield import DGField, vertex_values
from .fluxes import FaceSystem, LowOrderFaces
from .mesh import Mesh, StencilTable

FLUX_LIMITERS = ("none", "fct", "mcl")
SLOPE_LIMITERS = ("none", "fc-l", "fc-n", "sc", "dc", "dc-m", "p0")
ZERO_TOL = 1e-14


class ConfigError(ValueError):
    pass


@dataclass
class LimiterConfig:
    flux_limiter: str = "none"
    slope_limiter: str = "none"
    stencil: str = "isotropic"
    gamma: float = 1e3
    # "stage" or "step"; None picks the default cadence of the slope limiter
    slope_cadence: str = None
    entropy: bool = False

    def __post_init__(self):
        if self.flux_limiter not in FLUX_LIMITERS:
            raise ConfigError(f"unknown flux limiter {self.flux_limiter!r}; use one of {FLUX_LIMITERS}")
        if self.slope_limiter not in SLOPE_LIMITERS:
            raise ConfigError(f"unknown slope limiter {self.slope_limiter!r}; use one of {SLOPE_LIMITERS}")
        if self.slope_cadence is None:
            self.slope_cadence = "step" if self.slope_limiter == "dc" else "stage"
        if self.slope_cadence not in ("stage", "step"):
            raise ConfigError(f"slope cadence must be 'stage' or 'step', got {self.slope_cadence!r}")
        if self.slope_limiter in ("dc", "dc-m") and self.flux_limiter == "none":
            raise ConfigError(f"{self.slope_limiter} does not bound cell averages; pair it with --flux mcl or fct")
        if self.gamma < 0:
            raise ConfigError("the penalty parameter gamma must be nonnegative")

    def validate_for(self, law):
        if self.slope_limiter == "fc-l" and not law.linear:
            raise ConfigError("fc-l is derived for linear advection; use fc-n for nonlinear laws")
        if self.slope_limiter == "fc-n" and law.linear:
            raise ConfigError("fc-n is meant for nonlinear laws; use fc-l for linear advection")
        if self.entropy and law.entropy is None:
            raise ConfigError(f"law {law.name!r} has no entropy pair; turn entropy correction off")


# ----------------------------------------------------------------------------
# bounds


def local_bounds_cellavg(stencils: StencilTable, avg, system: FaceSystem = None):
    """min/max of the cell averages over J_i0.

    With ``system`` given, the external states of boundary faces (face means
    of the Dirichlet data at inflow points, the cell's own average elsewhere)
    count as neighbors of the boundary cell, so inflow data never lies
    outside the bounds.
    """
    umin, umax = stencils.minmax(avg, 0)
    if system is not None and system.bnd.size:
        b = system.bnd
        ext = system.external(np.repeat(avg[system.own[b]][:, None], system.nq, axis=1))
        ext = (system.w[b] * ext).sum(axis=1) / system.mesh.length[b]
        cells = system.own[b]
        umin = umin.copy()
        umax = umax.copy()
        np.minimum.at(umin, cells, ext)
        np.maximum.at(umax, cells, ext)
    return umin, umax


def vertex_bounds(mesh: Mesh, avg):
    """min/max of U_j0 over the cells meeting at every vertex, shape (nv,)."""
    vc = mesh.vertex_cells
    vals = np.where(vc >= 0, avg[np.maximum(vc, 0)], np.nan)
    return np.nanmin(vals, axis=1), np.nanmax(vals, axis=1)


def fct_flux_bounds(system: FaceSystem, UP0, umin, umax, dt):
    """Localized FCT bounding fluxes; these depend on dt through |K|/dt."""
    mesh = system.mesh
    i, j = system.own, system.nbr
    share = mesh.area / dt
    perim = mesh.perimeter
    ci = share[i] * mesh.length / perim[i]
    cj = share[j] * mesh.length / perim[j]
    up_i = ci * (umax[i] - UP0[i])
    dn_i = ci * (umin[i] - UP0[i])
    up_j = cj * (UP0[j] - umin[j])
    dn_j = cj * (UP0[j] - umax[j])
    inner = system.interior
    fmax = np.maximum(0.0, np.where(inner, np.minimum(up_i, up_j), up_i))
    fmin = np.minimum(0.0, np.where(inner, np.maximum(dn_i, dn_j), dn_i))
    return fmin, fmax


def mcl_flux_bounds(system: FaceSystem, lo: LowOrderFaces, umin, umax):
    """MCL bounding fluxes built from the bar states; independent of dt."""
    i, j = system.own, system.nbr
    inner = system.interior
    bar_ji = np.where(inner, lo.bar_ji, 0.0)
    up = np.where(inner, np.minimum(umax[i] - lo.bar_ij, bar_ji - umin[j]), umax[i] - lo.bar_ij)
    dn = np.where(inner, np.maximum(umin[i] - lo.bar_ij, bar_ji - umax[j]), umin[i] - lo.bar_ij)
    return lo.Lam * np.minimum(0.0, dn), lo.Lam * np.maximum(0.0, up)


def alpha_from_bounds(F, fmin, fmax, tol=0.0):
    """Zalesak-type factor: min(1, fmax/F) for F > 0, min(1, fmin/F) for F < 0, else 1.

    ``tol`` (scalar or per face) widens the F = 0 branch to absorb
    floating-point noise.
    """
    F = np.asarray(F, dtype=float)
    pos = F > tol
    neg = F < -np.asarray(tol)
    safe = np.where(pos | neg, F, 1.0)
    a = np.ones_like(F)
    a = np.where(pos, np.minimum(1.0, fmax / safe), a)
    a = np.where(neg, np.minimum(1.0, fmin / safe), a)
    return np.clip(a, 0.0, 1.0)


def zero_tolerance(lo: LowOrderFaces):
    scale = lo.Lam * np.maximum(1.0, np.maximum(np.abs(lo.Ui), np.abs(lo.Uj)))
    return ZERO_TOL * scale


# ----------------------------------------------------------------------------
# slope limiting under flux constraints


def _pick(cond_pos, cond_neg, a_pos, a_neg):
    return np.where(cond_pos, a_pos, np.where(cond_neg, a_neg, 1.0))


def slope_limit_fcl(system: FaceSystem, field: DGField, UP0, umin, umax, dt, lo=None):
    """Isotropic slope limiter enforcing the flux constraints of linear advection."""
    if system.vn is None:
        raise ValueError("fc-l needs a linear advection law")
    mesh = system.mesh
    if lo is None:
        from .fluxes import face_flux_P0
        lo = face_flux_P0(system, field)
    inner = system.interior
    ui = field.at_offsets(system.own[:, None], mesh.offset_owner)
    uj = field.at_offsets(system.nbr[:, None], mesh.offset_neighbor)
    vn, w = system.vn, system.w
    di = field.avg[system.own][:, None] - ui
    dj = field.avg[system.nbr][:, None] - uj
    A = (w * np.maximum(vn, 0.0) * di).sum(axis=1)
    # inflow-side integrals are dropped on boundary faces (Dirichlet data)
    B = np.where(inner, (w * np.minimum(vn, 0.0) * dj).sum(axis=1), 0.0)
    fmin, fmax = fct_flux_bounds(system, UP0, umin, umax, dt)
    tol = zero_tolerance(lo)
    Fp = np.maximum(0.0, A) + np.maximum(0.0, B)
    Fm = np.minimum(0.0, A) + np.minimum(0.0, B)
    a_p = alpha_from_bounds(Fp, fmin, fmax, tol)
    a_m = alpha_from_bounds(Fm, fmin, fmax, tol)
    out_i = (vn > 0.0).any(axis=1)
    out_j = (vn < 0.0).any(axis=1) & inner
    # the neighbor sees A_ji = -B_ij and alpha^+_ji = alpha^-_ij
    cand_i = np.where(out_i, _pick(A > tol, A < -tol, a_p, a_m), 1.0)
    cand_j = np.where(out_j, _pick(B < -tol, B > tol, a_m, a_p), 1.0)
    return mesh.cell_min(cand_i, cand_j)


def _fcn_wave_bound(system: FaceSystem, field: DGField, ui, uj):
    law = system.law
    Ui = field.avg[system.own]
    Uj = np.where(system.interior, field.avg[system.nbr], uj.mean(axis=1))
    lo = np.minimum.reduce([Ui, Uj, ui.min(axis=1), uj.min(axis=1)])
    hi = np.maximum.reduce([Ui, Uj, ui.max(axis=1), uj.max(axis=1)])
    if law.linear:
        return system.abs_vn.max(axis=1)
    lam = law.max_wave_speed(lo[:, None], hi[:, None], system.n_q, system.x_q)
    return np.asarray(lam).max(axis=1)


def slope_limit_fcn(system: FaceSystem, field: DGField, UP0, umin, umax, dt, lam_max=None, lo=None):
    """Isotropic slope limiter with linearized bounds for nonlinear flux constraints."""
    mesh = system.mesh
    inner = system.interior
    ui = field.at_offsets(system.own[:, None], mesh.offset_owner)
    uj = field.at_offsets(system.nbr[:, None], mesh.offset_neighbor)
    uj[system.bnd] = system.external(ui[system.bnd])
    di = field.avg[system.own][:, None] - ui
    dj = field.avg[system.nbr][:, None] - uj
    w = system.w
    Pi_p = (w * np.maximum(0.0, di)).sum(axis=1)
    Pi_m = (w * np.minimum(0.0, di)).sum(axis=1)
    Pj_p = np.where(inner, (w * np.maximum(0.0, dj)).sum(axis=1), 0.0)
    Pj_m = np.where(inner, (w * np.minimum(0.0, dj)).sum(axis=1), 0.0)
    if lam_max is None:
        lam_max = _fcn_wave_bound(system, field, ui, uj)
    Fp = lam_max * (Pi_p - Pj_m)
    Fm = lam_max * (Pi_m - Pj_p)
    fmin, fmax = fct_flux_bounds(system, UP0, umin, umax, dt)
    if lo is None:
        from .fluxes import face_flux_P0
        lo = face_flux_P0(system, field)
    tol = zero_tolerance(lo)
    a_p = alpha_from_bounds(Fp, fmin, fmax, tol)
    a_m = alpha_from_bounds(Fm, fmin, fmax, tol)
    ptol = ZERO_TOL * mesh.length * np.maximum(1.0, np.abs(lo.Ui))

    def cases(pp, pm, ap, am):
        pos, neg = pp > ptol, pm < -ptol
        return np.where(pos & neg, np.minimum(ap, am), np.where(pos, ap, np.where(neg, am, 1.0)))

    cand_i = cases(Pi_p, Pi_m, a_p, a_m)
    # from the neighbor's side alpha^+ and alpha^- swap roles
    cand_j = np.where(inner, cases(Pj_p, Pj_m, a_m, a_p), 1.0)
    return mesh.cell_min(cand_i, cand_j)


# ----------------------------------------------------------------------------
# slope limiting under solution constraints


def slope_limit_sc(mesh: Mesh, field: DGField):
    """Vertex-based (Barth-Jespersen type) isotropic correction factors."""
    vmin, vmax = vertex_bounds(mesh, field.avg)
    U0 = field.avg[:, None]
    diff = vertex_values(field) - U0
    cmax = vmax[mesh.cell_vertices]
    cmin = vmin[mesh.cell_vertices]
    safe = np.where(diff != 0.0, diff, 1.0)
    r = np.where(diff > 0.0, (cmax - U0) / safe, np.where(diff < 0.0, (cmin - U0) / safe, 1.0))
    return np.clip(r, 0.0, 1.0).min(axis=1)


# ----------------------------------------------------------------------------
# anisotropic slope limiting under derivative constraints


def gradient_reconstruct(system: FaceSystem, field: DGField):
    """(1/|K_i|) sum_j int_S (U_j0 + U_i0)/2 n ds for every cell, shape (2, n)."""
    mesh = system.mesh
    ui, uj = system.average_states(field.avg)
    mean = system.face_sum(0.5 * (ui + uj))
    flux = mean[None, :] * mesh.normal.T
    return mesh.cell_sum(flux, -flux) / mesh.area


def minmod(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.where((a > 0) & (b > 0), np.minimum(a, b), np.where((a < 0) & (b < 0), np.maximum(a, b), 0.0))


def derivative_bounds(system: FaceSystem, field: DGField, stencils: StencilTable):
    rec = gradient_reconstruct(system, field)
    lo1, hi1 = stencils.minmax(rec[0], 1)
    lo2, hi2 = stencils.minmax(rec[1], 2)
    return np.stack([lo1, lo2]), np.stack([hi1, hi2])


def slope_limit_dc(system: FaceSystem, field: DGField, stencils: StencilTable):
    """Directionally limited derivatives U*_ik, shape (2, n)."""
    dmin, dmax = derivative_bounds(system, field, stencils)
    g = field.grad
    return np.where(g > 0, minmod(g, dmax), np.where(g < 0, minmod(g, dmin), 0.0))


def dc_monolithic_relax(unpenalized, target, gamma, dt):
    """Implicit penalty toward the DC targets with the diagonal Taylor mass."""
    r = gamma * dt
    return (np.asarray(unpenalized) + r * np.asarray(target)) / (1.0 + r)


# ----------------------------------------------------------------------------
# flux limiting of the cell-average update


@dataclass
class CellBounds:
    umin: np.ndarray
    umax: np.ndarray
    vmin: np.ndarray = None
    vmax: np.ndarray = None
    dmin: np.ndarray = None
    dmax: np.ndarray = None

    def check(self):
        for lo, hi in ((self.umin, self.umax), (self.vmin, self.vmax), (self.dmin, self.dmax)):
            if lo is not None and np.any(lo > hi):
                raise ValueError("bounds with min > max")


@dataclass
class FluxLimitResult:
    alpha: np.ndarray   # (nf,) per face, shared by both cells
    F: np.ndarray       # (nf,) raw antidiffusive flux
    fmin: np.ndarray
    fmax: np.ndarray
    avg: np.ndarray     # flux-corrected cell averages U*
    UP0: np.ndarray


def apply_flux_limiter(system: FaceSystem, field: DGField, kind: str, dt, stencils: StencilTable,
                       lo: LowOrderFaces = None, hi=None, check=True):
    """Blend the P0 and (slope-limited) P1 face fluxes and update the averages.

    ``kind`` is one of none, fct, mcl.  Raises CFLError when dt is too large
    for the low-order scheme.
    """
    from .fluxes import antidiffusive_flux, check_cfl, divergence, face_flux_P0, face_flux_P1

    mesh = system.mesh
    if lo is None:
        lo = face_flux_P0(system, field)
    if hi is None:
        hi = face_flux_P1(system, field)
    if check:
        check_cfl(system, lo, dt)
    UP0 = field.avg - dt / mesh.area * divergence(mesh, lo.H * mesh.length)
    F = antidiffusive_flux(lo.H, hi.H, mesh.length)
    if kind == "none":
        fmin, fmax = np.full_like(F, -np.inf), np.full_like(F, np.inf)
        alpha = np.ones_like(F)
    else:
        umin, umax = local_bounds_cellavg(stencils, field.avg, system)
        if kind == "fct":
            fmin, fmax = fct_flux_bounds(system, UP0, umin, umax, dt)
        elif kind == "mcl":
            fmin, fmax = mcl_flux_bounds(system, lo, umin, umax)
        else:
            raise ConfigError(f"unknown flux limiter {kind!r}")
        alpha = alpha_from_bounds(F, fmin, fmax, zero_tolerance(lo))
    avg = UP0 + dt / mesh.area * divergence(mesh, alpha * F)
    return FluxLimitResult(alpha, F, fmin, fmax, avg, UP0)
