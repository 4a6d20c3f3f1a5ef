"""Local Lax-Friedrichs face fluxes, bar states and the low-order update.

Face quantities are arrays over faces (nf,) or faces x quadrature points
(nf, nq), always seen from the face owner: the normal points from the owner
``i`` into the neighbor ``j``.  On boundary faces the neighbor state is the
inflow value where f'(u).n < 0 and the interior value elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgfield import DGField
from .mesh import Mesh
from .problems import ConservationLaw


class CFLError(RuntimeError):
    pass


def llf_flux(law: ConservationLaw, uL, uR, n, lam, x=None):
    """n . (f(uR) + f(uL))/2 - lam/2 (uR - uL)."""
    fL = law.normal_flux(uL, n, x)
    fR = law.normal_flux(uR, n, x)
    return 0.5 * (fL + fR) - 0.5 * lam * (np.asarray(uR) - np.asarray(uL))


class FaceSystem:
    """Mesh + law + inflow data, with the per-face geometry the fluxes need."""

    def __init__(self, mesh: Mesh, law: ConservationLaw, inflow=None):
        self.mesh = mesh
        self.law = law
        nq = mesh.qweights.shape[1]
        self.nq = nq
        self.n_q = np.broadcast_to(mesh.normal[:, None, :], (mesh.n_faces, nq, 2))
        self.x_q = mesh.qpoints
        self.w = mesh.qweights
        self.interior = mesh.interior
        self.bnd = np.flatnonzero(mesh.boundary)
        self.own = mesh.owner
        self.nbr = np.where(mesh.interior, mesh.neighbor, mesh.owner)
        if inflow is None:
            self.g = np.zeros((self.bnd.size, nq))
        else:
            bx = mesh.qpoints[self.bnd]
            self.g = np.broadcast_to(inflow(bx[..., 0], bx[..., 1]), (self.bnd.size, nq)).astype(float)
        self.vn = None
        if law.linear:
            self.vn = law.normal_speed(np.zeros((mesh.n_faces, nq)), self.n_q, self.x_q)
            self.abs_vn = np.abs(self.vn)

    # -- pointwise helpers over (nf, nq) -----------------------------------
    def normal_flux(self, u):
        if self.vn is not None:
            return self.vn * u
        return self.law.normal_flux(u, self.n_q, self.x_q)

    def normal_speed(self, u):
        if self.vn is not None:
            return np.broadcast_to(self.vn, np.shape(u))
        return self.law.normal_speed(u, self.n_q, self.x_q)

    def wave_speed(self, uL, uR):
        if self.vn is not None:
            return self.abs_vn
        return self.law.max_wave_speed(uL, uR, self.n_q, self.x_q)

    def constant_state_fluxes(self, ui, uj):
        """n.f at face-constant owner states and (possibly varying) neighbor states.

        For fluxes without explicit position dependence the owner value and
        the interior-face neighbor value are constant along each face, so one
        evaluation per face suffices; boundary faces are evaluated pointwise.
        """
        if self.vn is not None or getattr(self.law, "position_dependent", True):
            return self.normal_flux(ui), self.normal_flux(uj)
        n = self.mesh.normal
        fi = np.repeat(self.law.normal_flux(ui[:, 0], n)[:, None], self.nq, axis=1)
        fj = np.repeat(self.law.normal_flux(uj[:, 0], n)[:, None], self.nq, axis=1)
        b = self.bnd
        fj[b] = self.law.normal_flux(uj[b], self.n_q[b])
        return fi, fj

    def llf(self, uL, uR, lam):
        return 0.5 * (self.normal_flux(uL) + self.normal_flux(uR)) - 0.5 * lam * (uR - uL)

    def external(self, inside_b):
        """Boundary neighbor state for interior values on boundary faces (nb, nq)."""
        b = self.bnd
        if self.vn is not None:
            sp = self.vn[b]
        else:
            sp = self.law.normal_speed(inside_b, self.n_q[b], self.x_q[b])
        return np.where(sp >= 0.0, inside_b, self.g)

    def face_sum(self, q):
        """Integrate a pointwise face quantity: sum_q w_q q."""
        w = self.w
        if q.ndim == 2 and q.shape[1] == 2:
            return w[:, 0] * q[:, 0] + w[:, 1] * q[:, 1]
        return (w * q).sum(axis=-1)

    # -- traces ------------------------------------------------------------
    def traces(self, field: DGField):
        """Owner and neighbor traces at the face quadrature points."""
        m = self.mesh
        ui = field.at_offsets(self.own[:, None], m.offset_owner)
        uj = field.at_offsets(self.nbr[:, None], m.offset_neighbor)
        uj[self.bnd] = self.external(ui[self.bnd])
        return ui, uj

    def average_states(self, avg):
        """Cell averages on both sides, broadcast over quadrature points."""
        ui = np.repeat(avg[self.own][:, None], self.nq, axis=1)
        uj = np.repeat(avg[self.nbr][:, None], self.nq, axis=1)
        uj[self.bnd] = self.external(ui[self.bnd])
        return ui, uj


@dataclass
class LowOrderFaces:
    """LLF-P0 face data."""

    Ui: np.ndarray      # (nf,) owner average
    Uj: np.ndarray      # (nf,) neighbor average (face mean of the boundary state)
    Hq: np.ndarray      # (nf, nq) pointwise P0 flux
    H: np.ndarray       # (nf,) mean P0 flux H^P0
    lam_q: np.ndarray   # (nf, nq)
    lam: np.ndarray     # (nf,) mean wave speed lambda^P0
    Lam: np.ndarray     # (nf,) |S| lambda^P0
    bar_ij: np.ndarray  # (nf,)
    bar_ji: np.ndarray  # (nf,) nan on boundary faces


def face_flux_P0(system: FaceSystem, field: DGField) -> LowOrderFaces:
    avg = field.avg
    ui, uj = system.average_states(avg)
    lam_q = system.wave_speed(ui, uj)
    fi_q, fj_q = system.constant_state_fluxes(ui, uj)
    Hq = 0.5 * (fi_q + fj_q) - 0.5 * lam_q * (uj - ui)
    length = system.mesh.length
    Lam = system.face_sum(lam_q)
    H = system.face_sum(Hq) / length
    Ui, Uj = ui[:, 0], system.face_sum(uj) / length
    # bar states from the flux splitting |S|(H - f(U).n) = -|S| lam (Ubar - U),
    # which covers both f(u) laws and variable-velocity advection
    fi = system.face_sum(fi_q)
    fj = system.face_sum(fj_q)
    SH = H * length
    safe = np.where(Lam > 0.0, Lam, 1.0)
    mid = 0.5 * (Ui + Uj)
    bar_ij = np.where(Lam > 0.0, Ui - (SH - fi) / safe, mid)
    bar_ji = np.where(Lam > 0.0, Uj + (SH - fj) / safe, mid)
    bar_ji[system.bnd] = np.nan
    return LowOrderFaces(Ui, Uj, Hq, H, lam_q, Lam / length, Lam, bar_ij, bar_ji)


def bar_state(law: ConservationLaw, Ui, Uj, n, lam=None, x=None):
    """Pointwise bar state (Ui + Uj)/2 - n.(f(Uj) - f(Ui))/(2 lam)."""
    Ui, Uj = np.asarray(Ui, dtype=float), np.asarray(Uj, dtype=float)
    if lam is None:
        lam = law.max_wave_speed(Ui, Uj, n, x)
    df = law.normal_flux(Uj, n, x) - law.normal_flux(Ui, n, x)
    lam = np.asarray(lam, dtype=float)
    safe = np.where(lam > 0.0, lam, 1.0)
    return np.where(lam > 0.0, 0.5 * (Ui + Uj) - df / (2.0 * safe), 0.5 * (Ui + Uj))


@dataclass
class HighOrderFaces:
    ui: np.ndarray   # (nf, nq) owner traces
    uj: np.ndarray   # (nf, nq) neighbor traces
    lam_q: np.ndarray
    Hq: np.ndarray   # (nf, nq) pointwise LLF flux of the traces
    H: np.ndarray    # (nf,) face mean H^P1


def face_flux_P1(system: FaceSystem, field: DGField) -> HighOrderFaces:
    """Face-averaged LLF flux of the (already slope-limited) traces."""
    ui, uj = system.traces(field)
    lam_q = system.wave_speed(ui, uj)
    Hq = system.llf(ui, uj, lam_q)
    return HighOrderFaces(ui, uj, lam_q, Hq, system.face_sum(Hq) / system.mesh.length)


def antidiffusive_flux(H0, H1, length):
    """F_ij = |S_ij| (H^P0 - H^P1), stored once per face (F_ji = -F_ij)."""
    return length * (np.asarray(H0) - np.asarray(H1))


def divergence(mesh: Mesh, face_flux):
    """sum_j |S_ij| H_ij for every cell, given |S| H per face."""
    return mesh.cell_sum(face_flux, -face_flux)


def cfl_max_dt(system: FaceSystem, field: DGField, safety: float = 1.0, dt_cap: float = np.inf):
    """Largest dt with (dt/|K_i|) sum_j |S_ij| lambda_ij <= 1 in every cell."""
    lo = face_flux_P0(system, field)
    rate = system.mesh.cell_sum(lo.Lam, lo.Lam)
    rate = rate / system.mesh.area
    rmax = rate.max()
    if rmax <= 0.0:
        return dt_cap
    return min(dt_cap, safety / rmax)


def check_cfl(system: FaceSystem, lo: LowOrderFaces, dt: float, tol: float = 1e-12):
    rate = system.mesh.cell_sum(lo.Lam, lo.Lam) / system.mesh.area
    worst = dt * rate.max()
    if worst > 1.0 + tol:
        raise CFLError(f"time step {dt:g} violates the CFL condition (dt * max rate = {worst:.4f} > 1)")


def low_order_update(system: FaceSystem, field: DGField, dt: float, lo: LowOrderFaces = None,
                     check: bool = True):
    """Forward-Euler LLF-P0 update of the cell averages, U^P0."""
    if lo is None:
        lo = face_flux_P0(system, field)
    if check:
        check_cfl(system, lo, dt)
    mesh = system.mesh
    return field.avg - dt / mesh.area * divergence(mesh, lo.H * mesh.length)


def bar_state_update(system: FaceSystem, field: DGField, dt: float, lo: LowOrderFaces = None):
    """U^P0 written with bar states:

    U_i + dt/|K_i| sum_j Lam_ij (Ubar_ij - U_i) - dt/|K_i| sum_j int f(U_i).n ds.

    The last (reactive) sum vanishes for f(u) laws and for divergence-free
    velocity fields; it equals U^P0 from low_order_update up to rounding.
    """
    if lo is None:
        lo = face_flux_P0(system, field)
    mesh = system.mesh
    Ui = lo.Ui
    gain_i = lo.Lam * (lo.bar_ij - Ui)
    Uj = field.avg[system.nbr]
    gain_j = np.where(system.interior, lo.Lam * (np.nan_to_num(lo.bar_ji) - Uj), 0.0)
    ui, uj = system.average_states(field.avg)
    fi = system.face_sum(system.normal_flux(ui))
    fj = np.where(system.interior, system.face_sum(system.normal_flux(np.repeat(Uj[:, None], system.nq, axis=1))), 0.0)
    gain = mesh.cell_sum(gain_i, gain_j)
    react = mesh.cell_sum(fi, -fj)
    return field.avg + dt / mesh.area * (gain - react)
