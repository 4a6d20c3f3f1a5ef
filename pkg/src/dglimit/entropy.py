"""Entropy stabilization: an entropy cap on the flux-correction factors and
an implicit slope penalty driven by the cell entropy balance.

Entropy quantities use the cell averages: V_i = eta'(U_i0) and
psi_i = psi(U_i0).  With the square entropy of the KPP test eta'' = 1.
"""
from __future__ import annotations

import numpy as np

from .fluxes import FaceSystem, LowOrderFaces

CAP_TOL = 1e-14


def _face_entropy(system: FaceSystem, lo: LowOrderFaces):
    cached = getattr(lo, "_entropy", None)
    if cached is not None and cached[0] is system:
        return cached[1]
    pair = system.law.entropy
    n = system.mesh.normal
    Vi, Vj = pair.v(lo.Ui), pair.v(lo.Uj)
    psi_i = (pair.potential(lo.Ui) * n).sum(axis=-1)
    psi_j = (pair.potential(lo.Uj) * n).sum(axis=-1)
    out = (Vi, Vj, psi_i, psi_j)
    try:
        lo._entropy = (system, out)
    except AttributeError:
        pass
    return out


def entropy_alpha_cap(system: FaceSystem, lo: LowOrderFaces, F):
    """Largest alpha in [0, 1] with (V_j - V_i) H*(alpha) <= n.(psi_j - psi_i).

    H*(alpha) = H^P0 - alpha F/|S| is affine in alpha, so the cap is a ratio.
    """
    Vi, Vj, psi_i, psi_j = _face_entropy(system, lo)
    dV = Vj - Vi
    a = dV * lo.H - (psi_j - psi_i)           # value at alpha = 0
    b = -dV * F / system.mesh.length          # slope in alpha
    tol = CAP_TOL * lo.Lam * np.maximum(1.0, np.maximum(np.abs(Vi), np.abs(Vj)))
    safe = np.where(b > 0.0, b, 1.0)
    cap = np.where(b > 0.0, np.clip(-a / safe, 0.0, 1.0), 1.0)
    # the low-order flux satisfies the condition up to rounding; do not let noise
    # in a turn a harmless face into a fully limited one
    cap = np.where((b > 0.0) & (a + b <= tol), 1.0, cap)
    return cap


def entropy_condition_residual(system: FaceSystem, lo: LowOrderFaces, H_star):
    """(V_j - V_i) H* - n.(psi_j - psi_i) per face, and its scale."""
    Vi, Vj, psi_i, psi_j = _face_entropy(system, lo)
    res = (Vj - Vi) * H_star - (psi_j - psi_i)
    scale = lo.lam * np.maximum(1.0, np.maximum(np.abs(Vi), np.abs(Vj))) * np.maximum(1.0, np.abs(Vj - Vi))
    return res, scale


def entropy_face_flux(system: FaceSystem, lo: LowOrderFaces, H_star):
    """G*_ij = (V_i + V_j)/2 H*_ij - (psi_i + psi_j).n/2."""
    Vi, Vj, psi_i, psi_j = _face_entropy(system, lo)
    return 0.5 * (Vi + Vj) * H_star - 0.5 * (psi_i + psi_j)


def entropy_production(pair, field, rhs, mass):
    """P_i = V_i0 R_0 + sum_k eta''(U_i0) U_ik R_k with R = M dU/dt."""
    U = field.coeffs
    ddv = pair.dv(U[0])
    return pair.v(U[0]) * rhs[0] + ddv * (U[1] * rhs[1] + U[2] * rhs[2])


def slope_dissipation_norm(pair, field, mass):
    """D_i = int (v_h - V_i0)^2 dx with the linearized entropy variable."""
    U = field.coeffs
    ddv = pair.dv(U[0])
    return ddv ** 2 * (U[1] ** 2 * mass[1] + U[2] ** 2 * mass[2])


def slope_penalty_rate(P, G_sum, D):
    """nu_i = max(0, (P_i + sum_j |S_ij| G*_ij) / D_i), and 0 where D_i = 0."""
    P, G_sum, D = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (P, G_sum, D)))
    excess = P + G_sum
    safe = np.where(D > 0.0, D, 1.0)
    return np.where(D > 0.0, np.maximum(0.0, excess / safe), 0.0)


def apply_entropy_penalty(slopes, nu, ddv, dt):
    """Implicit relaxation of the derivatives toward zero."""
    return np.asarray(slopes) / (1.0 + nu * ddv * dt)
