"""Piecewise-linear DG fields in the cell-local Taylor basis {1, x - xc, y - yc}."""
from __future__ import annotations

import numpy as np

from .mesh import Mesh


class DGField:
    """Per-cell Taylor coefficients stored as a (3, n) array.

    Row 0 holds the cell averages, rows 1 and 2 the x- and y-derivatives.
    """

    def __init__(self, mesh: Mesh, coeffs=None):
        self.mesh = mesh
        if coeffs is None:
            coeffs = np.zeros((3, mesh.n_cells))
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (3, mesh.n_cells):
            raise ValueError(f"expected coefficients of shape (3, {mesh.n_cells}), got {coeffs.shape}")
        self.coeffs = coeffs

    @property
    def avg(self):
        return self.coeffs[0]

    @property
    def grad(self):
        return self.coeffs[1:]

    def copy(self):
        return DGField(self.mesh, self.coeffs.copy())

    def with_slopes(self, slopes):
        out = self.copy()
        out.coeffs[1:] = slopes
        return out

    def scaled(self, beta):
        """Field with derivatives multiplied by beta (scalar, (n,) or (2, n))."""
        out = self.copy()
        out.coeffs[1:] *= np.asarray(beta)
        return out

    def at_offsets(self, cells, offsets):
        """Evaluate u_h in ``cells`` at ``offsets`` from their centroids."""
        c = self.coeffs[:, cells]
        return c[0] + c[1] * offsets[..., 0] + c[2] * offsets[..., 1]


def taylor_mass(mesh: Mesh):
    """Diagonal Taylor mass matrix entries (3, n): |K|, |K| hx^2/12, |K| hy^2/12."""
    return np.stack([mesh.area, mesh.area * mesh.hx ** 2 / 12.0, mesh.area * mesh.hy ** 2 / 12.0])


def project_initial(mesh: Mesh, u0, order: int = 3) -> DGField:
    """L2 projection of u0(x, y) onto P1 using tensor Gauss quadrature."""
    pts, wts = mesh.cell_quadrature(order)
    vals = u0(pts[..., 0], pts[..., 1])
    off = pts - mesh.centroid[:, None, :]
    mass = taylor_mass(mesh)
    c0 = (wts * vals).sum(axis=1) / mass[0]
    c1 = (wts * vals * off[..., 0]).sum(axis=1) / mass[1]
    c2 = (wts * vals * off[..., 1]).sum(axis=1) / mass[2]
    return DGField(mesh, np.stack([c0, c1, c2]))


def exact_averages(mesh: Mesh, u, order: int = 3):
    pts, wts = mesh.cell_quadrature(order)
    return (wts * u(pts[..., 0], pts[..., 1])).sum(axis=1) / mesh.area


def trace_eval(field: DGField, i, x, beta=(1.0, 1.0)):
    """Limited Taylor expansion U0 + sum_k beta_k U_k (x_k - xc_k) of cell i at x."""
    x = np.asarray(x, dtype=float)
    c = field.coeffs[:, i]
    d = x - field.mesh.centroid[i]
    return c[0] + beta[0] * c[1] * d[..., 0] + beta[1] * c[2] * d[..., 1]


def vertex_values(field: DGField, i=None):
    """Values at the four corners, shape (4,) for one cell or (n, 4)."""
    off = field.mesh.corner_offsets()
    c = field.coeffs if i is None else field.coeffs[:, [i]]
    vals = c[0][:, None] + c[1][:, None] * off[:, 0] + c[2][:, None] * off[:, 1]
    return vals[0] if i is not None else vals
