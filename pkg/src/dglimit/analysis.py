"""Error norms, convergence orders, postprocessing, line cuts and writers."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dgfield import DGField, exact_averages, vertex_values
from .limiters import slope_limit_sc
from .mesh import Mesh


@dataclass
class ErrorReport:
    h: float
    e2: float
    cells: int
    emax: float = None
    eoc: float = None


def e2_error(mesh: Mesh, field: DGField, exact, order: int = 3):
    """sqrt(sum |K_i| (U_i0 - exact cell average)^2)."""
    ref = exact_averages(mesh, exact, order)
    return float(np.sqrt((mesh.area * (field.avg - ref) ** 2).sum()))


def error_report(mesh: Mesh, field: DGField, exact, order: int = 3):
    ref = exact_averages(mesh, exact, order)
    diff = field.avg - ref
    return ErrorReport(h=mesh.hx, e2=float(np.sqrt((mesh.area * diff ** 2).sum())),
                       cells=mesh.n_cells, emax=float(np.abs(diff).max()))


def eoc(coarse, fine):
    """log2(E_coarse / E_fine) for two errors on meshes with h ratio 2.

    Accepts ErrorReport objects (the h ratio is checked) or plain numbers.
    Returns nan when the fine error is zero.
    """
    if isinstance(coarse, ErrorReport):
        if not math.isclose(coarse.h, 2.0 * fine.h, rel_tol=1e-9):
            raise ValueError(f"EOC needs h ratio 2, got {coarse.h} and {fine.h}")
        coarse, fine = coarse.e2, fine.e2
    if fine == 0.0 or coarse == 0.0:
        return float("nan")
    return math.log2(coarse / fine)


def sc_postprocess(mesh: Mesh, field: DGField) -> DGField:
    return field.scaled(slope_limit_sc(mesh, field))


def project_bilinear(mesh: Mesh, field: DGField):
    """Lumped-mass projection onto continuous bilinears: area-weighted vertex traces."""
    traces = vertex_values(field)
    nv = len(mesh.vertex_xy)
    num = np.zeros(nv)
    den = np.zeros(nv)
    w = np.repeat(mesh.area[:, None], 4, axis=1)
    np.add.at(num, mesh.cell_vertices, w * traces)
    np.add.at(den, mesh.cell_vertices, w)
    return num / den


def line_cut(mesh: Mesh, field: DGField, axis: str, coordinate: float, samples: int = 257):
    """Sample u_h along x = const (axis 'x') or y = const (axis 'y').

    Returns an array of shape (samples, 2) holding (position, value).
    """
    x0, x1, y0, y1 = mesh.bounds
    if axis == "y":
        if not y0 <= coordinate <= y1:
            raise ValueError(f"line y = {coordinate} lies outside [{y0}, {y1}]")
        s = np.linspace(x0, x1, samples)
        x, y = s, np.full_like(s, coordinate)
    elif axis == "x":
        if not x0 <= coordinate <= x1:
            raise ValueError(f"line x = {coordinate} lies outside [{x0}, {x1}]")
        s = np.linspace(y0, y1, samples)
        x, y = np.full_like(s, coordinate), s
    else:
        raise ValueError("axis must be 'x' or 'y'")
    cells = mesh.locate(x, y)
    off = np.stack([x, y], axis=-1) - mesh.centroid[cells]
    c = field.coeffs[:, cells]
    return np.stack([s, c[0] + c[1] * off[:, 0] + c[2] * off[:, 1]], axis=1)


def circle_samples(mesh: Mesh, field: DGField, radius, samples=1440, center=(0.0, 0.0)):
    """Values of u_h on a circle; returns (angles in degrees, values)."""
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    x = center[0] + radius * np.cos(theta)
    y = center[1] + radius * np.sin(theta)
    x0, x1, y0, y1 = mesh.bounds
    if x.min() < x0 or x.max() > x1 or y.min() < y0 or y.max() > y1:
        raise ValueError(f"circle of radius {radius} leaves the domain")
    cells = mesh.locate(x, y)
    off = np.stack([x, y], axis=-1) - mesh.centroid[cells]
    c = field.coeffs[:, cells]
    return np.degrees(theta), c[0] + c[1] * off[:, 0] + c[2] * off[:, 1]


def shock_angles(mesh: Mesh, field: DGField, radius, count=2, separation=20.0, samples=1440):
    """Angular positions (degrees) of the ``count`` steepest jumps of u_h on a circle.

    Jumps are differences of neighboring samples; peaks closer than
    ``separation`` degrees to an already chosen one are skipped.
    """
    deg, u = circle_samples(mesh, field, radius, samples)
    jump = np.abs(np.roll(u, -1) - u)
    mid = (deg + 180.0 / samples) % 360.0
    chosen = []
    for k in np.argsort(jump)[::-1]:
        if all(angle_distance(mid[k], a) >= separation for a in chosen):
            chosen.append(float(mid[k]))
            if len(chosen) == count:
                break
    return sorted(chosen)


def angle_distance(a, b):
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def matched_angle_error(angles, reference):
    """Largest angular mismatch under the best pairing of two equally long lists."""
    from itertools import permutations
    return min(max(angle_distance(a, b) for a, b in zip(angles, perm))
               for perm in permutations(reference))


def cell_row_averages(mesh: Mesh, field: DGField, y):
    """Cell averages of the row of cells containing the line y = const."""
    row = mesh.locate(mesh.centroid[: mesh.nx, 0], np.full(mesh.nx, y))
    return mesh.centroid[row, 0], field.avg[row]


def total_variation(values):
    return float(np.abs(np.diff(np.asarray(values))).sum())


def write_csv(path, header, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    return v


def write_vtk(path, mesh: Mesh, field: DGField, nodal=None, title="dglimit output"):
    """Legacy ASCII structured-points file with cell data u_avg and point data u_bilinear."""
    path = Path(path)
    if nodal is None:
        nodal = project_bilinear(mesh, field)
    if mesh.periodic[0] or mesh.periodic[1]:
        raise ValueError("VTK output supports non-periodic meshes only")
    x0, _, y0, _ = mesh.bounds
    # mesh vertices are numbered row by row from the lower left corner
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET STRUCTURED_POINTS",
             f"DIMENSIONS {mesh.nx + 1} {mesh.ny + 1} 1", f"ORIGIN {x0!r} {y0!r} 0",
             f"SPACING {mesh.hx!r} {mesh.hy!r} 1",
             f"CELL_DATA {mesh.n_cells}", "SCALARS u_avg double 1", "LOOKUP_TABLE default"]
    lines += [repr(float(v)) for v in field.avg]
    lines += [f"POINT_DATA {len(nodal)}", "SCALARS u_bilinear double 1", "LOOKUP_TABLE default"]
    lines += [repr(float(v)) for v in nodal]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
