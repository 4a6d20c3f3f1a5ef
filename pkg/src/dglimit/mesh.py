"""Uniform structured quadrilateral meshes with face/vertex connectivity.

All connectivity is stored as flat integer arrays so that face and cell
sweeps vectorize with numpy.  Cells are numbered row by row,
``i = iy * nx + ix``.  Boundary faces carry a neighbor index
``j >= n_cells`` (``j = n_cells + b`` for the b-th boundary face).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GAUSS2 = np.array([-1.0, 1.0]) / np.sqrt(3.0)
GAUSS3_X = np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
GAUSS3_W = np.array([5.0, 8.0, 5.0]) / 9.0

STENCIL_MODES = ("isotropic", "layered-horizontal", "layered-vertical", "custom")

# boundary side tags
LEFT, RIGHT, BOTTOM, TOP = 0, 1, 2, 3


class MeshError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    """Axis-aligned uniform quadrilateral mesh of a rectangle."""

    bounds: tuple
    nx: int
    ny: int
    periodic: tuple
    hx: float
    hy: float
    # cells
    centroid: np.ndarray        # (n, 2)
    area: np.ndarray            # (n,)
    cell_faces: np.ndarray      # (n, 4) face ids
    cell_face_sign: np.ndarray  # (n, 4) +1 if the cell owns the face
    cell_vertices: np.ndarray   # (n, 4) vertex ids, counter-clockwise from lower left
    # faces
    owner: np.ndarray           # (nf,)
    neighbor: np.ndarray        # (nf,) >= n_cells on the boundary
    normal: np.ndarray          # (nf, 2) unit, pointing out of the owner
    length: np.ndarray          # (nf,)
    side: np.ndarray            # (nf,) boundary tag, -1 for interior faces
    qpoints: np.ndarray         # (nf, nq, 2) physical points (owner side)
    qweights: np.ndarray        # (nf, nq), sum to the face length
    offset_owner: np.ndarray    # (nf, nq, 2) quad point minus owner centroid
    offset_neighbor: np.ndarray  # (nf, nq, 2) same point seen from the neighbor
    # vertices
    vertex_xy: np.ndarray       # (nv, 2)
    vertex_cells: np.ndarray    # (nv, 4), padded with -1
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def n_faces(self) -> int:
        return self.owner.size

    @property
    def interior(self) -> np.ndarray:
        return self.neighbor < self.n_cells

    @property
    def boundary(self) -> np.ndarray:
        return ~self.interior

    @property
    def perimeter(self) -> np.ndarray:
        return np.full(self.n_cells, 2.0 * (self.hx + self.hy))

    def cell_index(self, ix, iy):
        return np.asarray(iy) * self.nx + np.asarray(ix)

    def cell_ij(self, i):
        i = np.asarray(i)
        return i % self.nx, i // self.nx

    def locate(self, x, y):
        """Index of the cell containing each point (closed on the upper edges)."""
        x0, x1, y0, y1 = self.bounds
        ix = np.clip(np.floor((np.asarray(x) - x0) / self.hx).astype(int), 0, self.nx - 1)
        iy = np.clip(np.floor((np.asarray(y) - y0) / self.hy).astype(int), 0, self.ny - 1)
        return self.cell_index(ix, iy)

    def cell_sum(self, owner_vals, neighbor_vals):
        """Gather per-face contributions into cells.

        ``owner_vals`` is what the owner receives, ``neighbor_vals`` what the
        neighbor receives (boundary entries ignored).  Summation runs over
        the four local faces in a fixed order.
        """
        both = np.concatenate([owner_vals, neighbor_vals], axis=-1)
        g = both[..., self._slot_t]
        # explicit left-to-right sum: fixed order and faster than a length-4 reduce
        return ((g[..., 0, :] + g[..., 1, :]) + g[..., 2, :]) + g[..., 3, :]

    def cell_min(self, owner_vals, neighbor_vals):
        """Like cell_sum, but the minimum over the four local faces."""
        both = np.concatenate([owner_vals, neighbor_vals], axis=-1)
        g = both[..., self._slot_t]
        return np.minimum(np.minimum(g[..., 0, :], g[..., 1, :]), np.minimum(g[..., 2, :], g[..., 3, :]))

    @property
    def _slot(self):
        slot = self._cache.get("slot")
        if slot is None:
            nf = self.n_faces
            slot = np.where(self.cell_face_sign > 0, self.cell_faces, self.cell_faces + nf)
            self._cache["slot"] = slot
        return slot

    @property
    def _slot_t(self):
        slot = self._cache.get("slot_t")
        if slot is None:
            slot = np.ascontiguousarray(self._slot.T)
            self._cache["slot_t"] = slot
        return slot

    def cell_quadrature(self, order=3):
        """Tensor Gauss points (n, q, 2) and weights (n, q) on every cell."""
        key = ("cellq", order)
        if key not in self._cache:
            if order == 3:
                x1, w1 = GAUSS3_X, GAUSS3_W
            elif order == 2:
                x1, w1 = GAUSS2, np.ones(2)
            else:
                x1, w1 = np.polynomial.legendre.leggauss(order)
            gx, gy = np.meshgrid(x1, x1, indexing="xy")
            wx, wy = np.meshgrid(w1, w1, indexing="xy")
            ref = np.stack([gx.ravel(), gy.ravel()], axis=-1)
            wref = (wx * wy).ravel() / 4.0
            half = np.array([self.hx, self.hy]) / 2.0
            pts = self.centroid[:, None, :] + ref[None, :, :] * half
            wts = self.area[:, None] * wref[None, :]
            self._cache[key] = (pts, wts)
        return self._cache[key]

    def corner_offsets(self):
        """Offsets of the four corners from the centroid, ordered like cell_vertices."""
        hx2, hy2 = self.hx / 2.0, self.hy / 2.0
        return np.array([[-hx2, -hy2], [hx2, -hy2], [hx2, hy2], [-hx2, hy2]])


def build_uniform_mesh(bounds, nx, ny, periodic=(False, False)) -> Mesh:
    x0, x1, y0, y1 = (float(b) for b in bounds)
    if not (x1 > x0 and y1 > y0):
        raise MeshError(f"invalid domain extents {bounds}")
    if nx < 2 or ny < 2:
        raise MeshError(f"need at least 2x2 cells, got {nx}x{ny}")
    px, py = bool(periodic[0]), bool(periodic[1])
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    n = nx * ny
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="xy")
    ix, iy = ix.ravel(), iy.ravel()
    centroid = np.stack([x0 + (ix + 0.5) * hx, y0 + (iy + 0.5) * hy], axis=-1)
    area = np.full(n, hx * hy)

    blocks = []  # (owner, neighbor, normal, length, side, center, shift, owner slot, nbr slot)

    # vertical faces x = x0 + jx*hx; local slots 0 left, 1 right, 2 bottom, 3 top
    jx, row = np.meshgrid(np.arange(nx + 1), np.arange(ny), indexing="xy")
    jx, row = jx.ravel(), row.ravel()
    ctr = np.stack([x0 + jx * hx, y0 + (row + 0.5) * hy], axis=-1)
    inner = (jx > 0) & (jx < nx) | (px & (jx == nx))
    o = row * nx + jx - 1
    nbr = row * nx + jx % nx
    sh = np.zeros((inner.sum(), 2))
    sh[jx[inner] == nx, 0] = -(x1 - x0)
    blocks.append((o[inner], nbr[inner], (1.0, 0.0), hy, -1, ctr[inner], sh, 1, 0))
    if not px:
        sel = jx == 0
        blocks.append((row[sel] * nx, None, (-1.0, 0.0), hy, LEFT, ctr[sel], None, 0, None))
        sel = jx == nx
        blocks.append((row[sel] * nx + nx - 1, None, (1.0, 0.0), hy, RIGHT, ctr[sel], None, 1, None))
    # horizontal faces y = y0 + jy*hy
    col, jy = np.meshgrid(np.arange(nx), np.arange(ny + 1), indexing="xy")
    col, jy = col.ravel(), jy.ravel()
    ctr = np.stack([x0 + (col + 0.5) * hx, y0 + jy * hy], axis=-1)
    inner = (jy > 0) & (jy < ny) | (py & (jy == ny))
    o = (jy - 1) * nx + col
    nbr = (jy % ny) * nx + col
    sh = np.zeros((inner.sum(), 2))
    sh[jy[inner] == ny, 1] = -(y1 - y0)
    blocks.append((o[inner], nbr[inner], (0.0, 1.0), hx, -1, ctr[inner], sh, 3, 2))
    if not py:
        sel = jy == 0
        blocks.append((col[sel], None, (0.0, -1.0), hx, BOTTOM, ctr[sel], None, 2, None))
        sel = jy == ny
        blocks.append((col[sel] + (ny - 1) * nx, None, (0.0, 1.0), hx, TOP, ctr[sel], None, 3, None))

    # interior faces first, then boundary faces
    blocks.sort(key=lambda b: b[1] is None)
    owners, nbrs, normals, lengths, sides, centers, shifts = [], [], [], [], [], [], []
    cell_faces = np.full((n, 4), -1, dtype=np.int64)
    cell_sign = np.zeros((n, 4), dtype=np.int64)
    nf = nb = 0
    for o, nbr, nrm, ln, side, ctr, sh, oslot, nslot in blocks:
        m = o.size
        ids = nf + np.arange(m)
        if nbr is None:
            nbr = n + nb + np.arange(m)
            sh = np.zeros((m, 2))
            nb += m
        else:
            cell_faces[nbr, nslot], cell_sign[nbr, nslot] = ids, -1
        cell_faces[o, oslot], cell_sign[o, oslot] = ids, 1
        owners.append(o)
        nbrs.append(nbr)
        normals.append(np.tile(nrm, (m, 1)))
        lengths.append(np.full(m, ln))
        sides.append(np.full(m, side))
        centers.append(ctr)
        shifts.append(sh)
        nf += m

    owner = np.concatenate(owners).astype(np.int64)
    neighbor = np.concatenate(nbrs).astype(np.int64)
    normal = np.concatenate(normals)
    length = np.concatenate(lengths)
    side = np.concatenate(sides).astype(np.int64)
    center = np.concatenate(centers)
    shift = np.concatenate(shifts)
    tangent = np.stack([-normal[:, 1], normal[:, 0]], axis=-1)
    qpoints = center[:, None, :] + GAUSS2[None, :, None] * (0.5 * length)[:, None, None] * tangent[:, None, :]
    qweights = np.repeat((0.5 * length)[:, None], 2, axis=1)
    off_o = qpoints - centroid[owner][:, None, :]
    nbr_c = centroid[np.minimum(neighbor, n - 1)]
    off_n = qpoints + shift[:, None, :] - nbr_c[:, None, :]
    off_n[neighbor >= n] = 0.0

    # vertices; periodic directions identify the last vertex line with the first
    nvx = nx if px else nx + 1
    nvy = ny if py else ny + 1
    vx, vy = np.meshgrid(np.arange(nvx), np.arange(nvy), indexing="xy")
    vertex_xy = np.stack([x0 + vx.ravel() * hx, y0 + vy.ravel() * hy], axis=-1)

    def vid(jx, jy):
        return (jy % nvy) * nvx + (jx % nvx)

    cell_vertices = np.stack(
        [vid(ix, iy), vid(ix + 1, iy), vid(ix + 1, iy + 1), vid(ix, iy + 1)], axis=-1
    )
    # cell touching each vertex from the lower-left, lower-right, upper-right, upper-left
    vertex_cells = np.full((nvx * nvy, 4), -1, dtype=np.int64)
    vxr, vyr = vx.ravel(), vy.ravel()
    for slot, (dx, dy) in enumerate(((-1, -1), (0, -1), (0, 0), (-1, 0))):
        cx, cy = vxr + dx, vyr + dy
        ok = np.ones(vxr.size, dtype=bool)
        if px:
            cx = cx % nx
        else:
            ok &= (cx >= 0) & (cx < nx)
        if py:
            cy = cy % ny
        else:
            ok &= (cy >= 0) & (cy < ny)
        vertex_cells[ok, slot] = cy[ok] * nx + cx[ok]
    # tiny periodic meshes can list a cell twice at one vertex
    srt = np.sort(vertex_cells, axis=1)
    dup = np.zeros_like(srt, dtype=bool)
    dup[:, 1:] = (srt[:, 1:] == srt[:, :-1]) & (srt[:, 1:] >= 0)
    srt[dup] = -1
    vertex_cells = -np.sort(-srt, axis=1)

    return Mesh(
        bounds=(x0, x1, y0, y1), nx=nx, ny=ny, periodic=(px, py), hx=hx, hy=hy,
        centroid=centroid, area=area, cell_faces=cell_faces, cell_face_sign=cell_sign,
        cell_vertices=cell_vertices, owner=owner, neighbor=neighbor, normal=normal,
        length=length, side=side, qpoints=qpoints,
        qweights=qweights, offset_owner=off_o, offset_neighbor=off_n,
        vertex_xy=vertex_xy, vertex_cells=vertex_cells,
    )


def _shifted(mesh, i, dx, dy):
    ix, iy = mesh.cell_ij(i)
    jx, jy = ix + dx, iy + dy
    if mesh.periodic[0]:
        jx %= mesh.nx
    elif not 0 <= jx < mesh.nx:
        return None
    if mesh.periodic[1]:
        jy %= mesh.ny
    elif not 0 <= jy < mesh.ny:
        return None
    return int(mesh.cell_index(jx, jy))


def common_vertex_neighbors(mesh: Mesh, i: int) -> set:
    out = set()
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            j = _shifted(mesh, i, dx, dy)
            if j is not None and j != i:
                out.add(j)
    return out


def vertex_adjacent_cells(mesh: Mesh, vertex: int) -> set:
    cells = mesh.vertex_cells[vertex]
    return {int(c) for c in cells if c >= 0}


def _row(mesh, i):
    return {j for j in (_shifted(mesh, i, -1, 0), _shifted(mesh, i, 1, 0)) if j is not None}


def _column(mesh, i):
    return {j for j in (_shifted(mesh, i, 0, -1), _shifted(mesh, i, 0, 1)) if j is not None}


def bounding_stencil(mesh: Mesh, i: int, k: int, mode: str = "isotropic") -> set:
    """Cells whose data bound cell ``i`` for coefficient ``k`` (0 average, 1/2 derivatives)."""
    if k not in (0, 1, 2):
        raise ValueError(f"k must be 0, 1 or 2, got {k}")
    if mode == "isotropic":
        return common_vertex_neighbors(mesh, i) | {i}
    if mode in ("layered-horizontal", "layered-vertical"):
        if k == 1:
            return _row(mesh, i) | {i}
        if k == 2:
            return _column(mesh, i) | {i}
        nbrs = _row(mesh, i) if mode == "layered-horizontal" else _column(mesh, i)
        return nbrs | {i}
    raise ValueError(f"unknown stencil mode {mode!r}")


def shifted_cells(mesh: Mesh, dx: int, dy: int) -> np.ndarray:
    """Index of the cell offset by (dx, dy) from every cell, -1 outside the domain."""
    ix, iy = mesh.cell_ij(np.arange(mesh.n_cells))
    jx, jy = ix + dx, iy + dy
    ok = np.ones(mesh.n_cells, dtype=bool)
    if mesh.periodic[0]:
        jx = jx % mesh.nx
    else:
        ok &= (jx >= 0) & (jx < mesh.nx)
    if mesh.periodic[1]:
        jy = jy % mesh.ny
    else:
        ok &= (jy >= 0) & (jy < mesh.ny)
    return np.where(ok, jy * mesh.nx + jx, -1)


_OFFSETS = {
    "all": [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1)],
    "row": [(-1, 0), (0, 0), (1, 0)],
    "column": [(0, -1), (0, 0), (0, 1)],
}


class StencilTable:
    """Bounding stencils J_ik as padded index arrays.

    Rows are padded with the cell's own index, which leaves min/max
    reductions unchanged.
    """

    def __init__(self, mesh: Mesh, mode: str = "isotropic", custom=None):
        if mode not in STENCIL_MODES:
            raise ValueError(f"unknown stencil mode {mode!r}")
        self.mode = mode
        self.mesh = mesh
        if mode == "custom":
            if custom is None:
                raise ValueError("custom stencil mode needs explicit sets")
            self.index = []
            for k in range(3):
                sk = [set(s) | {i} for i, s in enumerate(custom[k])]
                if any(j < 0 or j >= mesh.n_cells for s in sk for j in s):
                    raise ValueError("custom stencil references a nonexistent cell")
                self.index.append(self._pad(sk))
            return
        if mode == "isotropic":
            kinds = ("all", "all", "all")
        elif mode == "layered-horizontal":
            kinds = ("row", "row", "column")
        else:
            kinds = ("column", "row", "column")
        self.index = [self._structured(mesh, kind) for kind in kinds]

    @staticmethod
    def _structured(mesh, kind):
        self_idx = np.arange(mesh.n_cells)
        cols = [shifted_cells(mesh, dx, dy) for dx, dy in _OFFSETS[kind]]
        arr = np.stack(cols, axis=1)
        return np.where(arr < 0, self_idx[:, None], arr)

    @staticmethod
    def _pad(sk):
        width = max(len(s) for s in sk)
        arr = np.empty((len(sk), width), dtype=np.int64)
        for i, s in enumerate(sk):
            members = sorted(s)
            arr[i, : len(members)] = members
            arr[i, len(members):] = i
        return arr

    def members(self, i, k=0) -> set:
        return {int(j) for j in self.index[k][i]}

    def minmax(self, values, k=0):
        cols = self._columns(k)
        lo = values[cols[0]]
        hi = lo
        for c in cols[1:]:
            v = values[c]
            lo = np.minimum(lo, v)
            hi = np.maximum(hi, v)
        return lo, hi

    def _columns(self, k):
        if not hasattr(self, "_cols"):
            self._cols = {}
        if k not in self._cols:
            self._cols[k] = [np.ascontiguousarray(c) for c in self.index[k].T]
        return self._cols[k]
