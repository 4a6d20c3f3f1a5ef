import numpy as np
import pytest

from dglimit.mesh import (MeshError, StencilTable, bounding_stencil, build_uniform_mesh,
                          common_vertex_neighbors, vertex_adjacent_cells)


def test_small_mesh_counts():
    m = build_uniform_mesh((0, 1, 0, 1), 2, 2)
    assert m.n_cells == 4
    assert m.interior.sum() == 4
    assert m.boundary.sum() == 8


def test_periodic_counts():
    m = build_uniform_mesh((0, 1, 0, 1), 2, 2, periodic=(True, True))
    assert m.interior.sum() == 8
    assert m.boundary.sum() == 0


def test_spacing_and_area():
    m = build_uniform_mesh((0, 1, 0, 1), 128, 128)
    assert m.hx == pytest.approx(1 / 128)
    np.testing.assert_allclose(m.area, (1 / 128) ** 2, rtol=1e-14)
    assert abs(m.area.sum() - 1.0) < 1e-14


@pytest.mark.parametrize("nx,ny", [(1, 4), (4, 1), (0, 0)])
def test_too_small_rejected(nx, ny):
    with pytest.raises(MeshError):
        build_uniform_mesh((0, 1, 0, 1), nx, ny)


def test_bad_extent_rejected():
    with pytest.raises(MeshError):
        build_uniform_mesh((1, 0, 0, 1), 4, 4)


def test_normals_unit_and_closed():
    m = build_uniform_mesh((-2, 2, -2.5, 1.5), 5, 7)
    np.testing.assert_allclose(np.linalg.norm(m.normal, axis=1), 1.0, rtol=0, atol=1e-15)
    sn = m.length[:, None] * m.normal
    closure = np.stack([m.cell_sum(sn[:, k], -sn[:, k]) for k in (0, 1)])
    assert np.abs(closure).max() < 1e-14 * m.hx


def test_each_interior_pair_once():
    for periodic in [(False, False), (True, False), (True, True)]:
        m = build_uniform_mesh((0, 1, 0, 1), 4, 3, periodic=periodic)
        own, nbr = m.owner[m.interior], m.neighbor[m.interior]
        assert np.all(own != nbr)
        # every cell sees four faces, interior ones counted from both sides
        seen = np.bincount(np.concatenate([m.owner, nbr]), minlength=m.n_cells)
        np.testing.assert_array_equal(seen, 4)


def test_normal_points_from_owner_to_neighbor():
    m = build_uniform_mesh((0, 1, 0, 1), 4, 4)
    f = np.flatnonzero(m.interior)
    d = m.centroid[m.neighbor[f]] - m.centroid[m.owner[f]]
    assert np.all((d * m.normal[f]).sum(axis=1) > 0)


def test_neighbor_counts():
    m = build_uniform_mesh((0, 1, 0, 1), 4, 4)
    assert len(common_vertex_neighbors(m, m.cell_index(1, 1))) == 8
    assert len(common_vertex_neighbors(m, m.cell_index(0, 0))) == 3
    p = build_uniform_mesh((0, 1, 0, 1), 4, 4, periodic=(True, True))
    for i in range(p.n_cells):
        assert len(common_vertex_neighbors(p, i)) == 8


def test_neighbor_symmetry():
    m = build_uniform_mesh((0, 1, 0, 1), 5, 4, periodic=(True, False))
    for i in range(m.n_cells):
        for j in common_vertex_neighbors(m, i):
            assert i in common_vertex_neighbors(m, j)


def test_bounding_stencils():
    m = build_uniform_mesh((0, 1, 0, 1), 4, 4)
    i = m.cell_index(1, 2)
    assert len(bounding_stencil(m, i, 0, "isotropic")) == 9
    assert bounding_stencil(m, i, 0, "layered-horizontal") == {i - 1, i, i + 1}
    assert bounding_stencil(m, i, 2, "layered-horizontal") == {i - 4, i, i + 4}
    assert bounding_stencil(m, i, 1, "layered-horizontal") == {i - 1, i, i + 1}
    with pytest.raises(ValueError):
        bounding_stencil(m, i, 0, "diagonal")


def test_vertex_adjacency():
    m = build_uniform_mesh((0, 1, 0, 1), 3, 3)
    def vertex_at(x, y):
        return int(np.flatnonzero(np.all(np.isclose(m.vertex_xy, (x, y)), axis=1))[0])
    assert len(vertex_adjacent_cells(m, vertex_at(1 / 3, 1 / 3))) == 4
    assert len(vertex_adjacent_cells(m, vertex_at(1 / 3, 0))) == 2
    assert len(vertex_adjacent_cells(m, vertex_at(0, 0))) == 1


def test_stencil_table_matches_sets():
    m = build_uniform_mesh((0, 1, 0, 1), 5, 4)
    for mode in ("isotropic", "layered-horizontal", "layered-vertical"):
        table = StencilTable(m, mode)
        for k in range(3):
            for i in range(m.n_cells):
                assert table.members(i, k) == bounding_stencil(m, i, k, mode)


def test_stencil_minmax_layered_excludes_other_rows():
    m = build_uniform_mesh((0, 1, 0, 1), 4, 4)
    vals = m.centroid[:, 1].copy()  # constant along rows
    lo, hi = StencilTable(m, "layered-horizontal").minmax(vals, 0)
    np.testing.assert_array_equal(lo, vals)
    np.testing.assert_array_equal(hi, vals)
    lo, hi = StencilTable(m, "isotropic").minmax(vals, 0)
    assert np.any(hi > vals)


def test_face_quadrature_weights():
    m = build_uniform_mesh((0, 2, 0, 1), 4, 3)
    np.testing.assert_allclose(m.qweights.sum(axis=1), m.length)
    # quadrature points lie on the face, symmetric about its midpoint
    mid = m.qpoints.mean(axis=1)
    d = m.qpoints[:, 0] - mid
    np.testing.assert_allclose((d * m.normal).sum(axis=1), 0.0, atol=1e-15)
