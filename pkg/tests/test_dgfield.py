import numpy as np
import pytest

from dglimit.dgfield import DGField, exact_averages, project_initial, taylor_mass, trace_eval, vertex_values
from dglimit.mesh import build_uniform_mesh


def test_project_constant():
    m = build_uniform_mesh((0, 1, 0, 1), 4, 4)
    f = project_initial(m, lambda x, y: 3.0 + 0 * x)
    np.testing.assert_allclose(f.avg, 3.0)
    np.testing.assert_allclose(f.grad, 0.0, atol=1e-14)


def test_project_linear_one_cell():
    h = 0.25
    m = build_uniform_mesh((0, 2 * h, 0, 2 * h), 2, 2)
    f = project_initial(m, lambda x, y: x)
    assert f.avg[0] == pytest.approx(h / 2)
    assert f.coeffs[1, 0] == pytest.approx(1.0)
    assert f.coeffs[2, 0] == pytest.approx(0.0, abs=1e-14)


def test_project_quadratic_oracle():
    # int (x - 1/2) x^2 dx over [0,1] is 1/12; divided by the mass 1/12 gives 1
    m = build_uniform_mesh((0, 2, 0, 2), 2, 2)
    f = project_initial(m, lambda x, y: x ** 2)
    assert f.avg[0] == pytest.approx(1 / 3)
    assert f.coeffs[1, 0] == pytest.approx(1.0)


def test_linear_reproduced_everywhere():
    m = build_uniform_mesh((-1, 1, 0, 3), 5, 6)
    u0 = lambda x, y: 0.3 - 2 * x + 0.7 * y
    f = project_initial(m, u0)
    pts, _ = m.cell_quadrature(3)
    off = pts - m.centroid[:, None, :]
    vals = f.at_offsets(np.arange(m.n_cells)[:, None], off)
    np.testing.assert_allclose(vals, u0(pts[..., 0], pts[..., 1]), atol=1e-13)


def test_trace_eval():
    m = build_uniform_mesh((-1.5, 1.5, -0.5, 0.5), 3, 1 + 1)
    f = DGField(m)
    i = m.locate(0.0, -0.25)
    f.coeffs[:, i] = (1.0, 2.0, 0.0)
    xc = m.centroid[i]
    assert trace_eval(f, i, xc) == 1.0
    assert trace_eval(f, i, xc + (0.5, 0.1), (0, 0)) == 1.0
    assert trace_eval(f, i, xc + (0.5, 0.0)) == pytest.approx(2.0)


def test_vertex_values():
    m = build_uniform_mesh((-1, 1, -1, 1), 2, 2)
    f = DGField(m)
    f.coeffs[:, 0] = (0.0, 1.0, 0.0)
    np.testing.assert_allclose(vertex_values(f, 0), [-0.5, 0.5, 0.5, -0.5])
    f.coeffs[:, 1] = (2.0, 0.0, 0.0)
    np.testing.assert_allclose(vertex_values(f, 1), 2.0)


def test_vertex_values_bracket_mean(rng):
    m = build_uniform_mesh((0, 1, 0, 1), 6, 6)
    f = DGField(m, rng.normal(size=(3, m.n_cells)))
    v = vertex_values(f)
    assert np.all(v.max(axis=1) >= f.avg) and np.all(v.min(axis=1) <= f.avg)


def test_limited_trace_mean_preserved(rng):
    m = build_uniform_mesh((0, 1, 0, 2), 4, 8)
    f = DGField(m, rng.normal(size=(3, m.n_cells)))
    pts, w = m.cell_quadrature(3)
    off = pts - m.centroid[:, None, :]
    for beta in (0.0, 0.3, rng.uniform(size=m.n_cells), rng.uniform(size=(2, m.n_cells))):
        g = f.scaled(beta)
        mean = (w * g.at_offsets(np.arange(m.n_cells)[:, None], off)).sum(axis=1) / m.area
        np.testing.assert_allclose(mean, f.avg, atol=1e-13)


def test_mass_and_exact_averages():
    m = build_uniform_mesh((0, 1, 0, 1), 4, 2)
    M = taylor_mass(m)
    np.testing.assert_allclose(M[1], m.area * m.hx ** 2 / 12)
    np.testing.assert_allclose(M[2], m.area * m.hy ** 2 / 12)
    avg = exact_averages(m, lambda x, y: x * y)
    np.testing.assert_allclose(avg, m.centroid[:, 0] * m.centroid[:, 1], atol=1e-15)


def test_bad_shape():
    m = build_uniform_mesh((0, 1, 0, 1), 2, 2)
    with pytest.raises(ValueError):
        DGField(m, np.zeros((3, 5)))
