import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dglimit.mesh import build_uniform_mesh
from dglimit.problems import (KPP, LinearAdvection, catalog, circular_velocity, entropy_potential,
                              flux_eval, get_case, kpp_entropy_potential, max_wave_speed,
                              rotation_velocity)


def test_kpp_flux():
    np.testing.assert_allclose(flux_eval(KPP(), 0.0), [0.0, 1.0])
    np.testing.assert_allclose(flux_eval(KPP(), np.pi / 2), [1.0, 0.0], atol=1e-16)


def test_advection_flux():
    np.testing.assert_allclose(flux_eval(LinearAdvection((0.0, 1.0)), 2.0), [0.0, 2.0])


def test_wave_speeds():
    adv = LinearAdvection((0.0, 1.0))
    assert max_wave_speed(adv, 0.3, 0.7, np.array([1.0, 0.0])) == 0.0
    rot = LinearAdvection(rotation_velocity)
    lam = max_wave_speed(rot, 0.0, 1.0, np.array([1.0, 0.0]), np.array([1.0, 0.25]))
    assert lam == pytest.approx(0.25)
    rng = np.random.default_rng(1)
    uL, uR = rng.uniform(-10, 10, (2, 50))
    th = rng.uniform(0, 2 * np.pi, 50)
    n = np.stack([np.cos(th), np.sin(th)], axis=-1)
    np.testing.assert_array_equal(max_wave_speed(KPP(), uL, uR, n), 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 2 * np.pi))
def test_analytic_kpp_speed_at_single_state(u, th):
    n = np.array([np.cos(th), np.sin(th)])
    law = KPP("analytic")
    assert abs(law.max_wave_speed(u, u, n) - abs(law.normal_speed(u, n))) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 2 * np.pi))
def test_analytic_kpp_speed_bounds_samples(a, b, th):
    n = np.array([np.cos(th), np.sin(th)])
    law = KPP("analytic")
    w = np.linspace(a, b, 401)
    sampled = np.abs(law.normal_speed(w, n)).max()
    assert law.max_wave_speed(a, b, n) >= sampled - 1e-12


def test_kpp_entropy_potential():
    law = KPP()
    np.testing.assert_allclose(entropy_potential(law.entropy, 0.0), [-1.0, 0.0])
    np.testing.assert_allclose(entropy_potential(law.entropy, np.pi / 2), [0.0, 1.0], atol=1e-15)
    u = np.linspace(-7, 7, 101)
    np.testing.assert_allclose(law.entropy.potential(u), kpp_entropy_potential(u), atol=1e-13)


def test_potential_derivative_is_flux():
    # psi' = v' f for psi = v f - q; with eta = u^2/2, psi'(u) = f(u)
    law = KPP()
    u = np.linspace(-5, 5, 100)
    eps = 1e-6
    d = (law.entropy.potential(u + eps) - law.entropy.potential(u - eps)) / (2 * eps)
    np.testing.assert_allclose(d, law.flux(u), atol=1e-8)


def test_kpp_entropy_compatibility():
    law = KPP()
    pair = law.entropy
    u = np.random.default_rng(3).uniform(-10, 10, 100)
    eps = 1e-6
    qp = (np.stack(pair.q(u + eps), -1) - np.stack(pair.q(u - eps), -1)) / (2 * eps)
    vf = pair.v(u)[:, None] * law.jacobian(u)
    assert np.abs(vf - qp).max() < 1e-6


def test_catalog_values():
    names = [c.name for c in catalog()]
    assert names == ["anisotropic-advection", "solid-body-rotation", "steady-circular",
                     "steady-circular-smooth", "kpp"]
    assert get_case("aa").initial(0.3, 0.5) == pytest.approx(2.0)
    assert get_case("kpp").initial(0.0, 0.0) == pytest.approx(14 * np.pi / 4)
    r = 0.7 / np.sqrt(2)
    assert get_case("circ").exact(r, r) == pytest.approx(1.0)
    with pytest.raises(KeyError):
        get_case("nope")


def test_slotted_cylinder_slot():
    u0 = get_case("sbr").initial
    assert u0(0.5, 0.75) == 0.0      # inside the slot
    assert u0(0.5, 0.88) == 1.0      # above the slot
    assert u0(0.6, 0.75) == 1.0
    assert u0(0.5, 0.25) == pytest.approx(1.0)   # cone tip
    assert u0(0.25, 0.5) == pytest.approx(0.5)   # hump top


@pytest.mark.parametrize("vel", [rotation_velocity, circular_velocity])
def test_velocity_divergence_free_discretely(vel):
    m = build_uniform_mesh((0, 1, 0, 1), 8, 8)
    law = LinearAdvection(vel)
    n = np.broadcast_to(m.normal[:, None, :], m.qpoints.shape)
    vn = (m.qweights * law.normal_speed(np.zeros(m.qweights.shape), n, m.qpoints)).sum(axis=1)
    net = m.cell_sum(vn, -vn)
    assert np.abs(net).max() < 1e-13
