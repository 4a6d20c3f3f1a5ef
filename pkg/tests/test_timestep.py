from types import SimpleNamespace

import numpy as np
import pytest

from conftest import random_field
from dglimit.dgfield import DGField, project_initial
from dglimit.fluxes import CFLError, face_flux_P0
from dglimit.limiters import LimiterConfig
from dglimit.mesh import build_uniform_mesh
from dglimit.problems import KPP, LinearAdvection, get_case, rotation_velocity
from dglimit.timestep import (DivergenceError, RunReport, Solver, run_transient, semidiscrete_rhs,
                              solver_for_case, ssprk3_step, steady_solve)

UNIT = (0.0, 1.0, 0.0, 1.0)

COMBOS = [("none", "none"), ("fct", "none"), ("mcl", "none"), ("none", "sc"), ("mcl", "sc"),
          ("fct", "dc"), ("mcl", "dc"), ("mcl", "dc-m"), ("fct", "dc-m"), ("none", "p0")]


def combos_for(law):
    extra = [("none", "fc-l"), ("mcl", "fc-l")] if law.linear else [("none", "fc-n"), ("fct", "fc-n")]
    return COMBOS + extra


@pytest.mark.parametrize("law", [LinearAdvection(rotation_velocity), KPP()], ids=["advection", "kpp"])
def test_free_stream_preservation(law, periodic8):
    c = 0.37 if law.linear else 2.1
    for flux, slope in combos_for(law):
        cfg = LimiterConfig(flux, slope, entropy=not law.linear)
        solver = Solver(periodic8, law, None, cfg)
        u = DGField(periodic8)
        u.coeffs[0] = c
        dt = solver.max_dt(u, 0.9)
        for _ in range(100):
            u = ssprk3_step(solver, u, dt)
        np.testing.assert_allclose(u.avg, c, atol=1e-13, err_msg=f"{flux}/{slope}")
        np.testing.assert_allclose(u.grad, 0.0, atol=1e-13, err_msg=f"{flux}/{slope}")


def test_constant_field_rhs_is_zero(periodic8):
    for law in (LinearAdvection((0.3, 0.8)), KPP()):
        solver = Solver(periodic8, law)
        u = DGField(periodic8)
        u.coeffs[0] = 1.7
        np.testing.assert_allclose(semidiscrete_rhs(solver, u), 0.0, atol=1e-14)


def test_linear_exact_solution_has_zero_residual():
    v = np.array([0.7, -0.4])
    a, b, c = 0.3, 1.1, -0.6
    exact = lambda x, y: a + b * x + c * y
    m = build_uniform_mesh(UNIT, 6, 5)
    solver = Solver(m, LinearAdvection(v), exact)
    u = project_initial(m, exact)
    R = semidiscrete_rhs(solver, u)
    # u_t = -v.grad u is constant, so M dU/dt = (-|K| v.grad u, 0, 0)
    np.testing.assert_allclose(R[0], -m.area * (v @ [b, c]), atol=1e-13)
    np.testing.assert_allclose(R[1:], 0.0, atol=1e-13)


def test_alpha_zero_gives_p0_rhs(rng, periodic8):
    for law in (LinearAdvection(rotation_velocity), KPP()):
        solver = Solver(periodic8, law)
        u = random_field(periodic8, rng)
        R = semidiscrete_rhs(solver, u, alpha=0.0)
        lo = face_flux_P0(solver.system, u)
        SH = lo.H * periodic8.length
        np.testing.assert_allclose(R[0], -periodic8.cell_sum(SH, -SH), atol=1e-13)


def test_ssprk3_stability_polynomial(periodic8):
    solver = Solver(periodic8, LinearAdvection((1.0, 0.0)))
    lam = -1.7

    def linear_rhs(field, dt, alpha=None, check=True):
        R = lam * solver.mass * field.coeffs
        return R, SimpleNamespace(rhs=R, alpha=np.ones(1), UP0=None, lo=None, H_star=None)

    solver.rhs = linear_rhs
    u = DGField(periodic8, np.ones((3, periodic8.n_cells)))
    dt = 0.3
    out = ssprk3_step(solver, u, dt)
    z = lam * dt
    np.testing.assert_allclose(out.coeffs, 1 + z + z * z / 2 + z ** 3 / 6, rtol=1e-15)


def test_zero_rhs_leaves_field(periodic8, rng):
    solver = Solver(periodic8, LinearAdvection((0.0, 0.0)))
    u = random_field(periodic8, rng)
    out = ssprk3_step(solver, u, 0.01)
    # the convex stage weights reproduce the input up to rounding
    np.testing.assert_allclose(out.coeffs, u.coeffs, rtol=0, atol=4e-15)


def test_periodic_conservation_and_stage_count(periodic8, rng):
    for law, cfgs in ((LinearAdvection(rotation_velocity), [("mcl", "fc-l"), ("fct", "sc"), ("mcl", "dc")]),
                      (KPP(), [("mcl", "fc-n"), ("fct", "dc-m"), ("none", "none")])):
        for flux, slope in cfgs:
            solver = Solver(periodic8, law, None, LimiterConfig(flux, slope, entropy=not law.linear))
            u = random_field(periodic8, rng, offset=1.0)
            dt = solver.max_dt(u, 0.5)
            report = RunReport()
            total = (periodic8.area * u.avg).sum()
            for n in range(20):
                u = ssprk3_step(solver, u, dt, report)
                np.testing.assert_allclose((periodic8.area * u.avg).sum(), total, rtol=0, atol=1e-12 * max(1, abs(total)))
            assert report.steps == 20 and report.rhs_evals == 60


def test_cfl_violation_raises(periodic8, rng):
    solver = Solver(periodic8, KPP(), None, LimiterConfig("fct", "none"))
    u = random_field(periodic8, rng)
    with pytest.raises(CFLError):
        ssprk3_step(solver, u, 2.0 * solver.max_dt(u))


def test_steady_fixed_point_stops_after_one_step():
    c = 0.6
    m = build_uniform_mesh(UNIT, 6, 6)
    solver = Solver(m, LinearAdvection((0.4, 0.9)), lambda x, y: np.full(np.shape(x), c),
                    LimiterConfig("mcl", "none"))
    u = DGField(m)
    u.coeffs[0] = c
    u, report = steady_solve(solver, u, 0.01)
    assert report.steps == 1 and report.converged
    assert report.residuals[0] < 1e-14


def test_steady_small_circular_converges():
    case = get_case("circ-smooth")
    solver = solver_for_case(case, 8, LimiterConfig("mcl", "none"))
    u = DGField(solver.mesh)
    u, report = steady_solve(solver, u, solver.max_dt(u, 0.9), tol=1e-8)
    assert report.converged
    assert report.residuals[-1] < 1e-8 < report.residuals[0]


def test_steady_divergence_is_reported():
    m = build_uniform_mesh(UNIT, 4, 4)
    solver = Solver(m, LinearAdvection((1.0, 0.0)), lambda x, y: np.ones(np.shape(x)))

    def blowup(field, dt, alpha=None, check=True):
        R = 10.0 * solver.mass * (field.coeffs + 1.0)
        return R, SimpleNamespace(rhs=R, alpha=np.ones(1), UP0=None, lo=None, H_star=None)

    solver.rhs = blowup
    with pytest.raises(DivergenceError) as err:
        steady_solve(solver, DGField(m), 0.5)
    assert len(err.value.history) > 1


def test_steady_stall_is_not_an_error():
    m = build_uniform_mesh(UNIT, 4, 4)
    solver = Solver(m, LinearAdvection((1.0, 0.0)), lambda x, y: np.ones(np.shape(x)))

    def constant(field, dt, alpha=None, check=True):
        R = np.zeros((3, m.n_cells))
        R[0] = 1e-3 * np.where(np.arange(m.n_cells) % 2, 1.0, -1.0) * m.area
        return R, SimpleNamespace(rhs=R, alpha=np.ones(1), UP0=None, lo=None, H_star=None)

    solver.rhs = constant
    u, report = steady_solve(solver, DGField(m), 0.1, stall_window=20, max_steps=1000)
    assert report.converged is False and report.steps == 22


def test_transient_last_step_shortened(periodic8, rng):
    solver = Solver(periodic8, LinearAdvection((1.0, 0.5)))
    u = random_field(periodic8, rng)
    _, report = run_transient(solver, u, 0.105, 0.01)
    assert report.steps == 11
    np.testing.assert_allclose(report.time, 0.105)


def test_solid_body_rotation_dc_mcl_global_bounds():
    case = get_case("sbr")
    solver = solver_for_case(case, 32, LimiterConfig("mcl", "dc"))
    u = project_initial(solver.mesh, case.initial)
    u = solver.slope_limit(u, 1e-3)
    _, report = run_transient(solver, u, 0.4, 4e-3)
    assert report.umin >= -1e-12 and report.umax <= 1 + 1e-12
