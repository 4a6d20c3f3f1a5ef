"""Grid convergence of the steady smooth circular-advection problem.

Runs the unlimited scheme and three limited variants to steady state on a
sequence of meshes and prints L2 errors with observed orders.  The limited
schemes lose part of the second order accuracy because the bounds are
enforced at smooth extrema too.

    python demos/convergence_study.py --meshes 16,32,64
"""
import argparse

from dglimit.analysis import e2_error, eoc
from dglimit.cli import STEADY_SAFETY
from dglimit.dgfield import DGField
from dglimit.limiters import LimiterConfig
from dglimit.problems import get_case
from dglimit.timestep import solver_for_case, steady_solve

METHODS = {"P1": ("none", "none"), "FC-L": ("none", "fc-l"), "SC": ("none", "sc"), "DC-M": ("mcl", "dc-m")}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--meshes", default="8,16,32")
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()
    meshes = [int(n) for n in args.meshes.split(",")]
    case = get_case("circ-smooth")
    print(f"{'method':6s} " + " ".join(f"{'h=1/' + str(n):>10s}" for n in meshes) + "   orders")
    for label, (flux, slope) in METHODS.items():
        errors = []
        for nx in meshes:
            solver = solver_for_case(case, nx, LimiterConfig(flux, slope))
            u = DGField(solver.mesh)
            u, _ = steady_solve(solver, u, solver.max_dt(u, STEADY_SAFETY), tol=args.tol)
            errors.append(e2_error(solver.mesh, u, case.exact))
        orders = [eoc(a, b) for a, b in zip(errors, errors[1:])]
        print(f"{label:6s} " + " ".join(f"{e:10.3e}" for e in errors) + "   "
              + " ".join(f"{o:.2f}" for o in orders))


if __name__ == "__main__":
    main()
