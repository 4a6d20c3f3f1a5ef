"""Command-line driver: ``dglimit run`` and ``dglimit study``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import analysis
from .dgfield import DGField, project_initial
from .fluxes import CFLError
from .limiters import ConfigError, LimiterConfig, SLOPE_LIMITERS, FLUX_LIMITERS
from .mesh import STENCIL_MODES
from .problems import get_case
from .timestep import DivergenceError, run_transient, solver_for_case, steady_solve

STEADY_SAFETY = 0.9
TRANSIENT_SAFETY = 0.9
STENCIL_ALIASES = {"layered": "layered-horizontal", "iso": "isotropic"}
CUTS = {"anisotropic-advection": (("y", 0.1), ("y", 0.5))}
SHOCK_CIRCLES = {"kpp": 1.5}


@dataclass
class RunConfig:
    test: str
    nx: int = 128
    flux: str = "none"
    slope: str = "none"
    stencil: str = None
    dt: str = None           # number or "auto"; None picks the test default
    T: float = None
    entropy: str = None      # on/off; None picks the test default
    gamma: float = 1e3
    out: str = None
    meshes: list = field(default_factory=list)
    tol: float = 1e-10
    max_steps: int = 200000
    quiet: bool = False

    def limiters(self):
        return f"{self.flux}-{self.slope}"


def resolve(cfg: RunConfig):
    """Turn a RunConfig into (case, LimiterConfig); raises ConfigError."""
    try:
        case = get_case(cfg.test)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    stencil = cfg.stencil
    if stencil is None:
        # the layered bounds of a test belong to the DC family; other limiters stay isotropic
        stencil = case.stencil if cfg.slope in ("dc", "dc-m") else "isotropic"
    stencil = STENCIL_ALIASES.get(stencil, stencil)
    if stencil not in STENCIL_MODES or stencil == "custom":
        raise ConfigError(f"unknown stencil {stencil!r}; use isotropic, layered-horizontal or layered-vertical")
    if cfg.entropy is None:
        ent = case.law.entropy is not None and not case.law.linear
    elif cfg.entropy in ("on", "off"):
        ent = cfg.entropy == "on"
    else:
        raise ConfigError("--entropy takes on or off")
    if cfg.nx < 2:
        raise ConfigError("--nx must be at least 2")
    lim = LimiterConfig(cfg.flux, cfg.slope, stencil, gamma=cfg.gamma, entropy=ent)
    lim.validate_for(case.law)
    return case, lim


def _dt_value(cfg: RunConfig, case):
    if cfg.dt is None:
        return "auto" if case.steady or case.dt is None else case.dt
    if cfg.dt == "auto":
        return "auto"
    try:
        dt = float(cfg.dt)
    except ValueError:
        raise ConfigError(f"--dt takes a positive number or 'auto', got {cfg.dt!r}") from None
    if not dt > 0:
        raise ConfigError("--dt must be positive")
    return dt


def out_dir(cfg: RunConfig):
    if cfg.out:
        return Path(cfg.out)
    return Path("out") / f"{get_case(cfg.test).name}-{cfg.limiters()}-{cfg.nx}"


def solve(cfg: RunConfig, progress=None):
    """Run one configuration; returns (solver, field, report, case)."""
    case, lim = resolve(cfg)
    dt = _dt_value(cfg, case)
    solver = solver_for_case(case, cfg.nx, lim)
    solver.diagnose_entropy = lim.entropy
    mesh = solver.mesh
    if case.steady:
        u = DGField(mesh)
        if dt == "auto":
            dt = solver.max_dt(u, STEADY_SAFETY)
        u, report = steady_solve(solver, u, dt, tol=cfg.tol, max_steps=cfg.max_steps, progress=progress)
    else:
        u = project_initial(mesh, case.initial)
        T = case.final_time if cfg.T is None else cfg.T
        if dt == "auto":
            dt = solver.max_dt(u, TRANSIENT_SAFETY)
        u, report = run_transient(solver, u, T, dt, progress=progress)
    report.dt = dt
    return solver, u, report, case


def run(cfg: RunConfig):
    progress = None if cfg.quiet else sys.stdout
    solver, u, report, case = solve(cfg, progress)
    mesh = solver.mesh
    post = analysis.sc_postprocess(mesh, u)
    nodal = analysis.project_bilinear(mesh, post)
    folder = out_dir(cfg)
    folder.mkdir(parents=True, exist_ok=True)
    analysis.write_vtk(folder / "solution.vtk", mesh, post, nodal)
    info = {"test": case.name, "nx": mesh.nx, "ny": mesh.ny, "flux": cfg.flux, "slope": cfg.slope,
            "stencil": solver.config.stencil, "entropy": solver.config.entropy, "dt": report.dt}
    info.update(report.summary())
    info["post_min"] = float(min(post.avg.min(), nodal.min()))
    info["post_max"] = float(max(post.avg.max(), nodal.max()))
    if case.exact is not None and (case.steady or cfg.T is None):
        info["e2"] = analysis.e2_error(mesh, u, case.exact)
    for axis, c in CUTS.get(case.name, ()):
        cut = analysis.line_cut(mesh, post, axis, c, samples=4 * mesh.nx + 1)
        analysis.write_csv(folder / f"cut_{axis}{c}.csv", [("y" if axis == "x" else "x"), "value"], cut)
        _, row = analysis.cell_row_averages(mesh, u, c)
        info[f"tv_row_{axis}{c}"] = analysis.total_variation(row)
        info[f"tv_cut_{axis}{c}"] = analysis.total_variation(cut[:, 1])
    if case.name in SHOCK_CIRCLES:
        info["shock_angles_deg"] = analysis.shock_angles(mesh, u, SHOCK_CIRCLES[case.name])
    (folder / "report.json").write_text(json.dumps(info, indent=2) + "\n")
    return info, folder


def convergence_study(cfg: RunConfig):
    meshes = sorted(cfg.meshes or [cfg.nx])
    for a, b in zip(meshes, meshes[1:]):
        if b != 2 * a:
            raise ConfigError(f"study meshes must double: got {a} then {b}")
    folder = out_dir(cfg) if cfg.out else Path("out") / f"{get_case(cfg.test).name}-{cfg.limiters()}-study"
    rows = []
    path = folder / "study.csv"
    prev = None
    for nx in meshes:
        sub = RunConfig(**{**asdict(cfg), "nx": nx, "meshes": []})
        try:
            solver, u, report, case = solve(sub, None if cfg.quiet else sys.stdout)
        except Exception:
            analysis.write_csv(path, ["h", "e2", "eoc"], rows)
            raise
        if case.exact is None:
            raise ConfigError(f"test {case.name!r} has no exact solution for a study")
        rep = analysis.error_report(solver.mesh, u, case.exact)
        order = analysis.eoc(prev, rep) if prev is not None else float("nan")
        rows.append((rep.h, rep.e2, order))
        prev = rep
    analysis.write_csv(path, ["h", "e2", "eoc"], rows)
    return rows, path


def read_config_file(path):
    """key = value lines; '#' starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def build_parser():
    p = argparse.ArgumentParser(prog="dglimit", description="Limited DG-P1 solvers for scalar conservation laws.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "study"):
        s = sub.add_parser(name)
        s.add_argument("--config", help="key = value file; flags override it")
        s.add_argument("--test")
        s.add_argument("--nx", type=int)
        s.add_argument("--flux", choices=FLUX_LIMITERS)
        s.add_argument("--slope", choices=SLOPE_LIMITERS)
        s.add_argument("--stencil")
        s.add_argument("--dt")
        s.add_argument("--T", type=float)
        s.add_argument("--entropy", choices=("on", "off"))
        s.add_argument("--gamma", type=float)
        s.add_argument("--out")
        s.add_argument("--tol", type=float)
        s.add_argument("--max-steps", type=int)
        s.add_argument("--quiet", action="store_true", default=None)
        if name == "study":
            s.add_argument("--meshes", help="comma separated nx values, e.g. 32,64,128")
    return p


_TYPES = {"nx": int, "T": float, "gamma": float, "tol": float, "max_steps": int}


def config_from_args(args):
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        values[k] = v
    if "test" not in values:
        raise ConfigError("--test is required (anisotropic-advection, solid-body-rotation, "
                          "steady-circular, steady-circular-smooth, kpp)")
    for k, t in _TYPES.items():
        if k in values:
            try:
                values[k] = t(values[k])
            except ValueError:
                raise ConfigError(f"{k} expects {t.__name__}, got {values[k]!r}") from None
    if "meshes" in values and isinstance(values["meshes"], str):
        try:
            values["meshes"] = [int(s) for s in values["meshes"].replace(" ", "").split(",") if s]
        except ValueError:
            raise ConfigError(f"bad mesh list {values['meshes']!r}") from None
    if isinstance(values.get("quiet"), str):
        values["quiet"] = values["quiet"].lower() in ("1", "true", "yes", "on")
    known = set(RunConfig.__dataclass_fields__)
    extra = set(values) - known
    if extra:
        raise ConfigError(f"unknown settings: {', '.join(sorted(extra))}")
    cfg = RunConfig(**values)
    for name, allowed in (("flux", FLUX_LIMITERS), ("slope", SLOPE_LIMITERS)):
        if getattr(cfg, name) not in allowed:
            raise ConfigError(f"{name} must be one of {', '.join(allowed)}")
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        resolve(cfg)
        if args.command == "run":
            info, folder = run(cfg)
            print(json.dumps(info, indent=2))
            print(f"wrote {folder}")
        else:
            rows, path = convergence_study(cfg)
            for h, e2, order in rows:
                tail = "" if math.isnan(order) else f"  eoc = {order:.2f}"
                print(f"h = {h:.6g}  e2 = {e2:.3e}{tail}")
            print(f"wrote {path}")
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CFLError, DivergenceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
