"""Command-line front end.

Every command writes ``report.json`` (plus CSV and SVG artifacts) into
``--out`` and exits with 0 on success, 2 when an input violates a
precondition or cannot be read, and 3 when a solver fails to converge.
"""

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .chebyshev import load_system, residual_vector, sturm_hurwitz_check, trig_system
from .diffeo import pullback
from .errors import ConvergenceFailure, NotOrthogonal, PreconditionError
from .fncore import count_sign_changes, load_csv, parse_expression
from .hill import solve_converse_ghys
from .io import svg_plot, write_json
from .shk import SHKProblem, solve_converse_shk
from .stepspace import (
    SignedPartition,
    canonicalize,
    cell_of,
    orth_alternating_step,
    solve_hobby_rice,
    step_from_sphere,
)

COMMANDS = ("shk", "ghys", "hobby-rice", "verify", "step-space")


@dataclass
class RunConfig:
    command: str
    function: str = None
    system: str = "trig:1"
    tol: float = None
    eps_schedule: tuple = (1e-2, 1e-3, 1e-4)
    out: str = "out"
    seed: int = 0
    grid: int = None
    point: tuple = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")


def parse_system(text):
    """``trig:k`` or ``custom:@basis.json``."""
    kind, _, arg = text.partition(":")
    if kind == "trig":
        try:
            order = int(arg)
        except ValueError:
            raise PreconditionError(f"bad trig order {arg!r}") from None
        return trig_system(order)
    if kind == "custom" and arg.startswith("@"):
        return load_system(arg[1:])
    raise PreconditionError(f"unknown system {text!r}; use trig:k or "
                            "custom:@basis.json")


def parse_function(text, period):
    """Expression text, or ``@file.csv`` with header ``x,value``."""
    if text is None:
        raise PreconditionError("no function given")
    if text.startswith("@"):
        return load_csv(text[1:], period)
    return parse_expression(text, period)


def _grid(f, n=1024):
    x = np.arange(n) * (f.period / n)
    return x, f(x)


def _signs_json(rep):
    return {"count": rep.count, "locations": [float(v) for v in rep.locations]}


def run_shk(cfg):
    V = parse_system(cfg.system)
    f = parse_function(cfg.function, V.period)
    problem = SHKProblem(f, V, cfg.eps_schedule, cfg.tol or 1e-8)
    sol = solve_converse_shk(problem)
    fphi = pullback(f, sol.phi)
    report = {"command": "shk", "function": cfg.function, "system": cfg.system,
              **sol.to_json(),
              "target": problem.target,
              "verified_residuals": [float(r) for r in sol.residuals],
              "sign_changes_before": _signs_json(count_sign_changes(f)),
              "sign_changes_after": _signs_json(count_sign_changes(fphi))}
    f.to_csv(os.path.join(cfg.out, "f.csv"))
    fphi.to_csv(os.path.join(cfg.out, "f_phi.csv"))
    sol.phi.save(os.path.join(cfg.out, "phi"))
    x, y = _grid(f)
    svg_plot([(x, y, "f"), (x, fphi(x), "f o phi"),
              (x, sol.scale * sol.step(x), "c h")],
             os.path.join(cfg.out, "functions.svg"), title="f and f o phi")
    x, y = _grid(sol.phi)
    svg_plot([(x, y, "phi"), (x, x, "identity")],
             os.path.join(cfg.out, "phi.svg"), title="phi")
    return report


def run_ghys(cfg):
    k = parse_function(cfg.function, math.pi)
    sol = solve_converse_ghys(k, cfg.eps_schedule, grid=cfg.grid or 2048)
    report = {"command": "ghys", "potential": cfg.function, **sol.to_json()}
    k.to_csv(os.path.join(cfg.out, "k.csv"))
    sol.potential.to_csv(os.path.join(cfg.out, "k_phi.csv"))
    sol.phi.save(os.path.join(cfg.out, "phi"))
    sol.curve.to_csv(os.path.join(cfg.out, "curve.csv"))
    sol.curve.to_svg(os.path.join(cfg.out, "curve.svg"))
    x, y = _grid(k)
    svg_plot([(x, y, "k"), (x, sol.potential(x), "k o phi"),
              (x, sol.step(x), "step potential")],
             os.path.join(cfg.out, "potential.svg"), title="potentials")
    return report


def run_hobby_rice(cfg):
    V = parse_system(cfg.system)
    res = solve_hobby_rice(V.basis, seeds=8, length=V.period, rule=V.rule,
                           tol=cfg.tol or 1e-9, seed_offset=cfg.seed)
    h = canonicalize(res.step, min_length=1e-12 * V.period)
    report = {"command": "hobby-rice", "system": cfg.system,
              "partition": [float(v) for v in res.partition.coords],
              "residual": res.residual, "seed_index": res.seed_index,
              "iterations": res.iterations, "step": h.to_json(),
              "verified_residuals": [
                  float(r) for r in residual_vector(h.as_circle_function(), V,
                                                    V.rule.refined())]}
    h.to_csv(os.path.join(cfg.out, "step.csv"))
    return report


def run_verify(cfg):
    V = parse_system(cfg.system)
    f = parse_function(cfg.function, V.period)
    try:
        rep = sturm_hurwitz_check(f, V, V.rule.refined(), cfg.tol or 1e-8)
        report = {"orthogonal": True, "residuals": rep.residuals,
                  "sign_changes": rep.count, "needed": rep.needed,
                  "passed": rep.passed}
    except NotOrthogonal as exc:
        rep = count_sign_changes(f)
        report = {"orthogonal": False, "residuals": exc.residuals,
                  "sign_changes": rep.count, "needed": V.dimension + 1,
                  "passed": None}
    report = {"command": "verify", "function": cfg.function,
              "system": cfg.system, **report}
    report["residuals"] = [float(r) for r in report["residuals"]]
    state = ("not orthogonal" if not report["orthogonal"] else
             "pass" if report["passed"] else "FAIL")
    print(f"residuals: {report['residuals']}")
    print(f"sign changes: {report['sign_changes']} (needed "
          f"{report['needed']}): {state}")
    return report


def run_step_space(cfg):
    if cfg.point is not None:
        p = SignedPartition.normalized(np.asarray(cfg.point, dtype=float))
        h = canonicalize(step_from_sphere(p))
        source = {"point": [float(v) for v in p.coords]}
    else:
        V = parse_system(cfg.system)
        h = orth_alternating_step(V)
        source = {"system": cfg.system, "residual": h.residual}
    dim, sign = cell_of(h)
    report = {"command": "step-space", **source, "step": h.to_json(),
              "cell": {"dimension": dim, "first_sign": sign,
                       "simplex": [float(v) for v in h.lengths / h.length]}}
    h.to_csv(os.path.join(cfg.out, "step.csv"))
    return report


RUNNERS = {"shk": run_shk, "ghys": run_ghys, "hobby-rice": run_hobby_rice,
           "verify": run_verify, "step-space": run_step_space}


def run(cfg):
    """Execute ``cfg`` and return the exit code."""
    try:
        os.makedirs(cfg.out, exist_ok=True)
        report = RUNNERS[cfg.command](cfg)
        report["seed"] = cfg.seed
        report["version"] = __version__
        write_json(os.path.join(cfg.out, "report.json"), report)
        return 0
    except PreconditionError as exc:
        code, kind, best, message = 2, type(exc).__name__, None, str(exc)
    except (ValueError, OSError) as exc:
        code, kind, best, message = 2, "InvalidInput", None, str(exc)
    except ConvergenceFailure as exc:
        code, kind, best = 3, type(exc).__name__, exc.best_residual
        message = str(exc)
    print(f"error: {kind}: {message}", file=sys.stderr)
    write_json(os.path.join(cfg.out, "report.json"),
               {"command": cfg.command, "error": kind, "message": message,
                "best_residual": best, "exit_code": code, "seed": cfg.seed})
    return code


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sturmkit",
        description="Circle reparametrizations for orthogonality to "
                    "Chebyshev systems, Hobby-Rice partitions and closing "
                    "Hill curves.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, function_flag=None):
        if function_flag:
            p.add_argument(*function_flag, dest="function", required=True,
                           help="expression in x, or @file.csv")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        return p

    p = common(sub.add_parser("shk", help="converse Sturm-Hurwitz solver"),
               ("--f",))
    p.add_argument("--system", default="trig:1")
    p.add_argument("--eps-schedule", type=_floats, default=(1e-2, 1e-3, 1e-4))
    p.add_argument("--grid", type=int, default=None)

    p = common(sub.add_parser("ghys", help="closing Hill curve"), ("--k",))
    p.add_argument("--eps-schedule", type=_floats, default=(1e-2, 1e-3, 1e-4))
    p.add_argument("--grid", type=int, default=None,
                   help="frame integration nodes (default 2048)")

    p = common(sub.add_parser("hobby-rice", help="orthogonal sign partition"))
    p.add_argument("--system", default="trig:1")

    p = common(sub.add_parser("verify", help="forward sign-change check"),
               ("--f",))
    p.add_argument("--system", default="trig:1")

    p = common(sub.add_parser("step-space",
                              help="alternating step of a system or sphere "
                                   "point"))
    p.add_argument("--system", default="trig:1")
    p.add_argument("--point", type=_floats, default=None,
                   help="comma-separated sphere coordinates")
    return parser


def config_from_args(ns):
    return RunConfig(command=ns.command, function=getattr(ns, "function", None),
                     system=getattr(ns, "system", None), tol=ns.tol,
                     eps_schedule=getattr(ns, "eps_schedule",
                                          (1e-2, 1e-3, 1e-4)),
                     out=ns.out, seed=ns.seed, grid=getattr(ns, "grid", None),
                     point=getattr(ns, "point", None))


def main(argv=None):
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
