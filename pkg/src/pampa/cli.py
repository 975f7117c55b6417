"""Command line driver: ``pampa <subcommand> [flags]``.

Every subcommand writes CSV whose first line echoes the validated config as
JSON. Exit status: 0 on success, 1 for invalid input, 2 for numerical failure
(blow-up or a failed check).
"""

import argparse
import sys

import numpy as np

from . import _exact, bp1d, problems, sbp1d, scheme1d
from .basis1d import build_dual_basis, functional_matrix, mass_matrix_exact
from .csvio import write_csv
from .mesh1d import make_random, make_uniform


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _positive_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0 or not np.isfinite(value):
        raise argparse.ArgumentTypeError("must be a positive number")
    return value


def _nonnegative_float(text):
    value = float(text)
    if not value >= 0 or not np.isfinite(value):
        raise argparse.ArgumentTypeError("must be a nonnegative number")
    return value


# --------------------------------------------------------------------------
# 1D


def _flux(args):
    if args.flux == "advection":
        return scheme1d.linear_advection(args.a)
    return scheme1d.burgers()


def _mesh1d(args, lo, hi):
    if args.jitter:
        return make_random(lo, hi, args.cells, args.jitter, args.seed)
    return make_uniform(lo, hi, args.cells)


def _config1d(args, cells=None):
    u0, (lo, hi) = problems.INITIAL_CONDITIONS[args.ic]
    if args.domain:
        lo, hi = args.domain
        if not hi > lo:
            raise UsageError("--domain needs lo < hi")
    if cells is not None:
        args.cells = cells
    flux = _flux(args)
    exact = None
    if flux.is_linear:
        exact = lambda x, t: problems.periodic_advected(u0, flux.a, t, lo, hi)(x)  # noqa: E731
    return scheme1d.RunConfig1D(
        mesh=_mesh1d(args, lo, hi), k=args.order, flux=flux, u0=u0, cfl=args.cfl,
        t_end=args.t_end, projection=scheme1d.ProjectionRule(args.projection), bp=args.bp,
        exact=exact, record_every=args.record_every)


DIAG1D = ["step", "t", "dt", "min_average", "max_average", "min_point", "max_point", "mass",
          "energy_lhs", "energy_rhs", "n_limited", "theta_min", "n_infeasible"]


def cmd_run1d(args):
    cfg = _config1d(args)
    res = scheme1d.run_simulation(cfg)
    write_csv(res.diagnostics, DIAG1D, args.output, _echo(args, errors=res.errors))


def cmd_convergence(args):
    if args.dim == 1:
        rows = scheme1d.convergence_study(lambda n: _config1d(args, n), args.levels)
    else:
        from .tri2d.solver import run_2d, translation_case

        rows = []
        for n in args.levels:
            cfg = translation_case(n, t_end=args.t_end, dt_factor=args.dt_factor,
                                   projection=args.projection2d, record_every=10**9)
            res = run_2d(cfg)
            row = {"n": n, "h": 20.0 / n, "steps": res.steps,
                   "L1": None, "L2": res.errors["L2"], "Linf": res.errors["Linf"]}
            for norm in ("L1", "L2", "Linf"):
                row[f"EOC_{norm}"] = None
                if rows and row[norm] and rows[-1][norm]:
                    row[f"EOC_{norm}"] = float(np.log(rows[-1][norm] / row[norm])
                                               / np.log(rows[-1]["h"] / row["h"]))
            rows.append(row)
    schema = ["n", "h", "steps", "L1", "L2", "Linf", "EOC_L1", "EOC_L2", "EOC_Linf"]
    write_csv(rows, schema, args.output, _echo(args))


# --------------------------------------------------------------------------
# 2D


DIAG2D = ["step", "t", "dt", "min_average", "max_average", "min_point", "max_point", "mass", "L2"]


def cmd_run2d(args):
    from .tri2d import solver
    from .tri2d.mesh import read_mesh

    kw = dict(t_end=args.t_end, dt_factor=args.dt_factor, projection=args.projection2d,
              record_every=args.record_every)
    if args.case == "translation":
        cfg = solver.translation_case(args.cells, **kw)
    else:
        cfg = solver.rotation_case(args.cells, jitter=args.jitter, seed=args.seed,
                                   reverse=args.reverse, **kw)
    if args.mesh:
        mesh = read_mesh(args.mesh)
        if args.case == "translation":
            # a file mesh is not periodic: advect the free-space Gaussian instead
            a = np.asarray(cfg.velocity)
            x0 = np.array([5.0, 5.0])
            u0 = solver.gaussian(0.25, x0)
            cfg.u0 = u0
            cfg.exact = lambda x, t: solver.gaussian(0.25, x0 + a * t)(x)
        cfg.mesh = mesh
    res = solver.run_2d(cfg)
    write_csv(res.diagnostics, DIAG2D, args.output, _echo(args, errors=res.errors))


# --------------------------------------------------------------------------
# checks


def cmd_sbp_check(args):
    rows = []
    tri = sbp1d.element_sbp(args.order)
    rep = sbp1d.check_sbp(tri)
    for key in ("sbp", "sbp_float", "consistency", "boundary_diag"):
        rows.append({"check": f"element_{key}", "order": args.order, "cells": None,
                     "residual": rep[key], "passed": rep[key] <= sbp1d.RESIDUAL_TOL})
    if args.order == 2:
        for n in args.cells:
            grep = sbp1d.check_sbp(sbp1d.global_periodic_operator(n, 1.0 / n))
            for key in ("skew", "consistency"):
                rows.append({"check": f"global_{key}", "order": 2, "cells": n,
                             "residual": grep[key], "passed": grep[key] <= sbp1d.RESIDUAL_TOL})
    write_csv(rows, ["check", "order", "cells", "residual", "passed"], args.output, _echo(args))
    _require(all(r["passed"] for r in rows), "SBP identities violated")


def _basis_rows_1d(k):
    basis = build_dual_basis(k)
    F = np.array([[float(x) for x in row] for row in functional_matrix(k)])
    rows = [{"quantity": "biorthogonality_residual", "exact": None,
             "value": float(np.abs(F @ basis.coeffs.T - np.eye(k + 1)).max())}]
    M = mass_matrix_exact(basis)
    sbp = sbp1d.element_sbp(k)
    tables = {"M": M, "Minv": _exact.inverse(M), "Q": sbp.Q_exact, "D": sbp.D_exact, "B": sbp.B_exact}
    for name, table in tables.items():
        for i, row in enumerate(table):
            for j, x in enumerate(row):
                rows.append({"quantity": f"{name}[{i}][{j}]", "exact": str(x), "value": float(x)})
    return rows


def _basis_rows_2d(k, variant):
    from .tri2d import dual

    expected_k = dual.VARIANTS[variant][0]
    if k != expected_k:
        raise UsageError(f"variant {variant} has order {expected_k}")
    w = dual.centroid_weights(variant)
    basis = dual.build_dual_basis(variant, exact=False)
    rows = [
        {"quantity": "biorthogonality_residual", "exact": None,
         "value": float(np.abs(basis.biorthogonality() - np.eye(basis.size)).max())},
        {"quantity": "omega_K", "exact": str(w.omega_K), "value": float(w.omega_K)},
    ]
    if variant == "cubic-moment":
        om = dual.omega_factorial_scale()
        rows.append({"quantity": "omega_K_factorial_table", "exact": f"{om} = {om * 567}/567",
                     "value": float(om)})
    for i, v in enumerate(w.phi_centroid):
        rows.append({"quantity": f"phi_centroid[{i}]", "exact": str(v), "value": float(v),
                     "sign": "-" if v < 0 else "+"})
    rows.append({"quantity": "alpha_K", "exact": str(w.alpha_K), "value": float(w.alpha_K)})
    for i, v in enumerate(w.alphas):
        rows.append({"quantity": f"alpha[{i}]", "exact": str(v), "value": float(v)})
    rows.append({"quantity": "weight_sum", "exact": str(w.total), "value": float(w.total)})
    ok = w.omega_K > 0 and all(v < 0 for v in w.phi_centroid) and w.total == 1
    return rows, ok


def cmd_basis_check(args):
    ok = True
    if args.dim == 1:
        rows = _basis_rows_1d(args.order)
    else:
        rows, ok = _basis_rows_2d(args.order, args.variant)
    ok = ok and rows[0]["value"] <= 1e-11
    write_csv(rows, ["quantity", "exact", "value", "sign"], args.output, _echo(args))
    _require(ok, "basis check failed")


def cmd_bp_check(args):
    bounds = bp1d.Bounds(0.0, 1.0)
    if args.dim == 1:
        if args.flux == "upwind":
            flux = bp1d.upwind_linear(args.a)
        else:
            burgers = scheme1d.burgers()
            flux = bp1d.rusanov(burgers.f, burgers.df)
        rep = bp1d.random_trials(args.trials, flux, bounds, seed=args.seed)
    else:
        from .tri2d.solver import random_average_trials

        rep = random_average_trials(args.trials, seed=args.seed)
    rows = [{"quantity": key, "value": value} for key, value in rep.items()]
    write_csv(rows, ["quantity", "value"], args.output, _echo(args))
    _require(rep["violations"] == 0, f"{rep['violations']} bound violations")


def _require(cond, message):
    if not cond:
        raise CheckFailed(message)


def _echo(args, **extra):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg.update({k: v for k, v in extra.items() if v is not None})
    return cfg


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pampa", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--output", "-o", default="-", help="CSV path, '-' for stdout")

    def one_d(sp):
        sp.add_argument("--flux", choices=["advection", "burgers"], default="advection")
        sp.add_argument("--a", type=float, default=1.0, help="advection speed")
        sp.add_argument("--ic", choices=sorted(problems.INITIAL_CONDITIONS), default="cos")
        sp.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"))
        sp.add_argument("--order", type=int, default=2)
        sp.add_argument("--cfl", type=_positive_float, default=0.1)
        sp.add_argument("--t-end", type=_nonnegative_float, default=1.0)
        sp.add_argument("--projection", choices=scheme1d.PROJECTION_KINDS, default="central")
        sp.add_argument("--bp", choices=scheme1d.BP_MODES, default="off")
        sp.add_argument("--jitter", type=_nonnegative_float, default=0.0)
        sp.add_argument("--seed", type=int, default=0)
        common(sp)

    from .tri2d.solver import PROJECTIONS

    r1 = sub.add_parser("run1d", help="one 1D simulation, diagnostics per step")
    one_d(r1)
    r1.add_argument("--cells", type=_positive_int, default=100)
    r1.add_argument("--record-every", type=_positive_int, default=1)
    r1.set_defaults(func=cmd_run1d)

    r2 = sub.add_parser("run2d", help="one quadratic triangle simulation")
    r2.add_argument("--case", choices=["translation", "rotation"], default="translation")
    r2.add_argument("--cells", type=_positive_int, default=32, help="squares per side")
    r2.add_argument("--mesh", help="mesh file: 'NV NT', vertices, triangles (0-based, CCW)")
    r2.add_argument("--t-end", type=_nonnegative_float, default=2.0)
    r2.add_argument("--dt-factor", type=_positive_float, default=1.0)
    r2.add_argument("--projection", dest="projection2d", choices=PROJECTIONS, default="upwind")
    r2.add_argument("--jitter", type=_nonnegative_float, default=0.15)
    r2.add_argument("--seed", type=int, default=0)
    r2.add_argument("--reverse", action="store_true", help="reverse the rotation")
    r2.add_argument("--record-every", type=_positive_int, default=10)
    common(r2)
    r2.set_defaults(func=cmd_run2d)

    cv = sub.add_parser("convergence", help="error and EOC table over mesh levels")
    one_d(cv)
    cv.add_argument("--dim", type=int, choices=[1, 2], default=1)
    cv.add_argument("--levels", type=_positive_int, nargs="+", default=[40, 80, 160, 320])
    cv.add_argument("--dt-factor", type=_positive_float, default=1.0)
    cv.add_argument("--projection2d", choices=PROJECTIONS, default="upwind")
    cv.set_defaults(func=cmd_convergence, record_every=10**9)

    sb = sub.add_parser("sbp-check", help="summation-by-parts residuals")
    sb.add_argument("--order", type=int, default=2)
    sb.add_argument("--cells", type=_positive_int, nargs="+", default=[8, 9])
    common(sb)
    sb.set_defaults(func=cmd_sbp_check)

    bc = sub.add_parser("basis-check", help="dual basis and centroid weight tables")
    bc.add_argument("--dim", type=int, choices=[1, 2], default=1)
    bc.add_argument("--order", type=int, default=2)
    bc.add_argument("--variant", choices=["quadratic", "cubic", "cubic-moment"], default=None)
    common(bc)
    bc.set_defaults(func=cmd_basis_check)

    bpc = sub.add_parser("bp-check", help="random trials of the average bound")
    bpc.add_argument("--dim", type=int, choices=[1, 2], default=1)
    bpc.add_argument("--trials", type=_positive_int, default=100000)
    bpc.add_argument("--flux", choices=["upwind", "rusanov"], default="upwind")
    bpc.add_argument("--a", type=float, default=1.0)
    bpc.add_argument("--seed", type=int, default=0)
    common(bpc)
    bpc.set_defaults(func=cmd_bp_check)
    return p


def _validate(args):
    if getattr(args, "order", 2) < 2:
        raise UsageError("--order must be at least 2")
    if args.command == "basis-check" and args.dim == 2 and args.variant is None:
        args.variant = {2: "quadratic", 3: "cubic"}.get(args.order)
        if args.variant is None:
            raise UsageError("--dim 2 supports --order 2 or 3")
    if args.command == "sbp-check" and min(args.cells) < 3:
        raise UsageError("--cells must be at least 3")
    if args.command == "convergence" and len(args.levels) < 3:
        raise UsageError("--levels needs at least three values")


def main(argv=None) -> int:
    from .scheme1d import BlowUpError as Blow1D
    from .tri2d.mesh import MeshError
    from .tri2d.solver import BlowUpError as Blow2D

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
    except UsageError as exc:
        print(f"pampa: error: {exc}", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except (UsageError, MeshError, ValueError) as exc:
        print(f"pampa: error: {exc}", file=sys.stderr)
        return 1
    except (Blow1D, Blow2D, CheckFailed, AssertionError, FloatingPointError) as exc:
        print(f"pampa: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"pampa: I/O failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
