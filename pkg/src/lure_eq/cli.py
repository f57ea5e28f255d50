"""Command-line front-end: validate, solve and simulate problem files.

Exit codes: 0 success, 1 invalid system, 2 parse error, 3 solver failure,
4 unsupported operation. CSV output uses 17 significant digits and LF line
endings so repeated runs are byte-identical.
"""

import argparse
import logging
import os
import sys

import numpy as np

from .lure import (
    LureSystem,
    Mode,
    SystemValidationError,
    UnsupportedSchemeError,
    equilibrium,
    simulate,
    validate,
)
from .nash import LinearCostGame, certify_equilibrium, solve_game
from .operators import SignOperator, AffineMap
from .problems import ProblemFormatError, load_problem
from .qvi import solve_qvi, solve_qvi_dual
from .solvers import SolverConfig, Status

log = logging.getLogger("lure_eq")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_UNSUPPORTED = 4


def _setup_logging():
    level = {"quiet": logging.WARNING, "info": logging.INFO, "trace": logging.DEBUG}.get(
        os.environ.get("LURE_EQ_LOG", "quiet"), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _fmt(value):
    return f"{float(value):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(row) + "\n")
    log.info("wrote %s (%d rows)", path, len(rows))


def _residual_rows(report):
    iterates = report.extras.get("iterates", [])
    rows = []
    for n, res in enumerate(report.residual_history, start=1):
        x = iterates[min(n - 1, len(iterates) - 1)]
        rows.append([str(n), _fmt(res)] + [_fmt(v) for v in x])
    return rows


def _write_residual_csv(path, report, dim):
    header = ["iter", "residual"] + [f"x_{i + 1}" for i in range(dim)]
    _write_csv(path, header, _residual_rows(report))


def _write_trajectory_csv(path, traj):
    n = traj.states.shape[1]
    m = traj.lambdas.shape[1]
    header = ["t"] + [f"x_{i + 1}" for i in range(n)] + [f"lambda_{j + 1}" for j in range(m)]
    rows = [[_fmt(t)] + [_fmt(v) for v in x] + [_fmt(v) for v in lam]
            for t, x, lam in zip(traj.times, traj.states, traj.lambdas)]
    _write_csv(path, header, rows)


def _lower_to_system(bundle):
    from .nash import assemble_linear_game, assemble_prox_game
    from .qvi import qvi_to_inclusion

    if bundle.kind == "lure":
        return bundle.system
    if bundle.kind == "qvi":
        return qvi_to_inclusion(bundle.qvi)
    if bundle.kind == "nash_linear":
        return qvi_to_inclusion(assemble_linear_game(bundle.game))
    return assemble_prox_game(bundle.game)


def _apply_overrides(cfg, args):
    if getattr(args, "gamma", None) is not None:
        cfg.gamma = args.gamma
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol
    if getattr(args, "max_iter", None) is not None:
        cfg.max_iter = args.max_iter
    return cfg


def cmd_check(args):
    bundle = load_problem(args.problem)
    system = _lower_to_system(bundle)
    report = validate(system)
    print(f"mode: {report.mode.value}")
    print(f"|P B - C^T|: {_fmt(report.pb_gap)}")
    if report.block_eigenvalues is not None:
        print(f"passivity block eigenvalues: min {_fmt(report.block_eigenvalues.min())}, "
              f"max {_fmt(report.block_eigenvalues.max())}")
    print(f"D monotone: {report.d_monotone}; weighted drift monotone: {report.pf_monotone}")
    if report.d_semicoercive is not None:
        print(f"feedthrough semi-coercivity constant: {_fmt(report.d_semicoercive)}")
    for note in report.warnings:
        print(f"note: {note}")
    return EXIT_OK if report.mode is not Mode.INVALID else EXIT_INVALID


def _print_solution(report, label="solution"):
    vec = " ".join(_fmt(v) for v in np.atleast_1d(report.solution))
    print(f"status: {report.status.value} after {report.iterations} iterations")
    print(f"{label}: {vec}")
    print(f"stopping residual: {_fmt(report.certified_residual)}")
    if report.inclusion_residual is not None:
        print(f"certified inclusion residual: {_fmt(report.inclusion_residual)}")
    if report.message:
        print(f"note: {report.message}")


def cmd_equilibrium(args):
    bundle = load_problem(args.problem)
    cfg = _apply_overrides(bundle.solver, args)
    x0 = bundle.x0
    if bundle.kind == "lure":
        report = equilibrium(bundle.system, cfg, x0=x0)
        dim = bundle.system.state_dim
    elif bundle.kind == "qvi":
        report = solve_qvi(bundle.qvi, cfg, x0=x0)
        dim = bundle.qvi.dim
    else:
        report = solve_game(bundle.game, cfg, x0=x0)
        dim = bundle.game.total_dim
    _write_residual_csv(args.out, report, dim)
    _print_solution(report)
    return EXIT_OK if report.status is Status.CONVERGED else EXIT_SOLVER


def cmd_simulate(args):
    bundle = load_problem(args.problem)
    if bundle.kind != "lure":
        print("simulation requires a 'lure' problem file", file=sys.stderr)
        return EXIT_UNSUPPORTED
    sim = dict(bundle.simulate or {})
    if args.scheme is not None:
        sim["scheme"] = args.scheme
    if args.h is not None:
        sim["h"] = args.h
    if args.T is not None:
        sim["T"] = args.T
    if args.x0 is not None:
        sim["x0"] = np.asarray([float(v) for v in args.x0.split(",")])
    missing = [k for k in ("scheme", "x0", "h", "T") if k not in sim]
    if missing:
        print(f"missing simulation settings: {missing} (set them in the file or via flags)",
              file=sys.stderr)
        return EXIT_PARSE
    try:
        traj = simulate(bundle.system, sim["scheme"], sim["x0"], sim["h"], sim["T"])
    except UnsupportedSchemeError as err:
        print(f"unsupported scheme: {err}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except ValueError as err:
        print(f"bad simulation settings: {err}", file=sys.stderr)
        return EXIT_PARSE
    _write_trajectory_csv(args.out, traj)
    final = traj.states[-1]
    print(f"scheme: {traj.scheme.value}, steps: {len(traj.times) - 1}, completed: {traj.completed}")
    print(f"final state: {' '.join(_fmt(v) for v in final)} (|x| = {_fmt(np.linalg.norm(final))})")
    if traj.note:
        print(f"note: {traj.note}")
    return EXIT_OK if traj.completed else EXIT_SOLVER


def cmd_qvi(args):
    bundle = load_problem(args.problem)
    if bundle.kind != "qvi":
        print("the qvi command requires a 'qvi' problem file", file=sys.stderr)
        return EXIT_UNSUPPORTED
    cfg = _apply_overrides(bundle.solver, args)
    report = solve_qvi(bundle.qvi, cfg, x0=bundle.x0)
    _write_residual_csv(args.out, report, bundle.qvi.dim)
    _print_solution(report)
    print(f"QVI-form residual: {_fmt(report.extras['qvi_residual'])}")
    ok = report.status is Status.CONVERGED
    if bundle.qvi.f.strong_modulus > 0:
        dual = solve_qvi_dual(bundle.qvi, cfg)
        gap = float(np.linalg.norm(dual.solution - report.solution))
        print(f"dual route status: {dual.status.value} after {dual.iterations} iterations")
        print(f"dual y*: {' '.join(_fmt(v) for v in dual.extras['y_star'])}")
        print(f"recovered x*: {' '.join(_fmt(v) for v in dual.solution)}")
        print(f"primal/dual agreement: {_fmt(gap)}")
        ok = ok and dual.status is Status.CONVERGED
    return EXIT_OK if ok else EXIT_SOLVER


def cmd_nash(args):
    bundle = load_problem(args.problem)
    if bundle.kind not in ("nash_linear", "nash_prox"):
        print("the nash command requires a nash_* problem file", file=sys.stderr)
        return EXIT_UNSUPPORTED
    cfg = _apply_overrides(bundle.solver, args)
    report = solve_game(bundle.game, cfg, x0=bundle.x0)
    _write_residual_csv(args.out, report, bundle.game.total_dim)
    _print_solution(report, label="equilibrium")
    certs = certify_equilibrium(bundle.game, report.solution, tol=10 * cfg.tol)
    for cert in certs:
        print(f"player {cert.player + 1}: {'ok' if cert.ok else 'FAIL'} "
              f"(stationarity residual {_fmt(cert.residual)})")
    return EXIT_OK if report.status is Status.CONVERGED and all(c.ok for c in certs) else EXIT_SOLVER


def _reference_relay_system():
    """2-D relay feedback benchmark: strongly monotone drift, relay output loop."""
    A = np.array([[9.0, -1.0], [1.0, 8.0]])
    D = np.array([[0.0, 0.0], [0.0, 1.0]])
    return LureSystem(f=AffineMap(A), B=np.eye(2), C=np.eye(2), D=D, F=SignOperator(2))


def cmd_repro_paper(args):
    os.makedirs(args.out, exist_ok=True)
    system = _reference_relay_system()
    x0 = np.array([1.0, 2.0])
    lines = ["reference relay benchmark: dx/dt = -A x + lam, lam in -Sign(C x + D lam)",
             "x0 = (1, 2), explicit step h = 0.04"]

    traj = simulate(system, "explicit", x0, h=0.04, T=40.0)
    fig1 = os.path.join(args.out, "fig1.csv")
    _write_trajectory_csv(fig1, traj)
    min_norm = float(np.min(np.linalg.norm(traj.states, axis=1)))
    lines.append(f"fig1.csv: explicit scheme over [0, 40]; min |x_n| = {_fmt(min_norm)} "
                 "(persistent chattering, no convergence)")

    L = system.f.lipschitz
    results = {}
    for gamma in (0.5, 0.1):
        import warnings as _warnings
        with _warnings.catch_warnings():
            _warnings.simplefilter("ignore", RuntimeWarning)
            report = equilibrium(system, SolverConfig(gamma=gamma, tol=1e-8, max_iter=2000), x0=x0)
        path = os.path.join(args.out, f"fig2_gamma{gamma}.csv")
        _write_residual_csv(path, report, 2)
        results[gamma] = report
        lines.append(f"fig2_gamma{gamma}.csv: splitting iteration at step {gamma}: "
                     f"{report.status.value} after {report.iterations} iterations")

    lines.append(f"the step bound for the forward-backward-forward iteration is 1/L = {_fmt(1.0 / L)};")
    lines.append("gamma = 0.5 exceeds it and the iteration diverges from x0 = (1, 2),")
    lines.append("while the compliant step gamma = 0.1 converges to the equilibrium (0, 0).")

    summary = os.path.join(args.out, "summary.txt")
    with open(summary, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lure-eq",
        description="Equilibria of set-valued Lur'e systems, QVIs and Nash games.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p):
        p.add_argument("--gamma", type=float, default=None, help="splitting step size")
        p.add_argument("--tol", type=float, default=None, help="stopping residual")
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None)

    p = sub.add_parser("check", help="validate the system assumptions")
    p.add_argument("problem")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("equilibrium", help="compute an equilibrium")
    p.add_argument("problem")
    add_solver_flags(p)
    p.add_argument("--out", default="residuals.csv", help="residual CSV path")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("simulate", help="integrate a trajectory")
    p.add_argument("problem")
    p.add_argument("--scheme", choices=["explicit", "semi_implicit", "fully_implicit"],
                   default=None)
    p.add_argument("--h", type=float, default=None, help="time step")
    p.add_argument("--T", type=float, default=None, help="horizon")
    p.add_argument("--x0", default=None, help="comma-separated initial state")
    p.add_argument("--out", default="traj.csv", help="trajectory CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("qvi", help="solve a quasi-variational inequality (primal and dual)")
    p.add_argument("problem")
    add_solver_flags(p)
    p.add_argument("--out", default="residuals.csv")
    p.set_defaults(func=cmd_qvi)

    p = sub.add_parser("nash", help="solve a Nash quasi-equilibrium game")
    p.add_argument("problem")
    add_solver_flags(p)
    p.add_argument("--out", default="residuals.csv")
    p.set_defaults(func=cmd_nash)

    p = sub.add_parser("repro-paper", help="regenerate the reference benchmark outputs")
    p.add_argument("--out", default="repro_out", help="output directory")
    p.set_defaults(func=cmd_repro_paper)

    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProblemFormatError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedSchemeError as err:
        print(f"unsupported: {err}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (SystemValidationError, ValueError) as err:
        print(f"invalid system: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
