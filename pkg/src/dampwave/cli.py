"""Command-line frontend.

Subcommands: solve, compare, stability, convergence, table1, table2, figures.
Problems come from the builtin catalog (--problem sample) or a JSON config
path; results are CSV files per the harness format.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure
(singular system), 4 a requested solve diverged (table2/compare report
divergence as data and still exit 0).
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import harness, stability
from .linalg import SingularMatrixError, spectral_radius
from .operators import assemble_system, build_grid
from .problems import BUILTINS, DampedWaveProblem, ProblemConfigError, load_problem_config
from .schemes import (
    SCHEME_NAMES,
    StateVector,
    config_for,
    make_stepper,
    solve_evolution,
    step_semigroup,
)

FIGURE_GRID_N = 23  # nearest subinterval count to the reference mesh width 0.13464
FIGURE_R_VALUES = (0.016, 0.159, 0.995, 1.45)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_DIVERGED = 4


def _fail(message: str, code: int) -> int:
    print(f"dampwave: error: {message}", file=sys.stderr)
    return code


def _add_problem_flag(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--problem",
        default="sample",
        help="builtin problem name or path to a JSON problem config (default: sample)",
    )


def _add_mesh_flags(sp: argparse.ArgumentParser) -> None:
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--N", type=int, help="number of subintervals")
    g.add_argument("--h", type=float, help="mesh width (snapped to (b-a)/N)")


def _add_step_flags(sp: argparse.ArgumentParser) -> None:
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--k", type=float, help="time step")
    g.add_argument("--r", type=float, help="Courant ratio; resolves k = r*h")


def _add_scheme_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--scheme", required=True, choices=SCHEME_NAMES)
    sp.add_argument("--pade", help="S,T orders for --scheme fdST (e.g. --pade 2,2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dampwave",
        description="Finite-difference solvers and benchmarks for the 1D damped wave equation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="run one scheme and write its error/solution profile")
    _add_problem_flag(sp)
    _add_scheme_flags(sp)
    _add_mesh_flags(sp)
    _add_step_flags(sp)
    sp.add_argument("--t-final", type=float, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--stride", type=int, default=1, help="snapshot thinning stride")

    sp = sub.add_parser("compare", help="run all four standard schemes at the same parameters")
    _add_problem_flag(sp)
    _add_mesh_flags(sp)
    _add_step_flags(sp)
    sp.add_argument("--t-final", type=float, required=True)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("stability", help="evaluate the explicit stability conditions")
    sp.add_argument("--gamma-max", type=float, required=True)
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--N", type=int, help="also report the implicit amplification spectrum")
    sp.add_argument("--empirical", action="store_true",
                    help="estimate the implicit map's spectral radius by power iteration (needs --N)")
    sp.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")
    sp.add_argument("--out", help="optional CSV with the condition report")

    sp = sub.add_parser("convergence", help="halving refinement study with observed orders")
    _add_problem_flag(sp)
    _add_scheme_flags(sp)
    sp.add_argument("--axis", required=True, choices=("time", "space"))
    sp.add_argument("--base-k", type=float, required=True)
    sp.add_argument("--base-N", type=int, required=True)
    sp.add_argument("--levels", type=int, default=4)
    sp.add_argument("--t-eval", type=float, required=True)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("table1", help="per-node error table at h=pi/10, k=1/10")
    sp.add_argument("--out", default="table1.csv")
    sp.add_argument("--N", type=int, default=10)
    sp.add_argument("--k", type=float, default=0.1)
    sp.add_argument(
        "--t-eval",
        type=float,
        default=None,
        help="evaluation time (default: the first time level t = k, where the "
        "reference values for this table are defined)",
    )

    sp = sub.add_parser("table2", help="max error at t=6 across Courant ratios")
    sp.add_argument("--out", default="table2.csv")
    sp.add_argument("--h", type=float, default=None, help="mesh width (default pi/50)")
    sp.add_argument("--t-final", type=float, default=6.0)

    sp = sub.add_parser("figures", help="emit profile and error-history series as CSV")
    sp.add_argument("--out-dir", default=".")
    sp.add_argument("--t-final", type=float, default=6.0)

    return parser


def _resolve_problem(value: str) -> DampedWaveProblem:
    if value in BUILTINS:
        return BUILTINS[value]()
    if os.path.exists(value):
        with open(value) as fh:
            return load_problem_config(fh.read())
    raise ProblemConfigError(
        f"{value!r} is neither a builtin ({sorted(BUILTINS)}) nor an existing config path"
    )


def _resolve_grid(problem: DampedWaveProblem, args) -> "SpatialGrid":
    a, b = problem.domain
    if args.N is not None:
        return build_grid(a, b, args.N)
    N = max(2, round((b - a) / args.h))
    grid = build_grid(a, b, N)
    if abs(grid.h - args.h) > 1e-9 * max(grid.h, args.h):
        print(f"note: h snapped to (b-a)/{N} = {grid.h!r}", file=sys.stderr)
    return grid


def _resolve_k(args, h: float) -> float:
    return args.k if args.k is not None else args.r * h


def _parse_pade(args) -> tuple[int, int] | None:
    if args.scheme != "fdST":
        if args.pade:
            raise ValueError("--pade only applies to --scheme fdST")
        return None
    if not args.pade:
        raise ValueError("--scheme fdST requires --pade S,T")
    parts = args.pade.split(",")
    if len(parts) != 2:
        raise ValueError(f"--pade expects 'S,T', got {args.pade!r}")
    return int(parts[0]), int(parts[1])


def _cmd_solve(args) -> int:
    problem = _resolve_problem(args.problem)
    grid = _resolve_grid(problem, args)
    k = _resolve_k(args, grid.h)
    config = config_for(args.scheme, k, _parse_pade(args))
    traj = solve_evolution(problem, grid, config, args.t_final, stride=args.stride)
    if problem.exact is not None:
        profile = harness.error_profile(traj, problem, args.t_final)
        rows = tuple(
            (float(profile.x[i]), float(profile.numeric[i]),
             float(profile.exact[i]), float(profile.abs_error[i]))
            for i in range(len(profile.x))
        )
        table = harness.Table(("x", "numeric", "exact", "abs_error"), rows)
        print(f"{config.label}: t={profile.t!r} max abs error = {profile.max_error:.6e}")
    else:
        idx = traj.nearest_index(args.t_final)
        x = grid.all_nodes()
        ts = float(traj.times[idx])
        numeric = np.concatenate(
            ([problem.u_a(ts)], traj.displacements[idx], [problem.u_b(ts)])
        )
        table = harness.Table(
            ("x", "numeric"),
            tuple((float(xi), float(vi)) for xi, vi in zip(x, numeric)),
        )
        print(f"{config.label}: wrote solution profile at t={ts!r}")
    harness.write_csv(table, args.out)
    if traj.blow_up:
        print(
            f"run diverged: non-finite state at step {traj.blow_up_index} "
            f"(t={traj.blow_up_index * k!r})",
            file=sys.stderr,
        )
        return EXIT_DIVERGED
    return EXIT_OK


def _cmd_compare(args) -> int:
    problem = _resolve_problem(args.problem)
    if problem.exact is None:
        return _fail("compare needs a problem with an exact solution", EXIT_USAGE)
    grid = _resolve_grid(problem, args)
    k = _resolve_k(args, grid.h)
    profiles = {}
    for name in harness.TABLE_SCHEMES:
        traj = solve_evolution(problem, grid, config_for(name, k), args.t_final)
        profiles[name] = harness.error_profile(traj, problem, args.t_final)
        flag = " (diverged)" if traj.blow_up or profiles[name].max_error > harness.DIVERGENCE_THRESHOLD else ""
        print(f"{name}: max abs error = {profiles[name].max_error:.6e}{flag}")
    x = profiles["oefd"].x
    rows = tuple(
        (float(x[i]),) + tuple(float(profiles[n].abs_error[i]) for n in harness.TABLE_SCHEMES)
        for i in range(len(x))
    )
    harness.write_csv(harness.Table(("x",) + harness.TABLE_SCHEMES, rows), args.out)
    return EXIT_OK


def _cmd_stability(args) -> int:
    verdict = stability.check_explicit_stability(args.k, args.h, args.gamma_max)
    print(f"explicit scheme verdict: {'stable' if verdict.stable else 'unstable'}")
    rows = []
    for cond in verdict.conditions:
        status = "pass" if cond.passed else "fail"
        print(
            f"  {cond.name}: value={cond.value:.6g} bound={cond.bound:.6g} "
            f"margin={cond.margin:.6g} [{status}]"
        )
        rows.append((cond.name, cond.value, cond.bound, cond.margin, cond.passed))
    if args.N is not None:
        spec = stability.implicit_amplification(args.N, args.h, args.k, args.gamma_max)
        print(f"implicit (1,1) max |mu| over modes: {spec.max_modulus:.12f}")
        if args.empirical:
            rho = _empirical_radius(args.N, args.h, args.k, args.gamma_max, args.seed)
            print(f"implicit (1,1) empirical spectral radius (seed={args.seed}): {rho:.9f}")
    elif args.empirical:
        return _fail("--empirical needs --N", EXIT_USAGE)
    if args.out:
        table = harness.Table(("condition", "value", "bound", "margin", "passed"), tuple(rows))
        harness.write_csv(table, args.out)
    return EXIT_OK


def _empirical_radius(N: int, h: float, k: float, gamma_max: float, seed: int) -> float:
    problem = DampedWaveProblem(
        domain=(0.0, N * h),
        gamma=lambda x: gamma_max,
        g=lambda x, t: 0.0,
        phi=lambda x: 0.0,
        psi=lambda x: 0.0,
        u_a=lambda t: 0.0,
        u_b=lambda t: 0.0,
        name="stability-probe",
    )
    grid = build_grid(0.0, N * h, N)
    op = assemble_system(grid, problem)
    stepper = make_stepper(config_for("fd11", k), op, grid, problem)

    def amplify(v):
        return step_semigroup(stepper, StateVector(0.0, v)).values

    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return spectral_radius(amplify, op.size, seed=seed)


def _cmd_convergence(args) -> int:
    problem = _resolve_problem(args.problem)
    if problem.exact is None:
        return _fail("convergence needs a problem with an exact solution", EXIT_USAGE)
    report = harness.observed_order(
        problem,
        args.scheme,
        args.axis,
        args.base_k,
        args.base_N,
        args.levels,
        args.t_eval,
        _parse_pade(args),
    )
    rows = []
    for j in range(len(report.levels)):
        order = "" if j == 0 or not math.isfinite(report.orders[j - 1]) else float(report.orders[j - 1])
        rows.append((j, float(report.levels[j]), float(report.max_errors[j]), order))
        shown = f"{order:.3f}" if isinstance(order, float) else "-"
        print(
            f"level {j}: {report.axis}={report.levels[j]:.6g} "
            f"max_error={report.max_errors[j]:.6e} order={shown}"
        )
    harness.write_csv(
        harness.Table(("level", report.axis == "time" and "k" or "h", "max_error", "order"), tuple(rows)),
        args.out,
    )
    return EXIT_OK


def _cmd_table1(args) -> int:
    table = harness.reproduce_table1(N=args.N, k=args.k, t_eval=args.t_eval)
    harness.write_csv(table, args.out)
    print(f"wrote {args.out} ({len(table.rows)} rows)")
    return EXIT_OK


def _cmd_table2(args) -> int:
    table = harness.reproduce_table2(h=args.h, t_final=args.t_final)
    harness.write_csv(table, args.out)
    for row in table.rows:
        cells = dict(zip(table.columns, row))
        flags = [n for n in harness.TABLE_SCHEMES if cells[f"{n}_diverged"]]
        note = f"  diverged: {', '.join(flags)}" if flags else ""
        print(f"r={cells['r']}: done{note}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_figures(args) -> int:
    from .problems import sample_problem

    problem = sample_problem()
    os.makedirs(args.out_dir, exist_ok=True)
    print(
        f"note: profile mesh uses N={FIGURE_GRID_N} (h={math.pi / FIGURE_GRID_N:.5f}), "
        "the closest subdivision to the reference width 0.13464"
    )
    written = []
    for scheme in ("fd01", "fd11"):
        table = harness.solution_profile(problem, scheme, FIGURE_GRID_N, 0.05, 1.0)
        path = os.path.join(args.out_dir, f"figures_{scheme}_profile_N{FIGURE_GRID_N}_k0.05_t1.csv")
        harness.write_csv(table, path)
        written.append(path)
    h = math.pi / 50
    for r in FIGURE_R_VALUES:
        k = r * h
        for scheme in harness.TABLE_SCHEMES:
            table = harness.max_error_series(problem, scheme, 50, k, args.t_final)
            path = os.path.join(args.out_dir, f"figures_{scheme}_maxerr_r{r}.csv")
            harness.write_csv(table, path)
            written.append(path)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "compare": _cmd_compare,
    "stability": _cmd_stability,
    "convergence": _cmd_convergence,
    "table1": _cmd_table1,
    "table2": _cmd_table2,
    "figures": _cmd_figures,
}


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints usage itself; 2 on error, 0 on --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except SingularMatrixError as exc:
        return _fail(f"numerical failure: {exc}", EXIT_NUMERICAL)
    except (ProblemConfigError, ValueError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    except OSError as exc:
        return _fail(str(exc), EXIT_USAGE)


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
