"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside pytest's own verdicts. Every tolerance is pinned here.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from dampwave.cli import run_command
from dampwave.harness import observed_order, reproduce_table1, reproduce_table2
from dampwave.linalg import matrix_exponential
from dampwave.operators import assemble_system, build_grid
from dampwave.pade import pade_coefficients
from dampwave.problems import sample_problem
from dampwave.schemes import (
    StateVector,
    config_for,
    make_stepper,
    solve_evolution,
    step_semigroup,
)
from dampwave.stability import (
    QuadraticCoeffs,
    check_explicit_stability,
    implicit_amplification,
    jury_stable,
)

GAMMA_STAR = 2.0  # damping maximum of the sample problem


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
    assert ok, f"{name}: {detail}"


def test_criterion_1_table1_reproduction():
    """Benchmark error table at h=pi/10, k=1/10: per-scheme bands around the
    reference values (which live at the table's first time level)."""
    table = reproduce_table1(N=10, k=0.1)
    bands = {
        "fd11": (2e-5, 8e-5),
        "fd01": (2.4e-3, 9.7e-3),
        "oefd": (2.0357e-4 / 2, 2.0357e-4 * 2),
        "oifd": (4.38439e-4 / 2, 4.38439e-4 * 2),
    }
    values = {name: max(table.column(name)) for name in bands}
    ok = all(lo <= values[n] <= hi for n, (lo, hi) in bands.items())
    detail = ", ".join(f"{n}={values[n]:.4e} in [{lo:.2e}, {hi:.2e}]"
                       for n, (lo, hi) in bands.items())
    report("criterion 1: quantitative error-table reproduction", ok, detail)


def test_criterion_2_table2_trends():
    """Long-horizon table at h=pi/50, t=6: explicit scheme diverges at r=1.59
    and is accurate at r=0.18; implicit (1,1) stays below 1e-4 at every r."""
    table = reproduce_table2()
    fd01 = dict(zip(table.column("r"), table.column("fd01")))
    fd11 = table.column("fd11")
    checks = [
        fd01[1.59] > 1e6,
        fd01[0.18] < 1e-3,
        all(v < 1e-4 for v in fd11),
    ]
    detail = (f"fd01(r=1.59)={fd01[1.59]:.3e}>1e6, fd01(r=0.18)={fd01[0.18]:.3e}<1e-3, "
              f"max fd11={max(fd11):.3e}<1e-4")
    report("criterion 2: long-horizon trend reproduction", all(checks), detail)


def test_criterion_3_implicit_amplification_sweep():
    """Randomized sweep (>= 1e4 samples): implicit amplification factors obey
    |mu| <= 1 + 1e-12 for every mode; zero violations."""
    rng = np.random.default_rng(20240817)
    samples = 10_000
    violations = 0
    worst = 0.0
    for _ in range(samples):
        N = int(rng.integers(2, 41))
        h = rng.uniform(0.01, 1.0)
        k = rng.uniform(0.001, 1.0)
        gamma = rng.uniform(0.0, 10.0)
        spec = implicit_amplification(N, h, k, gamma)
        worst = max(worst, spec.max_modulus)
        if spec.max_modulus > 1.0 + 1e-12:
            violations += 1
    report(
        "criterion 3: unconditional implicit stability (spectral sweep)",
        violations == 0,
        f"{samples} samples, worst max|mu|={worst:.15f}, violations={violations}",
    )


def test_criterion_4_jury_oracle_equivalence():
    """Jury test agrees with brute-force root moduli on 1e4 random quadratics
    (unit-circle margin 1e-9 excluded); zero disagreements."""
    rng = np.random.default_rng(424242)
    checked = 0
    disagreements = 0
    while checked < 10_000:
        a = rng.uniform(1e-3, 4.0)
        b = rng.uniform(-5.0, 5.0)
        c = rng.uniform(-5.0, 5.0)
        moduli = np.abs(np.roots([a, b, c]))
        if np.any(np.abs(moduli - 1.0) <= 1e-9):
            continue
        brute = bool(np.all(moduli < 1.0))
        if jury_stable(QuadraticCoeffs(a, b, c)) != brute:
            disagreements += 1
        checked += 1
    report(
        "criterion 4: Jury lemma equals brute-force root location",
        disagreements == 0,
        f"{checked} quadratics, disagreements={disagreements}",
    )


def test_criterion_5_convergence_orders():
    """4-level halving studies: temporal order of fd11 and spatial order of
    fd11 in [1.7, 2.3]; temporal order of fd01 inside its stability region
    in [0.7, 1.3]."""
    problem = sample_problem()
    studies = {
        "fd11 temporal": (
            observed_order(problem, "fd11", "time", 0.15, 200, 4, 0.3), (1.7, 2.3)),
        "fd01 temporal": (
            observed_order(problem, "fd01", "time", 0.04, 10, 4, 0.12), (0.7, 1.3)),
        "fd11 spatial": (
            observed_order(problem, "fd11", "space", 0.002, 5, 4, 0.3), (1.7, 2.3)),
    }
    ok = True
    parts = []
    for label, (rep, (lo, hi)) in studies.items():
        inside = bool(np.all(rep.orders >= lo) and np.all(rep.orders <= hi))
        ok = ok and inside
        parts.append(f"{label}: {np.round(rep.orders, 3).tolist()} in [{lo}, {hi}]")
    # fd01 stability-region precondition, stated explicitly
    assert check_explicit_stability(0.04, math.pi / 10, GAMMA_STAR).stable
    report("criterion 5: observed convergence orders", ok, "; ".join(parts))


def test_criterion_6_one_step_oracle():
    """Single-step defect against the exponential-propagator oracle shrinks
    by 2^3 (fd11) and 2^2 (fd01) when k halves; N=6."""
    problem = sample_problem()
    grid = build_grid(0.0, math.pi, 6)
    op = assemble_system(grid, problem)
    v0 = np.concatenate([np.sin(grid.interior_nodes), -np.sin(grid.interior_nodes)])
    ratios = {}
    for name in ("fd11", "fd01"):
        defects = []
        for k in (0.1, 0.05):
            stepper = make_stepper(config_for(name, k), op, grid, problem)
            numeric = step_semigroup(stepper, StateVector(0.0, v0)).values
            oracle = matrix_exponential(op, k) @ v0
            defects.append(np.linalg.norm(numeric - oracle, np.inf))
        ratios[name] = defects[0] / defects[1]
    ok = 6.0 <= ratios["fd11"] <= 10.0 and 3.0 <= ratios["fd01"] <= 5.0
    report(
        "criterion 6: one-step propagator-oracle refinement",
        ok,
        f"fd11 ratio={ratios['fd11']:.3f} in [6, 10], fd01 ratio={ratios['fd01']:.3f} in [3, 5]",
    )


def _run_fd01_magnitude(N: int, k: float, t_final: float) -> float:
    problem = sample_problem()
    grid = build_grid(0.0, math.pi, N)
    traj = solve_evolution(problem, grid, config_for("fd01", k), t_final)
    finite = traj.states[np.isfinite(traj.states)]
    peak = float(np.abs(finite).max()) if finite.size else math.inf
    return math.inf if traj.blow_up else peak


def test_criterion_7_verdict_vs_experiment():
    """20 verdict-stable points keep the explicit error below 1 at t=6;
    20 points with sqrt(k)/h > 1.2 sqrt(gamma*)/2 exceed magnitude 1e3 by
    t=6 (sampled well past the margin band, ratio 3.5..6)."""
    problem = sample_problem()

    stable_failures = []
    for alpha in (0.25, 0.45, 0.65, 0.85):
        for N in (6, 9, 12, 16, 20):
            grid = build_grid(0.0, math.pi, N)
            k = alpha * GAMMA_STAR * grid.h**2 / 4.0
            verdict = check_explicit_stability(k, grid.h, GAMMA_STAR)
            assert verdict.stable, (alpha, N)
            traj = solve_evolution(problem, grid, config_for("fd01", k), 6.0, stride=10**9)
            err = np.abs(
                traj.displacements[-1]
                - np.exp(-traj.final_time) * np.sin(grid.interior_nodes)
            ).max()
            if not err < 1.0:
                stable_failures.append((alpha, N, err))

    unstable_failures = []
    threshold = math.sqrt(GAMMA_STAR) / 2.0
    for ratio in (3.5, 4.33, 5.17, 6.0):
        for N in (40, 60, 80, 100, 120):
            grid = build_grid(0.0, math.pi, N)
            k = (ratio * threshold * grid.h) ** 2
            assert math.sqrt(k) / grid.h > 1.2 * threshold
            assert k < 2.0 / GAMMA_STAR  # only the mesh-ratio condition is violated
            peak = _run_fd01_magnitude(N, k, 6.0)
            if not peak > 1e3:
                unstable_failures.append((ratio, N, peak))

    ok = not stable_failures and not unstable_failures
    report(
        "criterion 7: stability verdict matches long-horizon experiment",
        ok,
        f"stable violations={stable_failures}, unstable violations={unstable_failures}",
    )


def test_criterion_8_pade_golden_table():
    """The four reference rational approximants of the exponential, exact in
    rational arithmetic."""
    golden = {
        (0, 1): ([Fraction(1), Fraction(1)], [Fraction(1)], Fraction(1, 2)),
        (0, 2): ([Fraction(1), Fraction(1), Fraction(1, 2)], [Fraction(1)], Fraction(1, 6)),
        (1, 0): ([Fraction(1)], [Fraction(1), Fraction(-1)], Fraction(-1, 2)),
        (1, 1): ([Fraction(1), Fraction(1, 2)], [Fraction(1), Fraction(-1, 2)], Fraction(-1, 12)),
    }
    mismatches = []
    for (S, T), (p, q, lead) in golden.items():
        approx = pade_coefficients(S, T)
        if not (list(approx.p_coeffs) == p and list(approx.q_coeffs) == q
                and approx.leading_error == lead):
            mismatches.append((S, T))
    report(
        "criterion 8: exact rational approximant table",
        not mismatches,
        f"4 rows checked exactly, mismatches={mismatches}",
    )


def test_criterion_9_cli_determinism(tmp_path):
    """Repeated table1 CLI invocations produce byte-identical CSV."""
    out1, out2 = tmp_path / "t1a.csv", tmp_path / "t1b.csv"
    code1 = run_command(["table1", "--out", str(out1)])
    code2 = run_command(["table1", "--out", str(out2)])
    b1, b2 = out1.read_bytes(), out2.read_bytes()
    ok = code1 == 0 and code2 == 0 and b1 == b2
    report(
        "criterion 9: byte-identical CLI table output",
        ok,
        f"exit codes ({code1}, {code2}), {len(b1)} bytes each, identical={b1 == b2}",
    )
