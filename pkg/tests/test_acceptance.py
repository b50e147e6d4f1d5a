"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""
import math
import os
import subprocess
import sys
import time
from fractions import Fraction


from oracles import identity_block_solve
from nonneg_basis.basis import analyze, block, is_admissible, IDENTITY, partial_sum, synthesize
from nonneg_basis.haar import global_to_index, haar_fn
from nonneg_basis.stepfn import StepFunction, linear_combination
from nonneg_basis.suites import (
    DISJOINT_PS,
    RADEMACHER_PS,
    convergence_corpus,
    profile_summary,
    random_step_function,
    run_suite,
    trial_rng,
)
from nonneg_basis.verify import REL_TOL, interpolation_theta, lp_equivalence_constants

F = Fraction
SEED = 20240601


def _gate(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}"
    if detail:
        line += f" ({detail})"
    print("\n" + line)
    assert ok, line


def _no_violations(report):
    return report.violations == 0, f"trials={report.trials} worst_margin={report.to_json()['worst_margin']}"


def test_01_norm_identity():
    start = time.perf_counter()
    report = run_suite("norms", imax=2000)
    elapsed = time.perf_counter() - start
    ok, detail = _no_violations(report)
    _gate(1, "norm_1(x_i) = norm_1(y_i) = 3, x_i, y_i >= 0 for i <= 2000",
          ok and report.trials == 2000 and elapsed < 30, f"{detail} {elapsed:.1f}s")


def test_02_roundtrip():
    start = time.perf_counter()
    failures = 0
    for t in range(500):
        f = random_step_function(trial_rng(SEED, t))
        if synthesize(analyze(f)) != f:
            failures += 1
    elapsed = time.perf_counter() - start
    _gate(2, "synthesize(analyze(f)) = f on 500 random functions",
          failures == 0 and elapsed < 60, f"failures={failures} {elapsed:.1f}s")


def test_03_biorthogonality():
    failures = [k for k in range(1, 201)
                if analyze(block(k).x).schauder() != {2 * k - 1: 1}
                or analyze(block(k).y).schauder() != {2 * k: 1}]
    _gate(3, "analyze(x_k), analyze(y_k) are unit vectors for k <= 200",
          not failures, f"failures={failures[:5]}")


def test_04_dense_oracle():
    M = 12
    failures = 0
    for t in range(100):
        rng = trial_rng(SEED + 4, t)
        terms = [(F(rng.randint(-64, 64), rng.randint(1, 64)), StepFunction.indicator(m - 1, m))
                 for m in range(1, M + 1) if rng.random() < 0.7]
        terms += [(F(rng.randint(-64, 64), rng.randint(1, 64)), haar_fn(global_to_index(g)))
                  for g in range(1, M + 1) if rng.random() < 0.7]
        f = linear_combination(terms)
        expansion = analyze(f)
        if expansion.max_block > M or expansion.blocks != identity_block_solve(f, M):
            failures += 1
    _gate(4, "analyze agrees with a dense exact solve for pi(i) <= 12, 100 trials",
          failures == 0, f"failures={failures}")


def test_05_fdd():
    start = time.perf_counter()
    ok, detail = _no_violations(run_suite("fdd", trials=1000, seed=SEED))
    elapsed = time.perf_counter() - start
    _gate(5, "lhs <= mid <= rhs for block-coefficient pairs, 1000 trials",
          ok and elapsed < 60, f"{detail} {elapsed:.1f}s")


def test_06_prop2():
    ok, detail = _no_violations(run_suite("prop2", trials=1000, seed=SEED, imax=500))
    _gate(6, "lower bounds for a x_i + b y_i, 1000 trials with i <= 500", ok, detail)


def test_07_projections():
    ok, detail = _no_violations(run_suite("projections", trials=1000, seed=SEED))
    _gate(7, "unit-average projection norm 1 and complement norm 2, 1000 trials", ok, detail)


def test_08_convergence_profile():
    corpus = convergence_corpus(SEED, 20)
    peak = F(0)
    exact_end = True
    for f in corpus:
        summary = profile_summary(f)
        peak = max(peak, summary["max_ratio"])
        exact_end = exact_end and summary["final_ratio"] == 1 \
            and partial_sum(f, summary["K_final"]) == f
    second = profile_summary(StepFunction.indicator(1, 2))["profile"]
    ok = exact_end and peak <= 64 and second == [1, F(1, 2), F(3, 4), 1]
    _gate(8, "partial sums reach f exactly; max ratio <= 64; profile of 1_(1,2)",
          ok, f"observed max ratio {peak} = {float(peak):.6g}")


def test_09_pointwise_chain():
    ok, detail = _no_violations(run_suite("chain", trials=200, seed=SEED))
    _gate(9, "max <= square function <= absolute sum cellwise, 200 families", ok, detail)


def test_10_rademacher_window():
    start = time.perf_counter()
    details, ok = [], True
    for p in RADEMACHER_PS:
        report = run_suite("rademacher", trials=50, seed=SEED, p=p)
        ok = ok and report.violations == 0
        details.append(f"p={p}: worst_margin={report.worst_margin:.3g}")
    elapsed = time.perf_counter() - start
    _gate(10, "Rademacher ratio in [0.70, max(1, sqrt p)], disjoint R = 1, N <= 12",
          ok and elapsed < 120, "; ".join(details) + f"; {elapsed:.1f}s")


def test_11_disjoint_lp():
    details, ok = [], True
    for p in DISJOINT_PS:
        report = run_suite("disjoint-lp", trials=100, seed=SEED, p=p)
        ok = ok and report.violations == 0
        if p in (1, 2):
            ok = ok and report.worst_margin == 0
        else:
            ok = ok and -report.worst_margin <= REL_TOL
        details.append(f"p={p}: worst_margin={report.worst_margin:.3g}")
    _gate(11, "disjoint l_p identity, exact for p in {1,2}, 1e-12 otherwise",
          ok, "; ".join(details))


def test_12_constants():
    # theta = (p-2)/(2(p-1)) and lower = (K^2 B)^(-1/(1-theta)), recomputed by hand:
    # p=4: theta=1/3, exponent -3/2; p=3: theta=1/4, exponent -4/3
    cases = [
        ((1, 4, 2), 1 / 3, 2 ** -1.5),
        ((2, 4, 2), 1 / 3, 8 ** -1.5),
        ((1, 3, math.sqrt(3)), 1 / 4, 3 ** (-2 / 3)),
    ]
    errors = []
    for (K, p, B), theta, lower in cases:
        got_lower, got_upper = lp_equivalence_constants(K, p, B)
        errors.append(abs(interpolation_theta(p) - theta) / theta)
        errors.append(abs(got_lower - lower) / lower)
        errors.append(abs(got_upper - K) / K)
    worst = max(errors)
    _gate(12, "theta and lower constant match hand values", worst <= 1e-12, f"max rel err {worst:.2e}")


def test_13_permutation():
    start = time.perf_counter()
    result = is_admissible(IDENTITY, 100_000)
    elapsed = time.perf_counter() - start
    _gate(13, "identity is admissible for N = 1e5", bool(result) and elapsed < 5,
          f"{elapsed:.2f}s")


def _cli_verify(threads):
    env = dict(os.environ)
    env.pop("NONNEG_BASIS_THREADS", None)
    cmd = [sys.executable, "-m", "nonneg_basis", "verify", "fdd", "--trials", "1000",
           "--seed", "7", "--threads", str(threads)]
    done = subprocess.run(cmd, capture_output=True, text=True, env=env, check=False)
    return done.returncode, done.stdout


def test_14_cli_determinism():
    code1, out1 = _cli_verify(1)
    code8, out8 = _cli_verify(8)
    ok = code1 == code8 == 0 and out1 == out8 and out1.strip()
    _gate(14, "verify fdd --trials 1000 --seed 7 identical for 1 and 8 threads",
          bool(ok), out1.strip())
