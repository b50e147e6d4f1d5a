"""Seeded randomised verification suites.

Trial ``t`` of a run with seed ``S`` draws everything from
``random.Random(trial_seed(S, t))``, where ``trial_seed`` is a splitmix64
mix.  Trials never share state, so a run can be split over any number of
worker processes and still produce the same report.
"""
from __future__ import annotations

import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .basis import DEFAULT_BASIS, IDENTITY, is_admissible
from .stepfn import StepFunction, norm_1, norm_p_float, scale
from .verify import (
    REL_TOL,
    VerifyReport,
    disjoint_lp_identity,
    fdd_check,
    format_rational,
    merge_reports,
    norm_identity_check,
    pointwise_chain,
    prop2_lower,
    projection_check,
    rademacher_ratio,
    rademacher_ratio_power,
)

MASK64 = (1 << 64) - 1

SUITES = ("fdd", "prop2", "norms", "projections", "chain", "rademacher",
          "disjoint-lp", "permutation")

DEFAULT_IMAX = {"prop2": 500, "norms": 2000, "permutation": 100_000}
RADEMACHER_PS = (1, 2, 3, 4)
DISJOINT_PS = (1, 1.5, 2, 3, 4)
RADEMACHER_LOWER = 0.70


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def trial_seed(seed: int, trial: int) -> int:
    return splitmix64(splitmix64(seed & MASK64) ^ (trial & MASK64))


def trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(trial_seed(seed, trial))


# -- generators ----------------------------------------------------------------

def random_rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-64, 64), rng.randint(1, 64))


def random_step_function(rng: random.Random, max_support: int = 6,
                         max_resolution: int = 6, nonnegative: bool = False) -> StepFunction:
    """J in [1, max_support], r in [0, max_resolution], values p/q with
    |p| <= 64, 1 <= q <= 64."""
    J = rng.randint(1, max_support)
    r = rng.randint(0, max_resolution)
    values = [random_rational(rng) for _ in range(J << r)]
    if nonnegative:
        values = [abs(v) for v in values]
    return StepFunction(J, r, values)


def random_nonzero_step_function(rng, **kwargs) -> StepFunction:
    while True:
        f = random_step_function(rng, **kwargs)
        if f.runs:
            return f


def random_coefficients(rng: random.Random, n: int, zero_rate: float = 0.0) -> list[Fraction]:
    out = [Fraction(0) if rng.random() < zero_rate else random_rational(rng) for _ in range(n)]
    if not any(out):
        out[rng.randrange(n)] = Fraction(rng.randint(1, 64), rng.randint(1, 64))
    return out


def normalize_lp(f: StepFunction, p: float) -> StepFunction:
    """Rescale to unit L_p norm; exact for p = 1, float-rounded otherwise."""
    if p == 1:
        return scale(f, 1 / norm_1(f))
    return scale(f, Fraction.from_float(1.0 / norm_p_float(f, p)))


def random_nonneg_family(rng, n: int, p: float | None = None) -> list[StepFunction]:
    family = [random_nonzero_step_function(rng, max_resolution=4, nonnegative=True)
              for _ in range(n)]
    if p is not None:
        family = [normalize_lp(f, p) for f in family]
    return family


def random_disjoint_family(rng, n: int, p: float) -> list[StepFunction]:
    """Non-negative, pairwise disjoint, unit L_p norm.

    For p in {1, 2} members are bumps ``4^(k/p) 1_I`` with ``|I| = 4^-k``, so
    the normalisation is exact; otherwise they are random non-negative
    shapes, each on its own unit interval.
    """
    slots = rng.sample(range(1, 2 * n + 1), n)
    family = []
    for m in slots:
        if p in (1, 2):
            k = rng.randint(0, 3)
            width = Fraction(1, 4 ** k)
            left = m - 1 + rng.randrange(4 ** k) * width
            height = 4 ** k if p == 1 else 2 ** k
            family.append(StepFunction.indicator(left, left + width, height))
        else:
            r = rng.randint(0, 4)
            values = [abs(random_rational(rng)) for _ in range(1 << r)]
            if not any(values):
                values[0] = Fraction(1)
            base = (m - 1) << r
            shape = StepFunction.from_runs(m, r, [(base + t, base + t + 1, v)
                                                  for t, v in enumerate(values)])
            family.append(normalize_lp(shape, p))
    return family


# -- per-trial checks ------------------------------------------------------------

def _tag(report: VerifyReport, trial: int) -> VerifyReport:
    return VerifyReport(report.check_name, report.trials, report.violations,
                        report.worst_margin, report.witness, trial)


def _trial_fdd(rng, trial, params):
    n = rng.randint(1, 50)
    a = random_coefficients(rng, n, zero_rate=0.25)
    b = random_coefficients(rng, n, zero_rate=0.25)
    return fdd_check(a, b, keep_witness=params["keep_witness"])


def _trial_prop2(rng, trial, params):
    imax = params["imax"]
    i = 1 if rng.random() < 0.25 else rng.randint(1, imax)
    a = random_rational(rng) if rng.random() < 0.9 else Fraction(0)
    b = random_rational(rng) if rng.random() < 0.9 else Fraction(0)
    return prop2_lower(i, a, b, keep_witness=params["keep_witness"])


def _trial_norms(rng, trial, params):
    return norm_identity_check(trial + 1)


def _trial_projections(rng, trial, params):
    return projection_check(random_step_function(rng), keep_witness=params["keep_witness"])


def _trial_chain(rng, trial, params):
    n = rng.randint(1, 8)
    family = random_nonneg_family(rng, n)
    return pointwise_chain(family, random_coefficients(rng, n), keep_witness=params["keep_witness"])


def _pick_p(params, trial, choices):
    return params["p"] if params["p"] is not None else choices[trial % len(choices)]


def _trial_rademacher(rng, trial, params):
    """Khintchine window for a general family plus R = 1 for a disjoint one."""
    p = _pick_p(params, trial, RADEMACHER_PS)
    n = rng.randint(1, 12)
    family = random_nonneg_family(rng, n, p)
    a = random_coefficients(rng, n)
    ratio = rademacher_ratio(family, a, p)
    upper = max(1.0, math.sqrt(p))
    margin = min(ratio - RADEMACHER_LOWER, upper - ratio)

    disjoint = random_disjoint_family(rng, n, p)
    a_disjoint = random_coefficients(rng, n)
    ratio_disjoint = rademacher_ratio(disjoint, a_disjoint, p)
    disjoint_ok = abs(ratio_disjoint - 1.0) <= REL_TOL
    if p in (1, 2):
        disjoint_ok = disjoint_ok and rademacher_ratio_power(disjoint, a_disjoint, int(p)) == 1

    # R = 1 is attained exactly (N = 1, or p = 2), so the edges get float slack
    ok = margin >= -REL_TOL * upper and disjoint_ok
    witness = {"p": p, "n": n, "ratio": ratio, "window": [RADEMACHER_LOWER, upper],
               "a": [format_rational(c) for c in a], "disjoint_ratio": ratio_disjoint}
    return VerifyReport("rademacher", 1, 0 if ok else 1, margin,
                        witness if (not ok or params["keep_witness"]) else None)


def _trial_disjoint_lp(rng, trial, params):
    p = _pick_p(params, trial, DISJOINT_PS)
    n = rng.randint(1, 8)
    family = random_disjoint_family(rng, n, p)
    a = random_coefficients(rng, n)
    report = disjoint_lp_identity(family, a, p, keep_witness=params["keep_witness"])
    margin = report.worst_margin
    # exact and float margins are mixed within one run; report floats throughout
    return VerifyReport(report.check_name, 1, report.violations, float(margin), report.witness)


_TRIALS = {
    "fdd": _trial_fdd,
    "prop2": _trial_prop2,
    "norms": _trial_norms,
    "projections": _trial_projections,
    "chain": _trial_chain,
    "rademacher": _trial_rademacher,
    "disjoint-lp": _trial_disjoint_lp,
}


def _run_chunk(name: str, seed: int, start: int, stop: int, params: dict) -> VerifyReport:
    trial_fn = _TRIALS[name]
    reports = [_tag(trial_fn(trial_rng(seed, t), t, params), t) for t in range(start, stop)]
    return merge_reports(reports, name, keep_witness=params["keep_witness"])


def _run_permutation(imax: int) -> VerifyReport:
    result = is_admissible(IDENTITY, imax)
    witness = None if result else {"index": result.witness, "reason": result.reason}
    return VerifyReport("permutation", imax, 0 if result else 1, Fraction(0) if result else Fraction(-1),
                        witness)


def resolve_threads(threads: int | str | None) -> int:
    if threads is None:
        threads = os.environ.get("NONNEG_BASIS_THREADS", "1")
    if threads == "auto":
        return os.cpu_count() or 1
    count = int(threads)
    if count < 1:
        raise ValueError("threads must be >= 1")
    return count


def run_suite(name: str, trials: int = 1000, seed: int = 0, threads: int | str | None = 1,
              imax: int | None = None, p: float | None = None,
              keep_witness: bool = False) -> VerifyReport:
    """Run one suite and return the aggregated report.

    ``norms`` and ``permutation`` are deterministic sweeps over ``1..imax``
    and ignore ``trials`` and ``seed``.  The result does not depend on
    ``threads``.
    """
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if imax is None:
        imax = DEFAULT_IMAX.get(name, 0)
    if name in DEFAULT_IMAX and imax < 1:
        raise ValueError("imax must be >= 1")
    if name == "permutation":
        return _run_permutation(imax)
    if name == "norms":
        trials = imax
    if trials < 1:
        raise ValueError("trials must be >= 1")
    params = {"imax": imax, "p": p, "keep_witness": keep_witness}
    workers = min(resolve_threads(threads), trials)
    if workers == 1:
        return _run_chunk(name, seed, 0, trials, params)
    bounds = [trials * w // workers for w in range(workers + 1)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, name, seed, lo, hi, params)
                   for lo, hi in zip(bounds, bounds[1:])]
        parts = [fut.result() for fut in futures]
    return merge_reports(parts, name, keep_witness=keep_witness)


def convergence_corpus(seed: int, count: int = 20) -> list[StepFunction]:
    """Indicators of (0,1), (1,2), (4,5) followed by ``count`` seeded random functions."""
    fixed = [StepFunction.indicator(0, 1), StepFunction.indicator(1, 2), StepFunction.indicator(4, 5)]
    return fixed + [random_nonzero_step_function(trial_rng(seed, t)) for t in range(count)]


def profile_summary(f: StepFunction, basis=DEFAULT_BASIS) -> dict:
    profile = basis.basis_constant_profile(f)
    peak = max(profile)
    return {"K_final": len(profile), "max_ratio": peak, "final_ratio": profile[-1],
            "profile": profile}
