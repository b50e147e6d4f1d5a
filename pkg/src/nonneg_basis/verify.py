"""Checks of the norm inequalities satisfied by the basis and by
non-negative families in L_p.

Every check returns a :class:`VerifyReport`.  Comparisons are exact rational
except where an irrational ``p``-th power forces floating point; those use a
relative tolerance of ``REL_TOL``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .basis import DEFAULT_BASIS, SchauderBasis
from .haar import global_to_index, haar_fn
from .stepfn import (
    ZERO,
    StepFunction,
    common_segments,
    conditional_expectation,
    format_rational,
    linear_combination,
    norm_1,
    norm_2_sq,
    norm_p_float,
    parse_rational,
)

__all__ = [
    "REL_TOL",
    "MAX_RADEMACHER_TERMS",
    "VerifyReport",
    "merge_reports",
    "fdd_bounds",
    "fdd_check",
    "prop2_lower",
    "prop2_case",
    "norm_identity_check",
    "projection_check",
    "pointwise_chain",
    "rademacher_ratio",
    "rademacher_ratio_power",
    "khintchine_default",
    "lp_equivalence_constants",
    "disjoint_lp_identity",
]

REL_TOL = 1e-12
MAX_RADEMACHER_TERMS = 14


@dataclass(frozen=True)
class VerifyReport:
    check_name: str
    trials: int
    violations: int
    worst_margin: Fraction | float | None
    witness: dict | None = None
    worst_trial: int | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_json(self) -> dict:
        margin = self.worst_margin
        if isinstance(margin, Fraction):
            margin = format_rational(margin)
        return {
            "check": self.check_name,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": margin,
            "witness": self.witness,
        }


def _margin_key(report: VerifyReport):
    # None sorts last; ties are broken by the earliest trial so that merging
    # is independent of the order in which partial reports arrive
    if report.worst_margin is None:
        return (1, 0, report.worst_trial or 0)
    return (0, report.worst_margin, report.worst_trial or 0)


def merge_reports(reports: Sequence[VerifyReport], check_name: str | None = None,
                  keep_witness: bool = False) -> VerifyReport:
    """Combine partial reports: trials and violations add, margins take the min."""
    if not reports:
        raise ValueError("nothing to merge")
    name = check_name or reports[0].check_name
    worst = min(reports, key=_margin_key)
    violations = sum(r.violations for r in reports)
    witness = worst.witness if (violations or keep_witness) else None
    return VerifyReport(name, sum(r.trials for r in reports), violations,
                        worst.worst_margin, witness, worst.worst_trial)


def _single(name, ok, margin, witness, keep_witness=False, trial=0):
    return VerifyReport(name, 1, 0 if ok else 1, margin,
                        witness if (keep_witness or not ok) else None, trial)


def _frac_list(values):
    return [format_rational(v) for v in values]


# -- block inequalities ------------------------------------------------------

def fdd_bounds(a: Sequence, b: Sequence,
               basis: SchauderBasis = DEFAULT_BASIS) -> tuple[Fraction, Fraction, Fraction]:
    """``(lhs, mid, rhs)`` for coefficient vectors over blocks ``1..N``.

    ``mid = ||sum a_i u_i + b_i h_i||_1`` and the claim is
    ``|a|_1 / 2 + ||sum b_i h_i|| / 8 <= mid <= 3 |a|_1 + ||sum b_i h_i||``.
    """
    a = [parse_rational(v) for v in a]
    b = [parse_rational(v) for v in b]
    if len(a) != len(b):
        raise ValueError("a and b must have the same length")
    haar_part = linear_combination(
        (bi, haar_fn(global_to_index(i))) for i, bi in enumerate(b, start=1) if bi)
    mixed = linear_combination(
        [(ai, basis.block(i).u) for i, ai in enumerate(a, start=1) if ai]
        + [(1, haar_part)])
    sum_a = sum((abs(v) for v in a), ZERO)
    hb = norm_1(haar_part)
    return sum_a / 2 + hb / 8, norm_1(mixed), 3 * sum_a + hb


def fdd_check(a: Sequence, b: Sequence, keep_witness: bool = False,
              basis: SchauderBasis = DEFAULT_BASIS) -> VerifyReport:
    lhs, mid, rhs = fdd_bounds(a, b, basis)
    margin = min(mid - lhs, rhs - mid)
    witness = {"a": _frac_list(a), "b": _frac_list(b),
               "lhs": format_rational(lhs), "mid": format_rational(mid),
               "rhs": format_rational(rhs)}
    return _single("fdd", margin >= 0, margin, witness, keep_witness)


def prop2_case(i: int, basis: SchauderBasis = DEFAULT_BASIS) -> str:
    """``"included"`` if ``h_i`` lives on ``(pi(i)-1, pi(i))``, else ``"disjoint"``."""
    # h_i is supported inside its host unit interval, so these are the only cases
    return "included" if global_to_index(i).j == basis.pi(i) else "disjoint"


def prop2_lower(i: int, a, b, keep_witness: bool = False,
                basis: SchauderBasis = DEFAULT_BASIS) -> VerifyReport:
    """Lower bounds for ``||a x_i + b y_i||_1`` in both support cases.

    Disjoint case: at least ``|a| + |b|``.  Included case, support of size
    ``2^-s``: at least ``2^(-s-1) (|c a + 2b| + |c b + 2a|)`` with
    ``c = 2^(s+1) + 2``, which in turn is at least ``max(|a|, |b|)``.
    """
    a, b = parse_rational(a), parse_rational(b)
    blk = basis.block(i)
    value = norm_1(linear_combination([(a, blk.x), (b, blk.y)]))
    case = prop2_case(i, basis)
    witness = {"i": i, "a": format_rational(a), "b": format_rational(b),
               "case": case, "norm": format_rational(value)}
    if case == "disjoint":
        margin = value - (abs(a) + abs(b))
    else:
        s = blk.haar.n
        c = (1 << (s + 1)) + 2
        middle = Fraction(abs(c * a + 2 * b) + abs(c * b + 2 * a), 1 << (s + 1))
        witness["intermediate"] = format_rational(middle)
        margin = min(value - middle, middle - max(abs(a), abs(b)))
    return _single("prop2", margin >= 0, margin, witness, keep_witness)


def norm_identity_check(i: int, basis: SchauderBasis = DEFAULT_BASIS) -> VerifyReport:
    """``||x_i||_1 = ||y_i||_1 = 3`` with ``x_i, y_i >= 0`` cellwise."""
    blk = basis.block(i)
    nx, ny = norm_1(blk.x), norm_1(blk.y)
    low = min(blk.x.min_value(), blk.y.min_value())
    ok = nx == 3 and ny == 3 and low >= 0
    margin = min(-abs(nx - 3), -abs(ny - 3), low)
    witness = {"i": i, "norm_x": format_rational(nx), "norm_y": format_rational(ny),
               "min_cell": format_rational(low)}
    return _single("norms", ok, margin, witness)


def projection_check(f: StepFunction, keep_witness: bool = False) -> VerifyReport:
    """Averaging over unit intervals has norm one; its complement norm at most two."""
    ef = conditional_expectation(f)
    nf = norm_1(f)
    margin = min(nf - norm_1(ef), 2 * nf - norm_1(f - ef))
    return _single("projections", margin >= 0, margin, {"f": f.to_json()}, keep_witness)


# -- L_p chains ----------------------------------------------------------------

def _check_nonnegative(x: Sequence[StepFunction]):
    for n, fn in enumerate(x):
        if not fn.is_nonnegative():
            raise ValueError(f"family member {n} has a negative cell")


def pointwise_chain(x: Sequence[StepFunction], a: Sequence,
                    keep_witness: bool = False) -> VerifyReport:
    """Cellwise ``max |a_n| x_n <= (sum a_n^2 x_n^2)^(1/2) <= sum |a_n| x_n``.

    Compared through squares, so the check is exact.  The margin is the
    smallest gap between consecutive squared terms over all cells.
    """
    _check_nonnegative(x)
    a = [parse_rational(v) for v in a]
    if len(a) != len(x):
        raise ValueError("need one coefficient per function")
    if not x:
        raise ValueError("empty family")
    _, _, segments = common_segments(x)
    margin = None
    worst = None
    for start, stop, vals in segments:
        terms = [abs(c) * v for c, v in zip(a, vals)]
        top = max(terms)
        square = sum((t * t for t in terms), ZERO)
        total = sum(terms, ZERO)
        gap = min(square - top * top, total * total - square)
        if margin is None or gap < margin:
            margin, worst = gap, (start, stop)
    if margin is None:
        margin = ZERO
    witness = {"x": [fn.to_json() for fn in x], "a": _frac_list(a), "cells": worst}
    return _single("chain", margin >= 0, margin, witness, keep_witness)


def khintchine_default(p: float) -> float:
    """Default Khintchine upper constant: 1 for ``p <= 2``, ``sqrt(p)`` above."""
    return 1.0 if p <= 2 else math.sqrt(p)


def _validate_family(x, a, p):
    _check_nonnegative(x)
    if len(x) != len(a):
        raise ValueError("need one coefficient per function")
    if not 1 <= len(x) <= MAX_RADEMACHER_TERMS:
        raise ValueError(f"family size must be between 1 and {MAX_RADEMACHER_TERMS}")
    if p < 1:
        raise ValueError("p must be >= 1")
    for n, fn in enumerate(x):
        if abs(norm_p_float(fn, p) - 1.0) > REL_TOL:
            raise ValueError(f"family member {n} is not normalised in L_{p}")


def rademacher_ratio(x: Sequence[StepFunction], a: Sequence, p: float) -> float:
    """Average of ``||sum eps_n a_n x_n||_p^p`` over all ``2^N`` sign patterns,
    to the power ``1/p``, divided by ``||(sum a_n^2 x_n^2)^(1/2)||_p``."""
    a = [parse_rational(v) for v in a]
    _validate_family(x, a, p)
    _, res, segments = common_segments(x)
    if not segments:
        raise ValueError("family is identically zero")
    lengths = np.array([float(e - s) for s, e, _ in segments]) / float(1 << res)
    weighted = np.array([[float(c * v) for c, v in zip(a, vals)] for _, _, vals in segments])
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=len(a))))
    sums = np.abs(signs @ weighted.T) ** p
    moment = math.fsum(sums @ lengths) / len(signs)
    square = np.sqrt(np.sum(weighted ** 2, axis=1)) ** p
    denom = math.fsum(square * lengths)
    if denom == 0:
        raise ValueError("square function vanishes")
    return (moment / denom) ** (1.0 / p)


def _exact_sqrt(q: Fraction) -> Fraction | None:
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(num, den)
    return None


def rademacher_ratio_power(x: Sequence[StepFunction], a: Sequence, p: int) -> Fraction | None:
    """Exact ``R^p`` for ``p`` in {1, 2}, or ``None`` if not rational.

    The sign average on each cell only involves the functions active there,
    so only those signs are enumerated.  For ``p = 1`` the square function
    must be a rational square on every cell (true for disjoint families).
    """
    if p not in (1, 2):
        raise ValueError("exact ratio only for p in {1, 2}")
    a = [parse_rational(v) for v in a]
    _check_nonnegative(x)
    if len(x) != len(a):
        raise ValueError("need one coefficient per function")
    _, res, segments = common_segments(x)
    moment = ZERO
    denom = ZERO
    for s, e, vals in segments:
        terms = [c * v for c, v in zip(a, vals) if c * v]
        length = e - s
        if p == 2:
            sq = sum((t * t for t in terms), ZERO)
            moment += sq * length
            denom += sq * length
            continue
        total = ZERO
        for signs in itertools.product((1, -1), repeat=len(terms)):
            total += abs(sum((sg * t for sg, t in zip(signs, terms)), ZERO))
        moment += total / (1 << len(terms)) * length
        root = _exact_sqrt(sum((t * t for t in terms), ZERO))
        if root is None:
            return None
        denom += root * length
    if denom == 0:
        raise ValueError("square function vanishes")
    # both sides carry the same 2^-res cell width
    return moment / denom


def lp_equivalence_constants(K: float, p: float, B_p: float | None = None) -> tuple[float, float]:
    """Two-sided constants comparing ``||sum a_n x_n||_p`` with ``|a|_p``.

    For ``p <= 2`` they are ``(1/K, K)``.  For ``p > 2``, with
    ``1/2 = theta + (1 - theta)/p``, the lower one is
    ``(K^2 B_p)^(-1/(1-theta))``.
    """
    if K < 1 or p < 1:
        raise ValueError("need K >= 1 and p >= 1")
    if B_p is None:
        B_p = khintchine_default(p)
    if B_p <= 0:
        raise ValueError("B_p must be positive")
    if p <= 2:
        return 1.0 / K, float(K)
    theta = interpolation_theta(p)
    return (K * K * B_p) ** (-1.0 / (1.0 - theta)), float(K)


def interpolation_theta(p: float) -> float:
    """``theta`` solving ``1/2 = theta/1 + (1-theta)/p``."""
    return (p - 2) / (2 * (p - 1))


def disjoint_lp_identity(x: Sequence[StepFunction], a: Sequence, p: float,
                         keep_witness: bool = False) -> VerifyReport:
    """``||sum a_n x_n||_p = (sum |a_n|^p)^(1/p)`` for disjoint normalised ``x_n``.

    Exact for ``p`` in {1, 2} (compared as p-th powers), relative error
    at most ``REL_TOL`` otherwise.
    """
    a = [parse_rational(v) for v in a]
    _check_nonnegative(x)
    if len(x) != len(a):
        raise ValueError("need one coefficient per function")
    _, _, segments = common_segments(x)
    for _, _, vals in segments:
        if sum(1 for v in vals if v) > 1:
            raise ValueError("supports overlap")
    combo = linear_combination(zip(a, x))
    witness = {"x": [fn.to_json() for fn in x], "a": _frac_list(a), "p": p}
    if p in (1, 2):
        exact_norm = norm_1 if p == 1 else norm_2_sq
        for n, fn in enumerate(x):
            if exact_norm(fn) != 1:
                raise ValueError(f"family member {n} is not normalised in L_{p}")
        observed = exact_norm(combo)
        claimed = sum((abs(c) ** int(p) for c in a), ZERO)
        margin = -abs(observed - claimed)
        return _single("disjoint-lp", margin == 0, margin, witness, keep_witness)
    for n, fn in enumerate(x):
        if abs(norm_p_float(fn, p) - 1.0) > REL_TOL:
            raise ValueError(f"family member {n} is not normalised in L_{p}")
    observed = norm_p_float(combo, p)
    claimed = math.fsum(float(abs(c)) ** p for c in a) ** (1.0 / p)
    rel = abs(observed - claimed) / claimed if claimed else abs(observed)
    return _single("disjoint-lp", rel <= REL_TOL, -rel, witness, keep_witness)
