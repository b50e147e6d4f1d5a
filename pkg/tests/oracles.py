"""Independent reference computations used by the tests.

Everything here works on dense cell lists and plain loops, deliberately
avoiding the run-based code paths of the library.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction


def dense(f, support_len=None, resolution=None):
    """Cell values of ``f`` on a (possibly finer/longer) grid, from ``f.values``."""
    support_len = support_len or f.support_len
    resolution = f.resolution if resolution is None else resolution
    k = resolution - f.resolution
    vals = list(f.values)
    out = []
    for t in range(support_len << resolution):
        src = t >> k
        out.append(vals[src] if src < len(vals) else Fraction(0))
    return out


def cell_value(f, t: Fraction) -> Fraction:
    """Value at a point strictly inside a cell."""
    cell = math.floor(t * (1 << f.resolution))
    vals = f.values
    return vals[cell] if cell < len(vals) else Fraction(0)


def coordinates(f, M: int, haar_indices):
    """Unit averages on (0, M) and ``left - right`` integrals, by direct summation."""
    r = max([f.resolution] + [idx.n + 1 for idx in haar_indices])
    cells = dense(f, max(M, f.support_len), r)
    w = Fraction(1, 1 << r)
    c = [sum(cells[(m << r):((m + 1) << r)], Fraction(0)) * w for m in range(M)]
    d = []
    for idx in haar_indices:
        half = 1 << (r - idx.n - 1)
        start = ((idx.j - 1) << r) + 2 * (idx.i - 1) * half
        left = sum(cells[start:start + half], Fraction(0))
        right = sum(cells[start + half:start + 2 * half], Fraction(0))
        d.append((left - right) * w)
    return c + d


def gauss_solve(A, b):
    """Exact Gaussian elimination with row pivoting over Fractions."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(rhs)] for row, rhs in zip(A, b)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[pivot] = M[pivot], M[col]
        for r in range(n):
            if r != col and M[r][col]:
                factor = M[r][col] / M[col][col]
                M[r] = [x - factor * y for x, y in zip(M[r], M[col])]
    return [M[r][n] / M[r][r] for r in range(n)]


def rademacher_brute(x, a, p):
    """Sign enumeration over dense cells with plain floats."""
    J = max(f.support_len for f in x)
    r = max(f.resolution for f in x)
    cols = [dense(f, J, r) for f in x]
    w = 1.0 / (1 << r)
    moment = 0.0
    for signs in itertools.product((1, -1), repeat=len(x)):
        for t in range(J << r):
            moment += abs(sum(s * float(c) * float(col[t])
                              for s, c, col in zip(signs, a, cols))) ** p * w
    moment /= 2 ** len(x)
    square = 0.0
    for t in range(J << r):
        square += math.sqrt(sum(float(c) ** 2 * float(col[t]) ** 2
                                for c, col in zip(a, cols))) ** p * w
    return (moment / square) ** (1.0 / p)


def identity_block_solve(f, M):
    """Coefficients (a_i, b_i), i <= M, of f in span{u_i, h_i} for the identity
    permutation, by a dense Fraction solve in unit-average/Haar coordinates.

    u_i is built straight from its definition 2*1_(i-1,i) + |h_i|.
    """
    from nonneg_basis.haar import global_to_index, haar_fn
    from nonneg_basis.stepfn import StepFunction, abs_, add

    haar = [global_to_index(i) for i in range(1, M + 1)]
    hs = [haar_fn(idx) for idx in haar]
    us = [add(StepFunction.indicator(i - 1, i, 2), abs_(h)) for i, h in zip(range(1, M + 1), hs)]
    cols = [coordinates(g, M, haar) for g in us + hs]
    matrix = [[col[row] for col in cols] for row in range(2 * M)]
    sol = gauss_solve(matrix, coordinates(f, M, haar))
    return {i: (sol[i - 1], sol[M + i - 1]) for i in range(1, M + 1)
            if sol[i - 1] or sol[M + i - 1]}
