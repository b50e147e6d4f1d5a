"""Mean-zero, L1-normalised Haar functions on the unit intervals (j-1, j).

``h^j_{n,i}`` equals ``+2^n`` on the left half and ``-2^n`` on the right half
of the dyadic interval ``(j-1 + (i-1) 2^-n, j-1 + i 2^-n)``.

All systems are merged into one sequence by a diagonal enumeration of pairs
``(j, l)``, where ``l = 2^n + i - 1`` is the lexicographic rank of ``(n, i)``
inside interval ``j``.  Diagonal ``s = j + l`` holds ``j = 1 .. s-1`` and the
global index is ``g = (s-1)(s-2)/2 + j``; in particular ``g = 1`` is
``h^1_{0,1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .stepfn import StepFunction, ZERO, _unit_pieces, linear_combination

__all__ = [
    "HaarIndex",
    "global_to_index",
    "index_to_global",
    "host_interval",
    "haar_fn",
    "haar_coeff",
    "haar_analysis",
    "haar_synthesis",
    "abs_expansion",
]


@dataclass(frozen=True, order=True)
class HaarIndex:
    j: int
    n: int
    i: int

    def __post_init__(self):
        for name in ("j", "n", "i"):
            if not isinstance(getattr(self, name), int):
                raise TypeError(f"{name} must be an integer")
        if self.j < 1:
            raise ValueError(f"j must be >= 1, got {self.j}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if not 1 <= self.i <= 1 << self.n:
            raise ValueError(f"i must lie in 1..{1 << self.n}, got {self.i}")

    @property
    def rank(self) -> int:
        """Lexicographic rank ``l`` of ``(n, i)`` within interval ``j``."""
        return (1 << self.n) + self.i - 1

    @classmethod
    def from_rank(cls, j: int, rank: int) -> HaarIndex:
        if rank < 1:
            raise ValueError(f"rank must be >= 1, got {rank}")
        n = rank.bit_length() - 1
        return cls(j, n, rank - (1 << n) + 1)

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        width = Fraction(1, 1 << self.n)
        left = self.j - 1 + (self.i - 1) * width
        return left, left + width

    def to_json(self) -> dict:
        return {"j": self.j, "n": self.n, "i": self.i}

    @classmethod
    def from_json(cls, data: Mapping) -> HaarIndex:
        return cls(data["j"], data["n"], data["i"])

    def __str__(self):
        return f"h^{self.j}_{{{self.n},{self.i}}}"


def global_to_index(g: int) -> HaarIndex:
    if not isinstance(g, int) or g < 1:
        raise ValueError(f"global index must be a positive integer, got {g!r}")
    # t = s - 2 is the largest integer with t(t+1)/2 <= g - 1
    t = (math.isqrt(8 * (g - 1) + 1) - 1) // 2
    j = g - t * (t + 1) // 2
    return HaarIndex.from_rank(j, t + 2 - j)


def index_to_global(idx: HaarIndex) -> int:
    s = idx.j + idx.rank
    return (s - 1) * (s - 2) // 2 + idx.j


def host_interval(g: int) -> int:
    """``j`` such that the ``g``-th Haar function lives on ``(j-1, j)``."""
    return global_to_index(g).j


def _half_cells(idx: HaarIndex, resolution: int) -> tuple[int, int, int]:
    """Start, midpoint and stop cells of the support at ``resolution``."""
    width = 1 << (resolution - idx.n - 1)
    start = ((idx.j - 1) << resolution) + 2 * (idx.i - 1) * width
    return start, start + width, start + 2 * width


def haar_fn(idx: HaarIndex) -> StepFunction:
    start, mid, stop = _half_cells(idx, idx.n + 1)
    height = 1 << idx.n
    return StepFunction.from_runs(idx.j, idx.n + 1,
                                  [(start, mid, height), (mid, stop, -height)])


def haar_coeff(f: StepFunction, idx: HaarIndex) -> Fraction:
    """``2^-n * integral(f * h_idx)``, i.e. left-half minus right-half integral."""
    left, right = idx.support
    mid = (left + right) / 2
    return f.integral_between(left, mid) - f.integral_between(mid, right)


def haar_analysis(f: StepFunction) -> tuple[list[Fraction], dict[HaarIndex, Fraction]]:
    """Unit-interval averages and nonzero Haar coefficients of ``f``.

    Runs a bottom-up pyramid of cell integrals on every unit interval that
    ``f`` touches.  Only indices with ``j <= J`` and ``n < r`` can appear.
    """
    r = f.resolution
    width = 1 << r
    dense: dict[int, list[Fraction]] = {}
    for m, s, e, v in _unit_pieces(f):
        cells = dense.setdefault(m, [ZERO] * width)
        cells[s:e] = [v] * (e - s)

    averages = [ZERO] * f.support_len
    coeffs: dict[HaarIndex, Fraction] = {}
    cell = Fraction(1, width)
    for m in sorted(dense):
        level = [v * cell for v in dense[m]]
        for n in range(r - 1, -1, -1):
            for k in range(1 << n):
                d = level[2 * k] - level[2 * k + 1]
                if d:
                    coeffs[HaarIndex(m, n, k + 1)] = d
            level = [level[2 * k] + level[2 * k + 1] for k in range(1 << n)]
        averages[m - 1] = level[0]
    return averages, dict(sorted(coeffs.items()))


def haar_synthesis(c: Sequence, d: Mapping[HaarIndex, object]) -> StepFunction:
    """Inverse of :func:`haar_analysis`: ``sum c_m 1_(m-1,m) + sum d_idx h_idx``."""
    terms = [(cm, StepFunction.indicator(m - 1, m)) for m, cm in enumerate(c, start=1)]
    terms += [(coef, haar_fn(idx)) for idx, coef in d.items()]
    return linear_combination(terms)


def abs_expansion(idx: HaarIndex) -> tuple[int, list[tuple[HaarIndex, int]]]:
    """Write ``|h_idx|`` as ``1_(j-1,j)`` plus signed coarser Haar functions.

    The chain lists the ``n`` ancestors ``h^j_{k, i_k}``, ``k = 0 .. n-1``,
    whose support contains that of ``h_idx``; the sign is ``+1`` when
    ``h_idx`` sits in the ancestor's left half and ``-1`` otherwise.
    """
    chain = []
    pos = idx.i - 1
    for k in range(idx.n):
        ancestor = (pos >> (idx.n - k)) + 1
        child = pos >> (idx.n - k - 1)
        chain.append((HaarIndex(idx.j, k, ancestor), 1 if child % 2 == 0 else -1))
    return idx.j, chain
