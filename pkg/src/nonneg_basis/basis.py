"""A Schauder basis of non-negative functions for L1(0, oo).

Block ``i`` pairs the ``i``-th Haar function ``h_i`` with the bump
``u_i = 2 * 1_(pi(i)-1, pi(i)) + |h_i|`` and spans ``F_i`` by the two
non-negative functions ``x_i = u_i + h_i`` and ``y_i = u_i - h_i``.  The
Schauder order is ``x_1, y_1, x_2, y_2, ...``; position ``k = 2i - 1`` is
``x_i`` and ``k = 2i`` is ``y_i``.

``pi`` must be *admissible*: ``pi(1) = 1`` and ``pi(i) > j(i)`` for ``i > 1``,
where ``j(i)`` is the unit interval carrying ``h_i``.  Under the diagonal
Haar enumeration the identity qualifies, and it is the default.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .haar import (
    HaarIndex,
    abs_expansion,
    global_to_index,
    haar_analysis,
    haar_fn,
    host_interval,
    index_to_global,
)
from .stepfn import (
    ZERO,
    StepFunction,
    abs_,
    format_rational,
    linear_combination,
    norm_1,
    parse_rational,
)

__all__ = [
    "Permutation",
    "IDENTITY",
    "Admissibility",
    "pi_default",
    "is_admissible",
    "BasisBlock",
    "Expansion",
    "SchauderBasis",
    "DEFAULT_BASIS",
    "block",
    "analyze",
    "synthesize",
    "partial_sum",
    "basis_constant_profile",
]

HALF = Fraction(1, 2)


def pi_default(i: int) -> int:
    if i < 1:
        raise ValueError(f"block index must be >= 1, got {i}")
    return i


class Permutation:
    """A bijection of the positive integers with an explicit inverse."""

    def __init__(self, forward: Callable[[int], int], inverse: Callable[[int], int],
                 name: str = "custom") -> None:
        self._forward = forward
        self._inverse = inverse
        self.name = name

    def __call__(self, i: int) -> int:
        return self._forward(i)

    def inverse(self, m: int) -> int:
        return self._inverse(m)

    @classmethod
    def from_prefix(cls, images: Sequence[int], name: str = "custom") -> Permutation:
        """Permutation of ``1..N`` given by ``images``, extended by the identity."""
        images = list(images)
        size = len(images)
        if sorted(images) != list(range(1, size + 1)):
            raise ValueError("images must be a permutation of 1..N")
        forward = {i: m for i, m in enumerate(images, start=1)}
        backward = {m: i for i, m in forward.items()}
        return cls(lambda i: forward.get(i, i), lambda m: backward.get(m, m), name)

    def __repr__(self):
        return f"Permutation({self.name!r})"


IDENTITY = Permutation(pi_default, pi_default, "identity")


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    witness: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_admissible(rule: Callable[[int], int], N: int) -> Admissibility:
    """Check ``rule`` on ``1..N``: injective, ``pi(1) = 1``, ``pi(i) > j(i)``.

    On failure the first offending index is returned as the witness.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    seen: dict[int, int] = {}
    for i in range(1, N + 1):
        m = rule(i)
        if not isinstance(m, int) or m < 1:
            return Admissibility(False, i, f"pi({i}) = {m!r} is not a positive integer")
        if i == 1 and m != 1:
            return Admissibility(False, 1, f"pi(1) = {m}, must be 1")
        if i > 1 and m <= host_interval(i):
            return Admissibility(False, i, f"pi({i}) = {m} <= j({i}) = {host_interval(i)}")
        if m in seen:
            return Admissibility(False, i, f"pi({i}) = pi({seen[m]}) = {m}")
        seen[m] = i
    return Admissibility(True)


@dataclass(frozen=True)
class BasisBlock:
    i: int
    haar: HaarIndex
    pi_i: int
    u: StepFunction
    x: StepFunction
    y: StepFunction

    @property
    def h(self) -> StepFunction:
        return haar_fn(self.haar)

    def to_json(self) -> dict:
        return {
            "i": self.i,
            "haar": self.haar.to_json(),
            "pi": self.pi_i,
            "u": self.u.to_json(),
            "x": self.x.to_json(),
            "y": self.y.to_json(),
        }


@dataclass(frozen=True)
class Expansion:
    """Finite expansion ``sum_i a_i u_i + b_i h_i``.

    ``blocks`` maps a block index to ``(a_i, b_i)``; zero pairs are dropped.
    The Schauder coefficients are ``alpha_i = (a_i + b_i)/2`` on ``x_i`` and
    ``beta_i = (a_i - b_i)/2`` on ``y_i``.
    """

    blocks: Mapping[int, tuple[Fraction, Fraction]] = field(default_factory=dict)
    permutation: str = "identity"

    def __post_init__(self):
        clean = {}
        for i, (a, b) in sorted(self.blocks.items()):
            if not isinstance(i, int) or i < 1:
                raise ValueError(f"block index must be a positive integer, got {i!r}")
            a, b = parse_rational(a), parse_rational(b)
            if a or b:
                clean[i] = (a, b)
        object.__setattr__(self, "blocks", clean)

    def a(self, i: int) -> Fraction:
        return self.blocks.get(i, (ZERO, ZERO))[0]

    def b(self, i: int) -> Fraction:
        return self.blocks.get(i, (ZERO, ZERO))[1]

    def alpha(self, i: int) -> Fraction:
        return (self.a(i) + self.b(i)) / 2

    def beta(self, i: int) -> Fraction:
        return (self.a(i) - self.b(i)) / 2

    @property
    def max_block(self) -> int:
        return max(self.blocks, default=0)

    def schauder(self) -> dict[int, Fraction]:
        """Nonzero coefficients keyed by Schauder position ``k``."""
        out = {}
        for i, (a, b) in self.blocks.items():
            alpha, beta = (a + b) / 2, (a - b) / 2
            if alpha:
                out[2 * i - 1] = alpha
            if beta:
                out[2 * i] = beta
        return out

    @classmethod
    def from_schauder(cls, coeffs: Mapping[int, object],
                      permutation: str = "identity") -> Expansion:
        pairs: dict[int, list[Fraction]] = defaultdict(lambda: [ZERO, ZERO])
        for k, c in coeffs.items():
            if not isinstance(k, int) or k < 1:
                raise ValueError(f"Schauder position must be a positive integer, got {k!r}")
            pairs[(k + 1) // 2][(k + 1) % 2] += parse_rational(c)
        return cls({i: (al + be, al - be) for i, (al, be) in pairs.items()}, permutation)

    def truncate(self, K: int) -> Expansion:
        """Keep only the first ``K`` Schauder coefficients."""
        if K < 0:
            raise ValueError("K must be >= 0")
        kept = {k: c for k, c in self.schauder().items() if k <= K}
        return Expansion.from_schauder(kept, self.permutation)

    def __add__(self, other: Expansion) -> Expansion:
        out = dict(self.blocks)
        for i, (a, b) in other.blocks.items():
            a0, b0 = out.get(i, (ZERO, ZERO))
            out[i] = (a0 + a, b0 + b)
        return Expansion(out, self.permutation)

    def scaled(self, c) -> Expansion:
        c = parse_rational(c)
        return Expansion({i: (c * a, c * b) for i, (a, b) in self.blocks.items()},
                         self.permutation)

    def to_json(self) -> dict:
        return {
            "permutation": self.permutation,
            "blocks": [{"i": i, "a": format_rational(a), "b": format_rational(b)}
                       for i, (a, b) in self.blocks.items()],
            "schauder": [{"k": k, "coeff": format_rational(c)}
                         for k, c in self.schauder().items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Expansion:
        if not isinstance(data, Mapping):
            raise ValueError("expansion JSON must be an object")
        permutation = data.get("permutation", "identity")
        try:
            if "blocks" in data:
                blocks: dict[int, list[Fraction]] = defaultdict(lambda: [ZERO, ZERO])
                for entry in data["blocks"]:
                    pair = blocks[entry["i"]]
                    pair[0] += parse_rational(entry.get("a", 0))
                    pair[1] += parse_rational(entry.get("b", 0))
                return cls({i: tuple(p) for i, p in blocks.items()}, permutation)
            if "schauder" in data:
                coeffs: dict[int, Fraction] = defaultdict(Fraction)
                for entry in data["schauder"]:
                    coeffs[entry["k"]] += parse_rational(entry["coeff"])
                return cls.from_schauder(coeffs, permutation)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed expansion entry: {exc}") from None
        raise ValueError("expansion JSON needs 'blocks' or 'schauder'")


class SchauderBasis:
    """The basis ``x_1, y_1, x_2, y_2, ...`` for a fixed permutation."""

    def __init__(self, permutation: Permutation = IDENTITY) -> None:
        self.permutation = permutation
        self.block = lru_cache(maxsize=8192)(self._make_block)
        self._indicator = lru_cache(maxsize=None)(self._indicator_terms)

    def pi(self, i: int) -> int:
        return self.permutation(i)

    def _make_block(self, i: int) -> BasisBlock:
        if i < 1:
            raise ValueError(f"block index must be >= 1, got {i}")
        idx = global_to_index(i)
        m = self.pi(i)
        h = haar_fn(idx)
        u = linear_combination([(2, StepFunction.indicator(m - 1, m)), (1, abs_(h))])
        return BasisBlock(i, idx, m, u, u + h, u - h)

    def element(self, k: int) -> StepFunction:
        """Schauder element at position ``k``: ``x_i`` for odd ``k``, ``y_i`` for even."""
        blk = self.block((k + 1) // 2)
        return blk.x if k % 2 else blk.y

    def _indicator_terms(self, m: int) -> tuple[tuple[int, Fraction, Fraction], ...]:
        # 1_(m-1,m) = (u_l - |h_l|)/2 with pi(l) = m, and |h_l| = 1_(j-1,j) + signed
        # coarser Haar terms on the same interval j < m; m = 1 is u_1 / 3.
        if m == 1:
            return ((1, Fraction(1, 3), ZERO),)
        owner = self.permutation.inverse(m)
        idx = global_to_index(owner)
        if idx.j >= m or self.pi(owner) != m:
            raise ValueError(f"permutation {self.permutation.name!r} is not admissible at block {owner}")
        acc: dict[int, list[Fraction]] = defaultdict(lambda: [ZERO, ZERO])
        acc[owner][0] += HALF
        for i, a, b in self._indicator(idx.j):
            acc[i][0] -= a / 2
            acc[i][1] -= b / 2
        for ancestor, sign in abs_expansion(idx)[1]:
            acc[index_to_global(ancestor)][1] -= sign * HALF
        return tuple((i, a, b) for i, (a, b) in sorted(acc.items()))

    def analyze(self, f: StepFunction) -> Expansion:
        """Coefficients ``(a_i, b_i)`` with ``f = sum a_i u_i + b_i h_i`` exactly."""
        averages, details = haar_analysis(f)
        acc: dict[int, list[Fraction]] = defaultdict(lambda: [ZERO, ZERO])
        for idx, d in details.items():
            acc[index_to_global(idx)][1] += d
        for m, c in enumerate(averages, start=1):
            if c:
                for i, a, b in self._indicator(m):
                    acc[i][0] += c * a
                    acc[i][1] += c * b
        return Expansion({i: tuple(p) for i, p in acc.items()}, self.permutation.name)

    def synthesize(self, expansion: Expansion) -> StepFunction:
        terms = []
        for i, (a, b) in expansion.blocks.items():
            if a:
                terms.append((a, self.block(i).u))
            if b:
                terms.append((b, haar_fn(global_to_index(i))))
        return linear_combination(terms)

    def partial_sum(self, f: StepFunction, K: int) -> StepFunction:
        if K < 0:
            raise ValueError("K must be >= 0")
        expansion = self.analyze(f)
        if K >= 2 * expansion.max_block:
            return f
        return self.synthesize(expansion.truncate(K))

    def basis_constant_profile(self, f: StepFunction, K_max: int | None = None) -> list[Fraction]:
        """``norm_1(S_K f) / norm_1(f)`` for ``K = 1 .. K_max`` (entry ``K-1``).

        Partial sums are accumulated incrementally on a per-unit-interval grid,
        so each step only pays for the cells its basis element touches.
        """
        expansion = self.analyze(f)
        if not expansion.blocks:
            raise ValueError("profile of the zero function is undefined")
        coeffs = expansion.schauder()
        if K_max is None:
            K_max = 2 * expansion.max_block
        res = max([f.resolution] + [global_to_index(i).n + 1 for i in expansion.blocks])
        canvas = _Canvas(res)
        total = norm_1(f)
        profile = []
        for k in range(1, K_max + 1):
            c = coeffs.get(k)
            if c:
                canvas.add(c, self.element(k))
            profile.append(canvas.norm() / total)
        return profile


class _Canvas:
    """Mutable dense accumulator, one cell array per touched unit interval."""

    def __init__(self, resolution: int) -> None:
        self.resolution = resolution
        self.width = 1 << resolution
        self.cells: dict[int, list[Fraction]] = {}
        self.mass: dict[int, Fraction] = {}
        self.total = ZERO

    def add(self, coef: Fraction, f: StepFunction) -> None:
        shift = self.resolution - f.resolution
        width = self.width
        touched = set()
        for s, e, v in f.runs:
            s, e = s << shift, e << shift
            cv = coef * v
            while s < e:
                m = s // width
                stop = min(e, (m + 1) * width)
                cells = self.cells.setdefault(m, [ZERO] * width)
                for t in range(s - m * width, stop - m * width):
                    cells[t] += cv
                touched.add(m)
                s = stop
        for m in touched:
            new = sum((abs(v) for v in self.cells[m]), ZERO)
            self.total += new - self.mass.get(m, ZERO)
            self.mass[m] = new

    def norm(self) -> Fraction:
        return self.total / self.width


DEFAULT_BASIS = SchauderBasis()


def block(i: int) -> BasisBlock:
    return DEFAULT_BASIS.block(i)


def analyze(f: StepFunction) -> Expansion:
    return DEFAULT_BASIS.analyze(f)


def synthesize(expansion: Expansion) -> StepFunction:
    return DEFAULT_BASIS.synthesize(expansion)


def partial_sum(f: StepFunction, K: int) -> StepFunction:
    return DEFAULT_BASIS.partial_sum(f, K)


def basis_constant_profile(f: StepFunction, K_max: int | None = None) -> list[Fraction]:
    return DEFAULT_BASIS.basis_constant_profile(f, K_max)
