"""Exact dyadic step functions on (0, J).

A :class:`StepFunction` with support length ``J`` and resolution ``r`` is
constant on each open cell ``(t 2^-r, (t+1) 2^-r)``, ``t = 0 .. J 2^r - 1``,
and vanishes on ``(J, oo)``.  Values are :class:`fractions.Fraction`.

Internally the function is stored as sorted runs ``(start, stop, value)`` of
cell indices carrying a nonzero value, so that functions like
``2 * 1_(m-1, m) + |h|`` with ``m`` in the thousands stay cheap.  The dense
``values`` tuple is materialised on request.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Sequence

__all__ = [
    "StepFunction",
    "align",
    "add",
    "sub",
    "scale",
    "abs_",
    "pointwise_max",
    "pointwise_mul",
    "norm_1",
    "norm_2_sq",
    "norm_p_float",
    "integral",
    "unit_interval_averages",
    "conditional_expectation",
    "linear_combination",
    "common_segments",
    "parse_rational",
    "format_rational",
]

ZERO = Fraction(0)


def parse_rational(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused: silently turning ``0.1`` into a 2^-55 dyadic is
    exactly the kind of rounding this library exists to avoid.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        num, sep, den = text.partition("/")
        try:
            p = int(num)
            q = int(den) if sep else 1
        except ValueError:
            raise ValueError(f"malformed rational {value!r}") from None
        if q <= 0:
            raise ValueError(f"denominator must be positive in {value!r}")
        return Fraction(p, q)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _coerce(value) -> Fraction:
    return value if type(value) is Fraction else parse_rational(value)


class StepFunction:
    __slots__ = ("support_len", "resolution", "_runs", "_values")

    def __init__(self, support_len: int, resolution: int, values: Sequence) -> None:
        _check_shape(support_len, resolution)
        ncells = support_len << resolution
        if len(values) != ncells:
            raise ValueError(
                f"expected {ncells} values for support_len={support_len}, "
                f"resolution={resolution}, got {len(values)}"
            )
        vals = tuple(_coerce(v) for v in values)
        self.support_len = support_len
        self.resolution = resolution
        self._runs = _compress(vals)
        self._values = vals

    @classmethod
    def from_runs(cls, support_len: int, resolution: int,
                  runs: Iterable[tuple[int, int, object]]) -> StepFunction:
        """Build from ``(start, stop, value)`` cell ranges.

        Runs must be disjoint; they are sorted, zero runs dropped and adjacent
        equal runs coalesced.
        """
        _check_shape(support_len, resolution)
        ncells = support_len << resolution
        cleaned = []
        for start, stop, value in sorted(runs, key=lambda run: run[0]):
            if not 0 <= start <= stop <= ncells:
                raise ValueError(f"run ({start}, {stop}) outside 0..{ncells}")
            if cleaned and start < cleaned[-1][1]:
                raise ValueError("runs overlap")
            value = _coerce(value)
            if start < stop and value:
                cleaned.append((start, stop, value))
        return cls._raw(support_len, resolution, _coalesce(cleaned))

    @classmethod
    def _raw(cls, support_len, resolution, runs) -> StepFunction:
        self = object.__new__(cls)
        self.support_len = support_len
        self.resolution = resolution
        self._runs = tuple(runs)
        self._values = None
        return self

    @classmethod
    def zero(cls, support_len: int = 1, resolution: int = 0) -> StepFunction:
        return cls._raw(support_len, resolution, ())

    @classmethod
    def indicator(cls, left, right, value=1) -> StepFunction:
        """``value`` times the indicator of ``(left, right)``; endpoints dyadic."""
        left, right = _coerce(left), _coerce(right)
        if left < 0 or right < left:
            raise ValueError(f"bad interval ({left}, {right})")
        resolution = max(_dyadic_exponent(left), _dyadic_exponent(right))
        support_len = max(1, math.ceil(right))
        start = int(left * (1 << resolution))
        stop = int(right * (1 << resolution))
        return cls.from_runs(support_len, resolution, [(start, stop, value)])

    @property
    def values(self) -> tuple[Fraction, ...]:
        if self._values is None:
            dense = [ZERO] * (self.support_len << self.resolution)
            for start, stop, value in self._runs:
                dense[start:stop] = [value] * (stop - start)
            self._values = tuple(dense)
        return self._values

    @property
    def runs(self) -> tuple[tuple[int, int, Fraction], ...]:
        return self._runs

    @property
    def num_cells(self) -> int:
        return self.support_len << self.resolution

    def refine(self, resolution: int, support_len: int | None = None) -> StepFunction:
        """Same function on a finer grid and/or a longer support."""
        support_len = self.support_len if support_len is None else support_len
        if resolution < self.resolution or support_len < self.support_len:
            raise ValueError("refine can only increase resolution and support")
        k = resolution - self.resolution
        runs = tuple((s << k, e << k, v) for s, e, v in self._runs)
        return StepFunction._raw(support_len, resolution, runs)

    def canonical(self) -> StepFunction:
        """Coarsest grid and shortest support representing the same function."""
        if not self._runs:
            return StepFunction.zero()
        r = self.resolution
        k = r
        for s, e, _ in self._runs:
            for b in (s, e):
                if b:
                    k = min(k, (b & -b).bit_length() - 1)
            if k == 0:
                break
        runs = [(s >> k, e >> k, v) for s, e, v in self._runs]
        res = r - k
        support = max(1, -(-runs[-1][1] >> res))
        return StepFunction._raw(support, res, runs)

    def evaluate(self, t) -> Fraction:
        """Value at ``t``; at a breakpoint the cell to the right is used."""
        t = _coerce(t)
        if t < 0:
            raise ValueError("functions live on (0, oo)")
        cell = math.floor(t * (1 << self.resolution))
        for s, e, v in self._runs:
            if s <= cell < e:
                return v
        return ZERO

    def integral_between(self, left, right) -> Fraction:
        left, right = _coerce(left), _coerce(right)
        scale_ = 1 << self.resolution
        lo, hi = left * scale_, right * scale_
        total = ZERO
        for s, e, v in self._runs:
            a, b = max(lo, s), min(hi, e)
            if a < b:
                total += v * (b - a)
        return total / scale_

    def min_value(self) -> Fraction:
        """Smallest cell value over (0, J), counting implicit zero cells."""
        covered = sum(e - s for s, e, _ in self._runs)
        low = min((v for _, _, v in self._runs), default=ZERO)
        if covered < self.num_cells:
            low = min(low, ZERO)
        return low

    def is_nonnegative(self) -> bool:
        return all(v > 0 for _, _, v in self._runs)

    def support_intervals(self) -> list[tuple[Fraction, Fraction]]:
        """Closure-free description of {f != 0} as merged open intervals."""
        out: list[list[Fraction]] = []
        step = Fraction(1, 1 << self.resolution)
        for s, e, _ in self._runs:
            a, b = s * step, e * step
            if out and out[-1][1] == a:
                out[-1][1] = b
            else:
                out.append([a, b])
        return [(a, b) for a, b in out]

    def to_json(self) -> dict:
        return {
            "support_len": self.support_len,
            "resolution": self.resolution,
            "values": [format_rational(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> StepFunction:
        try:
            support_len = data["support_len"]
            resolution = data["resolution"]
            values = data["values"]
        except (KeyError, TypeError):
            raise ValueError("function JSON needs support_len, resolution and values") from None
        if not isinstance(support_len, int) or not isinstance(resolution, int):
            raise ValueError("support_len and resolution must be integers")
        if not isinstance(values, list):
            raise ValueError("values must be a list")
        return cls(support_len, resolution, [parse_rational(v) for v in values])

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        f, g = align(self, other)
        return f._runs == g._runs

    def __hash__(self):
        c = self.canonical()
        return hash((c.resolution, c._runs))

    def __repr__(self):
        if self.num_cells <= 16:
            body = ", ".join(str(v) for v in self.values)
            return f"StepFunction(J={self.support_len}, r={self.resolution}, values=({body}))"
        return (f"StepFunction(J={self.support_len}, r={self.resolution}, "
                f"runs={len(self._runs)})")

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scale(self, -1)

    def __abs__(self):
        return abs_(self)

    def __mul__(self, c):
        if isinstance(c, StepFunction):
            return pointwise_mul(self, c)
        return scale(self, c)

    __rmul__ = __mul__


def _check_shape(support_len, resolution):
    if not isinstance(support_len, int) or support_len < 1:
        raise ValueError(f"support_len must be a positive integer, got {support_len!r}")
    if not isinstance(resolution, int) or resolution < 0:
        raise ValueError(f"resolution must be a non-negative integer, got {resolution!r}")


def _dyadic_exponent(x: Fraction) -> int:
    q = x.denominator
    if q & (q - 1):
        raise ValueError(f"{x} is not a dyadic rational")
    return q.bit_length() - 1


def _compress(values: Sequence[Fraction]) -> tuple:
    runs = []
    start = 0
    n = len(values)
    while start < n:
        v = values[start]
        stop = start + 1
        while stop < n and values[stop] == v:
            stop += 1
        if v:
            runs.append((start, stop, v))
        start = stop
    return tuple(runs)


def _coalesce(runs: list) -> tuple:
    out: list = []
    for s, e, v in runs:
        if out and out[-1][1] == s and out[-1][2] == v:
            out[-1] = (out[-1][0], e, v)
        else:
            out.append((s, e, v))
    return tuple(out)


def common_segments(functions: Sequence[StepFunction]):
    """Common refinement of several step functions.

    Returns ``(support_len, resolution, segments)`` where ``segments`` lists
    ``(start, stop, values)`` over the cells where at least one function is
    nonzero; ``values[k]`` is the value of ``functions[k]`` there.
    """
    if not functions:
        raise ValueError("need at least one function")
    res = max(f.resolution for f in functions)
    support = max(f.support_len for f in functions)
    scaled = []
    bounds = set()
    for f in functions:
        k = res - f.resolution
        runs = [(s << k, e << k, v) for s, e, v in f.runs]
        scaled.append(runs)
        for s, e, _ in runs:
            bounds.add(s)
            bounds.add(e)
    ordered = sorted(bounds)
    ptr = [0] * len(functions)
    segments = []
    for lo, hi in zip(ordered, ordered[1:]):
        vals = []
        active = False
        for idx, runs in enumerate(scaled):
            p = ptr[idx]
            while p < len(runs) and runs[p][1] <= lo:
                p += 1
            ptr[idx] = p
            if p < len(runs) and runs[p][0] <= lo:
                vals.append(runs[p][2])
                active = True
            else:
                vals.append(ZERO)
        if active:
            segments.append((lo, hi, vals))
    return support, res, segments


def _combine(functions, op) -> StepFunction:
    support, res, segments = common_segments(functions)
    runs = [(s, e, op(*vals)) for s, e, vals in segments]
    return StepFunction._raw(support, res, _coalesce([r for r in runs if r[2]]))


def align(f: StepFunction, g: StepFunction) -> tuple[StepFunction, StepFunction]:
    """Put ``f`` and ``g`` on a shared grid without changing either function."""
    support = max(f.support_len, g.support_len)
    res = max(f.resolution, g.resolution)
    return f.refine(res, support), g.refine(res, support)


def add(f: StepFunction, g: StepFunction) -> StepFunction:
    return _combine((f, g), lambda a, b: a + b)


def sub(f: StepFunction, g: StepFunction) -> StepFunction:
    return _combine((f, g), lambda a, b: a - b)


def pointwise_max(f: StepFunction, g: StepFunction) -> StepFunction:
    return _combine((f, g), max)


def pointwise_mul(f: StepFunction, g: StepFunction) -> StepFunction:
    return _combine((f, g), lambda a, b: a * b)


def scale(f: StepFunction, c) -> StepFunction:
    c = _coerce(c)
    if not c:
        return StepFunction.zero(f.support_len, f.resolution)
    return StepFunction._raw(f.support_len, f.resolution,
                             tuple((s, e, c * v) for s, e, v in f.runs))


def abs_(f: StepFunction) -> StepFunction:
    runs = [(s, e, abs(v)) for s, e, v in f.runs]
    return StepFunction._raw(f.support_len, f.resolution, _coalesce(runs))


def linear_combination(terms: Iterable[tuple[object, StepFunction]]) -> StepFunction:
    """Exact ``sum c_k f_k`` by a sweep over run endpoints.

    Cost is proportional to the total number of runs, independent of the
    support length, which is what makes block synthesis cheap.
    """
    events: dict[int, Fraction] = {}
    res = 0
    support = 1
    materialised = []
    for c, f in terms:
        c = _coerce(c)
        if not c or not f.runs:
            support = max(support, f.support_len)
            res = max(res, f.resolution)
            continue
        materialised.append((c, f))
        res = max(res, f.resolution)
        support = max(support, f.support_len)
    for c, f in materialised:
        k = res - f.resolution
        for s, e, v in f.runs:
            cv = c * v
            s, e = s << k, e << k
            events[s] = events.get(s, ZERO) + cv
            events[e] = events.get(e, ZERO) - cv
    runs = []
    level = ZERO
    ordered = sorted(events)
    for lo, hi in zip(ordered, ordered[1:]):
        level += events[lo]
        if level:
            runs.append((lo, hi, level))
    return StepFunction._raw(support, res, _coalesce(runs))


def norm_1(f: StepFunction) -> Fraction:
    return sum((abs(v) * (e - s) for s, e, v in f.runs), ZERO) / (1 << f.resolution)


def norm_2_sq(f: StepFunction) -> Fraction:
    return sum((v * v * (e - s) for s, e, v in f.runs), ZERO) / (1 << f.resolution)


def integral(f: StepFunction) -> Fraction:
    return sum((v * (e - s) for s, e, v in f.runs), ZERO) / (1 << f.resolution)


def norm_p_float(f: StepFunction, p: float) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    total = math.fsum(float(abs(v)) ** p * (e - s) for s, e, v in f.runs)
    return (total / (1 << f.resolution)) ** (1.0 / p)


def _unit_pieces(f: StepFunction) -> Iterator[tuple[int, int, int, Fraction]]:
    """Yield ``(m, start, stop, value)``: runs split at integer points.

    ``m`` is the 1-based unit interval; ``start``/``stop`` are local cell
    indices inside it.
    """
    width = 1 << f.resolution
    for s, e, v in f.runs:
        while s < e:
            m = s // width
            stop = min(e, (m + 1) * width)
            yield m + 1, s - m * width, stop - m * width, v
            s = stop


def unit_interval_averages(f: StepFunction) -> list[Fraction]:
    """Mean of ``f`` over each ``(m-1, m)``, ``m = 1 .. J``."""
    sums = [ZERO] * f.support_len
    for m, s, e, v in _unit_pieces(f):
        sums[m - 1] += v * (e - s)
    width = 1 << f.resolution
    return [total / width for total in sums]


def conditional_expectation(f: StepFunction) -> StepFunction:
    """Projection onto functions constant on every unit interval."""
    avgs = unit_interval_averages(f)
    runs = [(m, m + 1, c) for m, c in enumerate(avgs) if c]
    return StepFunction.from_runs(f.support_len, 0, runs)
