"""Exact piecewise-linear functions of time.

A `PiecewiseLinear` is a continuous function on ``[start, infinity)`` given by
finitely many breakpoints and a final slope that extends the last segment
forever.  The representation is canonical (no two adjacent segments share a
slope), so structural equality is semantic equality.  All arithmetic is over
`fractions.Fraction`; crossing points and preimages are computed exactly.

These functions carry every curve in the package: cumulative edge in/outflows,
queue sizes, node arrival-time labels, and sink arrivals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .core import ContractError, DomainError, INF, Scalar

ZERO = Fraction(0)
ONE = Fraction(1)


def _canonical(points: Sequence[tuple[Fraction, Fraction]],
               final_slope: Fraction) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...], Fraction]:
    if not points:
        raise ContractError("a piecewise-linear function needs at least one breakpoint")
    xs = [points[0][0]]
    ys = [points[0][1]]
    for x, y in points[1:]:
        if x <= xs[-1]:
            raise ContractError("breakpoints must be strictly increasing")
        xs.append(x)
        ys.append(y)
    # Merge collinear interior breakpoints, walking from the right so the
    # final slope can absorb redundant trailing points.
    i = len(xs) - 1
    slope_after = final_slope
    keep = [True] * len(xs)
    while i >= 1:
        slope_before = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])
        if slope_before == slope_after:
            keep[i] = False
        else:
            slope_after = slope_before
        i -= 1
    xs = [x for x, k in zip(xs, keep) if k]
    ys = [y for y, k in zip(ys, keep) if k]
    return tuple(xs), tuple(ys), final_slope


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous exact piecewise-linear function on ``[xs[0], infinity)``."""

    xs: tuple[Fraction, ...]
    ys: tuple[Fraction, ...]
    final_slope: Fraction

    def __post_init__(self):
        if len(self.xs) != len(self.ys) or not self.xs:
            raise ContractError("malformed breakpoint arrays")
        for a, b in zip(self.xs, self.xs[1:]):
            if a >= b:
                raise ContractError("breakpoints must be strictly increasing")
        # Canonical form: consecutive segments never share a slope.
        slopes = [(self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
                  for i in range(len(self.xs) - 1)] + [self.final_slope]
        for a, b in zip(slopes, slopes[1:]):
            if a == b:
                raise ContractError("non-canonical representation (collinear segments)")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_points(cls, points: Iterable[tuple[Fraction, Fraction]],
                    final_slope: Fraction) -> "PiecewiseLinear":
        xs, ys, fs = _canonical(sorted(points), final_slope)
        return cls(xs, ys, fs)

    @classmethod
    def constant(cls, value: Fraction, start: Fraction = ZERO) -> "PiecewiseLinear":
        return cls((start,), (value,), ZERO)

    @classmethod
    def affine(cls, slope: Fraction, intercept: Fraction,
               start: Fraction = ZERO) -> "PiecewiseLinear":
        return cls((start,), (intercept + slope * start,), slope)

    @classmethod
    def identity(cls, start: Fraction = ZERO) -> "PiecewiseLinear":
        return cls.affine(ONE, ZERO, start)

    @classmethod
    def from_rate_segments(cls, pairs: Sequence[tuple[Fraction, Fraction]],
                           origin: Fraction = ZERO) -> "PiecewiseLinear":
        """Integrate a step function given as (start_time, rate) pairs.

        The cumulative curve starts at ``(origin, 0)``; the rate before the
        first pair is zero and the last rate extends forever.
        """
        points = [(origin, ZERO)]
        value = ZERO
        rate = ZERO
        for start, new_rate in pairs:
            if start < points[-1][0]:
                raise ContractError("rate segment starts must be nondecreasing")
            if start > points[-1][0]:
                value = value + rate * (start - points[-1][0])
                points.append((start, value))
            rate = new_rate
        return cls.from_points(points, rate)

    # -- basic queries ---------------------------------------------------------

    @property
    def start(self) -> Fraction:
        return self.xs[0]

    def __call__(self, x: Fraction) -> Fraction:
        if x < self.xs[0]:
            raise DomainError(f"{x} is left of the domain start {self.xs[0]}")
        i = self._segment_index(x)
        if i == len(self.xs) - 1:
            return self.ys[-1] + self.final_slope * (x - self.xs[-1])
        t = x - self.xs[i]
        slope = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
        return self.ys[i] + slope * t

    def _segment_index(self, x: Fraction) -> int:
        lo, hi = 0, len(self.xs) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.xs[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def slope_right(self, x: Fraction) -> Fraction:
        """Slope on the segment immediately to the right of x."""
        if x < self.xs[0]:
            raise DomainError(f"{x} is left of the domain start {self.xs[0]}")
        i = self._segment_index(x)
        if i == len(self.xs) - 1:
            return self.final_slope
        return (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])

    def segments(self) -> Iterator[tuple[Fraction, Scalar, Fraction, Fraction]]:
        """Yield (a, b, value_at_a, slope) covering the domain; last b is INF."""
        for i in range(len(self.xs) - 1):
            slope = (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
            yield self.xs[i], self.xs[i + 1], self.ys[i], slope
        yield self.xs[-1], INF, self.ys[-1], self.final_slope

    def slopes(self) -> tuple[Fraction, ...]:
        return tuple(s for _, _, _, s in self.segments())

    def rate_pairs(self) -> list[tuple[Fraction, Fraction]]:
        """The derivative as (start_time, rate) pairs; inverse of integration."""
        return [(a, s) for a, _, _, s in self.segments()]

    def is_nondecreasing(self) -> bool:
        return all(s >= 0 for s in self.slopes())

    def is_strictly_increasing(self) -> bool:
        return all(s > 0 for s in self.slopes())

    def supremum(self) -> Scalar:
        """Exact supremum over the whole domain (INF if unbounded)."""
        if self.final_slope > 0:
            return INF
        return max(self.ys)

    def minimum_value(self) -> Scalar | None:
        """Exact infimum; None means unbounded below."""
        if self.final_slope < 0:
            return None
        return min(self.ys)

    # -- arithmetic ------------------------------------------------------------

    def _merged_grid(self, other: "PiecewiseLinear") -> list[Fraction]:
        start = max(self.xs[0], other.xs[0])
        grid = {start}
        grid.update(x for x in self.xs if x >= start)
        grid.update(x for x in other.xs if x >= start)
        return sorted(grid)

    def __add__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        grid = self._merged_grid(other)
        points = [(x, self(x) + other(x)) for x in grid]
        return PiecewiseLinear.from_points(points, self.final_slope + other.final_slope)

    def __sub__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        return self + other.scale(Fraction(-1))

    def scale(self, k: Fraction) -> "PiecewiseLinear":
        if k == 0:
            return PiecewiseLinear.constant(ZERO, self.xs[0])
        return PiecewiseLinear(self.xs, tuple(y * k for y in self.ys), self.final_slope * k)

    def add_constant(self, c: Fraction) -> "PiecewiseLinear":
        return PiecewiseLinear(self.xs, tuple(y + c for y in self.ys), self.final_slope)

    def compose(self, inner: "PiecewiseLinear") -> "PiecewiseLinear":
        """Exact composition self(inner(x)); inner must be nondecreasing."""
        if not inner.is_nondecreasing():
            raise ContractError("inner function of a composition must be nondecreasing")
        if inner.ys[0] < self.xs[0]:
            raise DomainError("inner function leaves the outer domain")
        candidates = {x for x in inner.xs}
        # Preimages of outer breakpoints under each affine piece of inner.
        for a, b, v, s in inner.segments():
            if s == 0:
                continue
            for bp in self.xs:
                t = a + (bp - v) / s
                if t >= a and (b is INF or t <= b):
                    candidates.add(t)
        grid = sorted(candidates)
        points = [(x, self(inner(x))) for x in grid]
        final = self.slope_right(inner(grid[-1])) * inner.final_slope
        return PiecewiseLinear.from_points(points, final)

    def inverse(self) -> "PiecewiseLinear":
        """Exact inverse; defined on the range, requires strict increase."""
        if not self.is_strictly_increasing():
            raise ContractError("inverse requires a strictly increasing function")
        return PiecewiseLinear(self.ys, self.xs, ONE / self.final_slope)


def minimum(*funcs: PiecewiseLinear) -> PiecewiseLinear:
    """Exact pointwise minimum; breakpoints include all crossing points."""
    if not funcs:
        raise ContractError("minimum of an empty collection")
    result = funcs[0]
    for f in funcs[1:]:
        result = _min2(result, f)
    return result


def _min2(f: PiecewiseLinear, g: PiecewiseLinear) -> PiecewiseLinear:
    grid = f._merged_grid(g)
    candidates = set(grid)
    for a, b in zip(grid, grid[1:]):
        da = f(a) - g(a)
        db = f(b) - g(b)
        if (da > 0 and db < 0) or (da < 0 and db > 0):
            slope = (db - da) / (b - a)
            candidates.add(a - da / slope)
    # A final-ray crossing beyond the last grid point.
    last = grid[-1]
    d_last = f(last) - g(last)
    d_slope = f.slope_right(last) - g.slope_right(last)
    if d_last != 0 and d_slope != 0:
        t = last - d_last / d_slope
        if t > last:
            candidates.add(t)
    xs = sorted(candidates)
    points = [(x, min(f(x), g(x))) for x in xs]
    end = xs[-1]
    if f(end) < g(end):
        final = f.slope_right(end)
    elif g(end) < f(end):
        final = g.slope_right(end)
    else:
        final = min(f.slope_right(end), g.slope_right(end))
    return PiecewiseLinear.from_points(points, final)
