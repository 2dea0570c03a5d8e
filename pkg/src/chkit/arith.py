"""Exact rationals, closed intervals and piecewise-constant step functions.

Every number is a ``fractions.Fraction``.  Floats are rejected at every
entry point so that nothing silently loses precision.
"""

from __future__ import annotations

import re
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence

from .errors import ArgumentError, DomainError, ParseError, StructureError

Rational = Fraction

_RAT_RE = re.compile(r"^([+-]?)(\d+)(?:/(\d+))?$")


def Q(value) -> Fraction:
    """Coerce ints, Fractions and rational literals to Fraction; refuse floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ArgumentError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, _RationalABC):
        return Fraction(value.numerator, value.denominator)
    raise ArgumentError(f"not an exact rational: {value!r}")


def parse_rational(text: str) -> Fraction:
    m = _RAT_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad rational literal {text!r}")
    sign, num, den = m.groups()
    d = int(den) if den is not None else 1
    if d == 0:
        raise ParseError(f"zero denominator in {text!r}")
    q = Fraction(int(num), d)
    return -q if sign == "-" else q


def render_rational(q: Fraction) -> str:
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Q(self.lo))
        object.__setattr__(self, "hi", Q(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"interval with lo > hi: [{self.lo}, {self.hi}]")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "Interval") -> bool:
        """True when the open interiors intersect."""
        return max(self.lo, other.lo) < min(self.hi, other.hi)

    def __str__(self):
        return f"[{render_rational(self.lo)}, {render_rational(self.hi)}]"


class StepFunction:
    """Non-negative piecewise-constant function on a closed interval.

    Piece ``i`` covers ``[breakpoints[i], breakpoints[i+1])``; the final piece
    also owns the right endpoint.  Adjacent pieces of equal height are merged,
    so two step functions describing the same function compare equal.
    """

    __slots__ = ("breakpoints", "heights", "domain")

    def __init__(self, breakpoints: Sequence, heights: Sequence, domain: Interval | None = None):
        bps = [Q(b) for b in breakpoints]
        hs = [Q(h) for h in heights]
        if len(bps) < 2 or len(hs) != len(bps) - 1:
            raise StructureError("need at least two breakpoints and one height per piece")
        for a, b in zip(bps, bps[1:]):
            if not a < b:
                raise StructureError("breakpoints must be strictly increasing")
        for h in hs:
            if h < 0:
                raise StructureError("heights must be non-negative")
        if domain is None:
            domain = Interval(bps[0], bps[-1])
        elif domain.lo != bps[0] or domain.hi != bps[-1]:
            raise StructureError("breakpoints must start and end at the domain endpoints")
        merged_b = [bps[0]]
        merged_h: list[Fraction] = []
        for i, h in enumerate(hs):
            if merged_h and merged_h[-1] == h:
                merged_b[-1] = bps[i + 1]
            else:
                merged_h.append(h)
                merged_b.append(bps[i + 1])
        self.breakpoints = tuple(merged_b)
        self.heights = tuple(merged_h)
        self.domain = domain

    @classmethod
    def from_pieces(cls, domain: Interval, pieces: Iterable) -> "StepFunction":
        """Build from ``(lo, hi, height)`` triples; overlaps add, gaps are zero."""
        events: dict[Fraction, Fraction] = {domain.lo: Fraction(0), domain.hi: Fraction(0)}
        for lo, hi, h in pieces:
            lo, hi, h = Q(lo), Q(hi), Q(h)
            if lo > hi:
                raise StructureError(f"piece with lo > hi: [{lo}, {hi}]")
            if lo < domain.lo or hi > domain.hi:
                raise DomainError(f"piece [{lo}, {hi}] leaves domain {domain}")
            if h < 0:
                raise StructureError("heights must be non-negative")
            if lo == hi or h == 0:
                continue
            events[lo] = events.get(lo, Fraction(0)) + h
            events[hi] = events.get(hi, Fraction(0)) - h
        pts = sorted(events)
        heights = []
        cur = Fraction(0)
        for p in pts[:-1]:
            cur += events[p]
            heights.append(cur)
        if len(pts) == 1:
            raise StructureError("degenerate domain")
        return cls(pts, heights, domain)

    @classmethod
    def uniform(cls, domain: Interval, height=1) -> "StepFunction":
        return cls([domain.lo, domain.hi], [Q(height)], domain)

    def pieces(self):
        """Yield ``(lo, hi, height)`` for every piece, zero pieces included."""
        b = self.breakpoints
        for i, h in enumerate(self.heights):
            yield b[i], b[i + 1], h

    def nonzero_pieces(self):
        return [p for p in self.pieces() if p[2] != 0]

    def value_at(self, x) -> Fraction:
        x = Q(x)
        if not self.domain.contains(x):
            raise DomainError(f"{x} outside {self.domain}")
        if x == self.domain.hi:
            return self.heights[-1]
        return self.heights[bisect_right(self.breakpoints, x) - 1]

    def cumulative(self, x) -> Fraction:
        """Integral from the left domain endpoint to ``x``."""
        x = Q(x)
        if not self.domain.contains(x):
            raise DomainError(f"{x} outside {self.domain}")
        b, hs = self.breakpoints, self.heights
        total = Fraction(0)
        idx = bisect_right(b, x) - 1
        for i in range(min(idx, len(hs))):
            total += hs[i] * (b[i + 1] - b[i])
        if idx < len(hs):
            total += hs[idx] * (x - b[idx])
        return total

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (self.domain == other.domain and self.breakpoints == other.breakpoints
                and self.heights == other.heights)

    def __hash__(self):
        return hash((self.breakpoints, self.heights))

    def __repr__(self):
        body = ", ".join(f"[{render_rational(a)},{render_rational(b)}):{render_rational(h)}"
                         for a, b, h in self.pieces())
        return f"StepFunction({body})"


def integrate(f: StepFunction, over: Interval) -> Fraction:
    if not f.domain.contains_interval(over):
        raise DomainError(f"{over} is not inside {f.domain}")
    lo, hi = over.lo, over.hi
    if lo == hi:
        return Fraction(0)
    b, hs = f.breakpoints, f.heights
    start = max(bisect_right(b, lo) - 1, 0)
    stop = min(bisect_left(b, hi), len(hs))
    total = Fraction(0)
    for i in range(start, stop):
        h = hs[i]
        if h:
            a = b[i] if b[i] > lo else lo
            c = b[i + 1] if b[i + 1] < hi else hi
            if c > a:
                total += h * (c - a)
    return total


def total_mass(f: StepFunction) -> Fraction:
    return sum((h * (b - a) for a, b, h in f.pieces()), Fraction(0))


def scale(f: StepFunction, factor) -> StepFunction:
    factor = Q(factor)
    if factor <= 0:
        raise ArgumentError(f"scale factor must be positive, got {factor}")
    return StepFunction(f.breakpoints, [h * factor for h in f.heights], f.domain)


def union_breakpoints(fs: Sequence[StepFunction]) -> list[Fraction]:
    if not fs:
        return []
    dom = fs[0].domain
    pts: set[Fraction] = set()
    for f in fs:
        if f.domain != dom:
            raise DomainError("step functions do not share a domain")
        pts.update(f.breakpoints)
    return sorted(pts)
