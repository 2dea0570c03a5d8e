from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from chkit.arith import (Interval, Q, StepFunction, integrate, parse_rational, render_rational, scale,
                         total_mass, union_breakpoints)
from chkit.errors import ArgumentError, DomainError, ParseError

UNIT = Interval(F(0), F(1))

rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=10 ** 6)


def test_integrate_examples():
    assert integrate(StepFunction.uniform(UNIT), UNIT) == 1
    f = StepFunction.from_pieces(UNIT, [(F(0), F(1, 2), 2)])
    assert integrate(f, Interval(F(1, 4), F(3, 4))) == F(1, 2)
    assert integrate(f, Interval(F(1, 3), F(1, 3))) == 0


def test_integrate_outside_domain():
    with pytest.raises(DomainError):
        integrate(StepFunction.uniform(UNIT), Interval(F(1, 2), F(2)))


def test_scale_examples():
    g = scale(StepFunction.uniform(Interval(F(0), F(2))), F(1, 2))
    assert total_mass(g) == 1 and g.value_at(F(1)) == F(1, 2)
    f = StepFunction.from_pieces(UNIT, [(F(0), F(3, 4), 1)])
    assert scale(f, 1) == f
    assert total_mass(scale(f, F(4, 3))) == 1
    with pytest.raises(ArgumentError):
        scale(f, 0)


def test_union_breakpoints_examples():
    u = StepFunction.uniform(UNIT)
    assert union_breakpoints([u, u]) == [0, 1]
    a = StepFunction.from_pieces(UNIT, [(F(0), F(1, 2), 1), (F(1, 2), F(1), 3)])
    b = StepFunction.from_pieces(UNIT, [(F(0), F(1, 3), 1), (F(1, 3), F(1), 2)])
    assert union_breakpoints([a, b]) == [0, F(1, 3), F(1, 2), 1]
    assert union_breakpoints([a]) == [0, F(1, 2), 1]
    with pytest.raises(DomainError):
        union_breakpoints([u, StepFunction.uniform(Interval(F(0), F(2)))])


def test_from_pieces_adds_overlaps():
    f = StepFunction.from_pieces(UNIT, [(F(0), F(1, 2), 1), (F(1, 4), F(3, 4), 2)])
    assert [f.value_at(x) for x in (F(1, 8), F(3, 8), F(5, 8), F(7, 8))] == [1, 3, 2, 0]


def test_floats_refused():
    with pytest.raises(ArgumentError):
        Q(0.5)


@pytest.mark.parametrize("text,value", [("-3/8", F(-3, 8)), ("7", F(7)), ("+2/4", F(1, 2)), ("0", F(0))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["1.5", "1/0", "a/b", "", "3/-4"])
def test_parse_rational_rejects(text):
    with pytest.raises(ParseError):
        parse_rational(text)


@given(rationals)
def test_rational_round_trip(q):
    assert parse_rational(render_rational(q)) == q


def _brute_integral(pieces, lo, hi):
    # independent oracle: overlap lengths summed piece by piece
    return sum(h * max(F(0), min(b, hi) - max(a, lo)) for a, b, h in pieces)


piece_lists = st.lists(
    st.tuples(st.integers(0, 24), st.integers(1, 12), st.fractions(0, 5, max_denominator=7)),
    min_size=1, max_size=6)


@given(piece_lists, st.integers(0, 36), st.integers(0, 36), st.integers(0, 36))
def test_integrate_matches_oracle_and_is_additive(raw, a, b, c):
    dom = Interval(F(0), F(3))
    pieces = [(F(s, 12), F(min(s + w, 36), 12), h) for s, w, h in raw if s < 36]
    f = StepFunction.from_pieces(dom, pieces)
    a, b, c = sorted(F(v, 12) for v in (a, b, c))
    assert integrate(f, Interval(a, c)) == _brute_integral(pieces, a, c)
    assert integrate(f, Interval(a, b)) + integrate(f, Interval(b, c)) == integrate(f, Interval(a, c))
    assert f.cumulative(c) - f.cumulative(a) == integrate(f, Interval(a, c))
    assert total_mass(f) == _brute_integral(pieces, F(0), F(3))
