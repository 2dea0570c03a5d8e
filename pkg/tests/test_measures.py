from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from chkit.arith import Interval, StepFunction
from chkit.errors import DomainError, StructureError
from chkit.measures import (CHInstance, CutLabelling, DivisionInstance, DivisionSolution, Label,
                            agent_values, normalize_labelling, verify_division, verify_halving)

UNIT = Interval(F(0), F(1))
U = StepFunction.uniform(UNIT)
HALF2 = StepFunction.from_pieces(UNIT, [(F(0), F(1, 2), 2)])


def test_verify_halving_examples():
    assert verify_halving(CHInstance((U,), F(0)), CutLabelling((F(1, 2),), Label.PLUS)).valid
    rep = verify_halving(CHInstance((U, HALF2), F(0)), CutLabelling((F(1, 4), F(3, 4)), Label.PLUS))
    assert rep.per_agent_discrepancy == (0, 0)
    rep = verify_halving(CHInstance((U,), F(1, 10)), CutLabelling((F(1, 4),), Label.PLUS))
    assert rep.max_discrepancy == F(1, 2) and not rep.valid


def test_verify_halving_errors():
    inst = CHInstance((U,), F(0))
    with pytest.raises(DomainError):
        verify_halving(inst, CutLabelling((F(2),), Label.PLUS))
    with pytest.raises(StructureError):
        verify_halving(inst, CutLabelling((F(1, 3), F(2, 3)), Label.PLUS))


def test_instance_rejects_bad_mass():
    with pytest.raises(StructureError):
        CHInstance((StepFunction.from_pieces(UNIT, [(F(0), F(1, 2), 1)]),), F(0))


def test_normalize_examples():
    inst = CHInstance((U,), F(0))
    sol = normalize_labelling(inst, [F(1, 2)], [Label.PLUS, Label.PLUS])
    assert sol.cuts == (F(1),) and sol.first_label is Label.PLUS
    inst2 = CHInstance((U, HALF2, U), F(0))
    sol = normalize_labelling(inst2, [F(3, 10), F(6, 10)], [Label.PLUS, Label.PLUS, Label.MINUS])
    assert sol.cuts == (F(6, 10), F(1)) and sol.first_label is Label.PLUS
    same = normalize_labelling(inst2, [F(1, 4)], [Label.MINUS, Label.PLUS])
    assert same == CutLabelling((F(1, 4),), Label.MINUS)


def test_verify_division_examples():
    d2 = DivisionInstance((U,), 2, 1, F(0))
    assert verify_division(d2, DivisionSolution((F(1, 2),), (1, 2))).max_pairwise_gap == 0
    d3 = DivisionInstance((U,), 3, 1, F(0))
    assert verify_division(d3, DivisionSolution((F(1, 3), F(2, 3)), (1, 2, 3))).valid
    bad = verify_division(DivisionInstance((U,), 2, 1, F(1, 10)), DivisionSolution((F(1, 4),), (1, 2)))
    assert bad.max_pairwise_gap == F(1, 2) and not bad.valid
    with pytest.raises(StructureError):
        verify_division(d2, DivisionSolution((F(1, 2),), (1, 3)))


grid = st.integers(0, 24).map(lambda v: F(v, 24))
labels = st.sampled_from([Label.PLUS, Label.MINUS])


@given(st.lists(grid, max_size=3), st.lists(labels, min_size=4, max_size=4))
def test_normalize_preserves_report(cuts, labs):
    cuts = sorted(cuts)
    inst = CHInstance((U, HALF2, U), F(1, 10))
    labs = labs[:len(cuts) + 1]
    norm = normalize_labelling(inst, cuts, labs)
    # oracle: integrate each raw piece with its own label
    bounds = [F(0)] + cuts + [F(1)]
    for f, (p, m) in zip(inst.agents, (agent_values(f, norm) for f in inst.agents)):
        plus = sum((f.cumulative(b) - f.cumulative(a)) for a, b, l in zip(bounds, bounds[1:], labs) if l is Label.PLUS)
        assert p == plus and p + m == 1
    assert all(a <= b for a, b in zip(norm.cuts, norm.cuts[1:]))


@given(st.lists(grid, max_size=2), labels)
def test_flipping_first_label_swaps_values(cuts, first):
    cuts = tuple(sorted(cuts))
    inst = CHInstance((U, HALF2), F(0))
    a = verify_halving(inst, CutLabelling(cuts, first))
    b = verify_halving(inst, CutLabelling(cuts, first.other))
    assert a.per_agent_discrepancy == b.per_agent_discrepancy
    for f in inst.agents:
        p, m = agent_values(f, CutLabelling(cuts, first))
        assert (m, p) == agent_values(f, CutLabelling(cuts, first.other))
