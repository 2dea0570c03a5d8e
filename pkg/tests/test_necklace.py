import random
from fractions import Fraction as F
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chkit import necklace as nk
from chkit.arith import Interval, StepFunction
from chkit.errors import AmbiguousCutError, StructureError
from chkit.measures import DivisionInstance, DivisionSolution, verify_division
from chkit.solver import solve_division_exact


def neck(colours, k=2, ell=None):
    beads = tuple((F(i + 1), c) for i, c in enumerate(colours))
    return nk.NecklaceInstance(beads, k, ell or max(colours))


def exists_exact(inst):
    """Exhaustive oracle: any cut set in the gaps with any part labelling."""
    mids = nk.gap_midpoints(inst)
    for m in range(inst.max_cuts + 1):
        for cuts in combinations(mids, m):
            for parts in product(range(1, inst.k + 1), repeat=m + 1):
                if nk.verify_necklace(inst, nk.NecklaceSolution(cuts, parts)).valid:
                    return True
    return False


ABAB = neck([1, 2, 1, 2])


def test_two_beads_one_colour():
    inst = neck([1, 1], ell=1)
    assert nk.verify_necklace(inst, nk.NecklaceSolution((F(3, 2),), (1, 2))).valid


def test_abab_split_counts():
    rep = nk.verify_necklace(ABAB, nk.NecklaceSolution((F(3, 2), F(7, 2)), (1, 2, 1)))
    assert rep.valid
    assert rep.counts == ((1, 1), (1, 1))


def test_approximate_bounds():
    sol = nk.NecklaceSolution((F(3, 2), F(7, 2)), (1, 2, 2))
    assert not nk.verify_necklace(ABAB, sol).valid
    assert nk.verify_necklace(ABAB, sol, eps_beads=1).valid


def test_cut_on_bead_is_ambiguous():
    with pytest.raises(AmbiguousCutError):
        nk.verify_necklace(ABAB, nk.NecklaceSolution((F(2),), (1, 2)))


def test_too_many_cuts_rejected():
    inst = neck([1, 1], ell=1)
    with pytest.raises(StructureError):
        nk.verify_necklace(inst, nk.NecklaceSolution((F(5, 4), F(3, 2)), (1, 2, 1)))


def test_colour_count_must_divide_k():
    with pytest.raises(StructureError):
        neck([1, 2, 1])


def test_bruteforce_abab():
    sol = nk.solve_necklace_bruteforce(ABAB)
    assert sol is not None
    assert nk.verify_necklace(ABAB, sol).valid
    assert sol.cuts == (F(3, 2), F(7, 2)) and sol.part_of_piece == (1, 2, 1)


def test_bruteforce_aabb_single_cut():
    assert nk.solve_necklace_bruteforce(neck([1, 1, 2, 2], ell=1)) is None


def test_bruteforce_single_colour():
    sol = nk.solve_necklace_bruteforce(neck([1, 1, 1, 1], ell=1))
    assert sol.cuts == (F(5, 2),)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([2, 3]))
def test_bruteforce_matches_exhaustive(seed, k):
    inst = nk.random_necklace(random.Random(seed), max_beads=8 if k == 2 else 6, max_colors=2, k=k)
    sol = nk.solve_necklace_bruteforce(inst)
    assert (sol is not None) == exists_exact(inst)
    if sol is not None:
        assert nk.verify_necklace(inst, sol).valid


def _uniform(eps):
    dom = Interval(F(0), F(1))
    return DivisionInstance((StepFunction.from_pieces(dom, [(F(0), F(1), F(1))]),), 2, 1, eps)


def test_uniform_division_to_necklace():
    div = _uniform(F(1, 3))
    assert nk.division_delta(div) == (F(1, 9), 1)
    inst, prov = nk.reduce_division_to_necklace(div)
    assert len(inst.beads) == 8 and len(prov.removed) == 1
    # bead i sits at the middle of sub-block i
    assert [p for p, _ in inst.beads] == [F(2 * i + 1, 18) for i in range(8)]
    sol = nk.solve_necklace_bruteforce(inst)
    rep = verify_division(div, nk.lift_necklace_solution_to_division(prov, sol))
    assert rep.valid and rep.max_pairwise_gap <= F(1, 3)


def test_lift_with_cut_at_far_edge_of_gap():
    div = _uniform(F(1, 3))
    inst, prov = nk.reduce_division_to_necklace(div)
    # beads 4 and 5 straddle 4/9; the gap runs from 7/18 to 9/18
    for c in (F(7, 18) + F(1, 1000), F(4, 9), F(9, 18) - F(1, 1000)):
        sol = nk.NecklaceSolution((c,), (1, 2))
        assert nk.verify_necklace(inst, sol).valid
        assert verify_division(div, nk.lift_necklace_solution_to_division(prov, sol)).valid


def test_division_to_necklace_counts_divisible():
    rng = random.Random(4)
    for _ in range(20):
        inst, _ = nk.reduce_division_to_necklace(nk.random_division(rng, k=3))
        assert all(c % 3 == 0 for c in inst.counts)


def test_necklace_to_division_parameters():
    div, params = nk.reduce_necklace_to_division(ABAB)
    assert (params.delta, params.beta, params.epsilon) == (F(1, 4), F(1, 2), F(1, 8))
    assert div.epsilon == F(1, 16)
    assert len(div.agents) == 2


def test_extract_planted_cycle():
    inst = nk.NecklaceInstance(tuple((F(i), 1) for i in (1, 2, 3, 4)), 2, 2)
    div, params = nk.reduce_necklace_to_division(inst)
    f = F(3, 10) * params.delta
    ds = DivisionSolution((params.blocks[1][0] + f, params.blocks[3][0] + f), (1, 2, 1))
    assert verify_division(div, ds).valid
    log = nk.ExtractionLog()
    out = nk.extract_necklace_solution(params, div, ds, log)
    assert nk.verify_necklace(inst, out).valid
    assert len(log.steps) == 1 and log.steps[0][2] == F(7, 40)


def test_extract_snaps_near_edge():
    inst = nk.NecklaceInstance(((F(1), 1), (F(2), 2), (F(3), 1), (F(4), 2)), 2, 2)
    div, params = nk.reduce_necklace_to_division(inst)
    g = params.epsilon * params.delta / 8
    ds = DivisionSolution((F(3, 2), params.blocks[3][0] + g), (1, 2, 1))
    assert verify_division(div, ds).valid
    log = nk.ExtractionLog()
    out = nk.extract_necklace_solution(params, div, ds, log)
    assert out.cuts == (F(3, 2), params.blocks[3][0])
    assert log.snaps == [(params.blocks[3][0] + g, params.blocks[3][0], g)]


def test_extract_leaves_clean_solution_alone():
    div, params = nk.reduce_necklace_to_division(ABAB)
    ds = DivisionSolution((F(3, 2), F(7, 2)), (1, 2, 1))
    log = nk.ExtractionLog()
    out = nk.extract_necklace_solution(params, div, ds, log)
    assert out == nk.NecklaceSolution((F(3, 2), F(7, 2)), (1, 2, 1))
    assert log.steps == [] and log.snaps == []


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_necklace_division_round_trip(seed):
    inst = nk.random_necklace(random.Random(seed), max_beads=10, max_colors=2)
    div, params = nk.reduce_necklace_to_division(inst)
    ds = solve_division_exact(div)
    assert ds is not None
    out = nk.extract_necklace_solution(params, div, ds)
    assert nk.verify_necklace(inst, out).valid


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_division_necklace_round_trip(seed):
    div = nk.random_division(random.Random(seed), max_agents=2, max_blocks=4)
    inst, prov = nk.reduce_division_to_necklace(div)
    sol = nk.solve_necklace_bruteforce(inst)
    assert sol is not None
    assert verify_division(div, nk.lift_necklace_solution_to_division(prov, sol)).valid
