import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from chkit import tucker as tk
from chkit.circuit import label_of_word
from chkit.errors import ArgumentError, DomainError


def test_two_by_two_ms_solution():
    g = tk.grid_from_table("ms", [[1, -1], [1, -1]])
    assert tk.check_constraints(g) == []
    sols = tk.find_grid_solutions(g)
    assert ((1, 1), (1, 2)) in sols
    assert all(tk.verify_grid_solution(g, p) for p in sols)


def test_monochrome_has_no_solution_and_violations():
    g = tk.grid_from_table("tucker", [[1] * 4 for _ in range(4)])
    assert tk.find_grid_solutions(g) == []
    assert tk.check_constraints(g)


def test_planted_boundary_defect_reported_once():
    g = tk.generate_grid("tucker", 2, 1)
    table = tk.label_table(g)
    assert tk.check_grid_table("tucker", table) == []
    table[1][0] = -table[1][0]
    viol = tk.check_grid_table("tucker", table)
    assert len(viol) == 1 and (2, 1) in viol[0].where


def test_ms_rows_and_label_range():
    ms = tk.generate_grid("ms", 2, 0)
    m = ms.width
    assert all(tk.label_at(ms, i, 1) == 1 and tk.label_at(ms, i, m) == -1 for i in range(1, m + 1))
    with pytest.raises(DomainError):
        tk.label_at(ms, 0, 1)


def test_tucker_to_ms_embeds_original():
    g = tk.generate_grid("tucker", 2, 5)
    red = tk.reduce_tucker_to_ms(g)
    m = g.width
    assert red.target.width == 3 * m
    big = tk.label_table(red.target)
    small = tk.label_table(g)
    for i in range(m):
        for j in range(m):
            assert big[m + i][m + j] == small[i][j]
    assert tk.check_constraints(red.target) == []
    for pair in tk.find_grid_solutions(red.target):
        assert tk.verify_grid_solution(g, red.map_back(pair))
    with pytest.raises(ArgumentError):
        tk.reduce_tucker_to_ms(tk.generate_grid("ms", 2, 0))


def test_figure_example_chain():
    g = tk.grid_from_table("tucker", tk.figure_example_table())
    assert tk.check_constraints(g) == []
    red = tk.reduce_tucker_to_ms(g)
    assert tk.check_constraints(red.target) == []


def test_tile_examples():
    assert tk.tile_of(1, (F(0), F(0))) == (0, 0)
    assert tk.tile_of(3, (F(0), F(0))) == (0, 0)
    assert tk.squarelet_tile(1, 1, 1) == (8, 8)
    for a, b in [(0, 0), (4, 8), (6, 2), (10, 10)]:
        for n in (1, 2):
            side = 16 << n
            assert tk.tile_of(n, (F(a, side), F(b, side))) == (a, b)
    assert tk.tile_squarelet(2, *tk.squarelet_tile(2, 3, 2)) == (3, 2)


@given(st.integers(-20, 60), st.integers(-20, 60))
def test_tile_geometry(u, v):
    t = tk.tile_of_subregion(u, v)
    assert tk.is_tile(*t) and (u, v) in tk.tile_subregions(*t)
    members = tk.tile_subregions(*t)
    assert len(set(members)) == 8
    assert max(m[0] for m in members) - min(m[0] for m in members) == 3


@pytest.fixture(scope="module")
def vt_red():
    return tk.reduce_ms_to_variant(tk.generate_grid("ms", 2, 0))


def test_vt_constraints_and_low_region(vt_red):
    vt = vt_red.target
    assert tk.check_constraints(vt) == []
    one = 1 << vt.K
    # well inside y < 3/8 - x and away from subregion boundaries
    assert label_of_word(tk.vt_word_at(vt, one // 16 + 64, one // 16 + 64)) == 1


def test_vt_reflection_outside_central_band(vt_red):
    # labels off the central diagonal band are opposite under the point reflection
    # through the centre of the embedded grid, (1/2 + 2^-(n+2), 1/2)
    vt = vt_red.target
    one = 1 << vt.K
    cx, cy = one // 2 + (one >> (vt.n + 2)), one // 2
    checked = 0
    for X in range(64, one, 128 * 2):
        for Y in range(64, one, 128 * 3):
            rx, ry = cx - X - 1, cy - Y - 1
            if not (0 <= rx < one and 0 <= ry < one) or X + Y > one:
                continue
            if abs(Y - X) <= one // 8 + 256:
                continue
            a = label_of_word(tk.vt_word_at(vt, X, Y))
            b = label_of_word(tk.vt_word_at(vt, rx, ry))
            assert a == -b, (X, Y)
            checked += 1
    assert checked > 50


def test_vt_solutions_straddle_opposite_tiles(vt_red):
    vt = vt_red.target
    sols = tk.find_vt_solutions(vt)
    assert sols
    for s in sols[:: max(1, len(sols) // 25)]:
        rep = tk.verify_vt_solution(vt, s)
        assert rep.valid
        tiles = {}
        for (X, Y, xw, yw), lab in zip(s.points(), rep.effective_labels):
            tiles.setdefault(tk.tile_of_subregion(X >> 7, Y >> 7), set()).add(lab)
        labs = {l for ls in tiles.values() for l in ls}
        assert any(-l in labs for l in labs)
        assert tk.verify_grid_solution(vt_red.source, vt_red.map_back(s))


def test_vt_solution_rejects_bad_starts(vt_red):
    vt = vt_red.target
    one = 1 << vt.K
    assert not tk.verify_vt_solution(vt, tk.VTSolution(vt.n, (one, 0))).valid
    assert not tk.verify_vt_solution(vt, tk.VTSolution(vt.n, (one - 1, one - 1))).valid
    s = tk.VTSolution(vt.n, (5, 9), 4)
    pts = s.points()
    assert (pts[1][0] - pts[0][0], pts[0][1] - pts[1][1]) == (1, 1)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_grids_satisfy_their_constraints(seed):
    for kind in ("tucker", "ms"):
        g = tk.generate_grid(kind, 2, seed)
        assert tk.check_constraints(g) == []
        assert tk.find_grid_solutions(g)


def test_vt_labels_ignore_low_bits(vt_red):
    vt = vt_red.target
    rng = random.Random(7)
    one = 1 << vt.K
    pts = [(rng.randrange(one), rng.randrange(one)) for _ in range(400)]
    corners = [(X & ~127, Y & ~127) for X, Y in pts]
    assert tk.vt_words_batch(vt, pts) == tk.vt_words_batch(vt, corners)
