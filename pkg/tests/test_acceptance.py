"""One test per acceptance criterion; the terminal summary prints one PASS/FAIL line each."""
import io
import json
import random
from fractions import Fraction as F

import pytest

from chkit import compiler as cc
from chkit import fileio
from chkit import necklace as nk
from chkit import tucker as tk
from chkit.arith import total_mass
from chkit.cli import run
from chkit.measures import CHInstance, verify_division, verify_halving
from chkit.solver import solve_division_exact, solve_halving_exact

crit = pytest.mark.criterion


# -- independent oracles ----------------------------------------------------------

def plus_share(cuts, lo, hi):
    """Fraction of [lo, hi] labelled A+ when the leftmost piece of [0, 1] is A+."""
    pts = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    before = sum(1 for c in cuts if c <= lo)
    plus = F(0)
    for j in range(len(pts) - 1):
        if (before + j) % 2 == 0:
            plus += pts[j + 1] - pts[j]
    return plus / (hi - lo)


def expansion(q, width):
    """First ``width`` binary digits of q in [0, 1); 1 itself reads as all ones."""
    if q == 1:
        return "1" * width
    digits = []
    for _ in range(width):
        q *= 2
        digits.append("1" if q >= 1 else "0")
        q -= int(q)
    return "".join(digits)


def gate_truth(kind, bits):
    if kind == "NOT":
        return 1 - bits[0]
    return int(any(bits)) if kind == "OR" else int(all(bits))


# -- criteria -----------------------------------------------------------------

GATE_CASES = [("NOT", (0,)), ("NOT", (1,))] + [(k, (a, b)) for k in ("OR", "AND") for a in (0, 1) for b in (0, 1)]


@crit(1, "gate gadget truth tables via exact solver", 1)
def test_gate_truth_tables():
    assert len(GATE_CASES) == 10
    for kind, bits in GATE_CASES:
        m = cc.gate_micro_instance(kind, bits)
        sol = solve_halving_exact(m.instance, m.instance.n)
        assert sol, (kind, bits)
        assert verify_halving(m.instance, sol).valid
        inside = [c for c in sol.cuts if m.out_unit.lo <= c <= m.out_unit.hi]
        assert len(inside) == 1, (kind, bits, sol.cuts)
        # left twentieth encodes 0, right twentieth encodes 1
        lo, hi = m.out_unit.lo, m.out_unit.hi
        if inside[0] <= lo + F(1, 20):
            got = 0
        elif inside[0] >= hi - F(1, 20):
            got = 1
        else:
            pytest.fail(f"{kind}{bits}: output cut {inside[0]} outside both out-blocks")
        assert got == gate_truth(kind, bits) == cc.simulate_gate(kind, bits)[0]


@crit(2, "mass audit over generated and compiled instances", 5)
def test_mass_audit(compiled1, compiled2):
    for out in (compiled1, compiled2):
        rep = cc.audit(out)
        assert rep["valid"] and rep["mass_violations"] == []
        assert rep["expected_agents"] == out.instance.n
    rng = random.Random(2)
    corpus = []
    for _ in range(30):
        d = nk.random_division(rng)
        corpus.append(CHInstance(d.agents, d.epsilon))
        neck = nk.random_necklace(rng)
        corpus.append(nk.reduce_necklace_to_division(neck)[0])
    corpus += [cc.gate_micro_instance(k, b).instance for k, b in GATE_CASES]
    for inst in corpus:
        assert all(total_mass(f) == 1 for f in inst.agents)


@crit(3, "bit extraction vs binary-expansion oracle at n=1", 1)
def test_bit_extraction():
    n, K = 1, cc.raw_bits(1)
    for w in range(8):
        for j in range(64):
            cut = F(w, 8) + F(j, 64 * 8)
            want = []
            for v in range(8):
                want.append(expansion(plus_share((cut,), F(v, 8), F(v + 1, 8)), K))
            assert cc.simulate_extractors(n, 1, (cut,)) == want, (w, j)


@crit(4, "double-negative: stray cut leaves copy contributions unchanged", 10)
def test_double_negative(compiled1):
    out = compiled1
    one = 1 << tk.coord_bits(1)
    pts = [F(k, one) for k in range(3 * one // 8, 5 * one // 8 + 1)]
    strays = [None] + [out.spare_unit(i) + F(1, 2) for i in range(2, out.copies + 1)]
    res = cc.simulate_fast(out, [((p,), st) for st in strays for p in pts])
    base = res.contributions[:len(pts)]
    for i in range(2, out.copies + 1):
        shifted = res.contributions[(i - 1) * len(pts):i * len(pts)]
        for p, a, b in zip(pts, base, shifted):
            assert a[i - 1] == b[i - 1], (i, p)


@crit(5, "blanket bound on a 1/64 grid of c-e cut pairs at n=1", 30)
def test_blanket_bound(compiled1):
    out = compiled1
    grid = [F(k, 64) for k in range(65)]
    cfgs = [((a, b), None) for a in grid for b in grid if a < b] + [((a,), None) for a in grid]
    res = cc.simulate_fast(out, cfgs)
    imbalanced = 0
    for (cuts, _), disc in zip(cfgs, res.coordinate_discrepancy):
        gap = 2 * plus_share(cuts, F(0), F(1)) - 1
        if abs(gap) > F(1, 4):
            imbalanced += 1
            assert max(disc) > out.epsilon, cuts
    assert imbalanced > 0


def _chain(grid):
    r1 = tk.reduce_tucker_to_ms(grid)
    assert tk.check_constraints(r1.target) == []
    for pair in tk.find_grid_solutions(r1.target):
        assert tk.verify_grid_solution(grid, r1.map_back(pair))
    r2 = tk.reduce_ms_to_variant(r1.target)
    assert tk.check_constraints(r2.target) == []
    sols = tk.find_vt_solutions(r2.target)
    assert sols
    for s in sols:
        assert tk.verify_vt_solution(r2.target, s).valid
        mid = r2.map_back(s)
        assert tk.verify_grid_solution(r1.target, mid)
        assert tk.verify_grid_solution(grid, r1.map_back(mid))


@crit(6, "Tucker -> MS -> VT chain over 21 instances at n=2", 120)
def test_tucker_chain():
    corpus = [tk.grid_from_table("tucker", tk.figure_example_table())]
    corpus += [tk.generate_grid("tucker", 2, seed) for seed in range(20)]
    for g in corpus:
        _chain(g)


@crit(7, "tile tessellation (n<=3) and adjacency preservation (n<=2)", 60)
def test_tiles():
    for n in (1, 2, 3):
        side = 16 << n
        hits = {}
        # every lattice tile whose template reaches into the unit square
        for a in range(-4, side + 4, 2):
            for b in range(-4, side + 4, 2):
                if (a - b) % 4:
                    continue
                members = tk.tile_subregions(a, b)
                assert len(members) == 8
                xs, ys = [m[0] for m in members], [m[1] for m in members]
                assert max(xs) - min(xs) == max(ys) - min(ys) == 3
                for s in members:
                    if 0 <= s[0] < side and 0 <= s[1] < side:
                        hits.setdefault(s, []).append((a, b))
        assert len(hits) == side * side
        for s, owners in hits.items():
            assert len(owners) == 1, (n, s, owners)
            assert tk.tile_of(n, (F(s[0], side), F(s[1], side))) == owners[0]
    for n in (1, 2):
        M = 1 << n
        cells = [(i, j) for i in range(M) for j in range(M)]
        for a in cells:
            for b in cells:
                if a == b:
                    continue
                assert tk.touching(a, b) == tk.tiles_touch(tk.squarelet_tile(n, *a), tk.squarelet_tile(n, *b)), (a, b)


@crit(8, "compile, plant, cascade, verify, recover at n=2 with 12 copies", 300)
def test_compile_and_recover(vt2, compiled2):
    out = compiled2
    assert out.epsilon == F(1, 16)
    plants = cc.balanced_plants(out, tk.find_vt_solutions(vt2, out.copies), limit=5)
    assert len(plants) == 5
    circuit = out.circuit_agents()
    for sol in plants:
        assert tk.verify_vt_solution(vt2, sol).valid
        res = cc.simulate_full_cascade(out, cc.plant_cuts(vt2.n, sol.start))
        assert verify_halving(out.instance, res.labelling, circuit).valid
        # balanced plants satisfy the coordinate agents as well
        assert verify_halving(out.instance, res.labelling).valid
        back = cc.recover_vt_solution(out, res.labelling)
        assert tk.verify_vt_solution(vt2, back).valid
        assert back.start == sol.start


@crit(9, "necklace round trips in both directions", 120)
def test_necklace_round_trips():
    rng = random.Random(9)
    for _ in range(50):
        d = nk.random_division(rng, max_agents=3, max_blocks=6, k=2)
        neck, prov = nk.reduce_division_to_necklace(d)
        ns = nk.solve_necklace_bruteforce(neck)
        assert ns
        rep = verify_division(d, nk.lift_necklace_solution_to_division(prov, ns))
        assert rep.valid and rep.max_pairwise_gap <= d.epsilon
    for _ in range(50):
        neck = nk.random_necklace(rng, max_beads=12, max_colors=3, k=2)
        div, params = nk.reduce_necklace_to_division(neck)
        ds = solve_division_exact(div)
        assert ds
        log = nk.ExtractionLog()
        # the step audits raise inside extraction if they ever fire
        out = nk.extract_necklace_solution(params, div, ds, log)
        assert nk.verify_necklace(neck, out).valid
        assert len(out.cuts) <= (neck.k - 1) * neck.ell


def _solve_reports(tmp_path):
    rng = random.Random(10)
    lines = []
    for j in range(12):
        d = nk.random_division(rng, max_agents=2, max_blocks=4)
        inst = CHInstance(d.agents, F(0))
        sol = solve_halving_exact(inst, inst.n)
        assert sol and verify_halving(inst, sol).valid
        lines.append(fileio.dump_solution(sol))
        ds = solve_division_exact(d)
        assert ds and verify_division(d, ds).valid
        lines.append(fileio.dump_solution(ds))
        neck = nk.random_necklace(rng)
        ns = nk.solve_necklace_bruteforce(neck)
        assert ns and nk.verify_necklace(neck, ns).valid
        lines.append(fileio.dump_solution(ns))
    g = tk.generate_grid("tucker", 2, 3)
    pairs = tk.find_grid_solutions(g)
    assert pairs and all(tk.verify_grid_solution(g, p) for p in pairs)
    lines.append(repr(pairs))
    inst_path = tmp_path / "h.txt"
    inst_path.write_text(fileio.dump_measures(CHInstance(d.agents, F(0))))
    buf = io.StringIO()
    assert run(["--json", "solve", str(inst_path)], stdout=buf) == 0
    lines.append(buf.getvalue())
    return "\n".join(lines)


@crit(10, "solver soundness and byte-identical repeated reports", 60)
def test_solver_determinism(tmp_path):
    first = _solve_reports(tmp_path)
    second = _solve_reports(tmp_path)
    assert first == second
    assert json.loads(first.strip().splitlines()[-1])["status"] == "ok"
