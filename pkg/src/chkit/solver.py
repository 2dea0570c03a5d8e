"""Brute-force exact solvers for desk-scale halving and division instances.

The line is split into cells by the union of all breakpoints.  A candidate
assignment puts each cut in a cell (non-decreasing along the sorted cuts);
inside a fixed assignment every agent's value is affine in the cut positions,
so feasibility is an exact linear system.  Assignments are visited in a fixed
order: cut count ascending, then the first label (plus before minus), then
cells lexicographically.  A depth-first walk prunes prefixes whose box
relaxation already rules out balance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .arith import union_breakpoints
from .linsys import solve_linear_system
from .measures import (CHInstance, CutLabelling, DivisionInstance, DivisionSolution, Label,
                       verify_division, verify_halving)

DEFAULT_BUDGET = 10 ** 6


@dataclass(frozen=True)
class BudgetExhausted:
    """Returned when the search cap is hit before the space was exhausted."""
    visited: int

    def __bool__(self):
        return False


class _Budget(Exception):
    pass


class _Cells:
    """Cell boundaries plus each agent's cumulative mass and density per cell."""

    def __init__(self, agents):
        self.bounds = union_breakpoints(agents)
        self.ncells = len(self.bounds) - 1
        self.cum = []
        self.dens = []
        for f in agents:
            cum = [Fraction(0)]
            dens = []
            for j in range(self.ncells):
                a, b = self.bounds[j], self.bounds[j + 1]
                h = f.value_at(a)
                dens.append(h)
                cum.append(cum[-1] + h * (b - a))
            self.cum.append(cum)
            self.dens.append(dens)

    def F(self, agent, cell, t):
        return self.cum[agent][cell] + self.dens[agent][cell] * (t - self.bounds[cell])

    def affine(self, agent, cell):
        """F on ``cell`` as (slope, intercept)."""
        h = self.dens[agent][cell]
        return h, self.cum[agent][cell] - h * self.bounds[cell]


class _Counter:
    def __init__(self, cap):
        self.cap = cap
        self.count = 0

    def tick(self):
        self.count += 1
        if self.count > self.cap:
            raise _Budget()


def _halving_leaf(cells: _Cells, n_agents: int, assign: Sequence[int], s0: int, eps: Fraction,
                  exact: bool):
    c = len(assign)
    # D_i = s_c F(hi) + sum_q 2 s_{q-1} F(t_q)
    sc = s0 if c % 2 == 0 else -s0
    rows = []
    for i in range(n_agents):
        coeffs = [Fraction(0)] * c
        const = sc * cells.cum[i][-1]
        for q, cell in enumerate(assign):
            s_prev = s0 if q % 2 == 0 else -s0
            slope, icpt = cells.affine(i, cell)
            coeffs[q] += 2 * s_prev * slope
            const += 2 * s_prev * icpt
        rows.append((tuple(coeffs), const))
    ineqs = []
    for q, cell in enumerate(assign):
        lo, hi = cells.bounds[cell], cells.bounds[cell + 1]
        e = [Fraction(0)] * c
        e[q] = Fraction(1)
        ineqs.append((tuple(e), -hi))
        e2 = [Fraction(0)] * c
        e2[q] = Fraction(-1)
        ineqs.append((tuple(e2), lo))
        if q + 1 < c and assign[q + 1] == cell:
            e3 = [Fraction(0)] * c
            e3[q], e3[q + 1] = Fraction(1), Fraction(-1)
            ineqs.append((tuple(e3), Fraction(0)))
    eqs = []
    for coeffs, const in rows:
        if exact or eps == 0:
            eqs.append((coeffs, const))
        else:
            ineqs.append((coeffs, const - eps))
            ineqs.append((tuple(-a for a in coeffs), -const - eps))
    preferred = [(cells.bounds[cell] + cells.bounds[cell + 1]) / 2 for cell in assign]
    return solve_linear_system(c, eqs, ineqs, preferred)


def _halving_prune(cells: _Cells, n_agents: int, assign: list[int], c: int, s0: int, eps: Fraction) -> bool:
    """True when no completion of the prefix ``assign`` can balance every agent."""
    q_done = len(assign)
    start = assign[-1] if assign else 0
    a_start = cells.bounds[start]
    sc = s0 if c % 2 == 0 else -s0
    for i in range(n_agents):
        cum = cells.cum[i]
        lo = hi = sc * cum[-1]
        for q, cell in enumerate(assign):
            s = 2 * (s0 if q % 2 == 0 else -s0)
            f0, f1 = cum[cell], cum[cell + 1]
            if s > 0:
                lo += s * f0
                hi += s * f1
            else:
                lo += s * f1
                hi += s * f0
        f0 = cells.F(i, start, a_start) if q_done else Fraction(0)
        f1 = cum[-1]
        for q in range(q_done, c):
            s = 2 * (s0 if q % 2 == 0 else -s0)
            if s > 0:
                lo += s * f0
                hi += s * f1
            else:
                lo += s * f1
                hi += s * f0
        if lo > eps or hi < -eps:
            return True
    return False


def _search_halving(inst: CHInstance, max_cuts: int, exact: bool, budget: int):
    agents = inst.agents
    cells = _Cells(agents)
    n = len(agents)
    eps = Fraction(0) if exact else inst.epsilon
    counter = _Counter(budget)

    def dfs(c, s0, assign):
        counter.tick()
        if _halving_prune(cells, n, assign, c, s0, eps):
            return None
        if len(assign) == c:
            vals = _halving_leaf(cells, n, assign, s0, eps, exact)
            return vals
        start = assign[-1] if assign else 0
        for cell in range(start, cells.ncells):
            assign.append(cell)
            got = dfs(c, s0, assign)
            assign.pop()
            if got is not None:
                return got
        return None

    try:
        for c in range(max_cuts + 1):
            for label in (Label.PLUS, Label.MINUS):
                vals = dfs(c, label.sign, [])
                if vals is not None:
                    sol = CutLabelling(tuple(vals), label)
                    report = verify_halving(inst if not exact else _exact_view(inst), sol)
                    if not report.valid:
                        raise AssertionError("solver produced an unverified labelling")
                    return sol
    except _Budget:
        return BudgetExhausted(counter.count)
    return None


def _exact_view(inst: CHInstance) -> CHInstance:
    if inst.epsilon == 0:
        return inst
    return CHInstance(inst.agents, Fraction(0), inst.names, check_mass=False)


def solve_halving_exact(inst: CHInstance, max_cuts: int, budget: int = DEFAULT_BUDGET):
    """First labelling with at most ``max_cuts`` cuts and zero discrepancy."""
    return _search_halving(inst, max_cuts, True, budget)


def solve_halving_approx(inst: CHInstance, max_cuts: int, budget: int = DEFAULT_BUDGET):
    """First labelling with every discrepancy at most ``inst.epsilon``."""
    return _search_halving(inst, max_cuts, False, budget)


def _part_sequences(pieces: int, k: int):
    for seq in product(range(1, k + 1), repeat=pieces):
        if all(a != b for a, b in zip(seq, seq[1:])):
            yield seq


def _division_prune(cells: _Cells, n: int, k: int, parts, assign, c) -> bool:
    target = Fraction(1, k)
    q_done = len(assign)
    start = assign[-1] if assign else 0
    for i in range(n):
        cum = cells.cum[i]
        lo = [Fraction(0)] * (k + 1)
        hi = [Fraction(0)] * (k + 1)
        prev_lo = prev_hi = Fraction(0)  # range of F at the left end of the current piece
        for q, cell in enumerate(assign):
            f0, f1 = cum[cell], cum[cell + 1]
            p = parts[q]
            lo[p] += max(Fraction(0), f0 - prev_hi)
            hi[p] += f1 - prev_lo
            prev_lo, prev_hi = f0, f1
        rest_hi = cum[-1] - prev_lo
        tail_parts = set(parts[q_done:])
        for p in range(1, k + 1):
            h = hi[p] + (rest_hi if p in tail_parts else 0)
            if lo[p] > target or h < target:
                return True
    return False


def _division_leaf(cells: _Cells, n: int, k: int, parts, assign):
    c = len(assign)
    target = Fraction(1, k)
    eqs = []
    for i in range(n):
        rows = {p: ([Fraction(0)] * c, Fraction(0)) for p in range(1, k + 1)}
        for q in range(c + 1):
            p = parts[q]
            coeffs, const = rows[p]
            if q < c:
                slope, icpt = cells.affine(i, assign[q])
                coeffs[q] += slope
                const += icpt
            else:
                const += cells.cum[i][-1]
            if q > 0:
                slope, icpt = cells.affine(i, assign[q - 1])
                coeffs[q - 1] -= slope
                const -= icpt
            rows[p] = (coeffs, const)
        for p in range(1, k + 1):
            coeffs, const = rows[p]
            eqs.append((tuple(coeffs), const - target))
    ineqs = []
    for q, cell in enumerate(assign):
        e = [Fraction(0)] * c
        e[q] = Fraction(1)
        ineqs.append((tuple(e), -cells.bounds[cell + 1]))
        e2 = [Fraction(0)] * c
        e2[q] = Fraction(-1)
        ineqs.append((tuple(e2), cells.bounds[cell]))
        if q + 1 < c and assign[q + 1] == cell:
            e3 = [Fraction(0)] * c
            e3[q], e3[q + 1] = Fraction(1), Fraction(-1)
            ineqs.append((tuple(e3), Fraction(0)))
    preferred = [(cells.bounds[cell] + cells.bounds[cell + 1]) / 2 for cell in assign]
    return solve_linear_system(c, eqs, ineqs, preferred)


def solve_division_exact(inst: DivisionInstance, budget: int = DEFAULT_BUDGET):
    """First exact 1/k-division with at most (k-1)*ell cuts."""
    cells = _Cells(inst.agents)
    n, k = inst.n, inst.k
    counter = _Counter(budget)

    def dfs(parts, c, assign):
        counter.tick()
        if _division_prune(cells, n, k, parts, assign, c):
            return None
        if len(assign) == c:
            return _division_leaf(cells, n, k, parts, assign)
        start = assign[-1] if assign else 0
        for cell in range(start, cells.ncells):
            assign.append(cell)
            got = dfs(parts, c, assign)
            assign.pop()
            if got is not None:
                return got
        return None

    try:
        for c in range(inst.max_cuts + 1):
            for parts in _part_sequences(c + 1, k):
                vals = dfs(parts, c, [])
                if vals is not None:
                    sol = DivisionSolution(tuple(vals), parts)
                    report = verify_division(DivisionInstance(inst.agents, k, inst.ell, 0), sol)
                    if not report.valid:
                        raise AssertionError("solver produced an unverified division")
                    return sol
    except _Budget:
        return BudgetExhausted(counter.count)
    return None
