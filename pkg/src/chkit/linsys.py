"""Exact feasibility of small linear systems: Gaussian elimination on the
equalities, then Fourier-Motzkin on what is left.

A constraint is ``(coeffs, const)`` with ``coeffs`` a tuple of Fractions and
the meaning ``sum(coeffs[j] * x[j]) + const <= 0`` (or ``== 0`` for the
equality list).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Constraint = tuple  # (tuple[Fraction, ...], Fraction)


def _normalize(coeffs, const):
    """Scale so the first nonzero coefficient has absolute value one."""
    for a in coeffs:
        if a:
            s = abs(a)
            return tuple(c / s for c in coeffs), const / s
    return tuple(coeffs), const


def _substitute(coeffs, const, var, expr_coeffs, expr_const):
    """Replace x[var] by expr_coeffs . x + expr_const."""
    a = coeffs[var]
    if not a:
        return coeffs, const
    new = [c + a * e for c, e in zip(coeffs, expr_coeffs)]
    new[var] = Fraction(0)
    return tuple(new), const + a * expr_const


def solve_linear_system(nvars: int, eqs: Sequence[Constraint], ineqs: Sequence[Constraint],
                        preferred: Sequence[Fraction]) -> list[Fraction] | None:
    """Return a feasible point or None.

    Free variables take their preferred value clamped to the feasible range,
    processed in index order; variables fixed by equalities follow.
    """
    zero = Fraction(0)
    eqs = [tuple(c) for c in eqs]
    ineqs = [tuple(c) for c in ineqs]
    pivots: list[tuple[int, tuple, Fraction]] = []
    pending = list(eqs)
    while pending:
        coeffs, const = pending.pop(0)
        var = next((j for j in range(nvars - 1, -1, -1) if coeffs[j]), None)
        if var is None:
            if const != 0:
                return None
            continue
        a = coeffs[var]
        expr_c = tuple(zero if j == var else -c / a for j, c in enumerate(coeffs))
        expr_k = -const / a
        pending = [_substitute(c, k, var, expr_c, expr_k) for c, k in pending]
        ineqs = [_substitute(c, k, var, expr_c, expr_k) for c, k in ineqs]
        pivots = [(v, *_substitute(ec, ek, var, expr_c, expr_k)) for v, ec, ek in pivots]
        pivots.append((var, expr_c, expr_k))
    pivot_vars = {v for v, _, _ in pivots}
    free = [j for j in range(nvars) if j not in pivot_vars]

    # Fourier-Motzkin, eliminating the free variables from last to first.
    stages: dict[int, list] = {}
    system = {_normalize(c, k) for c, k in ineqs}
    for var in reversed(free):
        involved = [(c, k) for c, k in system if c[var]]
        stages[var] = involved
        rest = {(c, k) for c, k in system if not c[var]}
        uppers = [(c, k) for c, k in involved if c[var] > 0]
        lowers = [(c, k) for c, k in involved if c[var] < 0]
        for cu, ku in uppers:
            for cl, kl in lowers:
                wu, wl = cu[var], -cl[var]
                comb = tuple(wl * a + wu * b for a, b in zip(cu, cl))
                k = wl * ku + wu * kl
                comb = tuple(zero if j == var else c for j, c in enumerate(comb))
                if not any(comb):
                    if k > 0:
                        return None
                    continue
                rest.add(_normalize(comb, k))
        system = rest
    for c, k in system:
        if k > 0:
            return None

    values: list[Fraction | None] = [None] * nvars
    for var in free:
        lo = hi = None
        for c, k in stages[var]:
            s = k + sum(c[j] * values[j] for j in range(nvars) if j != var and c[j])
            bound = -s / c[var]
            if c[var] > 0:
                hi = bound if hi is None or bound < hi else hi
            else:
                lo = bound if lo is None or bound > lo else lo
        if lo is not None and hi is not None and lo > hi:
            return None
        v = Fraction(preferred[var])
        if lo is not None and v < lo:
            v = lo
        if hi is not None and v > hi:
            v = hi
        values[var] = v
    for var, ec, ek in reversed(pivots):
        values[var] = ek + sum(ec[j] * values[j] for j in range(nvars) if ec[j])
    return values
