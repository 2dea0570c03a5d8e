"""Consensus-halving and consensus-division instances, solutions and verifiers."""

from __future__ import annotations

import enum
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .arith import Interval, Q, StepFunction, scale, total_mass
from .errors import DomainError, StructureError


class Label(enum.Enum):
    PLUS = "+"
    MINUS = "-"

    @property
    def other(self) -> "Label":
        return Label.MINUS if self is Label.PLUS else Label.PLUS

    @property
    def sign(self) -> int:
        return 1 if self is Label.PLUS else -1


def renormalize(f: StepFunction) -> StepFunction:
    """Scale ``f`` to total mass one."""
    m = total_mass(f)
    if m == 0:
        raise StructureError("cannot renormalize a zero measure")
    return scale(f, 1 / m)


def _check_agents(agents: Sequence[StepFunction], check_mass: bool) -> Interval:
    if not agents:
        raise StructureError("an instance needs at least one agent")
    dom = agents[0].domain
    for idx, f in enumerate(agents):
        if f.domain != dom:
            raise DomainError(f"agent {idx} has domain {f.domain}, expected {dom}")
        if check_mass:
            m = total_mass(f)
            if m != 1:
                raise StructureError(f"agent {idx} has mass {m}, expected 1")
    return dom


@dataclass(frozen=True)
class CHInstance:
    agents: tuple
    epsilon: Fraction
    names: tuple = ()
    check_mass: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "epsilon", Q(self.epsilon))
        if self.epsilon < 0:
            raise StructureError("epsilon must be non-negative")
        dom = _check_agents(self.agents, self.check_mass)
        if dom.lo != 0 or dom.hi <= 0:
            raise DomainError(f"domain must be [0, x] with x > 0, got {dom}")
        if self.names and len(self.names) != len(self.agents):
            raise StructureError("one name per agent")
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def domain(self) -> Interval:
        return self.agents[0].domain

    @property
    def n(self) -> int:
        return len(self.agents)


@dataclass(frozen=True)
class CutLabelling:
    cuts: tuple
    first_label: Label = Label.PLUS

    def __post_init__(self):
        cuts = tuple(Q(c) for c in self.cuts)
        if any(a > b for a, b in zip(cuts, cuts[1:])):
            raise StructureError("cuts must be sorted ascending")
        object.__setattr__(self, "cuts", cuts)

    def label_of_piece(self, i: int) -> Label:
        return self.first_label if i % 2 == 0 else self.first_label.other

    def label_at(self, x) -> Label:
        """Label of the piece containing ``x`` (closed-open convention)."""
        return self.label_of_piece(bisect_right(self.cuts, Q(x)))


def _signed_integral(f: StepFunction, cuts: tuple, sign_of_piece) -> tuple[Fraction, Fraction]:
    """Return (value of pieces with sign +1, value with sign -1)."""
    plus = Fraction(0)
    minus = Fraction(0)
    for lo, hi, h in f.pieces():
        if h == 0:
            continue
        i = bisect_right(cuts, lo)
        j = bisect_left(cuts, hi)
        pos = lo
        piece = i
        for c in cuts[i:j]:
            if c > pos:
                if sign_of_piece(piece) > 0:
                    plus += h * (c - pos)
                else:
                    minus += h * (c - pos)
                pos = c
            piece += 1
        if hi > pos:
            if sign_of_piece(piece) > 0:
                plus += h * (hi - pos)
            else:
                minus += h * (hi - pos)
    return plus, minus


@dataclass(frozen=True)
class HalvingReport:
    per_agent_discrepancy: tuple
    max_discrepancy: Fraction
    valid: bool
    plus_values: tuple = ()
    minus_values: tuple = ()


def _check_cuts(dom: Interval, cuts) -> None:
    for c in cuts:
        if not dom.contains(c):
            raise DomainError(f"cut {c} outside domain {dom}")


def agent_values(f: StepFunction, sol: CutLabelling) -> tuple[Fraction, Fraction]:
    """(mu(A+), mu(A-)) for one measure."""
    first = sol.first_label.sign
    return _signed_integral(f, sol.cuts, lambda i: first if i % 2 == 0 else -first)


def verify_halving(inst: CHInstance, sol: CutLabelling, agents: Sequence[int] | None = None) -> HalvingReport:
    """Exact per-agent discrepancies; ``agents`` restricts the check to a subset."""
    if len(sol.cuts) > inst.n:
        raise StructureError(f"{len(sol.cuts)} cuts for {inst.n} agents")
    _check_cuts(inst.domain, sol.cuts)
    idxs = range(inst.n) if agents is None else agents
    discs, pluses, minuses = [], [], []
    for i in idxs:
        p, m = agent_values(inst.agents[i], sol)
        pluses.append(p)
        minuses.append(m)
        discs.append(abs(p - m))
    worst = max(discs, default=Fraction(0))
    return HalvingReport(tuple(discs), worst, worst <= inst.epsilon, tuple(pluses), tuple(minuses))


def normalize_labelling(inst: CHInstance, cuts: Sequence, labels: Sequence[Label]) -> CutLabelling:
    """Turn cuts plus arbitrary piece labels into an alternating labelling.

    Zero-width pieces are dropped, equal neighbours merged, and each cut freed
    this way is parked at the right endpoint of the domain.
    """
    cuts = [Q(c) for c in cuts]
    labels = list(labels)
    if len(labels) != len(cuts) + 1:
        raise StructureError("need exactly one label per piece")
    if any(a > b for a, b in zip(cuts, cuts[1:])):
        raise StructureError("cuts must be sorted ascending")
    if all(a is not b for a, b in zip(labels, labels[1:])):
        return CutLabelling(tuple(cuts), labels[0])
    dom = inst.domain
    bounds = [dom.lo] + cuts + [dom.hi]
    kept = [(bounds[i], bounds[i + 1], labels[i]) for i in range(len(labels))
            if bounds[i + 1] > bounds[i]]
    if not kept:
        kept = [(dom.lo, dom.hi, labels[0])]
    merged = [kept[0]]
    for lo, hi, lab in kept[1:]:
        if lab is merged[-1][2]:
            merged[-1] = (merged[-1][0], hi, lab)
        else:
            merged.append((lo, hi, lab))
    new_cuts = [piece[0] for piece in merged[1:]]
    new_cuts += [dom.hi] * (len(cuts) - len(new_cuts))
    return CutLabelling(tuple(new_cuts), merged[0][2])


@dataclass(frozen=True)
class DivisionInstance:
    agents: tuple
    k: int
    ell: int
    epsilon: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "epsilon", Q(self.epsilon))
        _check_agents(self.agents, True)
        if self.k < 2:
            raise StructureError("k must be at least 2")
        if self.ell < 1:
            raise StructureError("ell must be positive")
        if self.epsilon < 0:
            raise StructureError("epsilon must be non-negative")

    @property
    def domain(self) -> Interval:
        return self.agents[0].domain

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def max_cuts(self) -> int:
        return (self.k - 1) * self.ell


@dataclass(frozen=True)
class DivisionSolution:
    cuts: tuple
    part_of_piece: tuple

    def __post_init__(self):
        cuts = tuple(Q(c) for c in self.cuts)
        if any(a > b for a, b in zip(cuts, cuts[1:])):
            raise StructureError("cuts must be sorted ascending")
        parts = tuple(int(p) for p in self.part_of_piece)
        if len(parts) != len(cuts) + 1:
            raise StructureError("piece count must equal cut count + 1")
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "part_of_piece", parts)


@dataclass(frozen=True)
class DivisionReport:
    part_values: tuple
    max_pairwise_gap: Fraction
    valid: bool


def part_values(f: StepFunction, cuts: tuple, parts: tuple, k: int) -> list[Fraction]:
    vals = [Fraction(0)] * k
    for lo, hi, h in f.pieces():
        if h == 0:
            continue
        i = bisect_right(cuts, lo)
        j = bisect_left(cuts, hi)
        pos = lo
        piece = i
        for c in cuts[i:j]:
            if c > pos:
                vals[parts[piece] - 1] += h * (c - pos)
                pos = c
            piece += 1
        if hi > pos:
            vals[parts[piece] - 1] += h * (hi - pos)
    return vals


def verify_division(inst: DivisionInstance, sol: DivisionSolution) -> DivisionReport:
    if len(sol.cuts) > inst.max_cuts:
        raise StructureError(f"{len(sol.cuts)} cuts exceed the budget {inst.max_cuts}")
    for p in sol.part_of_piece:
        if not 1 <= p <= inst.k:
            raise StructureError(f"part index {p} outside 1..{inst.k}")
    _check_cuts(inst.domain, sol.cuts)
    table = []
    gap = Fraction(0)
    for f in inst.agents:
        vals = part_values(f, sol.cuts, sol.part_of_piece, inst.k)
        table.append(tuple(vals))
        gap = max(gap, max(vals) - min(vals))
    return DivisionReport(tuple(table), gap, gap <= inst.epsilon)
