"""Necklace splitting: verification, brute force, and the two reductions to
and from consensus 1/k-division."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import ceil
from typing import Sequence

from .arith import Interval, Q, StepFunction
from .errors import AmbiguousCutError, InternalInvariantError, StructureError
from .measures import DivisionInstance, DivisionSolution, part_values, verify_division

F = Fraction


@dataclass(frozen=True)
class NecklaceInstance:
    """Beads ``(position, colour)`` with colours 1..colors, split into k parts."""
    beads: tuple
    k: int
    ell: int
    colors: int = 0

    def __post_init__(self):
        beads = tuple((Q(p), int(c)) for p, c in self.beads)
        if any(a[0] >= b[0] for a, b in zip(beads, beads[1:])):
            raise StructureError("bead positions must be strictly increasing")
        colors = self.colors or max((c for _, c in beads), default=0)
        if any(not 1 <= c <= colors for _, c in beads):
            raise StructureError(f"bead colours must lie in 1..{colors}")
        if self.k < 2:
            raise StructureError("k must be at least 2")
        if self.ell < 1:
            raise StructureError("ell must be positive")
        object.__setattr__(self, "beads", beads)
        object.__setattr__(self, "colors", colors)
        for i, cnt in enumerate(self.counts, start=1):
            if cnt % self.k:
                raise StructureError(f"colour {i} has {cnt} beads, not a multiple of k={self.k}")

    @property
    def counts(self) -> tuple:
        out = [0] * self.colors
        for _, c in self.beads:
            out[c - 1] += 1
        return tuple(out)

    @property
    def alpha(self) -> tuple:
        return tuple(c // self.k for c in self.counts)

    @property
    def max_cuts(self) -> int:
        return (self.k - 1) * self.ell


@dataclass(frozen=True)
class NecklaceSolution:
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
class NecklaceReport:
    counts: tuple        # counts[colour][part]
    bounds: tuple        # per colour (lower, upper)
    valid: bool


def bead_bounds(alpha: int, eps) -> tuple:
    eps = Q(eps)
    lo = alpha - eps
    hi = alpha + eps
    return -((-lo.numerator) // lo.denominator), hi.numerator // hi.denominator


def verify_necklace(inst: NecklaceInstance, sol: NecklaceSolution, eps_beads=0) -> NecklaceReport:
    if len(sol.cuts) > inst.max_cuts:
        raise StructureError(f"{len(sol.cuts)} cuts exceed the budget {inst.max_cuts}")
    for p in sol.part_of_piece:
        if not 1 <= p <= inst.k:
            raise StructureError(f"part index {p} outside 1..{inst.k}")
    positions = [p for p, _ in inst.beads]
    for c in sol.cuts:
        i = bisect_left(positions, c)
        if i < len(positions) and positions[i] == c:
            raise AmbiguousCutError(f"cut at {c} falls on a bead")
    table = [[0] * inst.k for _ in range(inst.colors)]
    for pos, col in inst.beads:
        table[col - 1][sol.part_of_piece[bisect_right(sol.cuts, pos)] - 1] += 1
    bounds = tuple(bead_bounds(a, eps_beads) for a in inst.alpha)
    ok = all(lo <= v <= hi for row, (lo, hi) in zip(table, bounds) for v in row)
    return NecklaceReport(tuple(tuple(r) for r in table), bounds, ok)


def _part_sequences(pieces: int, k: int):
    for seq in product(range(1, k + 1), repeat=pieces):
        if all(a != b for a, b in zip(seq, seq[1:])):
            yield seq


def gap_midpoints(inst: NecklaceInstance) -> list:
    ps = [p for p, _ in inst.beads]
    return [(a + b) / 2 for a, b in zip(ps, ps[1:])]


def solve_necklace_bruteforce(inst: NecklaceInstance):
    """First exact split, cuts at gap midpoints.

    Search order: cut count from the full budget downwards, then part
    sequences lexicographically (neighbouring pieces in distinct parts), then
    gap tuples lexicographically.  The last cut of a candidate is found by a
    prefix-count lookup instead of enumeration.
    """
    B = len(inst.beads)
    n = inst.colors
    alpha = inst.alpha
    total = inst.counts
    prefix = [tuple([0] * n)]
    for _, c in inst.beads:
        row = list(prefix[-1])
        row[c - 1] += 1
        prefix.append(tuple(row))
    where: dict = {}
    for g in range(1, B):
        where.setdefault(prefix[g], []).append(g)
    mids = gap_midpoints(inst)

    def sub(a, b):
        return tuple(x - y for x, y in zip(a, b))

    def add(a, b):
        return tuple(x + y for x, y in zip(a, b))

    def fits(v):
        return all(x <= a for x, a in zip(v, alpha))

    for c in range(min(inst.max_cuts, B - 1), -1, -1):
        for parts in _part_sequences(c + 1, inst.k):
            if c == 0:
                if all(a == 0 for a in alpha) or all(t == a for t, a in zip(total, alpha)):
                    return NecklaceSolution((), parts)
                continue
            found = _dfs_necklace(parts, c, prefix, where, alpha, total, inst.k, B, sub, add, fits)
            if found is not None:
                return NecklaceSolution(tuple(mids[g - 1] for g in found), parts)
    return None


def _dfs_necklace(parts, c, prefix, where, alpha, total, k, B, sub, add, fits):
    zero = tuple([0] * len(alpha))
    counts = [zero] * (k + 1)

    def rec(j, prev, gs):
        # j cuts placed; piece j runs from gap ``prev`` onwards with part parts[j]
        if j == c - 1:
            p_mid, p_last = parts[j], parts[j + 1]
            need = sub(add(alpha, prefix[prev]), counts[p_mid])
            cand = where.get(need)
            if not cand:
                return None
            i = bisect_right(cand, prev)
            if i == len(cand):
                return None
            g = cand[i]
            final = list(counts)
            final[p_mid] = alpha
            final[p_last] = add(final[p_last], sub(total, prefix[g]))
            if all(final[p] == alpha for p in range(1, k + 1)):
                return gs + [g]
            return None
        p = parts[j]
        for g in range(prev + 1, B):
            piece = sub(prefix[g], prefix[prev])
            new = add(counts[p], piece)
            if not fits(new):
                break
            old = counts[p]
            counts[p] = new
            got = rec(j + 1, g, gs + [g])
            counts[p] = old
            if got is not None:
                return got
        return None

    return rec(0, 0, [])


# -- division -> necklace ---------------------------------------------------

@dataclass(frozen=True)
class DivToNeckProvenance:
    division: DivisionInstance
    delta: Fraction
    piece_bound: int
    removed: tuple          # (position, colour) of trimmed parity beads
    nudged: int


def division_delta(div: DivisionInstance) -> tuple:
    """Sub-block volume and the piece bound it was derived from."""
    if div.epsilon <= 0:
        raise StructureError("the reduction needs a positive epsilon")
    n = div.n
    p_m = max(len(f.nonzero_pieces()) for f in div.agents)
    delta = div.epsilon / (n ** 3 * ((div.k - 1) * (div.ell + 1) + p_m))
    return delta, p_m


def reduce_division_to_necklace(div: DivisionInstance) -> tuple:
    delta, p_m = division_delta(div)
    raw = []   # (position, colour, sub-block lo, sub-block hi)
    for colour, f in enumerate(div.agents, start=1):
        for lo, hi, h in f.nonzero_pieces():
            count = ceil(h * (hi - lo) / delta)
            w = delta / h
            for j in range(count):
                a = lo + j * w
                b = min(hi, a + w)
                raw.append(((a + b) / 2, colour, a, b))
    used = set()
    beads = []
    nudged = 0
    for pos, colour, a, b in raw:
        # overlapping blocks of different agents can put two beads on one
        # point; move the later one elsewhere inside its own sub-block
        den = 2
        while pos in used:
            den += 1
            for num in range(1, den):
                cand = a + (b - a) * F(num, den)
                if cand not in used:
                    pos = cand
                    break
        if pos != (a + b) / 2:
            nudged += 1
        used.add(pos)
        beads.append((pos, colour))
    beads.sort()
    removed = []
    for colour in range(1, div.n + 1):
        idx = [i for i, (_, c) in enumerate(beads) if c == colour]
        extra = len(idx) % div.k
        for i in idx[len(idx) - extra:] if extra else []:
            removed.append(beads[i])
    keep = set(removed)
    beads = [b for b in beads if b not in keep]
    neck = NecklaceInstance(tuple(beads), div.k, div.ell, div.n)
    return neck, DivToNeckProvenance(div, delta, p_m, tuple(removed), nudged)


def lift_necklace_solution_to_division(prov: DivToNeckProvenance, sol: NecklaceSolution) -> DivisionSolution:
    return DivisionSolution(sol.cuts, sol.part_of_piece)


# -- necklace -> division ---------------------------------------------------

@dataclass(frozen=True)
class NeckToDivParams:
    necklace: NecklaceInstance
    delta: Fraction
    beta: Fraction
    epsilon: Fraction       # unnormalised: a block has volume 1
    blocks: tuple           # per bead: (lo, hi, colour)


def reduce_necklace_to_division(neck: NecklaceInstance) -> tuple:
    ps = [p for p, _ in neck.beads]
    if len(ps) < 2:
        raise StructureError("need at least two beads")
    gap = min(b - a for a, b in zip(ps, ps[1:]))
    delta = gap / 4
    beta = gap / 2
    eps = min(beta / 4, F(1, 4))
    dom = Interval(min(F(0), ps[0] - gap), ps[-1] + gap)
    counts = neck.counts
    blocks = tuple((p - delta / 2, p + delta / 2, c) for p, c in neck.beads)
    agents = []
    for colour in range(1, neck.colors + 1):
        if counts[colour - 1] == 0:
            raise StructureError(f"colour {colour} has no beads")
        h = 1 / (delta * counts[colour - 1])
        agents.append(StepFunction.from_pieces(dom, [(lo, hi, h) for lo, hi, c in blocks if c == colour]))
    scaled = eps / max(counts)
    div = DivisionInstance(tuple(agents), neck.k, neck.ell, scaled)
    return div, NeckToDivParams(neck, delta, beta, eps, blocks)


@dataclass
class ExtractionLog:
    steps: list = field(default_factory=list)     # (colour, cycle edges, distance)
    snaps: list = field(default_factory=list)     # (cut before, cut after, distance)


def _normalize(cuts: list, parts: list, dom: Interval) -> tuple:
    """Drop empty pieces and merge neighbours in the same part."""
    bounds = [dom.lo] + list(cuts) + [dom.hi]
    pieces = [(bounds[i], bounds[i + 1], parts[i]) for i in range(len(parts)) if bounds[i + 1] > bounds[i]]
    if not pieces:
        return [], [parts[0]]
    merged = [pieces[0]]
    for lo, hi, p in pieces[1:]:
        if p == merged[-1][2]:
            merged[-1] = (merged[-1][0], hi, p)
        else:
            merged.append((lo, hi, p))
    return [m[0] for m in merged[1:]], [m[2] for m in merged]


def _block_of(params: NeckToDivParams, colour_blocks, x):
    """Block of one colour whose interior contains ``x``, if any."""
    i = bisect_right(colour_blocks, x, key=lambda b: b[0]) - 1
    if i >= 0:
        lo, hi = colour_blocks[i]
        if lo < x < hi:
            return lo, hi
    return None


def _volumes(div: DivisionInstance, cuts, parts):
    return [tuple(part_values(f, tuple(cuts), tuple(parts), div.k)) for f in div.agents]


def _simple_cycles(edges: list, k: int) -> list:
    """All simple cycles of a small multigraph as (edge-index tuple, start vertex)."""
    found = set()
    out = []
    adj = {v: [] for v in range(1, k + 1)}
    for idx, (a, b) in enumerate(edges):
        adj[a].append((idx, b))
        adj[b].append((idx, a))

    def walk(start, v, used, verts):
        for idx, w in adj[v]:
            if idx in used:
                continue
            if w == start and used:
                key = tuple(sorted(used + [idx]))
                if key not in found:
                    found.add(key)
                    out.append(key)
                continue
            if w in verts:
                continue
            walk(start, w, used + [idx], verts | {w})

    for v in range(1, k + 1):
        walk(v, v, [], {v})
    out.sort()
    return out


def _orient_cycle(key: tuple, edges: list) -> list:
    """Order the cycle's edges starting at its lowest edge, from its lower part."""
    first = key[0]
    a, b = edges[first]
    start, nxt = min(a, b), max(a, b)
    seq = [(first, start, nxt)]
    left = set(key) - {first}
    cur = nxt
    while left:
        for idx in sorted(left):
            x, y = edges[idx]
            if cur in (x, y):
                other = y if x == cur else x
                seq.append((idx, cur, other))
                left.discard(idx)
                cur = other
                break
        else:
            raise InternalInvariantError("cycle edges do not chain")
    return seq


def extract_necklace_solution(params: NeckToDivParams, div: DivisionInstance, sol: DivisionSolution,
                              log: ExtractionLog | None = None) -> NecklaceSolution:
    """Move bad cuts out of bead blocks while keeping every part's volume."""
    if log is None:
        log = ExtractionLog()
    neck = params.necklace
    dom = div.domain
    cuts, parts = _normalize(list(sol.cuts), list(sol.part_of_piece), dom)
    by_colour = {c: sorted((lo, hi) for lo, hi, cc in params.blocks if cc == c)
                 for c in range(1, neck.colors + 1)}
    for colour in range(1, neck.colors + 1):
        blocks = by_colour[colour]
        while True:
            bad = [i for i, x in enumerate(cuts) if _block_of(params, blocks, x) is not None]
            edges = [(parts[i], parts[i + 1]) for i in bad]
            cycles = _simple_cycles(edges, div.k)
            if not cycles:
                break
            seq = _orient_cycle(cycles[0], edges)
            vel = {}
            for e, inc, dec in seq:
                ci = bad[e]
                vel[ci] = 1 if parts[ci] == inc else -1
            t = None
            for ci, s in vel.items():
                lo, hi = _block_of(params, blocks, cuts[ci])
                d = hi - cuts[ci] if s > 0 else cuts[ci] - lo
                t = d if t is None else min(t, d)
            for ci, s in vel.items():
                for cj, x in enumerate(cuts):
                    if cj == ci:
                        continue
                    rel = s - vel.get(cj, 0)
                    diff = x - cuts[ci]
                    if rel != 0 and diff * rel > 0:
                        t = min(t, diff / rel)
            before = _volumes(div, cuts, parts)
            moved = [cuts[i] + vel.get(i, 0) * t for i in range(len(cuts))]
            after = _volumes(div, moved, parts)
            if after != before:
                raise InternalInvariantError(f"cycle move changed part volumes: {before} -> {after}")
            cuts, parts = _normalize(moved, parts, dom)
            if _volumes(div, cuts, parts) != before:
                raise InternalInvariantError("merging cuts changed part volumes")
            nbad = sum(1 for x in cuts if _block_of(params, blocks, x) is not None)
            if nbad >= len(bad):
                raise InternalInvariantError(f"bad cuts did not decrease ({len(bad)} -> {nbad})")
            log.steps.append((colour, tuple(e for e, _, _ in seq), t))
    limit = params.epsilon * params.delta
    snapped = []
    for x in cuts:
        y = x
        for colour in range(1, neck.colors + 1):
            blk = _block_of(params, by_colour[colour], x)
            if blk is None:
                continue
            lo, hi = blk
            d_lo, d_hi = x - lo, hi - x
            if d_lo == d_hi:
                raise InternalInvariantError(f"cut {x} sits at the middle of block [{lo}, {hi}]")
            y = lo if d_lo < d_hi else hi
            dist = min(d_lo, d_hi)
            if dist >= limit:
                raise InternalInvariantError(f"snap distance {dist} is not below {limit}")
            log.snaps.append((x, y, dist))
        snapped.append(y)
    cuts, parts = _normalize(snapped, parts, dom)
    out = NecklaceSolution(tuple(cuts), tuple(parts))
    rep = verify_necklace(neck, out)
    if not rep.valid:
        raise InternalInvariantError(f"extracted split is not exact: {rep.counts}")
    return out


def check_lift(div: DivisionInstance, sol: DivisionSolution):
    """Division report of a lifted split (valid iff the gap is at most epsilon)."""
    return verify_division(div, sol)


def random_necklace(rng, max_beads: int = 12, max_colors: int = 3, k: int = 2) -> NecklaceInstance:
    colors = rng.randint(1, max_colors)
    alphas = [1] * colors
    while sum(alphas) * k < max_beads and rng.random() < 0.7:
        alphas[rng.randrange(colors)] += 1
    beads = [c + 1 for c in range(colors) for _ in range(alphas[c] * k)]
    rng.shuffle(beads)
    pos = 0
    out = []
    for c in beads:
        pos += rng.randint(1, 3)
        out.append((F(pos), c))
    return NecklaceInstance(tuple(out), k, colors, colors)


def random_division(rng, max_agents: int = 3, max_blocks: int = 6, k: int = 2, eps=None) -> DivisionInstance:
    n = rng.randint(1, max_agents)
    dom = Interval(F(0), F(1))
    per = [1] * n
    while sum(per) < max_blocks and rng.random() < 0.5:
        per[rng.randrange(n)] += 1
    agents = []
    for b in per:
        pts = sorted(rng.sample(range(1, 12), 2 * b))
        blocks = [(F(pts[2 * j], 12), F(pts[2 * j + 1], 12)) for j in range(b)]
        weights = [rng.randint(1, 4) for _ in blocks]
        tot = sum(w for w in weights)
        pieces = [(lo, hi, F(w, tot) / (hi - lo)) for (lo, hi), w in zip(blocks, weights)]
        agents.append(StepFunction.from_pieces(dom, pieces))
    if eps is None:
        eps = F(1, 2)
    return DivisionInstance(tuple(agents), k, n, eps)
