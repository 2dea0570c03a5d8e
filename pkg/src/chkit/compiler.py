"""Compile a variant-Tucker instance into a consensus-halving instance.

Layout, left to right: the coordinate-encoding region ``[0, 1]``, one spare
unit, then one region per circuit copy, each followed by a spare unit where
a stray cut may park.  A copy region holds, in order, the bit extractors,
the gate agents of the lowered circuit and an output block of eight units
(blanket sensor at offset 0, output gadgets at 1, 3, 5, 7).  Every
functional unit outside the output block is preceded by a gap unit that
may hold a parity agent.

Wording used below.  The *a-value* of a gadget is 1 when the middle of its
out unit ends up labelled A+.  A wire of the lowered circuit carries a
polarity ``phi`` so that the logical bit equals ``a XOR phi``.
"""

from __future__ import annotations

from bisect import bisect_right, insort
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Sequence

from .arith import Interval, Q, StepFunction, integrate, total_mass
from .circuit import (BoolCircuit, CircuitBuilder, evaluate, int_to_bits, label_of_word, word_str)
from .errors import (ArgumentError, DomainError, IndeterminateError, InconsistentSolutionError,
                     StructureError)
from .measures import CHInstance, CutLabelling, Label, verify_halving
from .tucker import VTInstance, VTSolution, coord_bits

F = Fraction
TWENTIETH = F(1, 20)
MIN_COPIES = 12
WINDOWS = 8


def raw_bits(n: int) -> int:
    """Bits extracted per window."""
    return n + 8


def step(n: int) -> Fraction:
    return F(1, 1 << coord_bits(n))


def epsilon_for(n: int) -> Fraction:
    return F(1, 1 << (2 * n))


def parity_width(n: int) -> Fraction:
    return F(1, 1 << (2 * n + 16))


# -- gadget measures ------------------------------------------------------

GATE_OUT = {"NOT": (F(15, 2), F(15, 2)), "OR": (F(25, 4), F(35, 4)), "AND": (F(35, 4), F(25, 4))}
GATE_IN = {"NOT": F(1, 4), "OR": F(1, 8), "AND": F(1, 8)}
# Orientation each gadget expects on its own cut (label left of the cut).
GATE_ORIENTATION = {"NOT": None, "OR": Label.MINUS, "AND": Label.MINUS}

# (density on [0,1], dense end blocks, middle block on [1/4, 3/4])
BLANKET_VARIANTS = {
    "default": (F(1, 10), F(35, 4), F(1, 20)),
    "tall-middle": (F(1, 10), F(17, 2), F(1, 10)),
    "literal": (F(1, 10), F(17, 2), F(1, 20)),
}


def _unit(iv: Interval) -> None:
    if iv.length != 1:
        raise StructureError(f"gadget interval {iv} is not of unit length")


def gate_pieces(kind: str, ins: Sequence[Interval], out: Interval) -> list:
    if kind not in GATE_OUT:
        raise ArgumentError(f"unknown gate kind {kind}")
    need = 1 if kind == "NOT" else 2
    if len(ins) != need:
        raise StructureError(f"{kind} takes {need} inputs")
    for iv in (*ins, out):
        _unit(iv)
    for iv in ins:
        if iv.overlaps(out):
            raise StructureError(f"input {iv} overlaps the out interval {out}")
    if need == 2 and ins[0].overlaps(ins[1]):
        raise StructureError("input intervals overlap")
    hl, hr = GATE_OUT[kind]
    pieces = [(iv.lo, iv.hi, GATE_IN[kind]) for iv in ins]
    pieces.append((out.lo, out.lo + TWENTIETH, hl))
    pieces.append((out.hi - TWENTIETH, out.hi, hr))
    return pieces


def make_gate_gadget(kind: str, in1: Interval, in2: Interval | None, out: Interval,
                     domain: Interval | None = None) -> StepFunction:
    ins = [in1] if in2 is None else [in1, in2]
    pieces = gate_pieces(kind, ins, out)
    if domain is None:
        lo = min(iv.lo for iv in (*ins, out))
        hi = max(iv.hi for iv in (*ins, out))
        domain = Interval(lo, hi)
    return StepFunction.from_pieces(domain, pieces)


def gadget_a_value(F_rest: Fraction, left: Fraction, right: Fraction, orientation: Label) -> int:
    """a-value forced on a two-block gadget whose other mass sums to ``F_rest``.

    ``F_rest`` is A+ mass minus A- mass outside the out unit.  The cut sits in
    one of the end blocks; a tie leaves the middle labelled A-.
    """
    if abs(F_rest) > left + right:
        raise IndeterminateError("no cut placement in the out unit balances the agent")
    return 1 if -F_rest > orientation.sign * (left - right) else 0


def simulate_gate(kind: str, bits: Sequence[int]) -> tuple:
    """Output bit and cut side of a gate gadget fed clean inputs.

    Inputs sit under the convention A+ left of their cuts, so input bit 0
    (cut at the extreme left) leaves the input unit labelled A-.  The output
    cut uses the gadget's own convention (A+ left for NOT, A- left for OR and
    AND) and the bit is read from its position: left block 0, right block 1.
    """
    if kind not in GATE_OUT:
        raise ArgumentError(f"unknown gate kind {kind}")
    need = 1 if kind == "NOT" else 2
    if len(bits) != need or any(b not in (0, 1) for b in bits):
        raise IndeterminateError(f"{kind} needs {need} boolean inputs")
    F_in = sum(GATE_IN[kind] * (1 if b else -1) for b in bits)
    orient = GATE_ORIENTATION[kind] or Label.PLUS
    hl, hr = GATE_OUT[kind]
    a = gadget_a_value(F_in, hl * TWENTIETH, hr * TWENTIETH, orient)
    # the cut is in the left block exactly when the middle takes the label right of the cut
    left = (a == 1) == (orient is Label.MINUS)
    return (0 if left else 1), ("left" if left else "right")


def extractor_height(k: int) -> Fraction:
    """Height of the two out blocks of the k-th extractor of a window."""
    return 8 + F(2, 1 << k)


@lru_cache(maxsize=None)
def window_pieces(n: int, copy: int, w: int) -> tuple:
    """Pieces of window ``w`` (1-based) of copy ``copy``, shifted left and wrapped."""
    shift = (copy - 1) * step(n)
    lo = (F(w - 1, 8) - shift) % 1
    hi = lo + F(1, 8)
    if hi <= 1:
        return ((lo, hi),)
    return ((lo, F(1)), (F(0), hi - 1))


# -- labels on the coordinate-encoding region -----------------------------

def signed_length(cuts: Sequence[Fraction], a: Fraction, b: Fraction) -> Fraction:
    """Length labelled A+ minus length labelled A- on [a, b] (first label A+)."""
    total = F(0)
    pos = a
    sign = 1 if bisect_right(cuts, a) % 2 == 0 else -1
    for c in cuts:
        if c <= a:
            continue
        if c >= b:
            break
        total += sign * (c - pos)
        pos = c
        sign = -sign
    total += sign * (b - pos)
    return total


def _ce_cuts(cuts) -> tuple:
    cs = tuple(sorted(Q(c) for c in cuts))
    for c in cs:
        if not 0 <= c <= 1:
            raise DomainError(f"coordinate cut {c} outside [0, 1]")
    return cs


def extractor_a_values(n: int, copy: int, ce_cuts: Sequence) -> list:
    """a-values of the 8 x (n+8) extractors of one copy (orientation-free)."""
    return _extractor_a_values(n, copy, _ce_cuts(ce_cuts))


@lru_cache(maxsize=1 << 16)
def _extractor_a_values(n: int, copy: int, cs: tuple) -> list:
    K = raw_bits(n)
    # everything on a common integer grid so the hot loop avoids Fraction
    den = 8 << coord_bits(n)
    for c in cs:
        den = lcm(den, c.denominator)
    icuts = [c.numerator * (den // c.denominator) for c in cs]
    out = []
    for w in range(1, WINDOWS + 1):
        win = 0
        for lo, hi in window_pieces(n, copy, w):
            win += _signed_length_int(icuts, lo.numerator * (den // lo.denominator),
                                      hi.numerator * (den // hi.denominator))
        # replay acc += (1/10) 2^-k sign with acc = (4/5) win / den, scaled by 10 * 2^K * den
        acc = (8 * win) << K
        bits = []
        for k in range(1, K + 1):
            a = 1 if acc < 0 else 0
            bits.append(a)
            d = den << (K - k)
            acc += d if a else -d
        out.append(tuple(bits))
    return out


def _signed_length_int(cuts, a, b):
    total = 0
    pos = a
    sign = 1 if bisect_right(cuts, a) % 2 == 0 else -1
    for c in cuts:
        if c <= a:
            continue
        if c >= b:
            break
        total += sign * (c - pos)
        pos = c
        sign = -sign
    return total + sign * (b - pos)


def _check_regime(n: int, copy: int, cs: tuple) -> None:
    if not 1 <= len(cs) <= 2:
        raise IndeterminateError(f"{len(cs)} cuts in the coordinate region")
    idx = []
    for c in cs:
        for w in range(1, WINDOWS + 1):
            if any(lo <= c < hi for lo, hi in window_pieces(n, copy, w)) or (c == 1 and w == WINDOWS):
                idx.append(w)
                break
    if len(idx) == 2 and abs(idx[0] - idx[1]) <= 1:
        raise IndeterminateError("two cuts in the same or adjacent windows")


def simulate_extractors(n: int, copy: int, ce_cuts: Sequence, strict: bool = True) -> list:
    """Raw data (8 strings of n+8 bits) read by one copy, as '0'/'1' strings."""
    cs = _ce_cuts(ce_cuts)
    if strict:
        _check_regime(n, copy, cs)
    return ["".join("0" if a else "1" for a in bits) for bits in extractor_a_values(n, copy, cs)]


# -- circuits ----------------------------------------------------------------

def _preprocess_into(b: CircuitBuilder, n: int, raw: Sequence[int]):
    """Wires for (X, Y, z) decoded from raw bits (window-major, MSB first)."""
    K = raw_bits(n)
    KP = coord_bits(n)
    wins = [list(raw[w * K:(w + 1) * K]) for w in range(WINDOWS)]

    def solid1(v):
        return b.and_many(v)

    def solid0(v):
        return b.not_(b.or_many(v))

    b1, b2 = wins[0], wins[1]
    solid_b1 = b.or_(solid1(b1), solid0(b1))
    z = b.mux(solid_b1, b2[0], b.not_(b1[0]))
    norm = [[b.xor(x, z) for x in v] for v in wins]
    s1 = [solid1(v) for v in norm]
    s0 = [solid0(v) for v in norm]
    mixed = [b.and_(b.not_(a), b.not_(c)) for a, c in zip(s1, s0)]
    first = []
    all_ones = b.const(1)
    for w in range(WINDOWS):
        first.append(b.and_(b.not_(s1[w]), all_ones))
        all_ones = b.and_(all_ones, s1[w])
    second = []
    open_ = b.const(0)
    for w in range(WINDOWS):
        second.append(b.and_(open_, b.not_(s0[w])))
        open_ = b.or_(first[w], b.and_(open_, s0[w]))
    zero = b.const_vec(0, KP)

    def select(onehot, value_of):
        acc = zero
        for w in range(WINDOWS):
            acc = b.or_vec(acc, b.and_vec(onehot[w], value_of(w)))
        return acc

    def z1_of(w):
        return b.const_vec(w, 3) + b.and_vec(mixed[w], norm[w])

    def z2_of(w):
        return b.const_vec(w, 3) + b.and_vec(mixed[w], b.negate(norm[w]))

    Z1 = select(first, z1_of)
    Z2 = select(second, z2_of)
    has_first = b.or_many(first)
    has_second = b.or_many(second)
    X = b.and_vec(has_second, Z1)
    tail = b.mux_vec(has_second, b.and_vec(has_first, Z1), Z2)
    Y = b.negate(tail)
    return X, Y, z


def build_preprocessing_circuit(n: int) -> BoolCircuit:
    """8(n+8) raw bits -> X (n+11 bits), Y (n+11 bits), detector bit z."""
    b = CircuitBuilder(WINDOWS * raw_bits(n))
    X, Y, z = _preprocess_into(b, n, b.inputs)
    return b.build(X + Y + [z])


def build_xor_circuit() -> BoolCircuit:
    """Four label bits and z -> the label bits complemented when z = 1."""
    b = CircuitBuilder(5)
    return b.build([b.xor(b.inputs[i], b.inputs[4]) for i in range(4)])


def build_copy_circuit(vt: VTInstance) -> BoolCircuit:
    """Raw bits -> decoded point -> labeller -> XOR with the detector bit."""
    n = vt.n
    b = CircuitBuilder(WINDOWS * raw_bits(n))
    X, Y, z = _preprocess_into(b, n, b.inputs)
    word = b.embed(vt.labeller, X + Y)
    return b.build([b.xor(x, z) for x in word])


def decode_raw(n: int, raw: Sequence[str]) -> tuple:
    """Reference decoder (pure Python) mirroring the preprocessing circuit."""
    K = raw_bits(n)
    KP = coord_bits(n)
    wins = [[int(ch) for ch in s] for s in raw]

    def solid(v):
        return all(v) or not any(v)

    b1, b2 = wins[0], wins[1]
    z = 1 - b1[0] if solid(b1) else b2[0]
    norm = [[x ^ z for x in v] for v in wins]
    s1 = [all(v) for v in norm]
    s0 = [not any(v) for v in norm]

    def val(v):
        return int("".join(map(str, v)), 2)

    k = next((w for w in range(WINDOWS) if not s1[w]), None)
    ell = None
    if k is not None:
        ell = next((w for w in range(k + 1, WINDOWS) if not s0[w]), None)
    mask = (1 << KP) - 1
    if k is None:
        return 0, 0, z
    mixed_k = not s1[k] and not s0[k]
    Z1 = (k << K) + (val(norm[k]) if mixed_k else 0)
    if ell is None:
        return 0, (-Z1) & mask, z
    mixed_l = not s1[ell] and not s0[ell]
    Z2 = (ell << K) + (((1 << K) - val(norm[ell])) & ((1 << K) - 1) if mixed_l else 0)
    return Z1, (-Z2) & mask, z


# -- lowering to gadgets --------------------------------------------------

@dataclass(frozen=True)
class Gadget:
    kind: str       # NOT, OR, AND
    sources: tuple  # ("in", raw index) or ("g", gadget index)
    final: bool = False


@dataclass
class LoweredCircuit:
    """Gadget network computing a circuit under a-value semantics.

    ``mid`` lists gadgets placed among the gates in topological order;
    ``finals`` lists the output gadgets, one per circuit output.
    """
    input_count: int
    gadgets: list
    mid: list
    finals: list

    def counts(self) -> dict:
        out = {}
        for g in self.gadgets:
            out[g.kind] = out.get(g.kind, 0) + 1
        return out


def lower_circuit(c: BoolCircuit) -> LoweredCircuit:
    gadgets: list = []
    cache: dict = {}

    def emit(kind, sources, final=False):
        key = (kind, sources, final)
        if not final and key in cache:
            return cache[key]
        gadgets.append(Gadget(kind, sources, final))
        idx = len(gadgets) - 1
        if not final:
            cache[key] = idx
        return idx

    def buffered(src):
        return ("g", emit("NOT", (src,)))

    wires: list = [(("in", i), 1) for i in range(c.input_count)]

    def binary(op, x, y):
        (s1, p1), (s2, p2) = x, y
        if p1 != p2:
            s2, p2 = buffered(s2), 1 - p2
        if s1 == s2:
            return (s1, p1)
        s1, s2 = sorted([s1, s2])
        if (op == "AND") == (p1 == 0):
            return (("g", emit("AND", (s1, s2))), 1 - p1)
        return (("g", emit("OR", (s1, s2))), 1 - p1)

    const_wires = {}

    def constant(bit):
        if bit not in const_wires:
            if c.input_count == 0:
                raise StructureError("cannot realise constants without inputs")
            x = wires[0]
            nx = (x[0], 1 - x[1])
            const_wires[bit] = binary("OR" if bit else "AND", x, nx)
        return const_wires[bit]

    for op, args in c.gates:
        if op == "NOT":
            s, p = wires[args[0]]
            wires.append((s, 1 - p))
        elif op in ("AND", "OR"):
            wires.append(binary(op, wires[args[0]], wires[args[1]]))
        else:
            wires.append(constant(1 if op == "CONST1" else 0))
    finals = []
    for o in c.outputs:
        s, p = wires[o]
        if p == 0:
            s = buffered(s)
        gadgets.append(Gadget("NOT", (s,), True))
        finals.append(len(gadgets) - 1)
    mid = [i for i, g in enumerate(gadgets) if not g.final]
    return LoweredCircuit(c.input_count, gadgets, mid, finals)


def run_lowered(low: LoweredCircuit, a_in: Sequence[int], flipped: int = 0, mask: int = 1) -> list:
    """a-values of every gadget, bit-parallel over the bits of the ints.

    ``flipped`` marks the lanes whose cut orientation is reversed; there the
    OR and AND gadgets compute NAND and NOR instead of NOR and NAND.
    """
    vals = [0] * len(low.gadgets)

    def src(s):
        return a_in[s[1]] if s[0] == "in" else vals[s[1]]

    keep = ~flipped & mask
    for i, g in enumerate(low.gadgets):
        if g.kind == "NOT":
            vals[i] = ~src(g.sources[0]) & mask
        else:
            x, y = src(g.sources[0]), src(g.sources[1])
            nor = ~(x | y) & mask
            nand = ~(x & y) & mask
            if g.kind == "OR":
                vals[i] = (nor & keep) | (nand & flipped)
            else:
                vals[i] = (nand & keep) | (nor & flipped)
    return vals


# -- compiled instance ------------------------------------------------------

@dataclass(frozen=True)
class AgentInfo:
    """Back-reference: what an agent realises."""
    kind: str                 # coord, parity, extractor, blanket, gate, output
    copy: int = 0
    unit: Fraction | None = None   # own unit (left end); gap unit for parity
    window: int = 0
    bit: int = 0
    gadget: int = -1
    gate_kind: str = ""
    orientation: str = ""     # required label left of the own cut, if any

    def describe(self) -> str:
        parts = [self.kind, f"copy={self.copy}"]
        if self.unit is not None:
            parts.append(f"unit={self.unit}")
        if self.kind == "extractor":
            parts.append(f"window={self.window} bit={self.bit}")
        if self.gadget >= 0:
            parts.append(f"gadget={self.gadget} op={self.gate_kind}")
        if self.orientation:
            parts.append(f"left={self.orientation}")
        return " ".join(parts)


@dataclass
class CopyLayout:
    lo: Fraction
    mid_lo: Fraction
    out_lo: Fraction
    hi: Fraction          # end of the copy region, start of its spare unit
    ext_units: dict       # (window, bit) -> unit
    gadget_units: dict    # gadget index -> unit


@dataclass
class CHCompileOutput:
    instance: CHInstance
    vt: VTInstance
    copies: int
    agents: list
    layouts: list
    lowered: LoweredCircuit
    blanket: str
    corrected: bool
    audit_failures: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.vt.n

    @property
    def epsilon(self) -> Fraction:
        return self.instance.epsilon

    def spare_unit(self, copy: int) -> Fraction:
        """Left end of the spare unit just before copy ``copy`` (1-based)."""
        return F(1) if copy == 1 else self.layouts[copy - 2].hi

    def circuit_agents(self) -> list:
        return [i for i, a in enumerate(self.agents) if a.kind != "coord"]

    def roster(self) -> dict:
        out = {}
        for a in self.agents:
            out[a.kind] = out.get(a.kind, 0) + 1
        return out


def _feedback_blocks(o: Fraction, literal: bool):
    q = F(1, 4)
    a1 = [(o + 1 + q, o + 1 + 3 * q), (o + 3 + q, o + (4 if literal else 3) + 3 * q)]
    a2 = [(o + 5 + q, o + 5 + 3 * q), (o + 7 + q, o + 7 + 3 * q)]
    return a1, a2


def compile_vt(vt: VTInstance, copies: int = 100, corrections: bool = True,
               blanket: str | None = None) -> CHCompileOutput:
    if copies < MIN_COPIES:
        raise ArgumentError(f"copies must be at least {MIN_COPIES}")
    if blanket is None:
        blanket = "default" if corrections else "literal"
    if blanket not in BLANKET_VARIANTS:
        raise ArgumentError(f"unknown blanket variant {blanket}")
    n = vt.n
    K = raw_bits(n)
    low = lower_circuit(build_copy_circuit(vt))
    pw = parity_width(n)
    parity_h = (1 if corrections else 2) / pw
    ce_h, dense_h, mid_h = BLANKET_VARIANTS[blanket]
    scale = F(100, copies)

    infos: list = [AgentInfo("coord"), AgentInfo("coord")]
    pieces: list = [[], []]
    layouts: list = []
    pos = F(2)
    for i in range(1, copies + 1):
        label = Label.PLUS  # after two coordinate cuts
        ext_units: dict = {}
        gadget_units: dict = {}
        lo = pos
        items = [("ext", w, k) for w in range(1, WINDOWS + 1) for k in range(1, K + 1)]
        items += [("gate", j) for j in low.mid]
        mid_lo = None
        for item in items:
            if item[0] == "gate" and mid_lo is None:
                mid_lo = pos
            gap, unit = pos, pos + 1
            pos += 2
            need = Label.PLUS if item[0] == "ext" else GATE_ORIENTATION[low.gadgets[item[1]].kind]
            if need is not None and need is not label:
                c = gap + F(1, 2)
                infos.append(AgentInfo("parity", i, gap))
                pieces.append([(c - pw / 2, c + pw / 2, parity_h)])
                label = label.other
            if item[0] == "ext":
                _, w, k = item
                ext_units[(w, k)] = unit
                ps = [(a, b, F(4, 5)) for a, b in window_pieces(n, i, w)]
                for t in range(1, k):
                    ut = ext_units[(w, t)]
                    ps.append((ut + F(1, 4), ut + F(3, 4), F(1, 5) / (1 << t)))
                h = extractor_height(k)
                ps += [(unit, unit + TWENTIETH, h), (unit + 1 - TWENTIETH, unit + 1, h)]
                infos.append(AgentInfo("extractor", i, unit, w, k, orientation="+"))
                pieces.append(ps)
            else:
                j = item[1]
                g = low.gadgets[j]
                gadget_units[j] = unit
                ins = [Interval(*_src_unit(s, ext_units, gadget_units, K)) for s in g.sources]
                orient = GATE_ORIENTATION[g.kind]
                infos.append(AgentInfo("gate", i, unit, gadget=j, gate_kind=g.kind,
                                       orientation=orient.value if orient else ""))
                pieces.append(_merge_inputs(g.kind, ins, Interval(unit, unit + 1)))
            label = label.other
        if mid_lo is None:
            mid_lo = pos
        out_lo = pos
        infos.append(AgentInfo("blanket", i, out_lo))
        pieces.append([(F(0), F(1), ce_h), (out_lo, out_lo + TWENTIETH, dense_h),
                       (out_lo + 1 - TWENTIETH, out_lo + 1, dense_h),
                       (out_lo + F(1, 4), out_lo + F(3, 4), mid_h)])
        for r, j in enumerate(low.finals):
            unit = out_lo + 1 + 2 * r
            gadget_units[j] = unit
            g = low.gadgets[j]
            ins = [Interval(*_src_unit(s, ext_units, gadget_units, K)) for s in g.sources]
            infos.append(AgentInfo("output", i, unit, gadget=j, gate_kind="NOT"))
            pieces.append(_merge_inputs("NOT", ins, Interval(unit, unit + 1)))
        side = F(30, 800) * scale
        for a in (0, 1):
            pieces[a] += [(out_lo + F(1, 10), out_lo + F(2, 10), side),
                          (out_lo + F(8, 10), out_lo + F(9, 10), side)]
        fb1, fb2 = _feedback_blocks(out_lo, not corrections)
        pieces[0] += [(a, b, F(1, 400) * scale) for a, b in fb1]
        pieces[1] += [(a, b, F(1, 400) * scale) for a, b in fb2]
        pos = out_lo + 8
        layouts.append(CopyLayout(lo, mid_lo, out_lo, pos, ext_units, gadget_units))
        pos += 1
    dom = Interval(F(0), pos)
    agents = [StepFunction.from_pieces(dom, ps) for ps in pieces]
    failures = []
    for idx, f in enumerate(agents):
        m = total_mass(f)
        if m != 1:
            failures.append((idx, m))
    names = tuple(agent_name(i, a) for i, a in enumerate(infos))
    inst = CHInstance(tuple(agents), epsilon_for(n), names, check_mass=False)
    return CHCompileOutput(inst, vt, copies, infos, layouts, low, blanket, corrections, failures)


def agent_name(index: int, info: AgentInfo) -> str:
    """Short stable name, e.g. ``c3.ext.w2.b5`` or ``c1.gate.g17.OR``."""
    if info.kind == "coord":
        return f"coord.a{index + 1}"
    head = f"c{info.copy}"
    if info.kind == "extractor":
        return f"{head}.ext.w{info.window}.b{info.bit}"
    if info.kind == "parity":
        return f"{head}.par.u{info.unit}"
    if info.kind == "blanket":
        return f"{head}.blanket"
    if info.kind == "output":
        return f"{head}.out.g{info.gadget}"
    return f"{head}.gate.g{info.gadget}.{info.gate_kind}"


def kind_of_name(name: str) -> str:
    """Inverse of the kind part of :func:`agent_name`."""
    if name.startswith("coord."):
        return "coord"
    tag = name.split(".")[1] if "." in name else ""
    return {"ext": "extractor", "par": "parity", "blanket": "blanket", "out": "output",
            "gate": "gate"}.get(tag, "unknown")


def _src_unit(src, ext_units, gadget_units, K):
    if src[0] == "in":
        w, k = divmod(src[1], K)
        u = ext_units[(w + 1, k + 1)]
    else:
        u = gadget_units[src[1]]
    return u, u + 1


def _merge_inputs(kind, ins, out):
    if len(ins) == 2 and ins[0] == ins[1]:
        raise StructureError("gadget inputs must come from distinct units")
    return gate_pieces(kind, ins, out)


def audit_instance(inst: CHInstance, n: int | None = None) -> dict:
    """Mass audit of any halving instance, plus a roster audit when agents are named.

    The roster check needs the complexity parameter ``n`` (sensors per copy
    are 8(n+8) extractors plus one blanket).
    """
    bad = [(i, m) for i, f in enumerate(inst.agents) if (m := total_mass(f)) != 1]
    report = {"agents": inst.n, "mass_violations": bad}
    ok = not bad
    if inst.names:
        kinds = [kind_of_name(nm) for nm in inst.names]
        roster = {}
        for k in kinds:
            roster[k] = roster.get(k, 0) + 1
        per_copy: dict = {}
        for nm, k in zip(inst.names, kinds):
            if k == "coord":
                continue
            c = int(nm.split(".")[0][1:])
            row = per_copy.setdefault(c, {})
            row[k] = row.get(k, 0) + 1
        copies = len(per_copy)
        shapes = {tuple(sorted((k, v) for k, v in row.items() if k != "parity")) for row in per_copy.values()}
        gates = sum(roster.get(k, 0) for k in ("gate", "output"))
        expected = 2 + roster.get("parity", 0) + gates
        sensors_ok = len(shapes) == 1
        if n is not None:
            need = WINDOWS * raw_bits(n) + 1
            sensors_ok = sensors_ok and all(row.get("extractor", 0) + row.get("blanket", 0) == need
                                            for row in per_copy.values())
            expected += copies * need
        else:
            expected += roster.get("extractor", 0) + roster.get("blanket", 0)
        report.update({
            "roster": roster,
            "copies": copies,
            "expected_agents": expected,
            "copies_uniform": len(shapes) == 1,
            "sensors_per_copy_ok": sensors_ok,
        })
        ok = ok and sensors_ok and expected == inst.n and roster.get("coord", 0) == 2 \
            and "unknown" not in roster
    report["valid"] = ok
    return report


def audit(out: CHCompileOutput) -> dict:
    """Mass and roster audit of a compiled instance, with coordinate masses per copy."""
    report = audit_instance(out.instance, out.n)
    coord = []
    for lay in out.layouts:
        region = Interval(lay.out_lo, lay.hi)
        coord.append(tuple(integrate(out.instance.agents[a], region) for a in (0, 1)))
    report["coordinate_mass_per_copy"] = coord
    report["blanket_ce_mass"] = BLANKET_VARIANTS[out.blanket][0]
    if out.audit_failures and report["valid"]:
        raise StructureError("mass failures recorded at compile time but not found by the audit")
    return report


# -- simulation -------------------------------------------------------------

@dataclass
class CascadeResult:
    labelling: CutLabelling
    residual: dict          # agent -> |A+ - A-| left by the forced placement
    a_values: dict          # agent -> a-value of its out unit
    copy_words: list        # per copy: a-values of the four output gadgets
    contributions: list     # per copy: (alpha1, alpha2) signed A+ - A- mass
    coordinate_discrepancy: tuple
    flipped: list           # per copy: orientation reversed


def _placements(out: CHCompileOutput, ce_cuts, stray):
    cs = _ce_cuts(ce_cuts)
    if len(cs) == 2:
        if stray is not None:
            raise StructureError("a stray cut needs a single coordinate cut")
    elif len(cs) == 1:
        if stray is None:
            stray = out.instance.domain.hi
    else:
        raise IndeterminateError("one or two coordinate cuts are needed")
    if stray is not None:
        stray = Q(stray)
        ok = stray == out.instance.domain.hi or any(
            out.spare_unit(c) <= stray <= out.spare_unit(c) + 1 for c in range(1, out.copies + 1))
        if not ok and not (out.layouts[-1].hi <= stray <= out.layouts[-1].hi + 1):
            raise IndeterminateError("the stray cut must sit in a spare unit")
    return cs, stray


def simulate_full_cascade(out: CHCompileOutput, ce_cuts, stray=None) -> CascadeResult:
    """Place every circuit agent's cut by solving its balance, left to right."""
    cs, stray = _placements(out, ce_cuts, stray)
    cuts = list(cs)
    if stray is not None:
        insort(cuts, stray)
    inst = out.instance
    residual = {}
    a_values = {}
    order = sorted(range(2, inst.n), key=lambda a: out.agents[a].unit)
    for a in order:
        info = out.agents[a]
        f = inst.agents[a]
        u = info.unit
        lo, hi = u, u + 1
        if stray is not None and lo < stray < hi:
            raise IndeterminateError("stray cut inside a functional unit")
        left_val = F(0)
        A = B = None
        for plo, phi, h in f.pieces():
            if h == 0 or plo >= lo:
                continue
            left_val += h * _signed_span(cuts, plo, min(phi, lo))
        A = f.cumulative(lo)
        B = f.cumulative(hi)
        L = Label.PLUS if bisect_right(cuts, lo) % 2 == 0 else Label.MINUS
        target = (A + B - L.sign * left_val) / 2
        c, miss = _solve_cum(f, lo, hi, target, L)
        residual[a] = abs(2 * miss)
        insort(cuts, c)
        if info.kind != "parity":
            mid = u + F(1, 2)
            a_values[a] = 1 if bisect_right(cuts, mid) % 2 == 0 else 0
    labelling = CutLabelling(tuple(cuts), Label.PLUS)
    words = []
    contribs = []
    flipped = []
    for ci, lay in enumerate(out.layouts, start=1):
        outs = [a for a in range(inst.n) if out.agents[a].copy == ci and out.agents[a].kind == "output"]
        words.append(tuple(a_values[a] for a in sorted(outs, key=lambda a: out.agents[a].unit)))
        region = (lay.out_lo, lay.hi)
        contribs.append(tuple(_signed_integral_region(inst.agents[k], cuts, *region) for k in (0, 1)))
        flipped.append(bisect_right(cuts, lay.lo) % 2 == 1)
    disc = tuple(abs(sum(c[k] for c in contribs)) for k in (0, 1))
    return CascadeResult(labelling, residual, a_values, words, contribs, disc, flipped)


def _signed_span(cuts, a, b):
    """A+ length minus A- length on [a, b] under ``cuts`` with first label A+."""
    if b <= a:
        return F(0)
    total = F(0)
    i = bisect_right(cuts, a)
    sign = 1 if i % 2 == 0 else -1
    pos = a
    while i < len(cuts) and cuts[i] < b:
        total += sign * (cuts[i] - pos)
        pos = cuts[i]
        sign = -sign
        i += 1
    return total + sign * (b - pos)


def _signed_integral_region(f, cuts, lo, hi):
    total = F(0)
    for plo, phi, h in f.pieces():
        if h == 0 or phi <= lo or plo >= hi:
            continue
        total += h * _signed_span(cuts, max(plo, lo), min(phi, hi))
    return total


def _solve_cum(f: StepFunction, lo, hi, target, L: Label):
    """Point c in [lo, hi] with cumulative(c) = target; ties follow the A- rule.

    Returns (c, shortfall) where shortfall is 0 when the target is reached.
    """
    A = f.cumulative(lo)
    B = f.cumulative(hi)
    if target <= A:
        c = lo
        if target == A and L is Label.MINUS:
            c = _flat_end(f, lo, hi, A)
        return c, A - target
    if target >= B:
        c = hi
        if target == B and L is Label.PLUS:
            c = _flat_start(f, lo, hi, B)
        return c, target - B
    acc = A
    for plo, phi, h in f.pieces():
        if phi <= lo or plo >= hi:
            continue
        a, b = max(plo, lo), min(phi, hi)
        nxt = acc + h * (b - a)
        if h > 0 and acc <= target < nxt:
            return a + (target - acc) / h, F(0)
        if h > 0 and nxt == target:
            # the target is hit at the end of this piece; a flat stretch may follow
            end = b
            return (_flat_end(f, end, hi, target) if L is Label.MINUS else end), F(0)
        acc = nxt
    return hi, F(0)


def _flat_end(f, start, hi, value):
    """Right end of the zero-density stretch starting at ``start``."""
    pos = start
    for plo, phi, h in f.pieces():
        if phi <= pos or plo >= hi:
            continue
        if plo > pos:
            break
        if h != 0:
            return pos
        pos = min(phi, hi)
    return pos


def _flat_start(f, lo, end, value):
    """Left end of the zero-density stretch ending at ``end``."""
    pos = end
    for plo, phi, h in reversed(list(f.pieces())):
        if plo >= pos or phi <= lo:
            continue
        if phi < pos:
            break
        if h != 0:
            return pos
        pos = max(plo, lo)
    return pos


@dataclass
class FastResult:
    copy_words: list          # per config, per copy: 4-tuple of a-values
    contributions: list       # per config, per copy: (alpha1, alpha2)
    blanket_states: list      # per config, per copy: +1 (A+ region), -1, 0 inactive
    coordinate_discrepancy: list


def blanket_threshold(variant: str) -> Fraction:
    ce_h, _, mid_h = BLANKET_VARIANTS[variant]
    return mid_h / (2 * ce_h)


def simulate_fast(out: CHCompileOutput, configs: Sequence[tuple]) -> FastResult:
    """Logic-level simulation of many (coordinate cuts, stray) configurations.

    Produces the same a-values and coordinate contributions as the exact
    cascade (checked by the test suite) at a fraction of the cost.
    """
    n = out.n
    K = raw_bits(n)
    low = out.lowered
    N = len(configs)
    mask = (1 << N) - 1
    prepared = [_placements(out, ce, st) for ce, st in configs]
    theta = blanket_threshold(out.blanket)
    scale = F(100, out.copies)
    unit_fb = F(1, 800) * scale
    unit_bl = F(6, 800) * scale
    words = [[None] * out.copies for _ in range(N)]
    contribs = [[None] * out.copies for _ in range(N)]
    states = [[0] * out.copies for _ in range(N)]
    # the blanket only sees the coordinate cuts, so its state is per configuration
    cfg_state = []
    for cs, _ in prepared:
        D = signed_length(cs, F(0), F(1))
        cfg_state.append(1 if D < -theta else (-1 if D > theta else 0))
    memo = {}
    for ci, lay in enumerate(out.layouts, start=1):
        # lane r holds configuration r; columns are assembled as bit strings, lane 0 last
        rows = []
        flips = []
        for cs, stray in prepared:
            rows.append("".join("1" if b else "0" for word in extractor_a_values(n, ci, cs) for b in word))
            cnt = len(cs) + (1 if stray is not None and stray < lay.lo else 0)
            flips.append("1" if cnt % 2 else "0")
        rows.reverse()
        cols = [int("".join(row[j] for row in rows), 2) for j in range(WINDOWS * K)]
        flipped = int("".join(reversed(flips)), 2)
        vals = run_lowered(low, cols, flipped, mask)
        finals = [format(vals[j], f"0{N}b")[::-1] for j in low.finals]
        for r, (cs, _) in enumerate(prepared):
            wd = tuple(int(f[r]) for f in finals)
            words[r][ci - 1] = wd
            st = cfg_state[r]
            states[r][ci - 1] = st
            key = (wd, st)
            if key not in memo:
                fb1 = unit_fb * sum(1 if x else -1 for x in wd[:2])
                fb2 = unit_fb * sum(1 if x else -1 for x in wd[2:])
                memo[key] = (fb1 + st * unit_bl, fb2 + st * unit_bl)
            contribs[r][ci - 1] = memo[key]
    disc = [tuple(abs(sum(c[k] for c in row)) for k in (0, 1)) for row in contribs]
    return FastResult(words, contribs, states, disc)


# -- recovery ---------------------------------------------------------------

def recover_point(n: int, ce_cuts: Sequence) -> tuple:
    """Grid start point read off one or two coordinate cuts."""
    KP = coord_bits(n)
    one = 1 << KP
    cs = tuple(sorted(Q(c) for c in ce_cuts))
    if not cs:
        raise InconsistentSolutionError("no cut in the coordinate region; at least one must occur")
    if len(cs) > 2:
        raise InconsistentSolutionError(f"{len(cs)} cuts in the coordinate region")
    if len(cs) == 2:
        z, z2 = cs
        X = (z.numerator * one) // z.denominator
        Y = (one - _ceil(z2 * one)) % one
        return X % one, Y
    z = cs[0]
    return 0, (one - (z.numerator * one) // z.denominator) % one


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def recover_vt_solution(out: CHCompileOutput, sol: CutLabelling) -> VTSolution:
    ce = [c for c in sol.cuts if 0 <= c <= 1]
    return VTSolution(out.n, recover_point(out.n, ce), out.copies)


def plant_cuts(n: int, start: tuple) -> tuple:
    """Coordinate cuts whose recovery yields ``start`` (two cuts, inside grid cells)."""
    KP = coord_bits(n)
    one = 1 << KP
    X, Y = start
    if not (0 <= X < one and 0 <= Y < one and X + Y < one):
        raise ArgumentError(f"start {start} cannot be planted with two cuts")
    z = (X + F(1, 2)) / one
    z2 = (one - Y - F(1, 2)) / one
    return (z, z2)


def copy_point(n: int, start: tuple, copy: int) -> tuple:
    """Point decoded by copy ``copy`` and whether its label is read negated."""
    KP = coord_bits(n)
    one = 1 << KP
    X, Y = start[0] + copy - 1, start[1] - (copy - 1)
    xw, yw = X >= one, Y < 0
    return (X % one, Y % one), xw != yw


def balanced_plants(out: CHCompileOutput, sols: Sequence[VTSolution], limit: int = 5) -> list:
    """Planted starts whose forced labelling should balance every agent.

    Each solution is slid along its own diagonal line (start + t(1, -1)) so
    the label boundary falls near the middle of the sequence; a start is kept
    when the logic-level simulation leaves both coordinate agents within
    epsilon and the shifted sequence still solves the variant-Tucker instance.
    """
    from .tucker import verify_vt_solution
    n = out.n
    one = 1 << coord_bits(n)
    L = out.copies
    found = []
    seen = set()
    for sol in sols:
        X, Y = sol.start
        cands = []
        for t in range(-L, L + 1):
            st = (X + t, Y - t)
            if st in seen or not (0 <= st[0] < one and 0 <= st[1] < one and st[0] + st[1] < one):
                continue
            # keep the blanket quiet: the two cuts must split [0, 1] nearly evenly
            if not F(3, 8) * one <= st[0] + st[1] + 1 <= F(5, 8) * one:
                continue
            cands.append(st)
        if not cands:
            continue
        fr = simulate_fast(out, [(plant_cuts(n, st), None) for st in cands])
        for st, disc in zip(cands, fr.coordinate_discrepancy):
            seen.add(st)
            if max(disc) > out.epsilon:
                continue
            vs = VTSolution(n, st, L)
            if verify_vt_solution(out.vt, vs).valid:
                found.append(vs)
                break
        if len(found) >= limit:
            break
    return found


# -- micro instances for gate truth tables ----------------------------------

PIN_WIDTH = F(1, 100)


@dataclass
class GateMicro:
    instance: CHInstance
    gate_agent: int
    out_unit: Interval


def gate_micro_instance(kind: str, bits: Sequence[int]) -> GateMicro:
    """The gadget alone, inputs pinned by narrow auxiliary agents.

    Input j lives on unit [2j-1, 2j]; a parity agent between the units gives
    every input cut A+ on its left (first label A+), and one more parity agent
    sets the out cut's orientation where the gadget asks for it.
    """
    need = 1 if kind == "NOT" else 2
    if len(bits) != need:
        raise IndeterminateError(f"{kind} needs {need} inputs")
    pw = F(1, 1000)
    pieces_list = []
    ins = []
    label = Label.PLUS
    pos = F(1)
    for j, bit in enumerate(bits):
        if label is not Label.PLUS:
            c = pos - F(1, 2)
            pieces_list.append([(c - pw / 2, c + pw / 2, 1 / pw)])
            label = label.other
        iv = Interval(pos, pos + 1)
        ins.append(iv)
        lo = iv.lo if bit == 0 else iv.hi - PIN_WIDTH
        pieces_list.append([(lo, lo + PIN_WIDTH, 1 / PIN_WIDTH)])
        label = label.other
        pos += 2
    orient = GATE_ORIENTATION[kind] or Label.PLUS
    if label is not orient:
        c = pos - F(1, 2)
        pieces_list.append([(c - pw / 2, c + pw / 2, 1 / pw)])
    out_iv = Interval(pos, pos + 1)
    dom = Interval(F(0), pos + 2)
    gate = gate_pieces(kind, ins, out_iv)
    agents = [StepFunction.from_pieces(dom, p) for p in pieces_list]
    agents.append(StepFunction.from_pieces(dom, gate))
    return GateMicro(CHInstance(tuple(agents), F(0)), len(agents) - 1, out_iv)
