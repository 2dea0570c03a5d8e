"""Boolean circuits over {NOT, AND, OR, CONST0, CONST1}.

Wires ``0 .. input_count-1`` are the inputs; gate ``g`` drives wire
``input_count + g``.  Operands always refer to earlier wires.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import ParseError, StructureError

OPS = {"NOT": 1, "AND": 2, "OR": 2, "CONST0": 0, "CONST1": 0}


@dataclass(frozen=True)
class BoolCircuit:
    input_count: int
    gates: tuple
    outputs: tuple

    def __post_init__(self):
        gates = tuple((op, tuple(args)) for op, args in self.gates)
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.input_count < 0:
            raise StructureError("negative input count")
        for g, (op, args) in enumerate(gates):
            if op not in OPS:
                raise StructureError(f"gate {g}: unknown op {op}")
            if len(args) != OPS[op]:
                raise StructureError(f"gate {g}: {op} takes {OPS[op]} operands")
            wire = self.input_count + g
            for a in args:
                if not 0 <= a < wire:
                    raise StructureError(f"gate {g}: operand {a} is not an earlier wire")
        top = self.wire_count
        for o in self.outputs:
            if not 0 <= o < top:
                raise StructureError(f"output wire {o} out of range")

    @property
    def wire_count(self) -> int:
        return self.input_count + len(self.gates)

    @property
    def output_count(self) -> int:
        return len(self.outputs)


def evaluate(c: BoolCircuit, inputs: Sequence[int]) -> tuple:
    if len(inputs) != c.input_count:
        raise StructureError(f"expected {c.input_count} inputs, got {len(inputs)}")
    vals = [1 if b else 0 for b in inputs]
    for op, args in c.gates:
        if op == "NOT":
            vals.append(1 - vals[args[0]])
        elif op == "AND":
            vals.append(vals[args[0]] & vals[args[1]])
        elif op == "OR":
            vals.append(vals[args[0]] | vals[args[1]])
        elif op == "CONST0":
            vals.append(0)
        else:
            vals.append(1)
    return tuple(vals[o] for o in c.outputs)


def evaluate_batch(c: BoolCircuit, columns: Sequence[int], width: int) -> list:
    """Bit-parallel evaluation: ``columns[j]`` packs input ``j`` over ``width`` cases.

    Returns one packed integer per output; bit ``r`` of each integer belongs
    to case ``r``.
    """
    if len(columns) != c.input_count:
        raise StructureError(f"expected {c.input_count} input columns, got {len(columns)}")
    full = (1 << width) - 1
    vals = list(columns)
    append = vals.append
    for op, args in c.gates:
        if op == "AND":
            append(vals[args[0]] & vals[args[1]])
        elif op == "OR":
            append(vals[args[0]] | vals[args[1]])
        elif op == "NOT":
            append(vals[args[0]] ^ full)
        elif op == "CONST0":
            append(0)
        else:
            append(full)
    return [vals[o] for o in c.outputs]


def pack_columns(rows: Sequence[Sequence[int]], input_count: int) -> list:
    """Transpose bit rows into packed per-input columns for ``evaluate_batch``."""
    cols = [0] * input_count
    for r, row in enumerate(rows):
        bit = 1 << r
        for j, b in enumerate(row):
            if b:
                cols[j] |= bit
    return cols


def unpack_outputs(packed: Sequence[int], count: int) -> list:
    return [tuple((p >> r) & 1 for p in packed) for r in range(count)]


def int_to_bits(value: int, width: int) -> list:
    """MSB-first bit list."""
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def bits_to_int(bits: Iterable[int]) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | (1 if b else 0)
    return v


class CircuitBuilder:
    """Incremental construction with constant folding and structural hashing."""

    def __init__(self, input_count: int = 0):
        self.input_count = input_count
        self.gates: list = []
        self._memo: dict = {}
        self._const = {}
        self._not_of: dict = {}

    # -- primitives -----------------------------------------------------
    @property
    def inputs(self) -> list:
        return list(range(self.input_count))

    def _emit(self, op, args):
        key = (op, args)
        w = self._memo.get(key)
        if w is None:
            w = self.input_count + len(self.gates)
            self.gates.append(key)
            self._memo[key] = w
        return w

    def const(self, bit: int) -> int:
        bit = 1 if bit else 0
        if bit not in self._const:
            self._const[bit] = self._emit("CONST1" if bit else "CONST0", ())
        return self._const[bit]

    def const_value(self, w):
        for b, cw in self._const.items():
            if cw == w:
                return b
        return None

    def not_(self, a: int) -> int:
        cv = self.const_value(a)
        if cv is not None:
            return self.const(1 - cv)
        if a in self._not_of:
            return self._not_of[a]
        w = self._emit("NOT", (a,))
        self._not_of[w] = a
        self._not_of.setdefault(a, w)
        return w

    def and_(self, a: int, b: int) -> int:
        ca, cb = self.const_value(a), self.const_value(b)
        if ca == 0 or cb == 0:
            return self.const(0)
        if ca == 1:
            return b
        if cb == 1:
            return a
        if a == b:
            return a
        if self._not_of.get(a) == b:
            return self.const(0)
        return self._emit("AND", (min(a, b), max(a, b)))

    def or_(self, a: int, b: int) -> int:
        ca, cb = self.const_value(a), self.const_value(b)
        if ca == 1 or cb == 1:
            return self.const(1)
        if ca == 0:
            return b
        if cb == 0:
            return a
        if a == b:
            return a
        if self._not_of.get(a) == b:
            return self.const(1)
        return self._emit("OR", (min(a, b), max(a, b)))

    # -- derived gates --------------------------------------------------
    def xor(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, self.not_(b)), self.and_(self.not_(a), b))

    def xnor(self, a: int, b: int) -> int:
        return self.not_(self.xor(a, b))

    def mux(self, sel: int, if0: int, if1: int) -> int:
        if if0 == if1:
            return if0
        return self.or_(self.and_(self.not_(sel), if0), self.and_(sel, if1))

    def and_many(self, ws: Sequence[int]) -> int:
        ws = list(ws)
        if not ws:
            return self.const(1)
        while len(ws) > 1:
            ws = [self.and_(ws[i], ws[i + 1]) if i + 1 < len(ws) else ws[i] for i in range(0, len(ws), 2)]
        return ws[0]

    def or_many(self, ws: Sequence[int]) -> int:
        ws = list(ws)
        if not ws:
            return self.const(0)
        while len(ws) > 1:
            ws = [self.or_(ws[i], ws[i + 1]) if i + 1 < len(ws) else ws[i] for i in range(0, len(ws), 2)]
        return ws[0]

    # -- vectors (MSB first) --------------------------------------------
    def const_vec(self, value: int, width: int) -> list:
        if value < 0 or value >= (1 << width):
            raise StructureError(f"{value} does not fit in {width} bits")
        return [self.const(b) for b in int_to_bits(value, width)]

    def not_vec(self, a):
        return [self.not_(x) for x in a]

    def mux_vec(self, sel, if0, if1):
        if len(if0) != len(if1):
            raise StructureError("mux operands differ in width")
        return [self.mux(sel, x, y) for x, y in zip(if0, if1)]

    def and_vec(self, bit, a):
        return [self.and_(bit, x) for x in a]

    def or_vec(self, a, b):
        return [self.or_(x, y) for x, y in zip(a, b)]

    def add(self, a, b, carry_in=None):
        """Ripple-carry sum of equal-width vectors; returns (sum, carry_out)."""
        if len(a) != len(b):
            raise StructureError("adder operands differ in width")
        carry = self.const(0) if carry_in is None else carry_in
        out = []
        for x, y in zip(reversed(a), reversed(b)):
            t = self.xor(x, y)
            out.append(self.xor(t, carry))
            carry = self.or_(self.and_(x, y), self.and_(t, carry))
        return list(reversed(out)), carry

    def add_const(self, a, value: int):
        width = len(a)
        return self.add(a, self.const_vec(value % (1 << width), width))

    def sub(self, a, b):
        """a - b modulo 2^width; the carry is 1 exactly when a >= b."""
        return self.add(a, self.not_vec(b), self.const(1))

    def negate(self, a):
        """Two's complement negation modulo 2^width."""
        zero = self.const_vec(0, len(a))
        s, _ = self.sub(zero, a)
        return s

    def ge_const(self, a, value: int) -> int:
        """1 iff the unsigned value of ``a`` is at least ``value``."""
        width = len(a)
        if value <= 0:
            return self.const(1)
        if value >= (1 << width):
            return self.const(0)
        _, carry = self.sub(a, self.const_vec(value, width))
        return carry

    def eq_const(self, a, value: int) -> int:
        bits = int_to_bits(value, len(a)) if 0 <= value < (1 << len(a)) else None
        if bits is None:
            return self.const(0)
        return self.and_many([x if b else self.not_(x) for x, b in zip(a, bits)])

    def zero_extend(self, a, width):
        if len(a) > width:
            raise StructureError("cannot shrink by zero extension")
        return [self.const(0)] * (width - len(a)) + list(a)

    def embed(self, c: BoolCircuit, inputs: Sequence[int]) -> list:
        """Instantiate ``c`` on the given wires; returns its output wires."""
        if len(inputs) != c.input_count:
            raise StructureError(f"embedding needs {c.input_count} wires, got {len(inputs)}")
        wires = list(inputs)
        for op, args in c.gates:
            if op == "NOT":
                wires.append(self.not_(wires[args[0]]))
            elif op == "AND":
                wires.append(self.and_(wires[args[0]], wires[args[1]]))
            elif op == "OR":
                wires.append(self.or_(wires[args[0]], wires[args[1]]))
            elif op == "CONST0":
                wires.append(self.const(0))
            else:
                wires.append(self.const(1))
        return [wires[o] for o in c.outputs]

    def build(self, outputs: Sequence[int], prune: bool = True) -> BoolCircuit:
        gates = self.gates
        outputs = list(outputs)
        if not prune:
            return BoolCircuit(self.input_count, tuple(gates), tuple(outputs))
        n_in = self.input_count
        live = set(outputs)
        for g in range(len(gates) - 1, -1, -1):
            if n_in + g in live:
                live.update(gates[g][1])
        remap = {i: i for i in range(n_in)}
        kept = []
        for g, (op, args) in enumerate(gates):
            w = n_in + g
            if w in live:
                remap[w] = n_in + len(kept)
                kept.append((op, tuple(remap[a] for a in args)))
        return BoolCircuit(n_in, tuple(kept), tuple(remap[o] for o in outputs))


def compose(first: BoolCircuit, second: BoolCircuit) -> BoolCircuit:
    """Feed the outputs of ``first`` into the inputs of ``second``."""
    if first.output_count != second.input_count:
        raise StructureError(f"arity mismatch: {first.output_count} outputs vs {second.input_count} inputs")
    b = CircuitBuilder(first.input_count)
    mid = b.embed(first, b.inputs)
    return b.build(b.embed(second, mid))


def concat(*circuits: BoolCircuit) -> BoolCircuit:
    """Run circuits side by side on concatenated inputs and outputs."""
    total = sum(c.input_count for c in circuits)
    b = CircuitBuilder(total)
    outs = []
    pos = 0
    for c in circuits:
        outs += b.embed(c, list(range(pos, pos + c.input_count)))
        pos += c.input_count
    return b.build(outs)


def fan_out(c: BoolCircuit, copies: int) -> BoolCircuit:
    """Repeat every output of ``c`` ``copies`` times."""
    b = CircuitBuilder(c.input_count)
    outs = b.embed(c, b.inputs)
    return b.build([o for o in outs for _ in range(copies)])


def identity(width: int) -> BoolCircuit:
    return BoolCircuit(width, (), tuple(range(width)))


def synthesize(fn: Callable[[int], Sequence[int]], input_count: int, output_count: int) -> BoolCircuit:
    """Circuit for a function given by its value on each input integer.

    Inputs are read MSB first.  Each output is a reduced decision diagram
    with shared sub-functions, lowered to multiplexers.
    """
    b = CircuitBuilder(input_count)
    size = 1 << input_count
    table = [tuple(fn(v)) for v in range(size)]
    outs = []
    memo: dict = {}

    def node(level, column):
        if all(x == column[0] for x in column):
            return b.const(column[0])
        key = (level, column)
        if key in memo:
            return memo[key]
        half = len(column) // 2
        lo, hi = column[:half], column[half:]
        w = b.mux(level, node(level + 1, lo), node(level + 1, hi))
        memo[key] = w
        return w

    for o in range(output_count):
        column = tuple(row[o] for row in table)
        outs.append(node(0, column))
    return b.build(outs)


# -- labels ----------------------------------------------------------------

LABELS = (1, -1, 2, -2)
_WORDS = {1: (1, 1, 1, 0), -1: (0, 0, 0, 1), 2: (0, 1, 1, 1), -2: (1, 0, 0, 0)}
_WORD_TO_LABEL = {w: l for l, w in _WORDS.items()}
_CODES = {1: (0, 0), -1: (0, 1), 2: (1, 0), -2: (1, 1)}
_CODE_TO_LABEL = {c: l for l, c in _CODES.items()}


def label_word_of(label: int) -> tuple:
    if label not in _WORDS:
        raise StructureError(f"illegal label {label}")
    return _WORDS[label]


def label_of_word(word: Sequence[int]) -> int:
    w = tuple(int(b) for b in word)
    if w not in _WORD_TO_LABEL:
        raise StructureError(f"illegal label word {''.join(map(str, w))}")
    return _WORD_TO_LABEL[w]


def complement_word(word: Sequence[int]) -> tuple:
    return tuple(1 - int(b) for b in word)


def word_str(word: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in word)


def encode_label(label: int) -> tuple:
    """Two-bit code: first bit = magnitude two, second bit = negative."""
    if label not in _CODES:
        raise StructureError(f"illegal label {label}")
    return _CODES[label]


def decode_label(bits: Sequence[int]) -> int:
    return _CODE_TO_LABEL[(int(bits[0]), int(bits[1]))]


def constrainer_into(b: CircuitBuilder, mag2: int, neg: int) -> list:
    """Wires of the label word for the two-bit label code (mag2, neg)."""
    nb = b.not_(neg)
    return [b.xnor(mag2, neg), nb, nb, b.xor(mag2, neg)]


def constrainer_circuit() -> BoolCircuit:
    b = CircuitBuilder(2)
    return b.build(constrainer_into(b, 0, 1))


# -- text format -----------------------------------------------------------

def dump_circuit(c: BoolCircuit) -> str:
    lines = [f"inputs {c.input_count}"]
    for g, (op, args) in enumerate(c.gates):
        w = c.input_count + g
        lines.append(f"{w}: {op}" + "".join(f" {a}" for a in args))
    lines.append("outputs" + "".join(f" {o}" for o in c.outputs))
    return "\n".join(lines) + "\n"


def parse_circuit_lines(lines: Sequence[tuple[int, str]]) -> BoolCircuit:
    """Parse (line number, text) pairs of the circuit grammar."""
    n_in = None
    gates = []
    outputs = None
    for lineno, raw in lines:
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if n_in is None:
            parts = text.split()
            if len(parts) != 2 or parts[0] != "inputs" or not parts[1].isdigit():
                raise ParseError("expected 'inputs N'", lineno)
            n_in = int(parts[1])
            continue
        if outputs is not None:
            raise ParseError("content after the outputs line", lineno)
        if text.startswith("outputs"):
            toks = text.split()[1:]
            if not all(t.isdigit() for t in toks):
                raise ParseError("output wires must be integers", lineno)
            outputs = [int(t) for t in toks]
            continue
        head, _, body = text.partition(":")
        if not head.strip().isdigit():
            raise ParseError("expected 'W: OP args'", lineno)
        w = int(head)
        if w != n_in + len(gates):
            raise ParseError(f"expected wire {n_in + len(gates)}, found {w}", lineno)
        toks = body.split()
        if not toks or toks[0] not in OPS:
            raise ParseError("unknown gate op", lineno)
        op = toks[0]
        if len(toks) - 1 != OPS[op] or not all(t.isdigit() for t in toks[1:]):
            raise ParseError(f"{op} takes {OPS[op]} integer operands", lineno)
        args = tuple(int(t) for t in toks[1:])
        if any(a >= w for a in args):
            raise ParseError("operand refers to a later wire", lineno)
        gates.append((op, args))
    if n_in is None or outputs is None:
        raise ParseError("circuit needs an 'inputs' line and an 'outputs' line")
    try:
        return BoolCircuit(n_in, tuple(gates), tuple(outputs))
    except StructureError as exc:
        raise ParseError(str(exc)) from exc


def parse_circuit(text: str) -> BoolCircuit:
    return parse_circuit_lines(list(enumerate(text.splitlines(), start=1)))
