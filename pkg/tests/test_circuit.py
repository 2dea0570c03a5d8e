import random

import pytest
from hypothesis import given, strategies as st

from chkit.circuit import (BoolCircuit, CircuitBuilder, bits_to_int, complement_word, compose, constrainer_circuit,
                           dump_circuit, evaluate, evaluate_batch, identity, int_to_bits, label_of_word,
                           label_word_of, pack_columns, parse_circuit, synthesize, unpack_outputs)
from chkit.errors import StructureError


def _reference(c, inputs):
    # interpreter oracle written independently of evaluate
    wires = dict(enumerate(inputs))
    for g, (op, args) in enumerate(c.gates):
        v = [wires[a] for a in args]
        wires[c.input_count + g] = {"NOT": lambda: not v[0], "AND": lambda: v[0] and v[1],
                                    "OR": lambda: v[0] or v[1], "CONST0": lambda: False,
                                    "CONST1": lambda: True}[op]()
    return tuple(int(bool(wires[o])) for o in c.outputs)


def test_basic_gates():
    assert evaluate(BoolCircuit(1, (("NOT", (0,)),), (1,)), [0]) == (1,)
    assert evaluate(BoolCircuit(2, (("AND", (0, 1)),), (2,)), [1, 0]) == (0,)
    with pytest.raises(StructureError):
        evaluate(BoolCircuit(1, (), (0,)), [0, 1])
    with pytest.raises(StructureError):
        BoolCircuit(1, (("AND", (0, 3)),), (1,))


def test_constrainer_table():
    c = constrainer_circuit()
    table = {(0, 0): (1, 1, 1, 0), (0, 1): (0, 0, 0, 1), (1, 0): (0, 1, 1, 1), (1, 1): (1, 0, 0, 0)}
    for ins, word in table.items():
        assert evaluate(c, ins) == word


def test_label_words():
    assert label_word_of(1) == (1, 1, 1, 0) and label_word_of(-2) == (1, 0, 0, 0)
    assert complement_word(label_word_of(1)) == label_word_of(-1)
    for lab in (1, -1, 2, -2):
        assert label_of_word(label_word_of(lab)) == lab
        assert label_of_word(complement_word(label_word_of(lab))) == -lab
    with pytest.raises(StructureError):
        label_of_word((1, 1, 1, 1))


def test_compose_double_not_and_mux():
    nt = BoolCircuit(1, (("NOT", (0,)),), (1,))
    twice = compose(nt, nt)
    assert all(evaluate(twice, [b]) == (b,) for b in (0, 1))
    b = CircuitBuilder(3)
    c = b.build([b.mux(0, 1, 2)])
    assert evaluate(c, [1, 0, 1]) == (1,) and evaluate(c, [0, 0, 1]) == (0,)


def _adder(width):
    b = CircuitBuilder(2 * width)
    x, y = b.inputs[:width], b.inputs[width:]
    total, carry = b.add(x, y)
    return b.build([carry] + total)


def test_ripple_adder_example():
    c = _adder(4)
    out = evaluate(c, int_to_bits(5, 4) + int_to_bits(3, 4))
    assert bits_to_int(out[-4:]) == 8


@given(st.integers(0, 255), st.integers(0, 255))
def test_adder_against_integers(x, y):
    c = _adder(8)
    out = evaluate(c, int_to_bits(x, 8) + int_to_bits(y, 8))
    assert bits_to_int(out) == x + y


@given(st.integers(0, 63), st.integers(0, 63), st.integers(0, 63))
def test_builder_arithmetic(x, y, k):
    b = CircuitBuilder(12)
    xs, ys = b.inputs[:6], b.inputs[6:]
    diff, no_borrow = b.sub(xs, ys)
    plus_k, _ = b.add_const(xs, k)
    outs = diff + [no_borrow, b.ge_const(xs, k), b.eq_const(ys, k)] + plus_k + b.negate(ys)
    c = b.build(outs)
    r = evaluate(c, int_to_bits(x, 6) + int_to_bits(y, 6))
    assert bits_to_int(r[:6]) == (x - y) % 64
    assert r[6:9] == (int(x >= y), int(x >= k), int(y == k))
    assert bits_to_int(r[9:15]) == (x + k) % 64
    assert bits_to_int(r[15:]) == (-y) % 64


def test_random_circuits_against_reference():
    rng = random.Random(0)
    for _ in range(20):
        ins = rng.randint(1, 6)
        gates = []
        for g in range(rng.randint(1, 30)):
            op = rng.choice(["NOT", "AND", "OR", "CONST0", "CONST1"])
            arity = {"NOT": 1, "AND": 2, "OR": 2}.get(op, 0)
            gates.append((op, tuple(rng.randrange(ins + g) for _ in range(arity))))
        outs = tuple(rng.randrange(ins + len(gates)) for _ in range(3))
        c = BoolCircuit(ins, tuple(gates), outs)
        rows = [[rng.randint(0, 1) for _ in range(ins)] for _ in range(100)]
        batch = unpack_outputs(evaluate_batch(c, pack_columns(rows, ins), len(rows)), len(rows))
        for row, got in zip(rows, batch):
            assert evaluate(c, row) == _reference(c, row) == tuple(got)
        assert parse_circuit(dump_circuit(c)) == c


def test_synthesize_matches_function():
    fn = lambda v: ((v * 7) % 5 & 1, int(v % 3 == 0))
    c = synthesize(fn, 5, 2)
    for v in range(32):
        assert evaluate(c, int_to_bits(v, 5)) == fn(v)
    assert evaluate(identity(3), [1, 0, 1]) == (1, 0, 1)
