"""Line-oriented text formats for every object the command line reads or writes.

Each file starts with ``chkit <type>``; ``#`` starts a comment.  FORMATS.md
documents the grammar.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .arith import Interval, StepFunction, parse_rational, render_rational, total_mass
from .circuit import dump_circuit, parse_circuit_lines
from .errors import ChkitError, ParseError
from .measures import (CHInstance, CutLabelling, DivisionInstance, DivisionSolution, Label)
from .necklace import NecklaceInstance, NecklaceSolution
from .tucker import GridInstance, VTInstance, VTSolution, grid_from_table, label_table

R = render_rational


def _lines(text: str):
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            out.append((no, body))
    return out


def _rat(tok: str, no: int) -> Fraction:
    try:
        return parse_rational(tok)
    except ParseError as exc:
        raise ParseError(str(exc), no) from None


def _int(tok: str, no: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, found {tok!r}", no) from None


def file_type(text: str) -> str:
    lines = _lines(text)
    if not lines:
        raise ParseError("empty file")
    no, head = lines[0]
    toks = head.split()
    if len(toks) != 2 or toks[0] != "chkit":
        raise ParseError("expected a 'chkit <type>' header", no)
    return toks[1]


def _expect(text: str, kind: str):
    found = file_type(text)
    if found != kind:
        raise ParseError(f"expected a '{kind}' file, found '{found}'", _lines(text)[0][0])
    return _lines(text)[1:]


def _wrap(no, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ParseError:
        raise
    except ChkitError as exc:
        raise ParseError(str(exc), no) from None


# -- measures ---------------------------------------------------------------

def dump_measures(inst, meta: dict | None = None) -> str:
    """Halving or division instance; ``meta`` lines are free-form key/value pairs."""
    out = []
    if isinstance(inst, DivisionInstance):
        out += ["chkit division", f"k {inst.k}", f"ell {inst.ell}"]
        names = ()
    else:
        out.append("chkit halving")
        names = inst.names
    dom = inst.domain
    out += [f"domain {R(dom.lo)} {R(dom.hi)}", f"epsilon {R(inst.epsilon)}"]
    for key, val in (meta or {}).items():
        out.append(f"meta {key} {val}")
    for i, f in enumerate(inst.agents):
        out.append(f"agent {names[i]}" if names else "agent")
        for lo, hi, h in f.nonzero_pieces():
            out.append(f"piece {R(lo)} {R(hi)} {R(h)}")
    return "\n".join(out) + "\n"


def parse_measures(text: str, check_mass: bool = True):
    """Returns (instance, meta).  Masses are checked unless ``check_mass`` is off."""
    kind = file_type(text)
    if kind not in ("halving", "division"):
        raise ParseError(f"expected a halving or division file, found '{kind}'")
    fields = {}
    meta = {}
    agents = []
    agent_lines = []
    names = []
    for no, line in _lines(text)[1:]:
        toks = line.split()
        key = toks[0]
        if key == "agent":
            agents.append([])
            agent_lines.append(no)
            names.append(" ".join(toks[1:]))
        elif key == "piece":
            if not agents:
                raise ParseError("piece before any agent line", no)
            if len(toks) != 4:
                raise ParseError("expected 'piece LO HI HEIGHT'", no)
            agents[-1].append((no, tuple(_rat(t, no) for t in toks[1:])))
        elif key == "meta":
            if len(toks) < 3:
                raise ParseError("expected 'meta KEY VALUE'", no)
            meta[toks[1]] = " ".join(toks[2:])
        elif key in ("domain", "epsilon", "k", "ell"):
            if key in fields:
                raise ParseError(f"duplicate '{key}' line", no)
            fields[key] = (no, toks[1:])
        else:
            raise ParseError(f"unknown line '{key}'", no)
    for key in ("domain", "epsilon") + (("k", "ell") if kind == "division" else ()):
        if key not in fields:
            raise ParseError(f"missing '{key}' line")
    no, toks = fields["domain"]
    if len(toks) != 2:
        raise ParseError("expected 'domain LO HI'", no)
    dom = _wrap(no, Interval, _rat(toks[0], no), _rat(toks[1], no))
    no, toks = fields["epsilon"]
    if len(toks) != 1:
        raise ParseError("expected 'epsilon Q'", no)
    eps = _rat(toks[0], no)
    fs = []
    for i, (at, pieces) in enumerate(zip(agent_lines, agents)):
        where = pieces[0][0] if pieces else at
        try:
            fs.append(StepFunction.from_pieces(dom, [p for _, p in pieces]))
        except ChkitError as exc:
            raise ParseError(str(exc), where) from None
        if check_mass or kind == "division":
            mass = total_mass(fs[-1])
            if mass != 1:
                raise ParseError(f"agent {i} has mass {R(mass)}, expected 1", at)
    if not fs:
        raise ParseError("no agents")
    if kind == "division":
        k = _int(fields["k"][1][0], fields["k"][0])
        ell = _int(fields["ell"][1][0], fields["ell"][0])
        return _wrap(None, DivisionInstance, tuple(fs), k, ell, eps), meta
    nm = tuple(names) if any(names) else ()
    return _wrap(None, CHInstance, tuple(fs), eps, nm, check_mass=check_mass), meta


# -- solutions ---------------------------------------------------------------

def dump_solution(sol) -> str:
    if isinstance(sol, CutLabelling):
        out = ["chkit solution", "kind halving", f"first {sol.first_label.value}"]
    elif isinstance(sol, DivisionSolution):
        out = ["chkit solution", "kind division", "parts " + " ".join(map(str, sol.part_of_piece))]
    elif isinstance(sol, NecklaceSolution):
        out = ["chkit solution", "kind necklace", "parts " + " ".join(map(str, sol.part_of_piece))]
    else:
        raise TypeError(f"cannot serialise {type(sol).__name__}")
    out += [f"cut {R(c)}" for c in sol.cuts]
    return "\n".join(out) + "\n"


def parse_solution(text: str):
    kind = None
    first = None
    parts = None
    cuts = []
    for no, line in _expect(text, "solution"):
        toks = line.split()
        if toks[0] == "kind" and len(toks) == 2:
            kind = toks[1]
        elif toks[0] == "first" and len(toks) == 2:
            if toks[1] not in ("+", "-"):
                raise ParseError("first label must be + or -", no)
            first = Label(toks[1])
        elif toks[0] == "parts":
            parts = tuple(_int(t, no) for t in toks[1:])
        elif toks[0] == "cut" and len(toks) == 2:
            cuts.append(_rat(toks[1], no))
        else:
            raise ParseError(f"unexpected line {line!r}", no)
    if kind == "halving":
        return _wrap(None, CutLabelling, tuple(cuts), first or Label.PLUS)
    if kind in ("division", "necklace"):
        if parts is None:
            raise ParseError("missing 'parts' line")
        cls = DivisionSolution if kind == "division" else NecklaceSolution
        return _wrap(None, cls, tuple(cuts), parts)
    raise ParseError("missing or unknown 'kind' line")


# -- necklaces ---------------------------------------------------------------

def dump_necklace(neck: NecklaceInstance) -> str:
    out = ["chkit necklace", f"k {neck.k}", f"ell {neck.ell}", f"colors {neck.colors}"]
    out += [f"bead {R(p)} {c}" for p, c in neck.beads]
    return "\n".join(out) + "\n"


def parse_necklace(text: str) -> NecklaceInstance:
    vals = {}
    beads = []
    for no, line in _expect(text, "necklace"):
        toks = line.split()
        if toks[0] in ("k", "ell", "colors") and len(toks) == 2:
            vals[toks[0]] = _int(toks[1], no)
        elif toks[0] == "bead" and len(toks) == 3:
            beads.append((_rat(toks[1], no), _int(toks[2], no)))
        else:
            raise ParseError(f"unexpected line {line!r}", no)
    for key in ("k", "ell"):
        if key not in vals:
            raise ParseError(f"missing '{key}' line")
    return _wrap(None, NecklaceInstance, tuple(beads), vals["k"], vals["ell"], vals.get("colors", 0))


# -- grids and variant-Tucker -------------------------------------------------

def dump_grid(inst: GridInstance) -> str:
    out = ["chkit grid", f"kind {inst.kind}", f"width {inst.width}"]
    for row in label_table(inst):
        out.append("row " + " ".join(f"{v:+d}" for v in row))
    return "\n".join(out) + "\n"


def parse_grid(text: str) -> GridInstance:
    kind = None
    width = None
    rows = []
    for no, line in _expect(text, "grid"):
        toks = line.split()
        if toks[0] == "kind" and len(toks) == 2:
            kind = toks[1]
        elif toks[0] == "width" and len(toks) == 2:
            width = _int(toks[1], no)
        elif toks[0] == "row":
            row = [_int(t, no) for t in toks[1:]]
            if any(v not in (1, -1, 2, -2) for v in row):
                raise ParseError("labels must be +1, -1, +2 or -2", no)
            if width is not None and len(row) != width:
                raise ParseError(f"row has {len(row)} entries, expected {width}", no)
            rows.append(row)
        else:
            raise ParseError(f"unexpected line {line!r}", no)
    if kind is None or width is None:
        raise ParseError("missing 'kind' or 'width' line")
    if len(rows) != width:
        raise ParseError(f"{len(rows)} rows, expected {width}")
    return _wrap(None, grid_from_table, kind, rows)


def dump_vt(inst: VTInstance) -> str:
    return f"chkit vt\nn {inst.n}\ncircuit\n" + dump_circuit(inst.labeller)


def parse_vt(text: str) -> VTInstance:
    n = None
    body = None
    all_lines = list(enumerate(text.splitlines(), start=1))
    rest = _expect(text, "vt")
    for idx, (no, line) in enumerate(rest):
        toks = line.split()
        if toks[0] == "n" and len(toks) == 2:
            n = _int(toks[1], no)
        elif toks[0] == "circuit" and len(toks) == 1:
            body = [(k, t) for k, t in all_lines if k > no]
            break
        else:
            raise ParseError(f"unexpected line {line!r}", no)
    if n is None or body is None:
        raise ParseError("missing 'n' or 'circuit' line")
    circ = parse_circuit_lines(body)
    return _wrap(None, VTInstance, n, circ)


def dump_vt_solution(sol: VTSolution) -> str:
    return f"chkit vtsolution\nn {sol.n}\nstart {sol.start[0]} {sol.start[1]}\nlength {sol.length}\n"


def parse_vt_solution(text: str) -> VTSolution:
    vals = {}
    for no, line in _expect(text, "vtsolution"):
        toks = line.split()
        if toks[0] in ("n", "length") and len(toks) == 2:
            vals[toks[0]] = _int(toks[1], no)
        elif toks[0] == "start" and len(toks) == 3:
            vals["start"] = (_int(toks[1], no), _int(toks[2], no))
        else:
            raise ParseError(f"unexpected line {line!r}", no)
    if "n" not in vals or "start" not in vals:
        raise ParseError("missing 'n' or 'start' line")
    return VTSolution(vals["n"], vals["start"], vals.get("length", 100))


def dump_grid_solution(pair) -> str:
    (a, b), (c, d) = pair
    return f"chkit gridsolution\npair {a} {b} {c} {d}\n"


def parse_grid_solution(text: str):
    for no, line in _expect(text, "gridsolution"):
        toks = line.split()
        if toks[0] == "pair" and len(toks) == 5:
            a, b, c, d = (_int(t, no) for t in toks[1:])
            return ((a, b), (c, d))
        raise ParseError(f"unexpected line {line!r}", no)
    raise ParseError("missing 'pair' line")


# -- back-references -----------------------------------------------------------

BACKREF_FIELDS = ("agent", "name", "kind", "copy", "unit", "window", "bit", "gadget", "op", "left")


def dump_backrefs(out) -> str:
    lines = ["chkit backrefs", "# " + " ".join(BACKREF_FIELDS)]
    for i, (a, name) in enumerate(zip(out.agents, out.instance.names)):
        unit = "-" if a.unit is None else R(a.unit)
        lines.append(" ".join(str(x) for x in (i, name, a.kind, a.copy, unit, a.window, a.bit,
                                               a.gadget, a.gate_kind or "-", a.orientation or "-")))
    return "\n".join(lines) + "\n"


def parse_backrefs(text: str) -> list:
    rows = []
    for no, line in _expect(text, "backrefs"):
        toks = line.split()
        if len(toks) != len(BACKREF_FIELDS):
            raise ParseError(f"expected {len(BACKREF_FIELDS)} fields", no)
        rows.append(dict(zip(BACKREF_FIELDS, toks)))
    return rows


# -- files ---------------------------------------------------------------------

def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise ParseError(f"cannot write {path}: {exc.strerror}") from None
