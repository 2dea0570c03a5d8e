"""Command-line front end.

Exit status: 0 valid / done, 1 invalid solution or nothing found, 2 usage or
file errors.  ``--json`` switches every report to a JSON object carrying the
same fields as the text report.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

from . import compiler as cc
from . import fileio as io
from . import necklace as nk
from . import tucker as tk
from .arith import render_rational
from .errors import ChkitError
from .measures import CHInstance, DivisionInstance, verify_division, verify_halving
from .solver import BudgetExhausted, solve_division_exact, solve_halving_approx, solve_halving_exact


class Failure(Exception):
    """Raised to finish a command with exit status 1 and a report."""

    def __init__(self, report):
        super().__init__(report.get("reason", "invalid"))
        self.report = report


def _plain(v):
    if isinstance(v, Fraction):
        return render_rational(v)
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if hasattr(v, "value") and not isinstance(v, (int, str)):
        return v.value
    return v


def _emit(report: dict, as_json: bool, stream) -> None:
    report = _plain(report)
    if as_json:
        stream.write(json.dumps(report, sort_keys=False) + "\n")
        return
    for key, val in report.items():
        if isinstance(val, (list, dict)):
            val = json.dumps(val)
        stream.write(f"{key}: {val}\n")


def _solution_status(sol):
    if isinstance(sol, BudgetExhausted):
        raise Failure({"status": "budget-exhausted", "visited": sol.visited})
    if sol is None:
        raise Failure({"status": "none-found"})


# -- gen ------------------------------------------------------------------------

def cmd_gen(a):
    rng = random.Random(a.seed)
    if a.kind in ("tucker", "ms"):
        inst = tk.generate_grid(a.kind, a.n, a.seed)
        io.write_text(a.out, io.dump_grid(inst))
        return {"kind": a.kind, "width": inst.width, "seed": a.seed}
    if a.kind == "figure":
        inst = tk.grid_from_table("tucker", tk.figure_example_table(corrected=not a.literal))
        io.write_text(a.out, io.dump_grid(inst))
        return {"kind": "tucker", "width": inst.width, "corrected": not a.literal}
    if a.kind == "necklace":
        neck = nk.random_necklace(rng)
        io.write_text(a.out, io.dump_necklace(neck))
        return {"kind": "necklace", "beads": len(neck.beads), "colors": neck.colors}
    if a.kind == "division":
        div = nk.random_division(rng)
        io.write_text(a.out, io.dump_measures(div))
        return {"kind": "division", "agents": div.n, "epsilon": div.epsilon}
    if a.kind == "halving":
        div = nk.random_division(rng, k=2)
        inst = CHInstance(div.agents, div.epsilon)
        io.write_text(a.out, io.dump_measures(inst))
        return {"kind": "halving", "agents": inst.n, "epsilon": inst.epsilon}
    raise ChkitError(f"unknown kind {a.kind}")


# -- reduce / compile ---------------------------------------------------------------

def cmd_reduce(a):
    src = io.parse_grid(io.read_text(a.input))
    if a.direction == "tucker-ms":
        if src.kind != "tucker":
            raise ChkitError("input is not a Tucker grid")
        red = tk.reduce_tucker_to_ms(src)
        io.write_text(a.out, io.dump_grid(red.target))
        return {"from": "tucker", "to": "ms", "width": red.target.width}
    if src.kind != "ms":
        raise ChkitError("input is not an MS grid")
    red = tk.reduce_ms_to_variant(src)
    io.write_text(a.out, io.dump_vt(red.target))
    return {"from": "ms", "to": "vt", "n": red.target.n, "gates": len(red.target.labeller.gates)}


def cmd_compile(a):
    vt = io.parse_vt(io.read_text(a.input))
    out = cc.compile_vt(vt, a.copies, corrections=not a.no_normalization_corrections)
    meta = {"n": vt.n, "copies": a.copies, "blanket": out.blanket}
    io.write_text(a.out, io.dump_measures(out.instance, meta))
    if a.emit_backrefs:
        io.write_text(a.emit_backrefs, io.dump_backrefs(out))
    report = {"agents": out.instance.n, "roster": out.roster(), "epsilon": out.epsilon,
              "domain": [out.instance.domain.lo, out.instance.domain.hi],
              "mass_failures": [[i, m] for i, m in out.audit_failures]}
    if out.audit_failures:
        raise Failure(dict(report, status="mass-audit-failed"))
    return report


# -- solve / verify --------------------------------------------------------------------

def _load_instance(path):
    text = io.read_text(path)
    kind = io.file_type(text)
    if kind in ("halving", "division"):
        return kind, io.parse_measures(text, check_mass=False)[0]
    if kind == "necklace":
        return kind, io.parse_necklace(text)
    if kind == "grid":
        return kind, io.parse_grid(text)
    if kind == "vt":
        return kind, io.parse_vt(text)
    raise ChkitError(f"cannot solve a '{kind}' file")


def cmd_solve(a):
    kind, inst = _load_instance(a.input)
    if kind == "halving":
        fn = solve_halving_approx if a.approx else solve_halving_exact
        sol = fn(inst, a.max_cuts if a.max_cuts is not None else inst.n)
        _solution_status(sol)
        text = io.dump_solution(sol)
        rep = verify_halving(inst, sol)
        report = {"kind": kind, "cuts": list(sol.cuts), "first": sol.first_label,
                  "max_discrepancy": max(rep.per_agent_discrepancy)}
    elif kind == "division":
        sol = solve_division_exact(inst)
        _solution_status(sol)
        text = io.dump_solution(sol)
        report = {"kind": kind, "cuts": list(sol.cuts), "parts": list(sol.part_of_piece),
                  "max_pairwise_gap": verify_division(inst, sol).max_pairwise_gap}
    elif kind == "necklace":
        sol = nk.solve_necklace_bruteforce(inst)
        _solution_status(sol)
        text = io.dump_solution(sol)
        report = {"kind": kind, "cuts": list(sol.cuts), "parts": list(sol.part_of_piece)}
    elif kind == "grid":
        sols = tk.find_grid_solutions(inst)
        if not sols:
            raise Failure({"status": "none-found"})
        text = io.dump_grid_solution(sols[0])
        report = {"kind": kind, "solutions": len(sols), "first": [list(p) for p in sols[0]]}
    else:
        sols = tk.find_vt_solutions(inst, a.length)
        if not sols:
            raise Failure({"status": "none-found"})
        text = io.dump_vt_solution(sols[0])
        report = {"kind": kind, "solutions": len(sols), "start": list(sols[0].start), "length": a.length}
    if a.out:
        io.write_text(a.out, text)
    return report


def cmd_verify(a):
    kind, inst = _load_instance(a.input)
    text = io.read_text(a.solution)
    if kind == "halving":
        sol = io.parse_solution(text)
        rep = verify_halving(inst, sol)
        report = {"kind": kind, "valid": rep.valid, "epsilon": inst.epsilon,
                  "max_discrepancy": max(rep.per_agent_discrepancy),
                  "per_agent_discrepancy": list(rep.per_agent_discrepancy)}
    elif kind == "division":
        rep = verify_division(inst, io.parse_solution(text))
        report = {"kind": kind, "valid": rep.valid, "epsilon": inst.epsilon,
                  "max_pairwise_gap": rep.max_pairwise_gap, "part_values": rep.part_values}
    elif kind == "necklace":
        rep = nk.verify_necklace(inst, io.parse_solution(text), Fraction(a.eps_beads))
        report = {"kind": kind, "valid": rep.valid, "counts": rep.counts, "bounds": rep.bounds}
    elif kind == "grid":
        pair = io.parse_grid_solution(text)
        ok = tk.verify_grid_solution(inst, pair)
        report = {"kind": kind, "valid": ok, "pair": [list(p) for p in pair]}
    else:
        rep = tk.verify_vt_solution(inst, io.parse_vt_solution(text))
        report = {"kind": kind, "valid": rep.valid, "counts": {str(k): v for k, v in rep.counts.items()},
                  "reason": rep.reason}
    if not report["valid"]:
        raise Failure(report)
    return report


def cmd_verify_constraints(a):
    kind, inst = _load_instance(a.input)
    if kind not in ("grid", "vt"):
        raise ChkitError("constraints apply to grid and vt files")
    viol = tk.check_constraints(inst)
    report = {"kind": kind, "violations": [str(v) for v in viol], "valid": not viol}
    if viol:
        raise Failure(report)
    return report


# -- compiled instances --------------------------------------------------------------

def _compiled(path):
    inst, meta = io.parse_measures(io.read_text(path), check_mass=False)
    if not isinstance(inst, CHInstance):
        raise ChkitError("expected a compiled halving instance")
    return inst, meta


def cmd_audit(a):
    inst, meta = _compiled(a.input)
    n = a.n if a.n is not None else (int(meta["n"]) if "n" in meta else None)
    rep = cc.audit_instance(inst, n)
    rep["mass_violations"] = [[i, m] for i, m in rep["mass_violations"]]
    if not rep["valid"]:
        raise Failure(rep)
    return rep


def cmd_recover(a):
    inst, meta = _compiled(a.input)
    if "n" not in meta or "copies" not in meta:
        raise ChkitError("compiled file lacks 'meta n' / 'meta copies' lines")
    n, copies = int(meta["n"]), int(meta["copies"])
    sol = io.parse_solution(io.read_text(a.solution))
    rep = verify_halving(inst, sol)
    report = {"halving_valid": rep.valid, "max_discrepancy": max(rep.per_agent_discrepancy)}
    if not rep.valid and not a.force:
        raise Failure(dict(report, status="solution-not-verified"))
    ce = [c for c in sol.cuts if 0 <= c <= 1]
    vts = tk.VTSolution(n, cc.recover_point(n, ce), copies)
    report.update({"start": list(vts.start), "length": copies})
    if a.out:
        io.write_text(a.out, io.dump_vt_solution(vts))
    if a.vt:
        vrep = tk.verify_vt_solution(io.parse_vt(io.read_text(a.vt)), vts)
        report.update({"vt_valid": vrep.valid, "vt_counts": {str(k): v for k, v in vrep.counts.items()}})
        if not vrep.valid:
            raise Failure(report)
    return report


# -- necklace commands ------------------------------------------------------------------

def cmd_neck_solve(a):
    neck = io.parse_necklace(io.read_text(a.input))
    sol = nk.solve_necklace_bruteforce(neck)
    _solution_status(sol)
    if a.out:
        io.write_text(a.out, io.dump_solution(sol))
    return {"cuts": list(sol.cuts), "parts": list(sol.part_of_piece)}


def cmd_neck_to_div(a):
    neck = io.parse_necklace(io.read_text(a.input))
    div, params = nk.reduce_necklace_to_division(neck)
    meta = {"delta": render_rational(params.delta), "beta": render_rational(params.beta),
            "block_epsilon": render_rational(params.epsilon)}
    io.write_text(a.out, io.dump_measures(div, meta))
    return {"agents": div.n, "delta": params.delta, "beta": params.beta,
            "block_epsilon": params.epsilon, "epsilon": div.epsilon}


def cmd_div_to_neck(a):
    div, _ = io.parse_measures(io.read_text(a.input))
    if not isinstance(div, DivisionInstance):
        raise ChkitError("expected a division file")
    neck, prov = nk.reduce_division_to_necklace(div)
    io.write_text(a.out, io.dump_necklace(neck))
    return {"beads": len(neck.beads), "delta": prov.delta, "piece_bound": prov.piece_bound,
            "parity_beads": len(prov.removed), "nudged": prov.nudged}


def cmd_extract(a):
    neck = io.parse_necklace(io.read_text(a.necklace))
    div, params = nk.reduce_necklace_to_division(neck)
    sol = io.parse_solution(io.read_text(a.solution))
    rep = verify_division(div, sol)
    if not rep.valid:
        raise Failure({"status": "division-solution-not-verified", "max_pairwise_gap": rep.max_pairwise_gap})
    log = nk.ExtractionLog()
    out = nk.extract_necklace_solution(params, div, sol, log)
    if a.out:
        io.write_text(a.out, io.dump_solution(out))
    return {"cuts": list(out.cuts), "parts": list(out.part_of_piece), "cycle_steps": len(log.steps),
            "snaps": len(log.snaps)}


# -- round trips --------------------------------------------------------------------------

def cmd_roundtrip(a):
    if a.kind == "neck":
        neck = io.parse_necklace(io.read_text(a.input))
        div, params = nk.reduce_necklace_to_division(neck)
        ds = solve_division_exact(div)
        _solution_status(ds)
        log = nk.ExtractionLog()
        out = nk.extract_necklace_solution(params, div, ds, log)
        rep = nk.verify_necklace(neck, out)
        report = {"pipeline": "neck>div>solve>extract>verify", "valid": rep.valid,
                  "cuts": list(out.cuts), "parts": list(out.part_of_piece), "cycle_steps": len(log.steps)}
    elif a.kind == "div":
        div, _ = io.parse_measures(io.read_text(a.input))
        neck, prov = nk.reduce_division_to_necklace(div)
        ns = nk.solve_necklace_bruteforce(neck)
        _solution_status(ns)
        rep = verify_division(div, nk.lift_necklace_solution_to_division(prov, ns))
        report = {"pipeline": "div>neck>solve>lift>verify", "valid": rep.valid,
                  "max_pairwise_gap": rep.max_pairwise_gap, "epsilon": div.epsilon}
    elif a.kind == "tucker":
        g = io.parse_grid(io.read_text(a.input))
        r1 = tk.reduce_tucker_to_ms(g)
        r2 = tk.reduce_ms_to_variant(r1.target)
        sols = tk.find_vt_solutions(r2.target, a.length)
        if not sols:
            raise Failure({"status": "none-found"})
        pair = r1.map_back(r2.map_back(sols[0]))
        ok = tk.verify_grid_solution(g, pair)
        report = {"pipeline": "tucker>ms>vt>solve>map-back>verify", "valid": ok,
                  "vt_start": list(sols[0].start), "pair": [list(p) for p in pair]}
    else:
        vt = io.parse_vt(io.read_text(a.input))
        out = cc.compile_vt(vt, a.copies)
        sols = tk.find_vt_solutions(vt, a.copies)
        if not sols:
            raise Failure({"status": "none-found"})
        balanced = cc.balanced_plants(out, sols, limit=1)
        sol = balanced[0] if balanced else sols[0]
        res = cc.simulate_full_cascade(out, cc.plant_cuts(vt.n, sol.start))
        rep = verify_halving(out.instance, res.labelling, out.circuit_agents())
        full = verify_halving(out.instance, res.labelling)
        back = cc.recover_vt_solution(out, res.labelling)
        vrep = tk.verify_vt_solution(vt, back)
        report = {"pipeline": "vt>compile>plant>cascade>verify>recover", "valid": rep.valid and vrep.valid,
                  "circuit_agents_valid": rep.valid, "full_instance_valid": full.valid,
                  "planted_start": list(sol.start), "recovered_start": list(back.start),
                  "vt_valid": vrep.valid, "coordinate_discrepancy": list(res.coordinate_discrepancy)}
    if not report["valid"]:
        raise Failure(report)
    return report


def cmd_scan(a):
    vt = io.parse_vt(io.read_text(a.input))
    out = cc.compile_vt(vt, a.copies)
    one = 1 << tk.coord_bits(vt.n)
    if a.what == "blanket":
        grid = [Fraction(i, 64) for i in range(65)]
        cfgs = [((x, y), None) for x in grid for y in grid if x < y] + [((x,), None) for x in grid]
        res = cc.simulate_fast(out, cfgs)
        checked = bad = 0
        for (cs, _), disc in zip(cfgs, res.coordinate_discrepancy):
            if abs(cc.signed_length(cs, Fraction(0), Fraction(1))) > Fraction(1, 4):
                checked += 1
                bad += max(disc) <= out.epsilon
        report = {"scan": "blanket", "configurations": len(cfgs), "imbalanced": checked,
                  "violations": bad, "valid": bad == 0}
    else:
        pts = [Fraction(k, one) for k in range(3 * one // 8, 5 * one // 8 + 1)]
        base = cc.simulate_fast(out, [((p,), None) for p in pts])
        bad = 0
        for i in range(2, out.copies + 1):
            stray = out.spare_unit(i) + Fraction(1, 2)
            res = cc.simulate_fast(out, [((p,), stray) for p in pts])
            bad += sum(x[i - 1] != y[i - 1] for x, y in zip(base.contributions, res.contributions))
        report = {"scan": "double-negative", "positions": len(pts), "mismatches": bad, "valid": bad == 0}
    if not report["valid"]:
        raise Failure(report)
    return report


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chkit", description="Consensus-halving reduction toolkit.")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("kind", choices=["tucker", "ms", "figure", "necklace", "division", "halving"])
    g.add_argument("out")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--literal", action="store_true", help="figure grid exactly as drawn")
    g.set_defaults(fn=cmd_gen)

    r = sub.add_parser("reduce", help="tucker-ms or ms-vt reduction")
    r.add_argument("direction", choices=["tucker-ms", "ms-vt"])
    r.add_argument("input")
    r.add_argument("out")
    r.set_defaults(fn=cmd_reduce)

    c = sub.add_parser("compile-vt", help="compile a variant-Tucker instance to consensus halving")
    c.add_argument("input")
    c.add_argument("out")
    c.add_argument("--copies", type=int, default=100)
    c.add_argument("--no-normalization-corrections", action="store_true")
    c.add_argument("--emit-backrefs", metavar="PATH")
    c.set_defaults(fn=cmd_compile)

    s = sub.add_parser("solve", help="solve any instance file")
    s.add_argument("input")
    s.add_argument("out", nargs="?")
    s.add_argument("--approx", action="store_true", help="halving: allow discrepancy up to epsilon")
    s.add_argument("--max-cuts", type=int)
    s.add_argument("--length", type=int, default=100, help="vt: sequence length")
    s.set_defaults(fn=cmd_solve)

    v = sub.add_parser("verify", help="verify a solution against its instance")
    v.add_argument("input")
    v.add_argument("solution")
    v.add_argument("--eps-beads", default="0")
    v.set_defaults(fn=cmd_verify)

    vc = sub.add_parser("verify-constraints", help="structural checks of a grid or vt instance")
    vc.add_argument("input")
    vc.set_defaults(fn=cmd_verify_constraints)

    au = sub.add_parser("audit", help="mass and roster audit of a halving instance")
    au.add_argument("input")
    au.add_argument("--n", type=int)
    au.set_defaults(fn=cmd_audit)

    rc = sub.add_parser("recover", help="read a variant-Tucker solution off a compiled solution")
    rc.add_argument("input")
    rc.add_argument("solution")
    rc.add_argument("out", nargs="?")
    rc.add_argument("--vt", help="verify the result against this vt file")
    rc.add_argument("--force", action="store_true", help="recover even if the halving check fails")
    rc.set_defaults(fn=cmd_recover)

    rt = sub.add_parser("roundtrip", help="run a full reduction pipeline and verify")
    rt.add_argument("kind", choices=["neck", "div", "tucker", "vt"])
    rt.add_argument("input")
    rt.add_argument("--length", type=int, default=100)
    rt.add_argument("--copies", type=int, default=cc.MIN_COPIES)
    rt.set_defaults(fn=cmd_roundtrip)

    ns = sub.add_parser("neck-solve", help="brute-force necklace split")
    ns.add_argument("input")
    ns.add_argument("out", nargs="?")
    ns.set_defaults(fn=cmd_neck_solve)

    nd = sub.add_parser("neck-to-div", help="necklace to division instance")
    nd.add_argument("input")
    nd.add_argument("out")
    nd.set_defaults(fn=cmd_neck_to_div)

    dn = sub.add_parser("div-to-neck", help="division instance to necklace")
    dn.add_argument("input")
    dn.add_argument("out")
    dn.set_defaults(fn=cmd_div_to_neck)

    ex = sub.add_parser("extract", help="necklace split from a division solution")
    ex.add_argument("necklace")
    ex.add_argument("solution")
    ex.add_argument("out", nargs="?")
    ex.set_defaults(fn=cmd_extract)

    sc = sub.add_parser("scan", help="simulation sweeps over a compiled vt instance")
    sc.add_argument("what", choices=["blanket", "double-negative"])
    sc.add_argument("input")
    sc.add_argument("--copies", type=int, default=cc.MIN_COPIES)
    sc.set_defaults(fn=cmd_scan)
    return p


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "copies", None) is not None and args.copies < cc.MIN_COPIES:
        stderr.write(f"chkit: --copies must be at least {cc.MIN_COPIES}\n")
        return 2
    try:
        report = args.fn(args)
    except Failure as f:
        _emit(dict({"status": "invalid"}, **f.report), args.json, stdout)
        return 1
    except ChkitError as exc:
        if args.json:
            _emit({"status": "error", "error": str(exc)}, True, stdout)
        stderr.write(f"chkit: {exc}\n")
        return 2
    _emit(dict({"status": "ok"}, **report), args.json, stdout)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
