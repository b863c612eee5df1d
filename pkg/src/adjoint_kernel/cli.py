"""Command line front end. Exit codes: 0 pass, 2 a mathematical check failed,
1 usage or parse error."""

from __future__ import annotations

import argparse
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .cones import Cone, ConeError, hilbert_basis
from .exact import QuadNumber, QuadVec
from .io import InstanceError, dump_json, format_exact, parse_exact, parse_instance, to_wire

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


def thread_cap() -> int:
    """Worker cap from ``ADJOINT_KERNEL_THREADS`` (default 1)."""
    raw = os.environ.get("ADJOINT_KERNEL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InstanceError(f"ADJOINT_KERNEL_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def map_ordered(fn, items):
    """``list(map(fn, items))``, spread over at most ``thread_cap()`` workers."""
    items = list(items)
    n = thread_cap()
    if n == 1 or len(items) < 2:
        return [fn(t) for t in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


class Report:
    """Deterministic output: a few text lines, or sorted JSON with ``--json``."""

    def __init__(self, command):
        self.command = command
        self.lines = []
        self.data = {"command": command}

    def line(self, s):
        self.lines.append(s)

    def render(self, as_json):
        return dump_json(self.data) if as_json else "\n".join(self.lines)


def _fmt_vec(v):
    return "(" + ",".join(format_exact(t) for t in v) + ")"


def _fmt_div(d):
    items = [(n, v) for n, v in sorted(d.coeffs.items()) if v != 0]
    if not items:
        return "0"
    terms = []
    for n, v in items:
        c = "" if v == 1 else "-" if v == -1 else f"{format_exact(v)}*"
        terms.append(f"{c}{n}")
    return " + ".join(terms)


def _parse_cone_arg(s):
    try:
        rows = [tuple(int(t) for t in part.split(",")) for part in s.split(";") if part.strip()]
    except ValueError:
        raise InstanceError(f"--cone: expected integer vectors like '1,0;1,2', got {s!r}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise InstanceError("--cone: vectors must be nonempty and of equal length")
    return Cone(rows, len(rows[0]))


def _need(doc, attr, what):
    val = getattr(doc, attr)
    if val is None or val == []:
        raise InstanceError(f"instance has no {what} block")
    return val


def _divisor_arg(doc, name):
    x = _need(doc, "variety", "variety")
    if name is None:
        if len(doc.divisors) == 1:
            return next(iter(doc.divisors.items()))
        raise InstanceError("--divisor is required (the instance names several divisors)")
    if name in doc.divisors:
        return name, doc.divisors[name]
    if name in x.names:
        return name, x.prime(name)
    raise InstanceError(f"--divisor: unknown divisor {name!r}")


# -- subcommands ---------------------------------------------------------------------

def cmd_hilbert(args, rep):
    if args.cone:
        cone = _parse_cone_arg(args.cone)
    else:
        cone = _need(parse_instance(args.instance), "cone", "cone")
    hb = hilbert_basis(cone)
    rep.line(" ".join(_fmt_vec(h) for h in hb))
    rep.data["hilbert_basis"] = [list(h) for h in hb]
    return EXIT_OK


def cmd_sections(args, rep):
    from .toric import sections
    doc = parse_instance(args.instance)
    name, d = _divisor_arg(doc, args.divisor)
    s = sections(doc.variety, d)
    rep.line(f"h0({name}) = {s.dimension}")
    rep.line(" ".join(_fmt_vec(m) for m in s.monomials))
    rep.data.update(divisor=name, dimension=s.dimension, monomials=[list(m) for m in s.monomials])
    return EXIT_OK


def cmd_fixmob(args, rep):
    from .toric import ToricError, fix_mob
    doc = parse_instance(args.instance)
    name, d = _divisor_arg(doc, args.divisor)
    try:
        fix, mob = fix_mob(doc.variety, d)
    except ToricError as exc:
        rep.line(f"{name}: {exc}")
        rep.data.update(divisor=name, error=str(exc))
        return EXIT_FAIL
    rep.line(f"Fix({name}) = {_fmt_div(fix)}")
    rep.line(f"Mob({name}) = {_fmt_div(mob)}")
    rep.data.update(divisor=name, fix=fix, mob=mob)
    return EXIT_OK


def cmd_sbl(args, rep):
    from .toric import stable_base_locus
    doc = parse_instance(args.instance)
    name, d = _divisor_arg(doc, args.divisor)
    r = stable_base_locus(doc.variety, d, args.nmax)
    if r.whole:
        desc = "all of X"
    elif r.empty:
        desc = "empty"
    else:
        desc = ", ".join(sorted(r.components)) or "no divisorial components"
    rep.line(f"B({name}) = {desc} (stabilized: {'yes' if r.stabilized else 'no'})")
    rep.data.update(divisor=name, components=sorted(r.components), whole=r.whole, empty=r.empty,
                    stabilized=r.stabilized, non_divisorial=r.non_divisorial)
    return EXIT_OK if r.stabilized else EXIT_FAIL


def cmd_asymfix(args, rep):
    from .toric import ToricError, asymptotic_fixed
    doc = parse_instance(args.instance)
    name, d = _divisor_arg(doc, args.divisor)
    try:
        F = asymptotic_fixed(doc.variety, d, args.nmax)
    except ToricError as exc:
        rep.line(f"F({name}): {exc}")
        rep.data.update(divisor=name, error=str(exc))
        return EXIT_FAIL
    rep.line(f"F({name}) = {_fmt_div(F)}")
    rep.data.update(divisor=name, asymptotic_fixed=F)
    return EXIT_OK


def cmd_regions(args, rep):
    from .toric import adjoint_regions, is_pseudo_effective
    doc = parse_instance(args.instance)
    x = _need(doc, "variety", "variety")
    if args.divisor is None:
        raise InstanceError("--divisor must name the ample divisor A")
    _, A = _divisor_arg(doc, args.divisor)
    V = args.boundary.split(",") if args.boundary else list(x.names)
    regs = adjoint_regions(x, V, A)
    out = {}
    for key in ("L_V", "E_VA"):
        r = regs[key]
        rep.line(f"{key}: {len(r.vertices)} vertices")
        out[key] = {"vertices": [list(v) for v in r.vertices],
                    "inequalities": [[list(a), b] for a, b in r.inequalities]}
    for s, r in sorted(regs["B_S1"].items()):
        rep.line(f"B_S1[{s}]: {len(r.vertices)} vertices")
        out[f"B_S1[{s}]"] = {"vertices": [list(v) for v in r.vertices],
                             "inequalities": [[list(a), b] for a, b in r.inequalities]}
    rep.data["regions"] = out
    status = EXIT_OK
    if args.probes:
        rng = random.Random(args.seed)
        E = regs["E_VA"]
        pts = [tuple(Fraction(rng.randint(0, 8), 8) for _ in V) for _ in range(args.probes)]

        def agree(b):
            D = x.K + A + x.divisor(dict(zip(V, b)))
            return E.contains(b) == is_pseudo_effective(x, D)

        bad = [b for b, ok in zip(pts, map_ordered(agree, pts)) if not ok]
        rep.line(f"probes: {len(pts) - len(bad)}/{len(pts)} agree (seed {args.seed})")
        rep.data["probes"] = {"seed": args.seed, "count": len(pts), "disagree": [list(b) for b in bad]}
        if bad:
            status = EXIT_FAIL
    return status


def _chop_instance(doc):
    from .construction import ChopInstance
    c = _need(doc, "chop", "chop")
    return ChopInstance(doc.variety, c["K"], c["A"], c["boundary"], c["b"])


def cmd_chop(args, rep):
    from .construction import chop_backfaces
    inst = _chop_instance(parse_instance(args.instance))
    res = chop_backfaces(inst)
    rep.line(f"cone C: {len(inst.cone.rays)} rays; back faces: {len(res.cones)}")
    for j, cj in enumerate(res.cones):
        rep.line(f"  C_{j}: " + " ".join(_fmt_vec(g) for g in cj.rays))
    rep.data.update(base_point=list(inst.b), cone=[list(g) for g in inst.cone.rays],
                    back_faces=[[list(g) for g in cj.rays] for cj in res.cones])
    return EXIT_OK


def cmd_degree_bound(args, rep):
    from .construction import chop_backfaces, degree_bound, degree_bound_witness
    inst = _chop_instance(parse_instance(args.instance))
    res = chop_backfaces(inst)
    pieces = [(cj, j) for j, cj in enumerate(res.cones)]
    N = degree_bound(inst.cone, pieces)
    wit = degree_bound_witness(inst.cone, pieces, N)
    rep.line(f"N = {N}")
    if wit is not None:
        rep.line(f"N - 1 fails at j = {wit[0]}, m = {_fmt_vec(wit[1])}")
    rep.data.update(N=N, witness=None if wit is None else {"j": wit[0], "m": list(wit[1])})
    return EXIT_OK


def cmd_verify_fg(args, rep):
    from .construction import ChopError, PipelineError, run_pipeline
    doc = parse_instance(args.instance)
    sysm = _need(doc, "system", "system")
    try:
        cert = run_pipeline(doc.variety, sysm, doc.label, final_bound=args.bound)
    except (PipelineError, ChopError) as exc:
        rep.line(f"verify-fg failed: {exc}")
        rep.data.update(ok=False, error=str(exc))
        return EXIT_FAIL
    s = cert.summary()
    rep.line(f"finitely generated: {len(s['generators'])} generators, verified to degree {s['verified_to']}")
    for reps in s["pieces"]:
        for r in reps:
            rep.line(f"  base point {_fmt_vec(r['b'])}: N = {r['N']}, {r['generators']} generators, "
                     f"verified to {r['verified_to']}")
    rep.data.update(certificate=s)
    return EXIT_OK


def cmd_lift_check(args, rep):
    from .lifting import (LiftingError, admissible_phis, sharp_lifting_check, simple_lifting_check)
    doc = parse_instance(args.instance)
    insts = _need(doc, "lifting", "lifting")
    mode = args.mode
    eps = parse_exact(args.eps, "--eps") if args.eps is not None else None
    if mode == "tinker" and eps is None:
        raise InstanceError("--mode tinker needs --eps")
    status = EXIT_OK
    results = []
    for k, inst in enumerate(insts):
        tag = f"[{k}] {inst.variety.label or 'X'}, S = {inst.S}, p = {inst.p}"
        try:
            if mode == "simple":
                r = simple_lifting_check(inst)
                ok = r.holds
                rep.line(f"{tag}: {'equality holds' if ok else 'equality FAILS'} ({len(r.lhs)} members)")
                results.append({"index": k, "holds": ok, "members": len(r.lhs)})
            else:
                phis = admissible_phis(inst, mode, eps)
                checks = map_ordered(lambda ph: sharp_lifting_check(inst, ph, mode, eps).holds, phis)
                bad = [ph for ph, ok in zip(phis, checks) if not ok]
                ok = not bad
                rep.line(f"{tag}: {'inclusion holds' if ok else 'inclusion FAILS'} "
                         f"for {len(phis) - len(bad)}/{len(phis)} admissible Phi")
                results.append({"index": k, "holds": ok, "admissible": len(phis),
                                "failures": [_fmt_div(b) for b in bad]})
        except LiftingError as exc:
            ok = False
            rep.line(f"{tag}: hypothesis fails: {exc}")
            results.append({"index": k, "holds": False, "error": str(exc)})
        if not ok:
            status = EXIT_FAIL
    rep.data.update(mode=mode, results=results)
    return status


def _quad_point(entries):
    return QuadVec.from_entries(entries)


def cmd_dioph(args, rep):
    from .diophantine import approximate, check_certificate
    if args.instance:
        doc = parse_instance(args.instance)
        d = _need(doc, "dioph", "dioph")
        x, eps, M = d["x"], d["eps"], d["M"]
    else:
        if not args.x:
            raise InstanceError("give an instance file or --x")
        x = [parse_exact(t.strip(), "--x") for t in args.x.split(",")]
        eps = parse_exact(args.eps or "1/10", "--eps")
        M = 1
    if args.modulus is not None:
        M = args.modulus
    cert = approximate(_quad_point(x), eps, M)
    chk = check_certificate(cert)
    for w, p, r in zip(cert.points, cert.denominators, cert.weights):
        rep.line(f"w = {_fmt_vec(w)}, p = {p}, weight = {format_exact(r)}")
    rep.line("certificate valid" if chk.ok else "certificate INVALID: " + ", ".join(chk.failures))
    rep.data.update(x=list(x), eps=eps, M=M, points=[list(w) for w in cert.points],
                    denominators=list(cert.denominators), weights=list(cert.weights),
                    valid=chk.ok, failures=list(chk.failures))
    return EXIT_OK if chk.ok else EXIT_FAIL


def cmd_check_cert(args, rep):
    from .lifting import SurfaceContext, verify_dio_certificate
    doc = parse_instance(args.instance)
    cert = _need(doc, "certificate", "certificate")
    sysm = _need(doc, "system", "system")
    r = verify_dio_certificate(cert, SurfaceContext(doc.variety, doc.certificate_S), sysm)
    if r.passed:
        rep.line(f"certificate passes ({', '.join(r.stages)}); "
                 f"Theta affine at {len(r.affine_points)} interior points")
    else:
        rep.line(f"certificate fails: {', '.join(r.codes)}")
        for f in r.failed_items:
            rep.line(f"  {f}")
    rep.data.update(passed=r.passed, stages=r.stages, codes=r.codes,
                    failed_items=[{"code": f.code, "index": f.index, "prime": f.prime, "message": f.message}
                                  for f in r.failed_items],
                    affine_points=[list(q) for q in r.affine_points])
    return EXIT_OK if r.passed else EXIT_FAIL


COMMANDS = {
    "hilbert": cmd_hilbert, "sections": cmd_sections, "fixmob": cmd_fixmob, "sbl": cmd_sbl,
    "asymfix": cmd_asymfix, "regions": cmd_regions, "chop": cmd_chop, "degree-bound": cmd_degree_bound,
    "verify-fg": cmd_verify_fg, "lift-check": cmd_lift_check, "dioph": cmd_dioph, "check-cert": cmd_check_cert,
}


def build_parser():
    from .toric import DEFAULT_NMAX
    p = argparse.ArgumentParser(prog="adjoint-kernel", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("instance", nargs="?", help="instance JSON file")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized property checks")
    p.add_argument("--bound", type=int, default=None, help="verify-fg degree bound")
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX, help="stabilization ladder length")
    p.add_argument("--mode", choices=["simple", "sharp", "tinker"], default="simple")
    p.add_argument("--eps", default=None, help="rational epsilon, e.g. 1/10")
    p.add_argument("--modulus", type=int, default=None, help="divisibility modulus M")
    p.add_argument("--divisor", default=None, help="divisor name from the instance")
    p.add_argument("--boundary", default=None, help="comma separated boundary primes (regions)")
    p.add_argument("--probes", type=int, default=0, help="random membership probes (regions)")
    p.add_argument("--cone", default=None, help="cone generators, e.g. '1,0;1,2' (hilbert)")
    p.add_argument("--x", default=None, help="point for dioph, e.g. '0+1/2*sqrt(2),1-1/2*sqrt(2)'")
    p.add_argument("--json", action="store_true", help="print a JSON report")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_intermixed_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command not in ("hilbert", "dioph") and not args.instance:
        print(f"{args.command}: an instance file is required", file=sys.stderr)
        return EXIT_USAGE
    rep = Report(args.command)
    try:
        code = COMMANDS[args.command](args, rep)
    except (InstanceError, ConeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rep.data["exit"] = code
    print(rep.render(args.json))
    return code


if __name__ == "__main__":
    sys.exit(main())
