"""Finite generation of adjoint rings: back-face chopping, a total-degree
bound, generator assembly from restricted rings, and the cover of a klt
adjoint cone by parallelepiped cones.

Gradings in this module live in boundary coordinates: a degree is the
coefficient vector ``y`` of ``sum y_i B_i`` over the boundary names, so the
characteristic system is the identity. ``K + A`` must be supported on the
boundary names for that to make sense; instances are checked for it.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .cones import Cone, ConeDecomposition, intersect_halfspace, lattice_points, triangulate, verify_cover
from .divisors import CharacteristicSystem, Divisor, DivisorError, classify, delta_margin
from .exact import as_exact, denominator_lcm, dot
from .graded import (GeneratorSet, GradedRing, closure, inflate, injectivize, ring_generators,
                     verify_generation)
from .lifting import restricted_ring_generators
from .lp import ilp_max, linprog
from .toric import ToricVariety, is_pseudo_effective

log = logging.getLogger(__name__)

__all__ = [
    "ChopError", "ChopInstance", "ChopResult", "chop_backfaces", "degree_bound", "degree_bound_witness",
    "assemble_generators", "replay_induction", "theoremA_cover", "run_pipeline", "PipelineError",
    "InstanceReport", "Certificate", "prune_generators",
]


class ChopError(ValueError):
    def __init__(self, msg, witness=None):
        super().__init__(msg if witness is None else f"{msg}: {witness}")
        self.witness = witness


class PipelineError(RuntimeError):
    def __init__(self, stage, msg):
        super().__init__(f"[{stage}] {msg}")
        self.stage = stage


def _unit(r, j):
    return tuple(int(i == j) for i in range(r))


def _int_normal(f):
    L = denominator_lcm(f)
    return tuple(int(x * L) for x in f)


class ChopInstance:
    """Parallelepiped ``B = prod [b_i, 1] B_i`` and the cone ``C = R+(K + A + B)``."""

    def __init__(self, variety: ToricVariety, K: Divisor, A: Divisor, boundary, b):
        self.variety = variety
        self.K, self.A = K, A
        self.boundary = tuple(boundary)
        self.b = tuple(as_exact(t) for t in b)
        r = len(self.boundary)
        if len(self.b) != r:
            raise ChopError("base point and boundary differ in length")
        if any(not (0 <= t <= 1) for t in self.b):
            raise ChopError("base point must lie in [0, 1]^r", self.b)
        KA = K + A
        extra = [n for n in KA.support() if n not in self.boundary]
        if extra:
            raise ChopError("K + A is not supported on the boundary", extra)
        self.KA = tuple(KA[n] for n in self.boundary)
        self.vertices = sorted(set(product(*[(t, Fraction(1)) for t in self.b])))
        gens = [self.point(v) for v in self.vertices]
        for g in gens:
            if any(t < 0 for t in g) or not any(g):
                raise ChopError("cone is not inside the positive orthant of the boundary", g)
        self.cone = Cone(gens, r)
        self.tau = tuple([1] * r)
        if not is_pseudo_effective(variety, self.divisor(self.point(self.b))):
            raise ChopError("K + A + B(b) has no sections in any multiple", self.b)

    @property
    def rank(self):
        return len(self.boundary)

    def point(self, v):
        return tuple(k + t for k, t in zip(self.KA, v))

    def divisor(self, y) -> Divisor:
        return Divisor(dict(zip(self.boundary, y)), self.variety.registry)

    def identity_system(self, cone: Cone) -> CharacteristicSystem:
        r = self.rank
        return CharacteristicSystem(cone, None, self.boundary, [[_unit(r, i) for i in range(r)]],
                                    registry=self.variety.registry)

    def ring(self, cone: Cone | None = None) -> GradedRing:
        """``R(X; K + A + B)`` over ``cone`` (default ``C``), with the orthant as
        ambient monoid so that the sections ``sigma_j`` have a home."""
        cone = cone or self.cone
        orth = Cone([_unit(self.rank, i) for i in range(self.rank)], self.rank)
        return GradedRing(self.variety, self.identity_system(cone), ambient=orth, tau=self.tau)

    def __repr__(self):
        return f"ChopInstance({self.variety.label or 'X'}, b={self.b})"


@dataclass
class ChopResult:
    faces: list                 # vertex lists of the back faces
    cones: list                 # C_j = R+(K + A + B_j)
    systems: list               # adjoint systems on C_j
    strict: list                # S = B_j for each piece
    classifications: list = field(default_factory=list)


def chop_backfaces(inst: ChopInstance, check_classification: bool = True) -> ChopResult:
    r = inst.rank
    faces, cones, systems, strict, cls = [], [], [], [], []
    for j in range(r):
        face = [v for v in inst.vertices if v[j] == 1]
        Cj = Cone([inst.point(v) for v in face], r)
        faces.append(face)
        cones.append(Cj)
    ok, witness = verify_cover(inst.cone, cones)
    if not ok:
        raise ChopError("back-face cones do not cover the cone", witness)
    if check_classification:
        for j, Cj in enumerate(cones):
            sysj = _adjoint_piece(inst, Cj, faces[j])
            c = classify(sysj)
            if inst.boundary[j] not in c.strict_candidates:
                raise ChopError(f"piece {j} is not strictly dlt along {inst.boundary[j]}")
            systems.append(sysj)
            cls.append(c)
    strict = list(inst.boundary)
    return ChopResult(faces, cones, systems, strict, cls)


def _adjoint_piece(inst: ChopInstance, Cj: Cone, face) -> CharacteristicSystem:
    """``D(y) = y = r(y)(K + A + B(y))`` on ``Cj`` as an adjoint system."""
    reg = inst.variety.registry
    r_values, b_values = {}, {}
    for g in Cj.rays:
        for v in face:
            p = inst.point(v)
            k = next(i for i, t in enumerate(p) if t != 0)
            s = Fraction(g[k]) / p[k]
            if all(gi == s * pi for gi, pi in zip(g, p)):
                if g in r_values and b_values[g] != inst.divisor(v):
                    raise ChopError("two parallelepiped points span the same ray", g)
                r_values[g] = s
                b_values[g] = inst.divisor(v)
    dec = triangulate(Cj)
    # degree coordinates are boundary coefficients; the map to all names is an inclusion
    sysj = CharacteristicSystem.adjoint(Cj, dec, reg, inst.K, inst.A, r_values, b_values,
                                        boundary=inst.boundary)
    return sysj


# -- total degree bound --------------------------------------------------------------

def _violator_programs(parent: Cone, cj: Cone, j: int):
    """Linear systems ``m in C_j, f(m) <= f(e_j) - 1`` for each facet ``f`` of the parent."""
    r = parent.ambient_dim
    e = _unit(r, j)
    base_ub, base_eq = [], []
    for f in cj.facets:
        base_ub.append([-t for t in _int_normal(f)])
    for q in cj.equations:
        base_eq.append(list(_int_normal(q)))
    progs = []
    for f in parent.facets:
        f = _int_normal(f)
        progs.append((base_ub + [list(f)], [0] * len(base_ub) + [dot(f, e) - 1], base_eq))
    for q in parent.equations:
        if dot(q, e) != 0:
            raise ChopError("parent cone is not full dimensional in the direction of a piece", e)
    return progs


def degree_bound(parent: Cone, pieces, tau=None, verify_extra: int = 3) -> int:
    """Least ``N >= 0`` with ``m - e_j in C`` for all integer ``m in C_j``, ``tau(m) > N``.

    ``pieces`` is a list of ``(C_j, j)``. Each violator set is a polyhedron;
    its integer maximum of ``tau`` is found by branch and bound, then the
    answer is checked on all lattice points with ``tau <= N + verify_extra``.
    """
    r = parent.ambient_dim
    tau = tuple(tau or [1] * r)
    N = 0
    for cj, j in pieces:
        for ub, b, eq in _violator_programs(parent, cj, j):
            relax = linprog(list(tau), ub, b, eq, [0] * len(eq), maximize=True)
            if relax.status == "unbounded":
                raise ChopError("no finite degree bound (violators are unbounded)", (j, cj.rays))
            if relax.status == "infeasible":
                continue
            res = ilp_max(list(tau), ub, b, eq, [0] * len(eq))
            if res.status == "unbounded":
                raise ChopError("no finite degree bound (violators are unbounded)", (j, cj.rays))
            if res.ok:
                N = max(N, int(res.value))
    for cj, j in pieces:
        e = _unit(r, j)
        for m in lattice_points(cj, tau, N + verify_extra):
            if dot(tau, m) > N and not parent.contains(tuple(a - b for a, b in zip(m, e))):
                raise AssertionError(f"degree bound {N} fails at {m}")
    return N


def degree_bound_witness(parent: Cone, pieces, N: int, tau=None):
    """A pair ``(j, m)`` showing that ``N - 1`` is not a valid bound."""
    r = parent.ambient_dim
    tau = tuple(tau or [1] * r)
    for cj, j in pieces:
        e = _unit(r, j)
        for m in lattice_points(cj, tau, N):
            if dot(tau, m) == N and not parent.contains(tuple(a - b for a, b in zip(m, e))):
                return j, m
    return None


# -- generators --------------------------------------------------------------------

def sigma(inst: ChopInstance, j: int):
    """The section of ``B_j`` vanishing on ``B_j``: degree ``e_j``, monomial 0."""
    return (_unit(inst.rank, j), tuple([0] * inst.variety.dim))


def sigma_divisor(inst: ChopInstance, j: int) -> Divisor:
    lam, m = sigma(inst, j)
    return inst.variety.principal(m) + inst.divisor(lam)


def restricted_generators(inst: ChopInstance, chop: ChopResult):
    """Per piece ``(restricted GeneratorSet, lifted GeneratorSet)`` on ``S = B_j``."""
    out = []
    for j, Cj in enumerate(chop.cones):
        gs, lifted, _ = restricted_ring_generators(inst.ring(Cj), inst.boundary[j])
        out.append((gs, lifted))
    return out


def assemble_generators(inst: ChopInstance, chop: ChopResult, restricted_gens, N: int,
                        verify: bool = True, extra: int = 10):
    """``G_0`` (everything with ``1 <= tau <= N``), the lifts ``G_j`` and the ``sigma_j``."""
    R = inst.ring()
    g0 = []
    for lam in R.degrees(N):
        if any(lam):
            g0.extend((lam, m) for m in sorted(R.piece(lam)))
    lifts = []
    for j, (gs, lifted) in enumerate(restricted_gens):
        Rj = inst.ring(chop.cones[j])
        for lam, m in lifted:
            if not Rj.contains((lam, m), ambient=False):
                raise ChopError("a restricted generator admits no lift", lam)
        lifts.extend(lifted)
    sig = [sigma(inst, j) for j in range(inst.rank)]
    G = GeneratorSet(g0 + lifts + sig)
    if verify:
        rep = verify_generation(R, G, N + extra)
        if not rep.ok:
            raise ChopError("assembled generators do not generate", rep.first_failure or rep.unsound)
    return G


@dataclass
class ReplayReport:
    checked: int
    via_restriction: int
    via_sigma: int
    failure: tuple | None = None

    @property
    def ok(self):
        return self.failure is None


def replay_induction(inst: ChopInstance, chop: ChopResult, restricted_gens, N: int, bound: int) -> ReplayReport:
    """For each ``x in R_lam`` with ``N < tau(lam) <= bound`` and ``lam in C_j``:
    either ``x`` restricts nonzero to ``B_j`` and lies in the closure of ``G_j``,
    or ``x = sigma_j y`` with ``y in R_{lam - e_j}`` of total degree one less."""
    R = inst.ring()
    x = inst.variety
    cl = [closure(lifted, inst.tau, bound) for _, lifted in restricted_gens]
    checked = via_r = via_s = 0
    for lam in R.degrees(bound):
        t = dot(inst.tau, lam)
        if t <= N:
            continue
        js = [j for j, Cj in enumerate(chop.cones) if Cj.contains(lam)]
        if not js:
            return ReplayReport(checked, via_r, via_s, (lam, None, None))
        j = js[0]
        down = tuple(a - b for a, b in zip(lam, _unit(inst.rank, j)))
        vj = x.ray(inst.boundary[j])
        for m in sorted(R.piece(lam)):
            checked += 1
            if dot(m, vj) + lam[j] == 0:
                if m not in cl[j].get(lam, ()):
                    return ReplayReport(checked, via_r, via_s, (lam, m, j))
                via_r += 1
            else:
                if not inst.cone.contains(down) or m not in R.piece(down) or dot(inst.tau, down) != t - 1:
                    return ReplayReport(checked, via_r, via_s, (lam, m, j))
                via_s += 1
    return ReplayReport(checked, via_r, via_s)


# -- cover by parallelepiped cones ---------------------------------------------------

@dataclass
class CoverData:
    delta: Fraction
    KA: tuple
    boundary: tuple
    image: Cone                 # image cone in boundary coordinates
    points: list                # base points b(v_k)
    pieces: list                # C(v_k) ∩ image


def _in_parallelepiped_cone(y, KA, bv):
    """``y in R+(K + A + prod [b_i, 1])``: some ``t > 0`` with ``(KA + b) t <= y <= (KA + 1) t``."""
    lo, hi = Fraction(0), None
    for yi, k, bi in zip(y, KA, bv):
        for w, upper in ((k + bi, True), (k + 1, False)):
            # upper: w t <= yi ; otherwise w t >= yi
            if w == 0:
                if (upper and yi < 0) or (not upper and yi > 0):
                    return False
                continue
            q = Fraction(yi) / w
            if (w > 0) == upper:
                hi = q if hi is None else min(hi, q)
            else:
                lo = max(lo, q)
    return hi is None or (lo <= hi and hi > 0)


def _slice_h(points, r):
    """H-representation of ``conv(points)`` in ``R^r`` via the homogenised cone."""
    C = Cone([tuple(p) + (1,) for p in points], r + 1)
    ineqs = [(list(f[:r]), -f[r]) for f in C.facets]
    eqs = [(list(e[:r]), -e[r]) for e in C.equations]
    return ineqs, eqs


def theoremA_cover(sys: CharacteristicSystem, variety: ToricVariety, max_depth: int = 4):
    """Base points ``v_k`` of parallelepiped cones covering the image of a
    linear klt adjoint system, and the corresponding chop instances."""
    from .lp import vertices
    if not sys.is_linear():
        raise ChopError("cover needs a linear system")
    if not sys.is_adjoint_form or sys.boundary is None:
        raise ChopError("cover needs adjoint data with a boundary")
    delta = delta_margin(sys)
    boundary = tuple(sys.boundary)
    KA_div = sys.K + sys.A
    if any(n not in boundary for n in KA_div.support()):
        raise ChopError("K + A is not supported on the boundary")
    KA = tuple(KA_div[n] for n in boundary)
    r = len(boundary)
    bpts = []
    for g in sys.cone.rays:
        B = sys.eval_B(g)
        bpts.append(tuple(B[n] for n in boundary))
    ineqs, eqs = _slice_h(bpts, r)
    image = Cone([tuple(k + t for k, t in zip(KA, b)) for b in bpts], r)
    chosen = []

    def covered_by(vs):
        for v in sorted(vs):
            if all(_in_parallelepiped_cone(tuple(k + t for k, t in zip(KA, u)), KA, v) for u in vs):
                return v
        return None

    lo = [min(p[i] for p in bpts) for i in range(r)]
    hi = [max(p[i] for p in bpts) for i in range(r)]

    def cells(h, lo_c, hi_c):
        ranges = []
        for i in range(r):
            ks, t = [], lo_c[i]
            while True:
                ks.append(t)
                if t + h >= hi_c[i]:
                    break
                t += h
            ranges.append(ks)
        for corner in product(*ranges):
            yield corner, tuple(min(c + h, hi_c[i]) for i, c in enumerate(corner))

    def process(corner, upper, h, depth):
        box = []
        for i in range(r):
            e = [0] * r
            e[i] = 1
            box.append((e, corner[i]))
            box.append(([-t for t in e], -upper[i]))
        vs = vertices(ineqs + box, eqs, r)
        if not vs:
            return
        v = covered_by(vs)
        if v is not None:
            if v not in chosen:
                chosen.append(v)
            return
        if depth >= max_depth:
            raise ChopError("cover refinement did not terminate", corner)
        for c2, u2 in cells(h / 2, corner, upper):
            process(c2, u2, h / 2, depth + 1)

    h = delta / 2
    for corner, upper in cells(h, lo, hi):
        process(corner, upper, h, 0)
    pieces = []
    for v in chosen:
        Cv = Cone([tuple(k + t for k, t in zip(KA, u)) for u in product(*[(t, Fraction(1)) for t in v])], r)
        P = Cv
        for f in image.facets:
            P = intersect_halfspace(P, f)
        for q in image.equations:
            P = intersect_halfspace(intersect_halfspace(P, q), tuple(-t for t in q))
        pieces.append(P)
    ok, w = verify_cover(image, pieces)
    if not ok:
        raise ChopError("parallelepiped cones do not cover the cone", w)
    for v in chosen:
        assert all(1 - t >= delta for t in v)
    instances = [ChopInstance(variety, sys.K, sys.A, boundary, v) for v in chosen]
    return instances, CoverData(delta, KA, boundary, image, chosen, pieces)


# -- end-to-end driver ----------------------------------------------------------------

@dataclass
class InstanceReport:
    base_point: tuple
    N: int
    witness: tuple | None
    generators: GeneratorSet
    verified_to: int
    replay: ReplayReport
    seconds: float


@dataclass
class Certificate:
    label: str
    pieces: list = field(default_factory=list)      # per linear piece: list of InstanceReport
    image_generators: list = field(default_factory=list)
    verified_to: int = 0
    ok: bool = False
    seconds: float = 0.0

    def summary(self):
        return {
            "label": self.label,
            "ok": self.ok,
            "verified_to": self.verified_to,
            "pieces": [
                [{"b": list(ir.base_point), "N": ir.N, "generators": len(ir.generators),
                  "verified_to": ir.verified_to} for ir in reps]
                for reps in self.pieces
            ],
            "generators": [[list(l), list(m)] for gs in self.image_generators for l, m in gs],
        }


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except PipelineError:
        raise
    except (ValueError, AssertionError) as exc:
        raise PipelineError(name, str(exc)) from exc


def run_pipeline(variety: ToricVariety, sys: CharacteristicSystem, label: str = "", extra: int = 10,
                 final_bound: int | None = None) -> Certificate:
    """Classify, triangulate, push forward, cover, chop, bound, assemble and verify."""
    t0 = time.perf_counter()
    cert = Certificate(label)
    c = _stage("classify", classify, sys)
    if not (c.is_adjoint and c.is_dlt):
        raise PipelineError("classify", "system is not a dlt adjoint system")
    for g in sys.cone.rays:
        if not sys.eval(g).is_effective():
            raise PipelineError("effectivity", f"D is not effective at {g}")
    dec = _stage("triangulate", triangulate, sys.cone)
    sys = _stage("triangulate", sys.refine, dec)
    for k, piece in enumerate(dec.pieces):
        psys = CharacteristicSystem(piece, None, sys.names, [sys.maps[k]], sys.K, sys.A,
                                    [sys.r_funcs[k]], [sys.boundary_maps[k]], sys.boundary, sys.registry)
        inj = _stage("injectivize", injectivize, psys)
        if inj.degenerate:
            raise PipelineError("injectivize", "the system is zero on a piece")
        instances, cover = _stage("cover", theoremA_cover, psys, variety)
        reports, image_gens = [], []
        for inst, cut in zip(instances, cover.pieces):
            ti = time.perf_counter()
            chop = _stage("chop", chop_backfaces, inst)
            pieces = [(Cj, j) for j, Cj in enumerate(chop.cones)]
            N = _stage("degree-bound", degree_bound, inst.cone, pieces)
            wit = degree_bound_witness(inst.cone, pieces, N)
            rg = _stage("restrict", restricted_generators, inst, chop)
            G = _stage("assemble", assemble_generators, inst, chop, rg, N, True, extra)
            rep = _stage("replay", replay_induction, inst, chop, rg, N, N + extra)
            if not rep.ok:
                raise PipelineError("replay", f"induction step fails at {rep.failure}")
            reports.append(InstanceReport(inst.b, N, wit, G, N + extra, rep, time.perf_counter() - ti))
            image_gens.append(_stage("inflate", _inflate_cut, inst, G, cut))
        cert.pieces.append(reports)
        # the union generates the ring over the image cone
        union = prune_generators(GeneratorSet([e for gs in image_gens for e in gs]), (1,) * len(cover.KA))
        bound = final_bound or max(dot((1,) * len(cover.KA), l) for l, _ in union) + 2
        ring = GradedRing(variety, CharacteristicSystem(cover.image, None, cover.boundary,
                                                        [[_unit(len(cover.boundary), i)
                                                          for i in range(len(cover.boundary))]],
                                                        registry=variety.registry))
        rep = _stage("verify", verify_generation, ring, union, bound)
        if not rep.ok:
            raise PipelineError("verify", f"union fails at {rep.first_failure or rep.unsound}")
        cert.image_generators.append(union)
        cert.verified_to = bound if not cert.verified_to else min(cert.verified_to, bound)
    cert.ok = True
    cert.seconds = time.perf_counter() - t0
    return cert


def prune_generators(G: GeneratorSet, tau) -> GeneratorSet:
    """Drop every element that is a product of elements of lower total degree."""
    kept = []
    levels = sorted({dot(tau, l) for l, _ in G})
    for t in levels:
        cl = closure(GeneratorSet(kept), tau, t) if kept else {}
        for l, m in G:
            if dot(tau, l) == t and m not in cl.get(l, ()):
                kept.append((l, m))
    return GeneratorSet(kept)


def _inflate_cut(inst: ChopInstance, G: GeneratorSet, cut: Cone) -> GeneratorSet:
    """Generators of the ring over ``cut = C(v) ∩ image`` from those of ``R[sigma]``."""
    from .graded import MonomialAlgebra
    if not cut.rays:
        return GeneratorSet([])
    R = inst.ring()
    alg = MonomialAlgebra(G, inst.tau, parent=R)
    orth = Cone([_unit(inst.rank, i) for i in range(inst.rank)], inst.rank)
    return inflate(alg, cut, orth)
