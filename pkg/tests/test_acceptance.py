"""One check per acceptance criterion; each prints a pass/fail line."""

import time
from dataclasses import replace
from fractions import Fraction as F
from itertools import product

from conftest import criterion

from adjoint_kernel.cones import Cone, hilbert_basis, triangulate
from adjoint_kernel.construction import ChopInstance, chop_backfaces, run_pipeline
from adjoint_kernel.diophantine import approximate, check_certificate
from adjoint_kernel.divisors import CharacteristicSystem, Registry, check_shape
from adjoint_kernel.exact import QuadNumber, QuadVec, as_exact, dot, primitive
from adjoint_kernel.graded import GradedRing, MonomialAlgebra, inflate, injectivize, verify_generation
from adjoint_kernel.io import bundled_instance, parse_instance
from adjoint_kernel.lifting import (
    SurfaceContext, admissible_phis, make_lemma3_certificate, sharp_lifting_check, simple_lifting_check,
    verify_dio_certificate,
)
from adjoint_kernel.toric import (
    adjoint_regions, asymptotic_fixed, fix_mob, hirzebruch, is_ample, projective_space, restriction, sections,
    stable_base_locus,
)

from oracles import (
    box_sections, brute_hilbert, polygon_meets, random_monomial_algebra, random_pointed_cone, seeded,
)


@criterion(1, "Hilbert bases of 100 random cones match the irreducible-element oracle")
def test_criterion_1_hilbert_bases():
    rng = seeded(2024)
    cones = [random_pointed_cone(rng, 2 if k % 2 == 0 else 3) for k in range(100)]
    t0 = time.perf_counter()
    ours = [hilbert_basis(c) for c in cones]
    t_ours = time.perf_counter() - t0
    for c, hb in zip(cones, ours):
        assert hb == brute_hilbert(c), c.rays
    assert t_ours < 30
    return f"hilbert_basis {t_ours:.1f} s"


@criterion(2, "h0(P2, dH) = (d+1)(d+2)/2 for d = 0..10")
def test_criterion_2_section_counts():
    x = projective_space(2)
    H = x.prime("D3")
    for d in range(11):
        s = sections(x, H * d)
        assert len(s) == (d + 1) * (d + 2) // 2
        assert s.monomials == box_sections(x.rays, x.coeffs(H * d), 12)


@criterion(3, "rigid curve E on F1: Fix(E) = E, asymptotic fixed part E, base locus {E}")
def test_criterion_3_rigid_divisor():
    x = hirzebruch(1)
    E = x.prime("D2")
    assert stable_base_locus(x, x.prime("D2")).components == frozenset({"D2"})
    assert fix_mob(x, E) == (E, x.divisor())
    assert asymptotic_fixed(x, E) == E
    assert sections(x, E).monomials == [(0, 0)]


def _breaks(forms):
    """Primitive directions inside the open quadrant where two forms agree."""
    out = set()
    for (a1, b1), (a2, b2) in product(forms, repeat=2):
        da, db = a1 - a2, b1 - b2
        for v in ((db, -da), (-db, da)):
            if v[0] > 0 and v[1] > 0:
                out.add(primitive(v))
    return sorted(out)


def _pl_system(rng, kind):
    """``D(w)_n = min_k L_{n,k}(w)`` (kind "min") or ``max`` on the positive quadrant."""
    reg = Registry(["E", "G"])
    quad = Cone([(1, 0), (0, 1)])
    forms = {n: [(rng.randint(0, 6), rng.randint(0, 6)) for _ in range(rng.randint(2, 3))] for n in reg.names}
    pick = min if kind == "min" else max
    rays = sorted({r for fs in forms.values() for r in _breaks(fs)})
    dec = triangulate(quad, required_rays=rays) if rays else triangulate(quad)
    allrays = sorted({g for piece in dec.pieces for g in piece.rays})
    values = {g: tuple(pick(dot(f, g) for f in forms[n]) for n in reg.names) for g in allrays}
    sys = CharacteristicSystem.from_ray_values(quad, dec, list(reg.names), values, registry=reg)
    # a name is bent when no single form attains the optimum on every ray
    bent = any(not any(all(dot(f, g) == values[g][i] for g in allrays) for f in forms[n])
               for i, n in enumerate(reg.names))
    return sys, (lambda w: [pick(dot(f, w) for f in forms[n]) for n in reg.names]), bent


@criterion(4, "50 superadditive PL systems are concave; 10 crafted ones are flagged")
def test_criterion_4_shape():
    rng = seeded(404)
    for _ in range(50):
        sys, fn, _ = _pl_system(rng, "min")
        rep = check_shape(sys)
        assert rep.concave
        for _ in range(20):
            w1 = (F(rng.randint(0, 30), 7), F(rng.randint(0, 30), 5))
            w2 = (F(rng.randint(0, 30), 7), F(rng.randint(0, 30), 5))
            s = tuple(a + b for a, b in zip(w1, w2))
            assert all(c >= a + b for c, a, b in zip(fn(s), fn(w1), fn(w2)))
    crafted = 0
    while crafted < 10:
        sys, fn, bent = _pl_system(rng, "max")
        if not bent:
            continue
        rep = check_shape(sys)
        assert not (rep.concave and rep.superadditive_mob)
        # an explicit pair breaking superadditivity exists
        assert any(any(c < a + b for c, a, b in zip(fn((1, k)), fn((1, 0)), fn((0, k)))) or
                   any(c < a + b for c, a, b in zip(fn((k, 1)), fn((k, 0)), fn((0, 1))))
                   for k in range(1, 30))
        crafted += 1


REGION_CASES = [
    ("P2", projective_space(2), ["D1", "D2"], {"D3": F(3, 2)}),
    ("F1", hirzebruch(1), ["D1", "D2", "D4"], {"D2": 1, "D3": F(5, 4), "D4": 1}),
    ("F2", hirzebruch(2), ["D1", "D2"], {"D2": 1, "D3": 3, "D4": 1}),
    ("P1xP1", hirzebruch(0), ["D1", "D3"], {"D1": F(1, 2), "D2": 1, "D3": F(3, 4), "D4": 1}),
]


@criterion(5, "region membership agrees with per-point polytope tests (1000 probes per region)")
def test_criterion_5_regions():
    rng = seeded(505)
    total = inside = 0
    for label, x, V, Acoeffs in REGION_CASES:
        A = x.divisor(Acoeffs)
        assert is_ample(x, A), label
        regs = adjoint_regions(x, V, A)
        named = [("L_V", regs["L_V"], None), ("E_VA", regs["E_VA"], None)]
        named += [(f"B_S1[{s}]", r, s) for s, r in sorted(regs["B_S1"].items())]
        for key, region, s in named:
            for v in region.vertices:
                assert all(isinstance(as_exact(t), (int, F)) for t in v)
            for _ in range(1000):
                b = tuple(F(rng.randint(-3, 15), 12) for _ in V)
                in_box = all(0 <= t <= 1 for t in b)
                D = x.K + A + x.divisor(dict(zip(V, b)))
                if key == "L_V":
                    expected = in_box
                else:
                    face = None if s is None else x.index(s)
                    expected = in_box and polygon_meets(x.rays, x.coeffs(D), face)
                assert region.contains(b) == expected, (label, key, b)
                total += 1
                inside += expected
    assert 0 < inside < total
    return f"{total} probes, {inside} inside"


def _lifting_corpus():
    out = []
    for name in ("f1-lift", "p2-lift", "f2-lift"):
        out.extend(parse_instance(bundled_instance(name)).lifting)
    return out


@criterion(6, "lifting corpus: equality and inclusion for every admissible Phi")
def test_criterion_6_lifting():
    t0 = time.perf_counter()
    corpus = _lifting_corpus()
    assert len(corpus) >= 10
    checked = 0
    for inst in corpus:
        assert simple_lifting_check(inst).holds
        phis = admissible_phis(inst)
        assert len(phis) >= 5
        for ph in phis:
            assert sharp_lifting_check(inst, ph).holds
            checked += 1
    assert time.perf_counter() - t0 < 60
    return f"{len(corpus)} instances, {checked} values of Phi"


SQUAREFREE = [2, 3, 5, 6, 7, 10, 11, 13, 14, 15, 17, 19]


@criterion(7, "Diophantine round trip on 100 quadratic inputs for all eps and M")
def test_criterion_7_dioph():
    rng = seeded(707)
    count = 0
    for _ in range(100):
        d = rng.choice(SQUAREFREE)
        n = rng.randint(1, 3)
        a = [F(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(n)]
        b = [F(rng.randint(-5, 5), rng.randint(1, 6)) for _ in range(n)]
        if not any(b):
            b[0] = F(1)
        x = QuadVec.from_entries([QuadNumber(s, t, d) if t else s for s, t in zip(a, b)])
        coords = [QuadNumber(s, t, d) for s, t in zip(a, b)]
        for eps in (F(1), F(1, 10), F(1, 100)):
            for M in (1, 2, 6, 12):
                c = approximate(x, eps, M)
                assert check_certificate(c).ok
                for p, w in zip(c.denominators, c.points):
                    assert p % M == 0
                    for xj, wj in zip(coords, w):
                        diff = xj - wj
                        assert diff * diff < (eps / p) ** 2
                count += 1
    return f"{count} certificates"


def _linear_ring(x, cols):
    M = [tuple(c[n] for c in cols) for n in x.names]
    sys = CharacteristicSystem(Cone([(1, 0), (0, 1)]), None, x.names, [M], registry=x.registry)
    return GradedRing(x, sys)


@criterion(8, "inflate generates to degree 8 on 20 algebras; injectivize keeps dimensions")
def test_criterion_8_inflate_injectivize():
    rng = seeded(808)
    quad = Cone([(1, 0), (0, 1)])
    for _ in range(20):
        alg = random_monomial_algebra(rng)
        a, b = rng.randint(0, 3), rng.randint(1, 3)
        cut = Cone([(1, 0), (a, b)]) if rng.random() < 0.5 else Cone([(0, 1), (b, a)])
        G = inflate(alg, cut, quad)
        assert verify_generation(MonomialAlgebra(alg.generators, (1, 1), grading=cut), G, 8).ok
    x = projective_space(2)
    pieces = 0
    for k in range(10):
        d1 = x.divisor({n: rng.randint(0, 2) for n in x.names})
        if not any(d1.coeffs.values()):
            d1 = x.prime("D1")
        d2 = d1 * rng.randint(1, 2) if k % 2 == 0 else x.divisor({n: rng.randint(0, 2) for n in x.names})
        R = _linear_ring(x, [d1, d2])
        inj = injectivize(R.system)
        pushed = GradedRing(x, inj.system)
        for lam in product(range(6), repeat=2):
            if sum(lam) <= 5:
                assert len(R.piece(lam)) == len(pushed.piece(inj.push(lam)))
                pieces += 1
    return f"{pieces} graded pieces compared"


def _check_witness(inst, N, witness):
    chop = chop_backfaces(inst)
    r = inst.rank
    tau_ok = True
    for j, Cj in enumerate(chop.cones):
        for m in product(range(N + 4), repeat=r):
            if sum(m) <= N + 3 and sum(m) > N and Cj.contains(m):
                tau_ok &= inst.cone.contains(tuple(a - (i == j) for i, a in enumerate(m)))
    assert tau_ok
    if N == 0:
        return
    j, m = witness
    assert sum(m) == N and chop.cones[j].contains(m)
    assert not inst.cone.contains(tuple(a - (i == j) for i, a in enumerate(m)))


@criterion(9, "pipeline on P1, P2 and F1 with degree-bound witnesses")
def test_criterion_9_pipeline():
    notes = []
    for name in ("p1", "p2", "f1"):
        doc = parse_instance(bundled_instance(name))
        t0 = time.perf_counter()
        cert = run_pipeline(doc.variety, doc.system, name)
        elapsed = time.perf_counter() - t0
        assert cert.ok and elapsed < 300
        sys = doc.system
        for reps in cert.pieces:
            for r in reps:
                assert r.verified_to >= r.N + 10 and r.replay.ok
                inst = ChopInstance(doc.variety, sys.K, sys.A, sys.boundary, r.base_point)
                assert verify_generation(inst.ring(), r.generators, r.N + 10).ok
                _check_witness(inst, r.N, r.witness)
        notes.append(f"{name} {elapsed:.0f} s")
    return ", ".join(notes)


@criterion(10, "certificate verifier: valid certificate passes, 6 single defects named exactly")
def test_criterion_10_certificates():
    doc = parse_instance(bundled_instance("f1-cert"))
    ctx = SurfaceContext(doc.variety, doc.certificate_S)
    rep = verify_dio_certificate(doc.certificate, ctx, doc.system)
    assert rep.passed and len(rep.affine_points) == 5
    c = doc.certificate
    defects = [
        (replace(c, C=F(10)), doc.system, "(e)"),
        (replace(c, C=F(0)), doc.system, "(b)"),
        (replace(c, delta=F(1, 2)), doc.system, "(c)"),
        (replace(c, weights=c.weights[::-1]), doc.system, "(1)"),
        (replace(c, M=3), doc.system, "(2)"),
    ]
    D = lambda *t: doc.variety.divisor(dict(zip(doc.variety.names, [F(s) for s in t])))
    other = CharacteristicSystem.adjoint(Cone([(1, 0), (0, 1)]), None, doc.variety.registry, doc.variety.K,
                                         D(0, 2, F(9, 4), 0), {(1, 0): 1, (0, 1): 1},
                                         {(1, 0): D(1, F(1, 2), 0, 0), (0, 1): D(1, F(1, 4), F(1, 8), 0)})
    defects.append((make_lemma3_certificate(ctx, other, c.x, c.eps, c.delta), other, "additional-assumption"))
    for cert, sys, code in defects:
        r = verify_dio_certificate(cert, ctx, sys)
        assert not r.passed and r.codes == [code], (code, r.codes)
    return "codes " + " ".join(code for _, _, code in defects)
