from dataclasses import replace
from fractions import Fraction as F

import pytest

from adjoint_kernel.cones import Cone, triangulate
from adjoint_kernel.divisors import CharacteristicSystem, Registry, wedge
from adjoint_kernel.exact import QuadNumber
from adjoint_kernel.lifting import (
    LiftingError, LiftingInstance, SurfaceContext, admissible_phis, extend_convex, lemma6_search,
    make_lemma3_certificate, restricted_F_at, sharp_lifting_check, simple_lifting_check, theta_phi_omega,
    verify_dio_certificate,
)
from adjoint_kernel.toric import hirzebruch, projective_space, restricted_fixed, restriction, sections

from oracles import box_sections, brute_restricted_fix

X = hirzebruch(1)


def D(*c):
    return X.divisor(dict(zip(X.names, [F(t) for t in c])))


def f1_system(A, B1, B2, r=(1, 1)):
    return CharacteristicSystem.adjoint(Cone([(1, 0), (0, 1)]), None, X.registry, X.K, A,
                                        {(1, 0): r[0], (0, 1): r[1]}, {(1, 0): B1, (0, 1): B2})


SYS = f1_system(D(0, 1, F(5, 4), 1), D(1, F(1, 2), 0, F(1, 2)), D(1, F(1, 4), F(1, 8), F(1, 4)))
CTX = SurfaceContext(X, "D1")


def corpus_instance():
    return LiftingInstance(X, "D1", D(0, 1, F(5, 4), 1), D(0, F(1, 2), 0, F(1, 2)), 4)


# -- Theta / Phi / Omega ----------------------------------------------------------------

def test_theta_examples():
    td = theta_phi_omega(CTX, SYS, (0, 1))
    assert td.F_S == td.F_S * 0 and td.Phi == td.Phi * 0 and td.Theta == td.Omega
    td = theta_phi_omega(CTX, SYS, (1, 0))
    S = restriction(X, "D1").surface
    assert td.F_S == S.prime("D2") / 4
    assert td.Phi == S.prime("D2") / 4
    assert td.Theta == S.divisor({"D2": F(5, 4), "D4": F(3, 2)})


def test_theta_identities_on_many_points():
    for a in range(0, 7):
        for b in range(0, 7):
            if a == b == 0:
                continue
            td = theta_phi_omega(CTX, SYS, (F(a), F(b, 3)))
            assert td.Theta + td.Phi == td.Omega
            assert td.Theta.is_effective() and td.Theta <= td.Omega
            assert td.Phi == wedge(td.Omega, td.F_S)


def test_theta_rejects_base_locus():
    bad = f1_system(D(0, 0, 1, 1), D(0, 1, 0, 0), D(0, 1, 0, 0))
    with pytest.raises(LiftingError, match="stable base locus"):
        theta_phi_omega(SurfaceContext(X, "D2"), bad, (1, 0))


def test_restricted_fixed_part_is_homogeneous():
    for w in [(1, 0), (0, 1), (1, 1), (2, 3), (F(1, 2), F(1, 5))]:
        base = restricted_fixed(X, "D1", SYS.eval(w))
        # the degree-0 normalisation at K + Delta(w) scales back by r(w)
        assert base == restricted_F_at(X, "D1", SYS, w) * SYS.eval_r(w)
        for n in (2, 3, 5):
            nw = tuple(n * t for t in w)
            assert restricted_fixed(X, "D1", SYS.eval(nw)) == base * n
            assert restricted_F_at(X, "D1", SYS, nw) == restricted_F_at(X, "D1", SYS, w)


# -- lifting checks -----------------------------------------------------------------------

def test_simple_lifting_on_projective_plane():
    x = projective_space(2)
    inst = LiftingInstance(x, "D3", x.prime("D1") * F(5, 2), x.prime("D2") / 2, 2)
    rep = simple_lifting_check(inst)
    assert rep.holds
    # both sides against a box scan: lhs counted on X, rhs on the curve
    D = inst.adjoint * 2
    v = x.rays[x.index("D3")]
    lhs = [m for m in box_sections(x.rays, x.coeffs(D), 15) if sum(p * q for p, q in zip(m, v)) == -D["D3"]]
    assert len(rep.lhs) == len(lhs)
    S = inst.surface
    rhs_div = (inst.K_S + rep.detail["Theta_p"]) * 2
    assert len(rep.rhs) == len(box_sections(S.rays, S.coeffs(rhs_div), 15))


def test_simple_lifting_error_gates():
    with pytest.raises(LiftingError, match="stable base locus"):
        simple_lifting_check(LiftingInstance(X, "D2", D(0, 0, 1, 1), X.divisor(), 1))
    with pytest.raises(LiftingError, match="not integral"):
        LiftingInstance(X, "D1", D(0, 1, F(5, 4), 1), D(0, F(1, 2), 0, F(1, 3)), 4)
    with pytest.raises(LiftingError, match="not ample"):
        LiftingInstance(X, "D1", D(0, 1, 0, 1), X.divisor(), 1)
    with pytest.raises(LiftingError, match="outside"):
        LiftingInstance(X, "D1", D(0, 1, F(5, 4), 1), D(0, 1, 0, 0), 4)
    with pytest.raises(LiftingError, match="must not contain S"):
        LiftingInstance(X, "D1", D(1, 1, F(5, 4), 1), X.divisor(), 4)


def test_sharp_lifting_at_both_ends_of_the_interval():
    inst = corpus_instance()
    phis = admissible_phis(inst)
    lo = min(phis, key=lambda p: sum(p[n] for n in inst.surface.names))
    assert sharp_lifting_check(inst, lo).holds
    assert sharp_lifting_check(inst, inst.Omega).holds
    S = inst.surface
    with pytest.raises(LiftingError, match="admissible interval"):
        sharp_lifting_check(inst, inst.Omega + S.prime("D2"))
    with pytest.raises(LiftingError, match="not integral"):
        sharp_lifting_check(inst, S.prime("D2") / 3)
    with pytest.raises(LiftingError, match="unknown mode"):
        sharp_lifting_check(inst, lo, mode="loose")


def test_tinkering_mode_gate():
    inst = corpus_instance()
    phis = admissible_phis(inst, "tinker", F(1, 10))
    assert phis and all(sharp_lifting_check(inst, ph, "tinker", F(1, 10)).holds for ph in phis[:10])
    with pytest.raises(LiftingError, match="not ample"):
        admissible_phis(inst, "tinker", 1)
    with pytest.raises(LiftingError, match="needs eps"):
        admissible_phis(inst, "tinker")
    with pytest.raises(LiftingError, match="positive"):
        admissible_phis(inst, "tinker", 0)


def test_restricted_fixed_parts_are_monotone():
    for A, B, p in [
        (D(0, 1, F(5, 4), 1), D(0, F(1, 2), 0, F(1, 2)), 4),
        (D(0, 1, F(5, 4), 1), D(0, F(3, 4), 0, F(1, 4)), 4),
        (D(0, 1, F(4, 3), 1), D(0, F(2, 3), 0, F(1, 3)), 3),
        (D(0, 1, F(7, 6), 1), D(0, F(5, 6), 0, F(1, 2)), 6),
    ]:
        inst = LiftingInstance(X, "D1", A, B, p)
        F_p = simple_lifting_check(inst).detail["F_p"]
        with_A = restricted_fixed(X, "D1", inst.adjoint + A / p)
        plain = restricted_fixed(X, "D1", inst.adjoint)
        assert with_A <= plain <= F_p


# -- stabilization search -------------------------------------------------------------------

def brute_lemma6(sys, lam, n_max):
    """Smallest ``n`` where the restricted fixed part of ``D(n lam)``, found by a
    box scan, reproduces ``Phi(lam)``."""
    td = theta_phi_omega(CTX, sys, lam)
    r = sys.eval_r(lam)
    S = restriction(X, "D1").surface
    for n in range(1, n_max + 1):
        fix = brute_restricted_fix(X, "D1", sys.eval(lam) * n)
        if fix is None:
            continue
        Fn = S.divisor(fix) / n
        if wedge(td.Omega, Fn / r) == td.Phi:
            return n
    return None


def test_lemma6_examples():
    other = f1_system(D(0, 1, F(5, 4), 1), D(1, F(1, 2), 0, F(1, 2)), D(1, F(1, 4), F(1, 8), F(1, 4)), (2, 3))
    cases = [(SYS, (1, 2), 4, 1), (other, (1, 0), 4, 2), (SYS, (1, 1), 3, None)]
    for sys, lam, n_max, expected in cases:
        assert lemma6_search(CTX, sys, lam, n_max) == expected
        assert brute_lemma6(sys, lam, n_max) == expected


# -- convex extension -----------------------------------------------------------------------

REG = Registry(["E", "G"])
QUAD = Cone([(1, 0), (0, 1)])


def _samples(fn, pts):
    return {p: REG.divisor(fn(p)) for p in pts}


PTS = [(1, 1), (2, 1), (1, 2), (3, 1), (1, 3), (2, 2), (4, 2), (3, 5), (F(1, 2), F(1, 3))]


def test_extend_convex_linear():
    dec = triangulate(QUAD, required_rays=[(1, 1)])
    f = extend_convex(_samples(lambda p: {"E": p[0] + 2 * p[1], "G": p[1]}, PTS), dec, ["E", "G"], REG)
    assert f.is_linear() and not f.flagged
    assert f.evaluate((5, 7)) == REG.divisor({"E": 19, "G": 7})


def test_extend_convex_max_and_errors():
    dec = triangulate(QUAD, required_rays=[(1, 1)])
    f = extend_convex(_samples(lambda p: {"E": max(p), "G": 0}, PTS), dec, ["E", "G"], REG)
    assert not f.is_linear()
    assert f.evaluate((F(7, 2), 1))["E"] == F(7, 2)
    with pytest.raises(LiftingError, match="convexity"):
        extend_convex(_samples(lambda p: {"E": min(p), "G": 0}, PTS), dec, ["E", "G"], REG)
    bad = _samples(lambda p: {"E": p[0], "G": 0}, PTS)
    bad[(2, 2)] = REG.divisor({"E": 3})
    with pytest.raises(LiftingError, match="homogeneous"):
        extend_convex(bad, dec, ["E", "G"], REG)


def test_extend_convex_flags_boundary_jump():
    dec = triangulate(QUAD)
    data = _samples(lambda p: {"E": p[0] + p[1], "G": 0}, PTS)
    data[(1, 0)] = REG.divisor({"E": 1})
    data[(0, 1)] = REG.divisor({"E": 2})
    f = extend_convex(data, dec, ["E", "G"], REG)
    assert f.flagged == [(0, 1)]


def test_restricted_fixed_part_extends_convexly():
    # F_S(D(w)) is max(0, w1/4 - w2/8): it bends along the ray (1, 2)
    dec = triangulate(Cone([(1, 0), (0, 1)]), required_rays=[(1, 2)])
    pts = [(2, 1), (3, 1), (3, 2), (1, 3), (1, 4), (2, 5), (1, 0), (0, 1)]
    samples = {w: restricted_fixed(X, "D1", SYS.eval(w)) for w in pts}
    f = extend_convex(samples, dec, ["D2", "D4"], restriction(X, "D1").surface.registry)
    assert not f.is_linear() and not f.flagged
    for w in [(5, 1), (1, 7), (F(3, 2), 2), (4, 9)]:
        assert f.evaluate(w) == restricted_fixed(X, "D1", SYS.eval(w))
    # one linear piece across the bend cannot fit the samples
    with pytest.raises(LiftingError, match="linear"):
        extend_convex(samples, triangulate(Cone([(1, 0), (0, 1)])), ["D2", "D4"],
                      restriction(X, "D1").surface.registry)


# -- Diophantine certificates -------------------------------------------------------------------

T = QuadNumber(0, F(1, 2), 2)
XPT = (T, 1 - T)


@pytest.fixture(scope="module")
def cert():
    return make_lemma3_certificate(CTX, SYS, XPT, F(1, 40), F(1, 10))


def test_valid_certificate_passes(cert):
    rep = verify_dio_certificate(cert, CTX, SYS)
    assert rep.passed and rep.codes == []
    assert len(rep.affine_points) == 5
    assert sum(cert.weights) == 1 and all(0 < m < 1 for m in cert.weights)


@pytest.mark.parametrize("change, code", [
    (lambda c: replace(c, C=F(10)), "(e)"),
    (lambda c: replace(c, C=F(0)), "(b)"),
    (lambda c: replace(c, delta=F(1, 2)), "(c)"),
    (lambda c: replace(c, weights=c.weights[::-1]), "(1)"),
    (lambda c: replace(c, M=3), "(2)"),
])
def test_single_defects_are_named(cert, change, code):
    rep = verify_dio_certificate(change(cert), CTX, SYS)
    assert not rep.passed and rep.codes == [code]


def test_forced_equality_violation_names_condition_three(cert):
    surf = restriction(X, "D1").surface
    th = list(cert.thetas)
    th[0] = th[0] + surf.prime("D4") / cert.denominators[0]
    rep = verify_dio_certificate(replace(cert, thetas=th), CTX, SYS)
    assert "(3)" in rep.codes
    assert any(f.prime == "D4" for f in rep.failed_items if f.code == "(3)")
