from fractions import Fraction as F

import pytest

from adjoint_kernel.cones import Cone, triangulate
from adjoint_kernel.divisors import (
    CharacteristicSystem, DivisorError, Registry, check_shape, classify, delta_margin, floor_divisor,
    wedge,
)

from oracles import seeded

REG = Registry(["P", "Q", "R"], "test")
P, Q, R = (REG.prime(n) for n in REG.names)


def test_wedge_examples():
    assert wedge(2 * P + 3 * Q, P + 5 * Q) == P + 3 * Q
    d = F(1, 3) * P - Q
    assert wedge(d, d) == d
    assert wedge(P, Q) == REG.zero()


def test_wedge_laws():
    rng = seeded(1)
    rand = lambda: REG.divisor({n: F(rng.randint(-9, 9), rng.randint(1, 4)) for n in REG.names})
    for _ in range(200):
        a, b, c = rand(), rand(), rand()
        assert wedge(a, b) == wedge(b, a)
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
        assert wedge(a, a) == a
        assert wedge(a, b) <= a and wedge(a, b) <= b


def test_floor_examples():
    assert floor_divisor(F(3, 2) * P - F(1, 2) * Q) == P - Q
    assert floor_divisor(2 * P - 3 * R) == 2 * P - 3 * R
    assert floor_divisor(F(9, 10) * P) == REG.zero()


def test_no_explicit_zero_and_registry_guard():
    d = REG.divisor({"P": 0, "Q": 1})
    assert d.support() == ["Q"]
    other = Registry(["P"], "other")
    with pytest.raises(DivisorError):
        P + other.prime("P")
    with pytest.raises(DivisorError):
        REG.divisor({"Z": 1})


def _min_max_system(kind):
    reg = Registry(["E"])
    cone = Cone([(1, 0), (0, 1)])
    dec = triangulate(cone, required_rays=[(1, 1)])
    top = 0 if kind == "min" else 1
    vals = {(1, 0): (top,), (0, 1): (top,), (1, 1): (1,)}
    return CharacteristicSystem.from_ray_values(cone, dec, ["E"], vals, registry=reg)


def test_eval_examples():
    sys = _min_max_system("min")
    assert sys.eval((3, 5))["E"] == 3
    assert sys.eval((F(7, 2), 2))["E"] == 2
    # a point on the shared face: both pieces agree
    vals = {sys.maps[k][0][0] * 2 + sys.maps[k][0][1] * 2 for k in range(2)}
    assert vals == {2}
    with pytest.raises(DivisorError):
        sys.eval((-1, 1))


def test_eval_homogeneous_within_piece():
    sys = _min_max_system("min")
    rng = seeded(2)
    for _ in range(100):
        w = (F(rng.randint(0, 30), 7), F(rng.randint(0, 30), 5))
        t = F(rng.randint(0, 20), 3)
        assert sys.eval(tuple(t * x for x in w)) == sys.eval(w) * t


def test_inconsistent_pieces_rejected():
    cone = Cone([(1, 0), (0, 1)])
    dec = triangulate(cone, required_rays=[(1, 1)])
    with pytest.raises(DivisorError):
        CharacteristicSystem(cone, dec, ["E"], [[(1, 0)], [(2, 0)]], registry=Registry(["E"]))


def test_check_shape_examples():
    reg = Registry(["E"])
    lin = CharacteristicSystem(Cone([(1, 0), (0, 1)]), None, ["E"], [[(1, 2)]], registry=reg)
    rep = check_shape(lin)
    assert rep.concave and rep.superadditive_mob
    rep = check_shape(_min_max_system("min"))
    assert rep.concave and rep.superadditive_mob
    rep = check_shape(_min_max_system("max"))
    assert not rep.concave and rep.concavity_witness is not None
    assert not rep.superadditive_mob


def test_concave_systems_satisfy_midpoint_inequality():
    sys = _min_max_system("min")
    assert check_shape(sys).concave
    rng = seeded(3)
    for _ in range(1000):
        w1 = (F(rng.randint(0, 40), 9), F(rng.randint(0, 40), 7))
        w2 = (F(rng.randint(0, 40), 9), F(rng.randint(0, 40), 7))
        mid = tuple((a + b) / 2 for a, b in zip(w1, w2))
        assert sys.eval(mid) >= (sys.eval(w1) + sys.eval(w2)) / 2


def _adjoint(bvals, rvals=None):
    from adjoint_kernel.toric import projective_space
    x = projective_space(2)
    cone = Cone([(1, 0), (0, 1)])
    rvals = rvals or {(1, 0): 1, (0, 1): 1}
    A = x.divisor({n: 2 for n in x.names})
    bv = {k: x.divisor(v) for k, v in bvals.items()}
    return CharacteristicSystem.adjoint(cone, None, x.registry, x.K, A, rvals, bv, boundary=x.names)


def test_classify_examples():
    klt = classify(_adjoint({(1, 0): {"D1": F(9, 10)}, (0, 1): {"D2": F(1, 2), "D3": F(1, 3)}}))
    assert klt.is_adjoint and klt.is_klt and klt.is_dlt and klt.strictly_dlt_with is None
    strict = classify(_adjoint({(1, 0): {"D1": 1, "D2": F(1, 2)}, (0, 1): {"D1": 1, "D3": 1}}))
    assert strict.is_dlt and not strict.is_klt and strict.strictly_dlt_with == "D1"
    bad = classify(_adjoint({(1, 0): {"D1": F(6, 5)}, (0, 1): {}}))
    assert not bad.is_dlt and not bad.is_klt


def test_classify_invariant_under_refinement():
    sys = _adjoint({(1, 0): {"D1": 1, "D2": F(1, 2)}, (0, 1): {"D1": 1, "D3": F(1, 4)}})
    fine = sys.refine(triangulate(sys.cone, required_rays=[(1, 1), (1, 2)]))
    a, b = classify(sys), classify(fine)
    assert (a.is_klt, a.is_dlt, a.strictly_dlt_with, a.is_adjoint) == (b.is_klt, b.is_dlt, b.strictly_dlt_with,
                                                                       b.is_adjoint)
    for w in [(1, 1), (2, 5), (F(1, 3), 4)]:
        assert sys.eval(w) == fine.eval(w)


def test_delta_margin_examples():
    sys = _adjoint({(1, 0): {"D1": F(1, 2), "D2": F(1, 3)}, (0, 1): {"D1": F(1, 2), "D2": F(2, 3)}})
    assert delta_margin(sys) == F(1, 3)
    assert delta_margin(_adjoint({(1, 0): {}, (0, 1): {}})) == 1
    with pytest.raises(DivisorError):
        delta_margin(_adjoint({(1, 0): {"D1": 1}, (0, 1): {}}))


def test_adjoint_identity_holds_on_rays():
    sys = _adjoint({(1, 0): {"D1": F(1, 2)}, (0, 1): {"D2": F(1, 4)}}, {(1, 0): 2, (0, 1): 3})
    for w in [(1, 0), (0, 1), (1, 1), (F(2, 3), 5)]:
        r = sys.eval_r(w)
        assert sys.eval(w) == (sys.K + sys.A + sys.eval_B(w)) * r
