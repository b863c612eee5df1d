from fractions import Fraction as F
from itertools import combinations, product

import pytest

from adjoint_kernel.cones import (
    Cone, ConeError, contains, hilbert_basis, intersect_halfspace, rational_affine_hull,
    triangulate, verify_cover,
)
from adjoint_kernel.exact import QuadNumber, QuadVec, dot, nullspace, primitive, rank

from oracles import brute_hilbert, random_pointed_cone, seeded


def brute_facets(c):
    """Facets from every hyperplane through rank-(k-1) subsets of generators."""
    d = c.ambient_dim
    eqs = [primitive(v) for v in nullspace(c.rays, d)]
    k = d - len(eqs)
    out = set()
    for sub in combinations(c.rays, k - 1):
        if k > 1 and rank(sub) != k - 1:
            continue
        ns = nullspace(list(sub) + eqs, d)
        if len(ns) != 1:
            continue
        f = primitive(ns[0])
        vals = [dot(f, g) for g in c.rays]
        if all(v >= 0 for v in vals):
            out.add(f)
        elif all(v <= 0 for v in vals):
            out.add(tuple(-t for t in f))
    return out


def test_membership_examples():
    c = Cone([(1, 0), (1, 2)])
    assert contains(c, (2, 1)) and c.contains((2, 1))
    assert tuple(F(3, 2) * a + F(1, 2) * b for a, b in zip((1, 0), (1, 2))) == (2, 1)
    assert not contains(c, (1, -1)) and not c.contains((1, -1))
    for cone in (c, Cone([(0, 1), (3, 1)]), Cone([(1, 0, 0)], 3)):
        assert contains(cone, (0,) * cone.ambient_dim)


def test_membership_lp_agrees_with_facets():
    rng = seeded(7)
    for _ in range(40):
        c = random_pointed_cone(rng, rng.choice([2, 3]), -5, 5)
        for _ in range(25):
            v = tuple(F(rng.randint(-20, 20), rng.randint(1, 4)) for _ in range(c.ambient_dim))
            assert c.contains(v) == c.contains_lp(v)


def test_facets_match_subset_enumeration():
    rng = seeded(11)
    for _ in range(150):
        d = rng.choice([2, 3, 4])
        gens = [tuple(rng.randint(-5, 5) for _ in range(d)) for _ in range(rng.randint(1, 6))]
        gens = [g for g in gens if any(g)] or [(1,) + (0,) * (d - 1)]
        c = Cone(gens, d)
        assert set(c.facets) == brute_facets(c)


def test_intersect_halfspace_examples():
    quad = Cone([(1, 0), (0, 1)])
    assert intersect_halfspace(quad, (1, -1)) == Cone([(1, 0), (1, 1)])
    assert intersect_halfspace(quad, (1, 1)) == quad
    cut = intersect_halfspace(quad, (-1, 0))
    assert set(cut.rays) == {(0, 1)}


def test_intersect_halfspace_is_inside_and_nonnegative():
    rng = seeded(3)
    for _ in range(40):
        c = random_pointed_cone(rng, 3, -6, 6)
        f = tuple(rng.randint(-4, 4) for _ in range(3))
        out = intersect_halfspace(c, f)
        for g in out.rays:
            assert c.contains(g)
            assert dot(f, g) >= 0
        # every point of c with f >= 0 is in the cut (sampled on lattice points)
        for v in product(range(-4, 5), repeat=3):
            if c.contains(v) and dot(f, v) >= 0:
                assert out.contains(v)


@pytest.mark.parametrize("gens, expected", [
    ([(1, 0), (0, 1)], [(0, 1), (1, 0)]),
    ([(1, 0), (1, 2)], [(1, 0), (1, 1), (1, 2)]),
    ([(0, 1), (3, 1)], [(0, 1), (1, 1), (2, 1), (3, 1)]),
])
def test_hilbert_basis_examples(gens, expected):
    c = Cone(gens)
    assert hilbert_basis(c) == sorted(expected)
    assert brute_hilbert(c) == sorted(expected)


def test_hilbert_basis_generates_and_is_minimal():
    rng = seeded(5)
    for _ in range(12):
        c = random_pointed_cone(rng, 2, -4, 4)
        hb = hilbert_basis(c)
        phi = tuple(sum(f[i] for f in c.facets) for i in range(2))
        B = 12
        box = [v for v in product(range(-40, 41), repeat=2) if c.contains(v) and dot(phi, v) <= B]
        reach = {(0, 0)}
        frontier = [(0, 0)]
        while frontier:
            nxt = []
            for v in frontier:
                for h in hb:
                    w = (v[0] + h[0], v[1] + h[1])
                    if dot(phi, w) <= B and w not in reach:
                        reach.add(w)
                        nxt.append(w)
            frontier = nxt
        assert set(box) <= reach
        assert all(c.contains(v) for v in reach)
        # minimality: each element is not a sum of two nonzero cone lattice points
        for h in hb:
            assert not any(c.contains(tuple(a - b for a, b in zip(h, v)))
                           for v in box if any(v) and v != h)


def test_hilbert_basis_rejects_non_pointed():
    with pytest.raises(ConeError):
        hilbert_basis(Cone([(1, 0), (-1, 0), (0, 1)]))


def test_hilbert_basis_lower_dimensional_cone():
    c = Cone([(1, 0, 1), (1, 2, 1)], 3)
    hb = hilbert_basis(c)
    assert hb == [(1, 0, 1), (1, 1, 1), (1, 2, 1)]


def test_triangulate_examples():
    simp = Cone([(1, 0), (1, 2)])
    dec = triangulate(simp)
    assert len(dec.pieces) == 1 and dec.pieces[0] == simp
    split = triangulate(Cone([(1, 0), (0, 1)]), required_rays=[(1, 1)])
    assert sorted(map(lambda p: sorted(p.rays), split.pieces)) == [[(0, 1), (1, 1)], [(1, 0), (1, 1)]]
    square = Cone([(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)])
    dec = triangulate(square)
    assert len(dec.pieces) == 2 and dec.is_simplicial() and dec.verify()


def test_triangulation_indicator_sums():
    """Interior sample points lie in exactly one piece; every point in at least one."""
    rng = seeded(13)
    square = Cone([(0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)])
    dec = triangulate(square)
    hits = 0
    for _ in range(10_000):
        v = (F(rng.randint(0, 97), 97), F(rng.randint(0, 89), 89), F(1))
        k = len(dec.locate(v))
        on_diagonal = v[0] + v[1] == 1 or v[0] == v[1]
        assert k >= 1
        if not on_diagonal:
            assert k == 1
            hits += 1
    assert hits > 9000


def test_verify_cover_detects_gap():
    quad = Cone([(1, 0), (0, 1)])
    ok, _ = verify_cover(quad, [Cone([(1, 0), (1, 1)]), Cone([(1, 1), (0, 1)])])
    assert ok
    ok, witness = verify_cover(quad, [Cone([(1, 0), (1, 1)]), Cone([(1, 2), (0, 1)])])
    assert not ok
    assert quad.contains(witness)


def test_rational_affine_hull_examples():
    U = rational_affine_hull((F(3, 7), F(2, 7)))
    assert U.dim == 0 and U.base_point == (F(3, 7), F(2, 7))
    h = QuadNumber(0, F(1, 2), 2)
    U = rational_affine_hull(QuadVec.from_entries([h, 1 - h]))
    assert U.dim == 1
    assert U.contains((F(1, 3), F(2, 3))) and not U.contains((F(1, 3), F(1, 3)))
    U = rational_affine_hull(QuadVec.from_entries([h, h * F(2, 3)]))
    assert U.dim == 1
    assert U.contains((F(3), F(2))) and not U.contains((F(3), F(3)))


def test_rational_affine_hull_is_stable_under_rational_perturbation():
    h = QuadNumber(0, F(1, 2), 2)
    x = QuadVec.from_entries([h, 1 - h, F(1, 5)])
    U = rational_affine_hull(x)
    for t in (F(1, 3), F(-2), F(7, 11)):
        q = U.point([t])
        assert U.contains(q)
        assert rational_affine_hull(QuadVec.from_entries([a + b for a, b in zip(q, (h, -h, 0))])).relations == U.relations
