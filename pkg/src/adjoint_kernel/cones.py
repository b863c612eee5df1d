"""Finite rational cones: facets, membership, triangulation and Hilbert bases.

A :class:`Cone` is stored by its generators. Facets are computed exactly by
enumerating hyperplanes through (dim-1)-subsets of generators (the brute-force
form of double description) and cached behind a lock. All arithmetic is over
``Fraction``; facet normals are primitive integer vectors.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import gcd
from functools import reduce

import numpy as np

from .exact import (
    QuadVec, as_exact, dot, integer_kernel, nullspace, primitive, rank, row_reduce, solve,
    denominator_lcm,
)
from .lp import linprog, vertices

__all__ = [
    "Cone", "ConeDecomposition", "AffineSubspaceQ", "ConeError",
    "contains", "intersect_halfspace", "hilbert_basis", "triangulate",
    "rational_affine_hull", "verify_cover", "lattice_points", "polytope_lattice_points",
    "HILBERT_DIM_LIMIT", "extreme_rays", "cone_from_halfspaces",
]

HILBERT_DIM_LIMIT = 6


class ConeError(ValueError):
    pass


def _vec(v):
    return tuple(as_exact(x) for x in v)


class Cone:
    """The cone ``{sum t_i g_i : t_i >= 0}`` spanned by rational generators."""

    def __init__(self, generators, ambient_dim: int | None = None):
        gens = [_vec(g) for g in generators]
        if ambient_dim is None:
            if not gens:
                raise ConeError("ambient_dim required for a cone without generators")
            ambient_dim = len(gens[0])
        if any(len(g) != ambient_dim for g in gens):
            raise ConeError("generator dimension mismatch")
        self.ambient_dim = ambient_dim
        self.generators = tuple(gens)
        rays = []
        for g in gens:
            if any(g):
                p = primitive(g)
                if p not in rays:
                    rays.append(p)
        self.rays = tuple(rays)
        self._lock = threading.Lock()
        self._facets = None
        self._equations = None

    # -- H-description --------------------------------------------------------
    @property
    def span_dim(self) -> int:
        return rank(self.rays) if self.rays else 0

    @property
    def equations(self):
        """Primitive integer rows cutting out the linear span."""
        self._compute()
        return self._equations

    @property
    def facets(self):
        """Primitive integer functionals ``f`` with ``f >= 0`` on the cone,
        normalised to lie in the span (orthogonal to :attr:`equations`)."""
        self._compute()
        return self._facets

    def _compute(self):
        if self._facets is not None:
            return
        with self._lock:
            if self._facets is not None:
                return
            d = self.ambient_dim
            if not self.rays:
                eqs = [tuple(int(i == j) for j in range(d)) for i in range(d)]
                self._equations, self._facets = eqs, []
                return
            eqs = [primitive(v) for v in nullspace(self.rays, d)]
            k = d - len(eqs)
            if k == d:
                facets = extreme_rays(self.rays, d)
            else:
                # work in coordinates of the linear span
                B = [list(r) for r in row_reduce([list(g) for g in self.rays], d)[0]]
                BT = [[B[i][c] for i in range(k)] for c in range(d)]
                coords = [solve(BT, list(g)) for g in self.rays]
                fk = extreme_rays(coords, k)
                gram = [[dot(B[i], B[j]) for j in range(k)] for i in range(k)]
                facets = []
                for f in fk:
                    a = solve(gram, list(f))
                    facets.append(primitive([sum(a[j] * B[j][c] for j in range(k)) for c in range(d)]))
            self._equations, self._facets = eqs, facets

    # -- predicates -----------------------------------------------------------
    def contains(self, v) -> bool:
        if len(v) != self.ambient_dim:
            raise ConeError("dimension mismatch")
        return all(dot(e, v) == 0 for e in self.equations) and all(dot(f, v) >= 0 for f in self.facets)

    def contains_lp(self, v) -> bool:
        """Membership decided by exact LP feasibility of a nonnegative combination."""
        if len(v) != self.ambient_dim:
            raise ConeError("dimension mismatch")
        v = _vec(v)
        if not any(v):
            return True
        if not self.rays:
            return False
        A_eq = [[g[i] for g in self.rays] for i in range(self.ambient_dim)]
        return linprog([0] * len(self.rays), A_eq=A_eq, b_eq=list(v), nonneg=True).ok

    def in_relative_interior(self, v) -> bool:
        return all(dot(e, v) == 0 for e in self.equations) and all(dot(f, v) > 0 for f in self.facets)

    def is_pointed(self) -> bool:
        if not self.rays:
            return True
        return rank(list(self.facets) + list(self.equations)) == self.ambient_dim

    def is_simplicial(self) -> bool:
        return len(self.extremal_rays()) == self.span_dim

    def is_full_dimensional(self) -> bool:
        return self.span_dim == self.ambient_dim

    def extremal_rays(self):
        if not self.rays:
            return ()
        k = self.span_dim
        if k == 1:
            return self.rays
        out = []
        for g in self.rays:
            tight = [f for f in self.facets if dot(f, g) == 0]
            if len(tight) >= k - 1 and rank(tight + list(self.equations)) == self.ambient_dim - 1:
                out.append(g)
        return tuple(out)

    def reduced(self) -> "Cone":
        """Same cone generated by its extremal rays (pointed cones only)."""
        return Cone(self.extremal_rays(), self.ambient_dim)

    def positive_functional(self):
        """An integer functional strictly positive on ``cone \\ {0}`` (pointed)."""
        if not self.is_pointed():
            raise ConeError("cone is not pointed")
        s = [0] * self.ambient_dim
        for f in self.facets:
            s = [a + b for a, b in zip(s, f)]
        if not any(s):
            s = list(self.rays[0])
        return tuple(s)

    def faces_of(self, f):
        return [g for g in self.rays if dot(f, g) == 0]

    def __eq__(self, other):
        if not isinstance(other, Cone) or other.ambient_dim != self.ambient_dim:
            return NotImplemented
        return all(other.contains(g) for g in self.rays) and all(self.contains(g) for g in other.rays)

    def __hash__(self):
        return hash((self.ambient_dim, frozenset(self.extremal_rays())))

    def __repr__(self):
        return f"Cone({[list(map(str, g)) for g in self.rays]})"


def extreme_rays(rows, dim: int):
    """Extreme rays of ``{y : row . y >= 0 for all rows}`` by double description.

    Rows are rational; rays come back as primitive integer tuples. A cone with
    a lineality space raises; an empty result means the cone is ``{0}``.
    """
    rows = [primitive(r) for r in rows if any(r)]
    if rank(rows) < dim:
        raise ConeError("cone {y : Ay >= 0} has a lineality space")
    order, basis = [], []
    for i, r in enumerate(rows):
        if rank(basis + [r]) > len(basis):
            basis.append(r)
            order.append(i)
        if len(basis) == dim:
            break
    rest = [i for i in range(len(rows)) if i not in order]
    order += rest
    A0 = [list(rows[i]) for i in order[:dim]]
    rays, tight = [], []
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        y = primitive(solve(A0, e))
        rays.append(y)
        tight.append(sum(1 << j for j in range(dim) if j != i))
    for step, ri in enumerate(order[dim:], start=dim):
        a = rows[ri]
        vals = [dot(a, y) for y in rays]
        pos = [k for k, v in enumerate(vals) if v > 0]
        neg = [k for k, v in enumerate(vals) if v < 0]
        zero = [k for k, v in enumerate(vals) if v == 0]
        bit = 1 << step
        new_rays = [rays[k] for k in pos] + [rays[k] for k in zero]
        new_tight = [tight[k] for k in pos] + [tight[k] | bit for k in zero]
        for p in pos:
            for n in neg:
                z = tight[p] & tight[n]
                if bin(z).count("1") < dim - 2:
                    continue
                if any(k != p and k != n and (tight[k] & z) == z for k in range(len(rays))):
                    continue
                vp, vn = vals[p], vals[n]
                y = primitive([vp * x - vn * w for x, w in zip(rays[n], rays[p])])
                new_rays.append(y)
                new_tight.append(z | bit)
        rays, tight = new_rays, new_tight
    out = []
    for y in rays:
        if y not in out:
            out.append(y)
    return out


def cone_from_halfspaces(rows, dim: int) -> "Cone":
    """The pointed cone ``{y : row . y >= 0}`` with its extreme rays as generators."""
    return Cone(extreme_rays(rows, dim), dim)


def contains(c: Cone, v) -> bool:
    """``v`` is a nonnegative rational combination of the generators of ``c``."""
    return c.contains_lp(v)


def intersect_halfspace(c: Cone, f) -> Cone:
    """The cone ``{w in c : f(w) >= 0}`` with an explicit generator list."""
    f = _vec(f)
    if len(f) != c.ambient_dim:
        raise ConeError("dimension mismatch")
    L = denominator_lcm(f)
    f = tuple(int(x * L) for x in f)
    pos = [g for g in c.rays if dot(f, g) > 0]
    neg = [g for g in c.rays if dot(f, g) < 0]
    zero = [g for g in c.rays if dot(f, g) == 0]
    new = list(pos) + list(zero)
    for gp in pos:
        for gn in neg:
            a, b = dot(f, gp), dot(f, gn)
            new.append(tuple(a * x - b * y for x, y in zip(gn, gp)))
    out = Cone(new, c.ambient_dim)
    if out.rays and out.is_pointed():
        out = out.reduced()
    return out


# -- covers --------------------------------------------------------------------

def _slice_cells(ineqs, eqs, hyperplanes, dim):
    cells = [(list(ineqs), list(eqs))]
    for h in hyperplanes:
        nxt = []
        for ci, ce in cells:
            vs = vertices(ci, ce, dim)
            vals = [dot(h, v) for v in vs]
            if any(x > 0 for x in vals) and any(x < 0 for x in vals):
                nxt.append((ci + [(list(h), 0)], ce))
                nxt.append((ci + [([-x for x in h], 0)], ce))
            else:
                nxt.append((ci, ce))
        cells = nxt
    return cells


def verify_cover(parent: Cone, pieces) -> tuple[bool, object]:
    """Exact check that ``parent`` equals the union of ``pieces``.

    The slice ``{phi = 1}`` of the parent is cut by every facet/equation
    hyperplane of every piece; each resulting cell lies inside or outside each
    piece, so testing one relative-interior point per cell decides the cover.
    Returns ``(ok, witness)`` where ``witness`` is an uncovered point or a
    piece generator lying outside the parent.
    """
    for p in pieces:
        for g in p.rays:
            if not parent.contains(g):
                return False, g
    if not parent.rays:
        return True, None
    d = parent.ambient_dim
    phi = parent.positive_functional()
    ineqs = [(list(f), 0) for f in parent.facets]
    eqs = [(list(e), 0) for e in parent.equations] + [(list(phi), 1)]
    hyps = []
    for p in pieces:
        for h in list(p.facets) + list(p.equations):
            if h not in hyps and tuple(-x for x in h) not in hyps:
                hyps.append(h)
    for ci, ce in _slice_cells(ineqs, eqs, hyps, d):
        vs = vertices(ci, ce, d)
        if not vs:
            continue
        centre = tuple(sum(v[i] for v in vs) / len(vs) for i in range(d))
        if not any(p.contains(centre) for p in pieces):
            return False, centre
    return True, None


@dataclass
class ConeDecomposition:
    parent: Cone
    pieces: list

    def verify(self) -> bool:
        return verify_cover(self.parent, self.pieces)[0]

    def is_simplicial(self) -> bool:
        return all(p.is_simplicial() for p in self.pieces)

    def locate(self, v):
        """Indices of pieces containing ``v``."""
        return [i for i, p in enumerate(self.pieces) if p.contains(v)]


# -- triangulation -------------------------------------------------------------

def _pull(points, d):
    C = Cone(points, d)
    k = C.span_dim
    if k <= 1:
        return [[points[0]]]
    p = points[0]
    out = []
    for f in C.facets:
        if dot(f, p) == 0:
            continue
        face = [q for q in points if dot(f, q) == 0]
        for simplex in _pull(face, d):
            out.append([p] + simplex)
    return out


def _stellar(simplices, q, d):
    out = []
    for s in simplices:
        if q in s:
            out.append(s)
            continue
        A = [[g[i] for g in s] for i in range(d)]
        t = solve(A, list(q))
        if t is None or any(x < 0 for x in t):
            out.append(s)
            continue
        for i, ti in enumerate(t):
            if ti > 0:
                out.append(s[:i] + [q] + s[i + 1:])
    return out


def triangulate(c, required_rays=()) -> ConeDecomposition:
    """Simplicial subdivision.

    ``c`` is a :class:`Cone` (pulling triangulation of its extremal rays, then a
    stellar subdivision at each required ray) or a :class:`ConeDecomposition`
    (every piece is pulled with one global point order, so the pieces'
    triangulations agree on shared faces).
    """
    if isinstance(c, ConeDecomposition):
        pts = sorted({r for p in c.pieces for r in p.extremal_rays()} | {primitive(r) for r in required_rays if any(r)})
        pieces = []
        for p in c.pieces:
            if not p.is_pointed():
                raise ConeError("cannot triangulate a non-pointed piece")
            local = [q for q in pts if p.contains(q)]
            if not local:
                continue
            ext = set(p.extremal_rays())
            if not ext.issubset(local):
                raise ConeError("inconsistent breakpoint data")
            pieces += [Cone(s, p.ambient_dim) for s in _pull(local, p.ambient_dim)]
        return ConeDecomposition(c.parent, pieces)
    if not c.is_pointed():
        raise ConeError("cannot triangulate a non-pointed cone")
    d = c.ambient_dim
    if not c.rays:
        return ConeDecomposition(c, [c])
    req = []
    for r in required_rays:
        r = _vec(r)
        if not c.contains(r):
            raise ConeError(f"required ray {r} lies outside the cone")
        if any(r):
            req.append(primitive(r))
    ext = list(c.extremal_rays())
    simplices = _pull(ext, d)
    for q in req:
        if q not in ext:
            simplices = _stellar(simplices, q, d)
    return ConeDecomposition(c, [Cone(s, d) for s in simplices])


# -- lattice points --------------------------------------------------------------

def polytope_lattice_points(ineqs, eqs=(), dim=None):
    """Integer points of a bounded polyhedron ``{a.x >= b, a.x == b}``."""
    ineqs = [(list(a), b) for a, b in ineqs]
    eqs = [(list(a), b) for a, b in eqs]
    if dim is None:
        dim = len((ineqs + eqs)[0][0])
    vs = vertices(ineqs, eqs, dim)
    if not vs:
        return []
    lo = [min(v[i] for v in vs) for i in range(dim)]
    hi = [max(v[i] for v in vs) for i in range(dim)]
    import math
    ranges = [range(math.ceil(l), math.floor(h) + 1) for l, h in zip(lo, hi)]
    if any(len(r) == 0 for r in ranges):
        return []
    grids = np.meshgrid(*[np.arange(r.start, r.stop, dtype=np.int64) for r in ranges], indexing="ij")
    P = np.stack([g.ravel() for g in grids], axis=1)
    mask = np.ones(len(P), dtype=bool)
    for a, b in ineqs:
        L = denominator_lcm(list(a) + [b])
        ai = np.array([int(x * L) for x in a], dtype=np.int64)
        mask &= P @ ai >= int(Fraction(b) * L) if Fraction(b * L).denominator == 1 else P @ ai >= float(b * L)
    for a, b in eqs:
        L = denominator_lcm(list(a) + [b])
        ai = np.array([int(x * L) for x in a], dtype=np.int64)
        mask &= P @ ai == int(b * L)
    return [tuple(int(x) for x in row) for row in P[mask]]


def lattice_points(c: Cone, functional, bound):
    """Integer points ``v`` of ``c`` with ``functional(v) <= bound``.

    ``functional`` must be positive on ``c \\ {0}``.
    """
    d = c.ambient_dim
    if any(dot(functional, g) <= 0 for g in c.rays):
        raise ConeError("grading functional is not positive on the cone")
    ineqs = [(list(f), 0) for f in c.facets] + [([-x for x in functional], -bound)]
    eqs = [(list(e), 0) for e in c.equations]
    if not c.rays:
        return [tuple([0] * d)]
    return polytope_lattice_points(ineqs, eqs, d)


# -- Hilbert basis -----------------------------------------------------------------

def _lattice_coordinates(c: Cone):
    basis = integer_kernel(c.equations, c.ambient_dim) if c.equations else [
        tuple(int(i == j) for j in range(c.ambient_dim)) for i in range(c.ambient_dim)]
    B = [[b[i] for b in basis] for i in range(c.ambient_dim)]  # d x k

    def to_local(v):
        t = solve(B, list(v))
        if t is None or any(Fraction(x).denominator != 1 for x in t):
            raise ConeError("vector outside the saturated lattice")
        return tuple(int(x) for x in t)

    def to_global(t):
        return tuple(sum(b[i] * x for b, x in zip(basis, t)) for i in range(c.ambient_dim))

    return basis, to_local, to_global


def _parallelepiped_points(G):
    """Integer points of the half-open parallelepiped of a full-rank square
    integer matrix ``G`` (columns are generators), via the group Z^k / G Z^k."""
    k = len(G)
    from .exact import inverse
    Ginv = inverse([[Fraction(x) for x in row] for row in G])

    def frac_vec(v):
        return tuple(x - (x.numerator // x.denominator) for x in v)

    steps = []
    for j in range(k):
        col = [Ginv[i][j] for i in range(k)]
        steps.append(frac_vec(col))
    seen = {tuple(Fraction(0) for _ in range(k))}
    frontier = list(seen)
    while frontier:
        nxt = []
        for t in frontier:
            for s in steps:
                u = frac_vec(tuple(a + b for a, b in zip(t, s)))
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        frontier = nxt
    pts = []
    for t in seen:
        pts.append(tuple(int(sum(G[i][j] * t[j] for j in range(k))) for i in range(k)))
    return pts


def hilbert_basis(c: Cone, dim_limit: int = HILBERT_DIM_LIMIT):
    """Minimal generating set of the monoid ``c ∩ Z^d`` (pointed ``c`` only)."""
    if c.ambient_dim > dim_limit:
        raise ConeError(f"ambient dimension {c.ambient_dim} exceeds limit {dim_limit}")
    if not c.is_pointed():
        raise ConeError("Hilbert basis requested for a non-pointed cone")
    if not c.rays:
        return []
    basis, to_local, to_global = _lattice_coordinates(c)
    k = len(basis)
    local_rays = [to_local(r) for r in c.extremal_rays()]
    local = Cone(local_rays, k)
    cands = set()
    for piece in triangulate(local).pieces:
        gens = [primitive(g) for g in piece.rays]
        G = [[g[i] for g in gens] for i in range(k)]
        cands.update(gens)
        cands.update(p for p in _parallelepiped_points(G) if any(p))
    cands = sorted(cands)
    F = np.array(local.facets, dtype=object) if local.facets else np.zeros((0, k), dtype=object)
    X = np.array(cands, dtype=object)
    V = (X @ F.T).astype(np.int64) if len(F) else np.zeros((len(X), 0), dtype=np.int64)
    keep = []
    for i in range(len(X)):
        le = np.all(V <= V[i], axis=1)
        le[i] = False
        if not le.any():
            keep.append(cands[i])
    return sorted(to_global(t) for t in keep)


# -- rational affine hulls -----------------------------------------------------------

@dataclass
class AffineSubspaceQ:
    base_point: tuple
    direction_basis: list
    relations: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.direction_basis)

    @property
    def ambient_dim(self) -> int:
        return len(self.base_point)

    def contains(self, point) -> bool:
        if isinstance(point, QuadVec):
            a, b = point.a, point.b
            diff_a = [x - y for x, y in zip(a, self.base_point)]
            return all(dot(r, diff_a) == 0 and dot(r, b) == 0 for r in self.relations)
        diff = [as_exact(x) - y for x, y in zip(point, self.base_point)]
        return all(dot(r, diff) == 0 for r in self.relations)

    def point(self, params):
        out = list(self.base_point)
        for t, v in zip(params, self.direction_basis):
            out = [o + t * x for o, x in zip(out, v)]
        return tuple(out)


def rational_affine_hull(x) -> AffineSubspaceQ:
    """Smallest rationally defined affine subspace containing ``x``.

    For ``x = a + b*sqrt(d)`` this is the point ``a`` when ``b == 0`` and the
    line ``a + R b`` otherwise: sqrt(d) is irrational, so a rational affine
    relation ``c.x = e`` forces ``c.b = 0`` and ``c.a = e``. ``relations`` is an
    integer basis of the relation lattice ``{c : c.b = 0}``.
    """
    if not isinstance(x, QuadVec):
        x = QuadVec([as_exact(v) for v in x])
    n = len(x)
    if x.is_rational:
        rel = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        return AffineSubspaceQ(tuple(x.a), [], rel)
    direction = primitive(x.b)
    rel = integer_kernel([list(x.b)], n)
    return AffineSubspaceQ(tuple(x.a), [tuple(Fraction(v) for v in direction)], rel)
