"""Monoid-graded section rings in the monomial model.

A homogeneous element is a pair ``(lam, m)``: a degree ``lam`` in the grading
monoid and a lattice point ``m`` of the section polytope of ``D(lam)``.
Multiplication adds both coordinates, so generation questions become questions
about finitely many lattice points and are checked by degreewise closure.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction

from .cones import Cone, ConeError, extreme_rays, hilbert_basis, intersect_halfspace, lattice_points
from .divisors import CharacteristicSystem, Divisor, DivisorError
from .exact import det, dot, solve
from .toric import ToricVariety, sections

__all__ = [
    "GradedRing", "MonomialAlgebra", "GeneratorSet", "GenerationReport", "GradedRingError",
    "veronese", "inflate", "injectivize", "multiply", "verify_generation", "closure",
    "greedy_generators", "support_cone", "ring_generators", "InjectivizedSystem",
]


class GradedRingError(ValueError):
    pass


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


@dataclass
class GeneratorSet:
    elements: list  # (lam, m) pairs of integer tuples

    def __post_init__(self):
        self.elements = sorted({(tuple(int(x) for x in l), tuple(int(x) for x in m)) for l, m in self.elements})

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def degrees(self):
        return sorted({l for l, _ in self.elements})

    def union(self, other):
        return GeneratorSet(self.elements + list(other.elements))


@dataclass
class GenerationReport:
    generated_up_to: int
    bound: int
    first_failure: tuple | None = None  # (lam, missing monomial)
    unsound: tuple | None = None        # generator or product outside the ring

    @property
    def ok(self):
        return self.first_failure is None and self.unsound is None and self.generated_up_to >= self.bound


class _Ring:
    """Common interface: ``tau``, ``degrees(bound)``, ``piece(lam)``, ``ambient_piece(lam)``."""

    tau: tuple

    def degree(self, lam):
        return dot(self.tau, lam)

    def ambient_piece(self, lam):
        return self.piece(lam)


class GradedRing(_Ring):
    """``R(X; D) = sum_{lam in Lambda} H^0(X, D(lam))`` for a toric variety.

    ``ambient`` optionally enlarges the set of degrees whose pieces are
    computable (needed for ``R[sigma_1..sigma_r]``, whose generators ``sigma_j``
    may have degrees outside ``Lambda``); it requires a linear system.
    ``sublattice`` restricts the grading to ``Lambda ∩ L`` (Veronese).
    """

    def __init__(self, variety: ToricVariety, system: CharacteristicSystem, ambient: Cone | None = None,
                 sublattice=None, tau=None):
        self.variety = variety
        self.system = system
        self.cone = system.cone
        self.ambient = ambient
        self.sublattice = [tuple(int(x) for x in row) for row in sublattice] if sublattice is not None else None
        if ambient is not None and not system.is_linear():
            raise GradedRingError("an ambient monoid needs a globally linear system")
        if tau is None:
            r = self.cone.ambient_dim
            ones = tuple([1] * r)
            probe = list(self.cone.rays) + (list(ambient.rays) if ambient is not None else [])
            tau = ones if all(dot(ones, g) > 0 for g in probe) else self.cone.positive_functional()
        self.tau = tuple(tau)
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def rank(self):
        return self.cone.ambient_dim

    def in_lattice(self, lam):
        if self.sublattice is None:
            return True
        L = [[row[i] for row in self.sublattice] for i in range(self.rank)]
        x = solve(L, list(lam))
        return x is not None and all(Fraction(t).denominator == 1 for t in x)

    def in_grading(self, lam):
        return self.cone.contains(lam) and self.in_lattice(lam)

    def divisor_at(self, lam) -> Divisor:
        if self.cone.contains(lam):
            return self.system.eval(lam)
        M = self.system.maps[0]
        return Divisor(dict(zip(self.system.names, (dot(row, lam) for row in M))), self.system.registry)

    def _sections(self, lam):
        lam = tuple(lam)
        hit = self._cache.get(lam)
        if hit is None:
            hit = frozenset(sections(self.variety, self.divisor_at(lam)).monomials)
            with self._lock:
                self._cache.setdefault(lam, hit)
        return hit

    def piece(self, lam):
        lam = tuple(lam)
        if not self.in_grading(lam):
            return frozenset()
        return self._sections(lam)

    def ambient_piece(self, lam):
        lam = tuple(lam)
        if self.in_grading(lam):
            return self._sections(lam)
        if self.ambient is not None and self.ambient.contains(lam):
            return self._sections(lam)
        return frozenset()

    def degrees(self, bound):
        pts = lattice_points(self.cone, self.tau, bound)
        return sorted((p for p in pts if self.in_lattice(p)), key=lambda p: (self.degree(p), p))

    def contains(self, element, ambient=True):
        lam, m = element
        piece = self.ambient_piece(lam) if ambient else self.piece(lam)
        return tuple(m) in piece


class MonomialAlgebra(_Ring):
    """Abstract monomial algebra given by generators, optionally restricted to
    degrees in a cone ``grading`` (the subring ``sum_{lam in c} R'_lam``)."""

    def __init__(self, generators, tau, grading: Cone | None = None, parent=None):
        self.generators = GeneratorSet(list(generators))
        self.tau = tuple(tau)
        self.grading = grading
        self.parent = parent
        for l, _ in self.generators:
            if self.degree(l) <= 0:
                raise GradedRingError("grading functional must be positive on generator degrees")
        self._closure = {}
        self._closure_bound = -1
        self._lock = threading.Lock()

    @property
    def rank(self):
        return len(self.generators.elements[0][0])

    def _ensure(self, bound):
        if bound > self._closure_bound:
            with self._lock:
                if bound > self._closure_bound:
                    self._closure = closure(self.generators, self.tau, bound)
                    self._closure_bound = bound

    def ambient_piece(self, lam):
        lam = tuple(lam)
        self._ensure(self.degree(lam))
        return frozenset(self._closure.get(lam, ()))

    def piece(self, lam):
        if self.grading is not None and not self.grading.contains(lam):
            return frozenset()
        return self.ambient_piece(lam)

    def degrees(self, bound):
        self._ensure(bound)
        out = [l for l in self._closure if self.degree(l) <= bound and
               (self.grading is None or self.grading.contains(l))]
        return sorted(out, key=lambda p: (self.degree(p), p))

    def contains(self, element, ambient=True):
        lam, m = element
        return tuple(m) in (self.ambient_piece(lam) if ambient else self.piece(lam))


def closure(gens, tau, bound):
    """All products of ``gens`` (including the empty product) with degree ``<= bound``.

    Returns ``{lam: set of m}``.
    """
    gens = list(gens)
    if not gens:
        return {}
    r = len(gens[0][0])
    n = len(gens[0][1])
    zero = (tuple([0] * r), tuple([0] * n))
    out = {zero[0]: {zero[1]}}
    gdeg = [dot(tau, l) for l, _ in gens]
    if any(d <= 0 for d in gdeg):
        raise GradedRingError("generator of nonpositive degree")
    levels = {0: [zero[0]]}
    for t in range(0, bound + 1):
        for lam in levels.get(t, []):
            ms = out[lam]
            for (gl, gm), gd in zip(gens, gdeg):
                tt = t + gd
                if tt > bound:
                    continue
                key = _add(lam, gl)
                tgt = out.get(key)
                if tgt is None:
                    tgt = out[key] = set()
                    levels.setdefault(tt, []).append(key)
                for m in ms:
                    tgt.add(_add(m, gm))
    return out


def multiply(ring, s1, s2):
    """Product of two homogeneous monomials; both must lie in their pieces."""
    for s in (s1, s2):
        if not ring.contains(s):
            raise GradedRingError(f"{s} is not in its declared graded piece")
    out = (_add(s1[0], s2[0]), _add(s1[1], s2[1]))
    assert ring.contains(out), "product left the ring"
    return out


def verify_generation(ring, g: GeneratorSet, bound: int) -> GenerationReport:
    """Compare the closure of ``g`` with the graded pieces up to ``tau <= bound``."""
    if bound < 1:
        raise GradedRingError("bound must be at least 1")
    if not isinstance(g, GeneratorSet):
        g = GeneratorSet(list(g))
    for e in g:
        if not ring.contains(e):
            return GenerationReport(-1, bound, None, e)
    cl = closure(g, ring.tau, bound)
    # soundness: every product in ring degrees lies in the piece
    for lam, ms in cl.items():
        if not any(lam):
            continue
        amb = ring.ambient_piece(lam)
        bad = next((m for m in ms if m not in amb), None)
        if bad is not None:
            return GenerationReport(-1, bound, None, (lam, bad))
    for lam in ring.degrees(bound):
        if not any(lam):
            continue
        have = cl.get(tuple(lam), set())
        missing = sorted(ring.piece(lam) - have)
        if missing:
            return GenerationReport(ring.degree(lam) - 1, bound, (tuple(lam), missing[0]))
    return GenerationReport(bound, bound)


def greedy_generators(ring, bound, degrees=None) -> GeneratorSet:
    """Minimal generators of degree ``<= bound``: walk degrees in ``tau`` order
    and add every monomial not already a product of earlier generators."""
    degs = [tuple(l) for l in (degrees if degrees is not None else ring.degrees(bound)) if any(l)]
    degs.sort(key=lambda p: (ring.degree(p), p))
    gens = []
    cl = {}
    for lam in degs:
        have = set()
        t = ring.degree(lam)
        for gl, gm in gens:
            rest = tuple(a - b for a, b in zip(lam, gl))
            if not any(rest):
                have.add(gm)
                continue
            for m in cl.get(rest, ()):
                have.add(_add(m, gm))
        piece = ring.piece(lam)
        for m in sorted(piece - have):
            gens.append((lam, m))
        cl[lam] = set(piece)
    return GeneratorSet(gens)


# -- support cones, inflation ---------------------------------------------------------

def support_cone(ring: GradedRing) -> Cone:
    """``{(lam, m) : lam in C, <m, v_rho> + D(lam)_rho >= 0}`` for a linear system.

    Its lattice points are exactly the monomials of the ring (``<m, v>`` is an
    integer, so flooring ``D(lam)`` changes nothing), hence its Hilbert basis
    generates the ring (Gordan).
    """
    sys = ring.system
    if not sys.is_linear():
        raise GradedRingError("support cone needs a linear system")
    x = ring.variety
    r, n = ring.rank, x.dim
    M = sys.maps[0]
    idx = {name: i for i, name in enumerate(sys.names)}
    rows = []
    for f in ring.cone.facets:
        rows.append(tuple(f) + (0,) * n)
    for e in ring.cone.equations:
        rows.append(tuple(e) + (0,) * n)
        rows.append(tuple(-t for t in e) + (0,) * n)
    for name, v in zip(x.names, x.rays):
        coeff = M[idx[name]] if name in idx else (0,) * r
        rows.append(tuple(coeff) + tuple(v))
    return _cone_from_inequalities(rows, r + n)


def _cone_from_inequalities(rows, dim):
    """Generators of ``{y : row . y >= 0}`` (pointed) by double description."""
    try:
        rays = extreme_rays(rows, dim)
    except ConeError as exc:
        raise GradedRingError("support cone is not pointed") from exc
    return Cone(rays, dim)


def _cut(c: Cone, f):
    pos = [g for g in c.rays if dot(f, g) > 0]
    neg = [g for g in c.rays if dot(f, g) < 0]
    zero = [g for g in c.rays if dot(f, g) == 0]
    new = pos + zero
    for gp in pos:
        for gn in neg:
            a, b = dot(f, gp), dot(f, gn)
            new.append(tuple(a * x - b * y for x, y in zip(gn, gp)))
    out = Cone(new, c.ambient_dim)
    if out.rays and out.is_pointed():
        out = out.reduced()
    return out


def _split(v, r):
    return tuple(int(x) for x in v[:r]), tuple(int(x) for x in v[r:])


def ring_generators(ring: GradedRing) -> GeneratorSet:
    """Complete generating set: Hilbert basis of the support cone."""
    if ring.sublattice is not None:
        raise GradedRingError("use greedy_generators for Veronese subrings")
    C = support_cone(ring)
    return GeneratorSet([_split(h, ring.rank) for h in hilbert_basis(C)])


def inflate(rprime, c: Cone, parent: Cone | None = None) -> GeneratorSet:
    """Generators of ``sum_{lam in c} R'_lam``.

    ``rprime`` is a :class:`GradedRing` (linear system) or a
    :class:`MonomialAlgebra`. The weighted support semigroup of ``R'`` is cut by
    the half-spaces defining ``c`` inside the parent cone and its Hilbert basis
    is returned, each element certified as a product of ``R'`` generators.
    """
    if isinstance(rprime, GradedRing):
        parent = parent or rprime.cone
        gens = ring_generators(rprime)
        r = rprime.rank
    else:
        gens = rprime.generators
        r = rprime.rank
        if parent is None:
            parent = Cone([l for l, _ in gens], r)
    for g in c.rays:
        if not parent.contains(g):
            raise GradedRingError(f"cut cone is not inside the parent cone (ray {g})")
    n = len(gens.elements[0][1])
    S = Cone([l + m for l, m in gens], r + n)
    if not S.is_pointed():
        raise GradedRingError("support semigroup is not pointed")
    rows = list(S.facets) + list(S.equations) + [tuple(-t for t in e) for e in S.equations]
    for f in list(c.facets) + list(c.equations) + [tuple(-t for t in e) for e in c.equations]:
        rows.append(tuple(f) + (0,) * n)
    cut = Cone(extreme_rays(rows, r + n), r + n)
    hb = [_split(h, r) for h in hilbert_basis(cut)] if cut.rays else []
    # certify: each element is a product of the given generators
    tau = rprime.tau
    top = max((dot(tau, l) for l, _ in hb), default=0)
    cl = closure(gens, tau, top)
    for l, m in hb:
        if m not in cl.get(l, ()):
            raise GradedRingError(f"support monoid is not saturated at {(l, m)}; unsupported input")
    return GeneratorSet(hb)


# -- Veronese --------------------------------------------------------------------------

def veronese(ring: GradedRing, L) -> GradedRing:
    """Subring supported on ``Lambda ∩ L``; ``L`` is given by integer row generators."""
    L = [tuple(int(x) for x in row) for row in L]
    r = ring.rank
    if len(L) != r or any(len(row) != r for row in L) or det([list(row) for row in L]) == 0:
        raise GradedRingError("sublattice must have finite index")
    if ring.sublattice is not None:
        L = _intersect_lattices(ring.sublattice, L)
    return GradedRing(ring.variety, ring.system, ring.ambient, L, ring.tau)


def _intersect_lattices(L1, L2):
    """Basis of ``L1 ∩ L2`` for full-rank lattices: ``{x : x in L1 and x in L2}``."""
    from .exact import integer_kernel
    r = len(L1)
    # a L1 = b L2  <=>  [L1^T | -L2^T] (a, b) = 0
    rows = [[L1[j][i] for j in range(r)] + [-L2[j][i] for j in range(r)] for i in range(r)]
    ker = integer_kernel(rows, 2 * r)
    vecs = [tuple(sum(k[j] * L1[j][i] for j in range(r)) for i in range(r)) for k in ker]
    from .exact import row_reduce
    # reduce to a basis via Hermite-like elimination over Z
    return _lattice_basis(vecs, r)


def _lattice_basis(vecs, r):
    """Integer row basis of the lattice spanned by ``vecs`` (full rank assumed)."""
    rows = [list(v) for v in vecs if any(v)]
    basis = []
    for col in range(r):
        while True:
            nz = [row for row in rows if row[col] != 0]
            if len(nz) <= 1:
                break
            nz.sort(key=lambda row: abs(row[col]))
            p = nz[0]
            for row in nz[1:]:
                q = row[col] // p[col]
                for k in range(r):
                    row[k] -= q * p[k]
            rows = [row for row in rows if any(row)]
        piv = next((row for row in rows if row[col] != 0), None)
        if piv is None:
            raise GradedRingError("lattice is not of full rank")
        basis.append(tuple(piv))
        rows = [row for row in rows if row is not piv]
    return basis


# -- injectivization -------------------------------------------------------------------------

@dataclass
class InjectivizedSystem:
    image_cone: Cone
    matrix: list               # rows: names, columns: lambda coordinates
    names: tuple
    system: CharacteristicSystem  # identity-graded system on the image cone
    integral: bool             # D maps Lambda into Div_Z
    degenerate: bool

    def push(self, lam):
        return tuple(dot(row, lam) for row in self.matrix)


def injectivize(sys: CharacteristicSystem) -> InjectivizedSystem:
    """Push a linear system forward to its image cone ``D(C)`` in divisor space."""
    if not sys.is_linear():
        raise GradedRingError("injectivize needs a linear system (triangulate first)")
    M = sys.maps[0]
    names = sys.names
    k = len(names)
    imgs = [tuple(dot(row, g) for row in M) for g in sys.cone.rays]
    degenerate = all(not any(v) for v in imgs)
    C = Cone(imgs, k)
    ident = [tuple(int(i == j) for j in range(k)) for i in range(k)]
    pushed = CharacteristicSystem(C, None, names, [ident], registry=sys.registry)
    integral = True
    for h in hilbert_basis(sys.cone):
        if any(Fraction(dot(row, h)).denominator != 1 for row in M):
            integral = False
    return InjectivizedSystem(C, M, tuple(names), pushed, integral, degenerate)
