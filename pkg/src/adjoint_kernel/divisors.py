"""Formal divisors and rational piecewise-linear characteristic systems."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .cones import Cone, ConeDecomposition, ConeError, hilbert_basis, lattice_points, triangulate
from .exact import as_exact, dot, solve

__all__ = [
    "Divisor", "Registry", "wedge", "floor_divisor",
    "CharacteristicSystem", "AdjointClassification", "ShapeReport",
    "eval_system", "check_shape", "classify", "delta_margin", "DivisorError",
]


class DivisorError(ValueError):
    pass


class Registry:
    """Interned prime-divisor names for one variety."""

    def __init__(self, names, label=""):
        names = list(names)
        if len(set(names)) != len(names):
            raise DivisorError("duplicate prime divisor names")
        self.names = tuple(names)
        self.label = label

    def __contains__(self, name):
        return name in self.names

    def __iter__(self):
        return iter(self.names)

    def __len__(self):
        return len(self.names)

    def divisor(self, coeffs=None, **kw):
        return Divisor(dict(coeffs or {}, **kw), self)

    def zero(self):
        return Divisor({}, self)

    def prime(self, name):
        return Divisor({name: 1}, self)

    def from_vector(self, vec, names=None):
        names = self.names if names is None else names
        return Divisor(dict(zip(names, vec)), self)

    def __repr__(self):
        return f"Registry({self.label!r}, {list(self.names)})"


class Divisor:
    """Finite Q-combination of prime divisors, keyed by name."""

    __slots__ = ("coeffs", "registry")

    def __init__(self, coeffs=None, registry: Registry | None = None):
        c = {}
        for k, v in (coeffs or {}).items():
            v = as_exact(v)
            if registry is not None and k not in registry:
                raise DivisorError(f"{k!r} is not a prime divisor of {registry.label or 'this variety'}")
            if v != 0:
                c[k] = v
        self.coeffs = c
        self.registry = registry

    def _reg(self, other):
        if self.registry is not None and other.registry is not None and self.registry is not other.registry:
            raise DivisorError("divisors live on different varieties")
        return self.registry or other.registry

    def __getitem__(self, name):
        return self.coeffs.get(name, Fraction(0))

    def support(self):
        return sorted(self.coeffs)

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        reg = self._reg(other)
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c.get(k, 0) + v
        return Divisor(c, reg)

    __radd__ = __add__

    def __neg__(self):
        return Divisor({k: -v for k, v in self.coeffs.items()}, self.registry)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, t):
        t = as_exact(t)
        return Divisor({k: t * v for k, v in self.coeffs.items()}, self.registry)

    __rmul__ = __mul__

    def __truediv__(self, t):
        return self * (1 / as_exact(t))

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.coeffs
        if not isinstance(other, Divisor):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __le__(self, other):
        names = set(self.coeffs) | set(other.coeffs)
        return all(self[k] <= other[k] for k in names)

    def __ge__(self, other):
        return other <= self

    def is_effective(self):
        return all(v >= 0 for v in self.coeffs.values())

    def is_integral(self):
        return all(Fraction(v).denominator == 1 for v in self.coeffs.values())

    def vector(self, names):
        return tuple(self[k] for k in names)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs):
            v = self.coeffs[k]
            parts.append(f"{v}*{k}" if v != 1 else k)
        return " + ".join(parts)


def wedge(d1: Divisor, d2: Divisor) -> Divisor:
    """Coefficientwise minimum; absent coefficients count as 0."""
    reg = d1._reg(d2)
    names = set(d1.coeffs) | set(d2.coeffs)
    return Divisor({k: min(d1[k], d2[k]) for k in names}, reg)


def floor_divisor(d: Divisor) -> Divisor:
    return Divisor({k: floor(v) for k, v in d.coeffs.items()}, d.registry)


# -- characteristic systems --------------------------------------------------------


def _matvec(M, w):
    return tuple(sum(a * b for a, b in zip(row, w)) for row in M)


class CharacteristicSystem:
    """A rational PL map ``lambda -> D(lambda)`` on a cone in R^r.

    ``maps[k]`` is a matrix (one row per name in ``names``) giving ``D`` on
    ``decomposition.pieces[k]``. Optional adjoint data: ``K``, ``A`` and, per
    piece, a functional ``r_funcs[k]`` and a matrix ``boundary_maps[k]`` for
    ``r(lambda) B(lambda)``, so that ``B`` itself is homogeneous of degree 0
    and ``D = r (K + A) + r B``.
    """

    def __init__(self, cone: Cone, decomposition: ConeDecomposition | None, names, maps,
                 K: Divisor | None = None, A: Divisor | None = None,
                 r_funcs=None, boundary_maps=None, boundary=None, registry: Registry | None = None,
                 check=True):
        self.cone = cone
        self.decomposition = decomposition or ConeDecomposition(cone, [cone])
        self.names = tuple(names)
        self.registry = registry
        self.maps = [[tuple(as_exact(x) for x in row) for row in M] for M in maps]
        if len(self.maps) != len(self.decomposition.pieces):
            raise DivisorError("one linear map per piece is required")
        for M in self.maps:
            if len(M) != len(self.names) or any(len(row) != cone.ambient_dim for row in M):
                raise DivisorError("map shape does not match names x ambient dimension")
        self.K, self.A = K, A
        self.r_funcs = [tuple(as_exact(x) for x in f) for f in r_funcs] if r_funcs is not None else None
        self.boundary_maps = ([[tuple(as_exact(x) for x in row) for row in M] for M in boundary_maps]
                              if boundary_maps is not None else None)
        self.boundary = tuple(boundary) if boundary is not None else None
        if check:
            self._check_consistency()

    @property
    def rank(self):
        return self.cone.ambient_dim

    @property
    def is_adjoint_form(self):
        return self.K is not None and self.A is not None and self.r_funcs is not None

    @classmethod
    def from_ray_values(cls, cone, decomposition, names, values: dict, registry=None, **adjoint):
        """Build per-piece maps from values on the rays of simplicial pieces.

        ``values`` maps primitive rays to coefficient vectors (or Divisors).
        """
        decomposition = decomposition or triangulate(cone)
        vals = {tuple(k): (v.vector(names) if isinstance(v, Divisor) else tuple(as_exact(x) for x in v))
                for k, v in values.items()}
        maps = [_fit_linear(p, vals, len(names)) for p in decomposition.pieces]
        return cls(cone, decomposition, names, maps, registry=registry, **adjoint)

    @classmethod
    def adjoint(cls, cone, decomposition, registry: Registry, K: Divisor, A: Divisor,
                r_values: dict, b_values: dict, boundary=None):
        """Adjoint system from ``r`` and ``B`` on the rays of simplicial pieces.

        ``D(e) = r(e) (K + A + B(e))`` on each ray ``e``; ``r`` and ``r B`` are
        extended linearly over each piece.
        """
        names = registry.names
        decomposition = decomposition or triangulate(cone)
        rv = {tuple(k): as_exact(v) for k, v in r_values.items()}
        bv = {tuple(k): v for k, v in b_values.items()}
        r_funcs, bmaps, maps = [], [], []
        KA = (K + A).vector(names)
        for p in decomposition.pieces:
            r_map = _fit_linear(p, {e: (rv[e],) for e in rv}, 1)
            rb = {e: tuple(rv[e] * x for x in bv[e].vector(names)) for e in bv}
            bm = _fit_linear(p, rb, len(names))
            r_funcs.append(r_map[0])
            bmaps.append(bm)
            maps.append([tuple(ka * x + y for x, y in zip(r_map[0], row)) for ka, row in zip(KA, bm)])
        if boundary is None:
            boundary = sorted({n for v in bv.values() for n in v.support()})
        return cls(cone, decomposition, names, maps, K=K, A=A, r_funcs=r_funcs,
                   boundary_maps=bmaps, boundary=boundary, registry=registry)

    # -- evaluation ---------------------------------------------------------------
    def piece_index(self, w):
        for k, p in enumerate(self.decomposition.pieces):
            if p.contains(w):
                return k
        raise DivisorError(f"{tuple(w)} lies outside the cone")

    def eval(self, w) -> Divisor:
        w = tuple(as_exact(x) for x in w)
        if not self.cone.contains(w):
            raise DivisorError(f"{w} lies outside the cone")
        k = self.piece_index(w)
        return Divisor(dict(zip(self.names, _matvec(self.maps[k], w))), self.registry)

    def eval_r(self, w):
        if self.r_funcs is None:
            raise DivisorError("system carries no adjoint data")
        return dot(self.r_funcs[self.piece_index(w)], w)

    def eval_B(self, w) -> Divisor:
        if self.boundary_maps is None:
            raise DivisorError("system carries no adjoint data")
        k = self.piece_index(w)
        r = dot(self.r_funcs[k], w)
        if r == 0:
            raise DivisorError("r vanishes at this point")
        v = _matvec(self.boundary_maps[k], w)
        return Divisor({n: x / r for n, x in zip(self.names, v)}, self.registry)

    def eval_Delta(self, w) -> Divisor:
        return self.A + self.eval_B(w)

    def _check_consistency(self):
        pieces = self.decomposition.pieces
        for k, p in enumerate(pieces):
            for g in p.rays:
                ref = _matvec(self.maps[k], g)
                for j, q in enumerate(pieces):
                    if j != k and q.contains(g) and _matvec(self.maps[j], g) != ref:
                        raise DivisorError(f"piece maps disagree at shared ray {g}")
            if self.is_adjoint_form:
                KA = (self.K + self.A).vector(self.names)
                for g in p.rays:
                    r = dot(self.r_funcs[k], g)
                    lhs = _matvec(self.maps[k], g)
                    rhs = tuple(r * a + b for a, b in zip(KA, _matvec(self.boundary_maps[k], g)))
                    if lhs != rhs:
                        raise DivisorError(f"D != r(K+A+B) at {g}")

    def refine(self, decomposition: ConeDecomposition) -> "CharacteristicSystem":
        """Same map on a finer decomposition (each new piece inside an old one)."""
        maps, rf, bm = [], [], []
        for p in decomposition.pieces:
            interior = tuple(sum(g[i] for g in p.rays) for i in range(self.rank))
            k = self.piece_index(interior)
            maps.append(self.maps[k])
            if self.r_funcs is not None:
                rf.append(self.r_funcs[k])
                bm.append(self.boundary_maps[k])
        return CharacteristicSystem(self.cone, decomposition, self.names, maps, self.K, self.A,
                                    rf or None, bm or None, self.boundary, self.registry)

    def is_linear(self):
        return all(M == self.maps[0] for M in self.maps)


def _fit_linear(piece: Cone, values: dict, nout: int):
    """Matrix ``M`` (nout x r) with ``M e = values[e]`` for the rays of a simplicial piece."""
    rays = list(piece.rays)
    r = piece.ambient_dim
    for e in rays:
        if e not in values:
            raise DivisorError(f"no value given at ray {e}")
    if len(rays) != piece.span_dim:
        raise DivisorError("values can only be extended linearly over simplicial pieces")
    # solve for each output row: row . e = values[e][i]; complete with zero on the complement
    extra = [tuple(v) for v in piece.equations]
    rows = [list(e) for e in rays] + [list(v) for v in extra]
    M = []
    for i in range(nout):
        rhs = [values[e][i] for e in rays] + [0] * len(extra)
        x = solve(rows, rhs)
        if x is None:
            raise DivisorError("inconsistent ray values")
        M.append(tuple(x))
    return M


def eval_system(sys: CharacteristicSystem, w) -> Divisor:
    return sys.eval(w)


# -- shape and classification -------------------------------------------------------


@dataclass
class ShapeReport:
    superadditive_mob: bool
    concave: bool
    concavity_witness: object = None
    superadditivity_witness: object = None


def check_shape(sys: CharacteristicSystem, mobile=None, degree_bound: int = 6) -> ShapeReport:
    """Concavity (exact, per piece pair) and superadditivity of ``M = Mob D``.

    Concavity: each piece's linear map must dominate every other piece's
    linear extension on the generators of that piece, coefficientwise; for a
    continuous PL map this is equivalent to ``D = min_k L_k``.

    Superadditivity is tested on all monoid pairs whose sum has degree at most
    ``degree_bound`` (degree = a fixed positive integer functional). ``mobile``
    maps a Divisor to its mobile part; if omitted, ``M = D``.
    """
    concave, cw = True, None
    pieces = sys.decomposition.pieces
    for k, p in enumerate(pieces):
        for j in range(len(pieces)):
            if j == k:
                continue
            for g in p.rays:
                own = _matvec(sys.maps[k], g)
                other = _matvec(sys.maps[j], g)
                if any(o < s for o, s in zip(other, own)):
                    concave, cw = False, (k, j, g)
                    break
            if not concave:
                break
        if not concave:
            break
    phi = sys.cone.positive_functional()
    pts = [p for p in lattice_points(sys.cone, phi, degree_bound) if any(p)]
    cache = {}

    def M(v):
        if v not in cache:
            d = sys.eval(v)
            cache[v] = mobile(d) if mobile is not None else d
        return cache[v]

    sup, sw = True, None
    deg = {p: dot(phi, p) for p in pts}
    for i, a in enumerate(pts):
        for b in pts[i:]:
            if deg[a] + deg[b] > degree_bound:
                continue
            s = tuple(x + y for x, y in zip(a, b))
            if not (M(a) + M(b) <= M(s)):
                sup, sw = False, (a, b)
                break
        if not sup:
            break
    return ShapeReport(sup, concave, cw, sw)


@dataclass
class AdjointClassification:
    is_divisorial: bool
    is_adjoint: bool
    is_big: bool
    is_klt: bool
    is_dlt: bool
    strictly_dlt_with: str | None = None
    delta_margin: Fraction | None = None
    strict_candidates: tuple = ()


def _boundary_values(sys: CharacteristicSystem):
    """``B`` evaluated at every Hilbert-basis element of every piece."""
    out = []
    for p in sys.decomposition.pieces:
        for h in hilbert_basis(p):
            out.append(sys.eval_B(h))
    return out


def classify(sys: CharacteristicSystem, ample_check=None) -> AdjointClassification:
    """Coefficient-level classification of an adjoint system.

    ``ample_check`` (a callable on Divisors) decides whether ``A`` is ample; if
    omitted, a declared ``A`` is trusted.
    """
    divisorial = sys.decomposition.verify()
    if not sys.is_adjoint_form:
        return AdjointClassification(divisorial, False, False, False, False)
    positive_r = all(dot(sys.r_funcs[k], g) > 0 for k, p in enumerate(sys.decomposition.pieces) for g in p.rays)
    vals = _boundary_values(sys)
    names = sys.boundary if sys.boundary is not None else sys.names
    outside = [n for v in vals for n in v.support() if n not in names]
    coeffs = [[v[n] for n in names] for v in vals]
    nonneg = all(c >= 0 for row in coeffs for c in row) and not outside
    dlt = nonneg and all(c <= 1 for row in coeffs for c in row)
    klt = nonneg and all(c < 1 for row in coeffs for c in row)
    # strictly dlt along S: dlt, and S has coefficient one at every point
    ones = tuple(n for i, n in enumerate(names) if all(row[i] == 1 for row in coeffs)) if dlt else ()
    strict = ones[0] if ones else None
    ample = ample_check(sys.A) if ample_check is not None else True
    adjoint = divisorial and positive_r and nonneg
    delta = _delta(sys) if klt else None
    return AdjointClassification(divisorial, adjoint, adjoint and ample, klt, dlt, strict, delta, ones)


def _delta(sys):
    names = sys.boundary if sys.boundary is not None else sys.names
    vals = [sys.eval_B(g) for g in sys.cone.rays]
    return min(1 - v[n] for v in vals for n in names)


def delta_margin(sys: CharacteristicSystem) -> Fraction:
    """``min_i min_l (1 - b_i(e_l))`` over cone generators ``e_l``."""
    d = _delta(sys)
    if d <= 0:
        raise DivisorError(f"system is not klt: delta = {d}")
    return d
