"""Smooth complete toric varieties as an exact oracle for divisor invariants.

A torus-invariant divisor ``d = sum a_rho D_rho`` has the polytope
``P_d = {m : <m, v_rho> >= -a_rho}``; its lattice points are a monomial basis
of H^0(X, d). Fixed parts, stable base loci, asymptotic fixed parts and
restricted systems all reduce to exact LPs or lattice enumerations on P_d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import floor

from .cones import Cone, polytope_lattice_points
from .divisors import Divisor, DivisorError, Registry
from .exact import det, dot, integer_kernel, lcm, lcm_many, primitive, rank, solve, denominator_lcm
from .lp import linprog, vertices

__all__ = [
    "ToricVariety", "ToricError", "NotStabilized", "SectionSpace", "RegionResult",
    "RestrictedSystem", "SBLResult",
    "projective_space", "hirzebruch", "sections", "fix_mob", "stable_base_locus",
    "asymptotic_fixed", "restrict_sections", "is_ample", "adjoint_regions", "Restriction", "restriction",
]

DEFAULT_NMAX = 12


class ToricError(ValueError):
    pass


class NotStabilized(ToricError):
    """The multiplier ladder did not settle on the LP value within ``n_max`` steps."""


@dataclass
class SectionSpace:
    divisor: Divisor
    monomials: list

    @property
    def dimension(self):
        return len(self.monomials)

    def __len__(self):
        return len(self.monomials)

    def __contains__(self, m):
        return tuple(m) in self._set

    @property
    def _set(self):
        return set(self.monomials)


@dataclass
class SBLResult:
    components: frozenset
    empty: bool
    whole: bool
    stabilized: bool
    ladder: list = field(default_factory=list)
    non_divisorial: str = "not computed"


@dataclass
class RegionResult:
    dim: int
    vertices: list
    inequalities: list  # (a, b) meaning a.x >= b
    equalities: list = field(default_factory=list)

    @property
    def empty(self):
        return not self.vertices

    def contains(self, x) -> bool:
        if self.empty:
            return False
        return all(dot(a, x) >= b for a, b in self.inequalities) and all(dot(a, x) == b for a, b in self.equalities)


@dataclass
class RestrictedSystem:
    surface: "ToricVariety"
    divisor: Divisor            # D|_S, a divisor on S
    monomials: list             # lattice points of S
    fixed: Divisor              # Fix of the restricted system |D|_S
    F_S: Divisor                # restricted asymptotic fixed part


class ToricVariety:
    """Smooth complete fan; prime divisors ``D_rho`` named by ``names``."""

    def __init__(self, rays, max_cones, names=None, label=""):
        self.rays = [tuple(int(x) for x in r) for r in rays]
        self.dim = len(self.rays[0]) if self.rays else 0
        self.max_cones = [tuple(sorted(c)) for c in max_cones]
        if names is None:
            names = [f"D{i + 1}" for i in range(len(self.rays))]
        self.names = tuple(names)
        self.label = label
        self.registry = Registry(self.names, label)
        self.validate()
        self.K = Divisor({n: -1 for n in self.names}, self.registry)

    # -- structure -----------------------------------------------------------
    def validate(self):
        n = self.dim
        if n == 0:
            # a point: no rays, one empty cone
            if self.max_cones != [()]:
                raise ToricError("a point has exactly one (empty) maximal cone")
            return True
        if len(set(self.rays)) != len(self.rays):
            raise ToricError("duplicate rays")
        if len(self.names) != len(self.rays):
            raise ToricError("one name per ray is required")
        for r in self.rays:
            if len(r) != n or not any(r) or primitive(r) != r:
                raise ToricError(f"ray {r} is not a primitive vector of Z^{n}")
        for c in self.max_cones:
            if len(c) != n:
                raise ToricError(f"maximal cone {c} does not have {n} rays")
            if abs(det([list(self.rays[i]) for i in c])) != 1:
                raise ToricError(f"not smooth: cone {c} has determinant {det([list(self.rays[i]) for i in c])}")
        walls = {}
        for k, c in enumerate(self.max_cones):
            for out in c:
                w = tuple(i for i in c if i != out)
                walls.setdefault(w, []).append((k, out))
        for w, users in walls.items():
            if len(users) != 2:
                raise ToricError(f"not complete: wall {w} lies in {len(users)} maximal cone(s)")
            (k1, o1), (k2, o2) = users
            normal = self._wall_normal(w)
            s1, s2 = dot(normal, self.rays[o1]), dot(normal, self.rays[o2])
            if s1 * s2 >= 0:
                raise ToricError(f"not complete: cones across wall {w} overlap")
        # degree one at a generic point
        probe = tuple(Fraction(1 + 7 * i, 3 + 2 * i * i) * (-1) ** i for i in range(n))
        hits = sum(1 for c in self.max_cones if Cone([self.rays[i] for i in c], n).contains(probe))
        if hits != 1:
            raise ToricError("not complete: generic point covered %d times" % hits)
        return True

    def _wall_normal(self, wall):
        from .exact import nullspace
        if not wall:
            return (1,) if self.dim == 1 else None
        ns = nullspace([list(self.rays[i]) for i in wall], self.dim)
        return ns[0]

    def walls(self):
        """Pairs ``(sigma, sigma', ray_out_of_sigma', ray_out_of_sigma)`` for adjacent maximal cones."""
        walls = {}
        for k, c in enumerate(self.max_cones):
            for out in c:
                w = tuple(i for i in c if i != out)
                walls.setdefault(w, []).append((k, out))
        return [(u[0][0], u[1][0], u[0][1], u[1][1]) for u in walls.values()]

    def index(self, name):
        if isinstance(name, int):
            return name
        try:
            return self.names.index(name)
        except ValueError:
            raise ToricError(f"{name!r} is not a ray of this variety") from None

    def ray(self, name):
        return self.rays[self.index(name)]

    def divisor(self, coeffs=None, **kw):
        return Divisor(dict(coeffs or {}, **kw), self.registry)

    def prime(self, name):
        return self.registry.prime(name)

    def anticanonical(self):
        return -self.K

    def principal(self, m) -> Divisor:
        """``div(chi^m) = sum <m, v_rho> D_rho``."""
        return Divisor({n: dot(m, v) for n, v in zip(self.names, self.rays)}, self.registry)

    def linearly_equivalent(self, d1: Divisor, d2: Divisor) -> bool:
        diff = d1 - d2
        rhs = [diff[n] for n in self.names]
        m = solve([list(v) for v in self.rays], rhs)
        return m is not None and all(Fraction(x).denominator == 1 for x in m)

    def coeffs(self, d: Divisor):
        if d.registry is not None and d.registry is not self.registry:
            raise DivisorError("divisor belongs to another variety")
        for k in d.coeffs:
            if k not in self.registry:
                raise DivisorError(f"{k!r} is not a prime divisor here")
        return [d[n] for n in self.names]

    def polytope(self, d: Divisor):
        """Inequalities ``(v_rho, -a_rho)`` of the real polytope ``P_d``."""
        return [(list(v), -a) for v, a in zip(self.rays, self.coeffs(d))]

    def __repr__(self):
        return f"ToricVariety({self.label or self.rays})"


def projective_space(n: int, names=None) -> ToricVariety:
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple([-1] * n)]
    cones = [tuple(j for j in range(n + 1) if j != i) for i in range(n + 1)]
    return ToricVariety(rays, cones, names, label=f"P{n}")


def hirzebruch(a: int, names=None) -> ToricVariety:
    rays = [(1, 0), (0, 1), (-1, a), (0, -1)]
    cones = [(0, 1), (1, 2), (2, 3), (3, 0)]
    return ToricVariety(rays, cones, names, label=f"F{a}")


# -- sections and fixed parts ------------------------------------------------------

def sections(x: ToricVariety, d: Divisor) -> SectionSpace:
    """Monomial basis of H^0(X, d): lattice points of ``P_d``."""
    if x.dim == 0:
        return SectionSpace(d, [()])
    pts = polytope_lattice_points(x.polytope(d), (), x.dim)
    return SectionSpace(d, sorted(pts))


def _fix_from_monomials(x, d, monos):
    a = x.coeffs(d)
    return Divisor({n: a[i] + min(dot(m, x.rays[i]) for m in monos) for i, n in enumerate(x.names)}, x.registry)


def fix_mob(x: ToricVariety, d: Divisor):
    """``(Fix d, Mob d)`` with ``mult_rho Fix = a_rho + min_m <m, v_rho>``."""
    s = sections(x, d)
    if not s.monomials:
        raise ToricError("empty linear system")
    fix = _fix_from_monomials(x, d, s.monomials)
    return fix, d - fix


def _lp_min(x, d, v, extra_eq=()):
    ineqs = x.polytope(d)
    A_ub = [[-c for c in a] for a, _ in ineqs]
    b_ub = [-b for _, b in ineqs]
    A_eq = [list(a) for a, _ in extra_eq]
    b_eq = [b for _, b in extra_eq]
    return linprog(list(v), A_ub, b_ub, A_eq, b_eq)


def is_pseudo_effective(x: ToricVariety, d: Divisor) -> bool:
    """On a complete toric variety the effective cone is closed and spanned by
    the ``D_rho``, so ``d`` is pseudo-effective iff ``P_d`` is nonempty."""
    return _lp_min(x, d, [0] * x.dim).ok


def is_big(x: ToricVariety, d: Divisor) -> bool:
    """``P_d`` has nonempty interior."""
    a = x.coeffs(d)
    # maximise t subject to <m, v> - t >= -a
    A_ub = [[-c for c in v] + [1] for v in x.rays]
    b_ub = [ai for ai in a]
    A_ub.append([0] * x.dim + [1])
    b_ub.append(1)
    res = linprog([0] * x.dim + [1], A_ub, b_ub, maximize=True)
    return res.ok and res.value > 0


def lp_fixed(x: ToricVariety, d: Divisor) -> Divisor:
    """``a_rho + min {<m, v_rho> : m in P_d}`` for every ray (real polytope)."""
    a = x.coeffs(d)
    out = {}
    for i, n in enumerate(x.names):
        res = _lp_min(x, d, x.rays[i])
        if not res.ok:
            raise ToricError("divisor is not pseudo-effective")
        out[n] = a[i] + res.value
    return Divisor(out, x.registry)


def _ilp_fixed(x, d, rays_idx, extra_eq=()):
    """``a_rho + min <m, v_rho>`` over lattice points of ``P_d`` (with optional
    extra equalities), by exact branch and bound; None if there are none."""
    from .lp import ilp_max
    a = x.coeffs(d)
    fl = [floor(t) for t in a]
    A_ub = [[-c for c in v] for v in x.rays]
    b_ub = list(fl)
    A_eq = [list(r) for r, _ in extra_eq]
    b_eq = [b for _, b in extra_eq]
    out = {}
    for i in rays_idx:
        res = ilp_max([-c for c in x.rays[i]], A_ub, b_ub, A_eq, b_eq)
        if not res.ok:
            return None
        out[x.names[i]] = a[i] - res.value
    return out


def _ladder(values_at, L, n_max):
    """Evaluate ``values_at(n)`` on ``n = L * lcm(1..k)``, k = 1..n_max (distinct n)."""
    seq, seen = [], set()
    for k in range(1, n_max + 1):
        n = L * lcm_many(range(1, k + 1))
        if n in seen:
            continue
        seen.add(n)
        seq.append((n, values_at(n)))
    return seq


def _stable_tail(seq, target, run=3):
    count = 0
    for _, v in seq:
        count = count + 1 if v == target else 0
        if count >= run:
            return True
    return False


def stable_base_locus(x: ToricVariety, d: Divisor, n_max: int = DEFAULT_NMAX) -> SBLResult:
    """Divisorial part of ``B(d)`` among the ``D_rho``.

    ``rho`` is outside ``B(d)`` iff the face ``{<m, v_rho> = -a_rho}`` of the
    real polytope ``P_d`` is nonempty. The multiplier ladder ``Bs|n d|`` is
    recorded as an independent check.
    """
    a = x.coeffs(d)
    if not is_pseudo_effective(x, d):
        return SBLResult(frozenset(x.names), False, True, True)
    comps = set()
    for i, n in enumerate(x.names):
        res = _lp_min(x, d, x.rays[i])
        if res.value > -a[i]:
            comps.add(n)
    comps = frozenset(comps)
    L = denominator_lcm(a)

    def base(nn):
        fix = _ilp_fixed(x, d * nn, range(len(x.names)))
        if fix is None:
            return None
        return frozenset(k for k in x.names if fix[k] > 0)

    seq = _ladder(base, L, n_max)
    stab = _stable_tail(seq, comps)
    return SBLResult(comps, not comps, False, stab, seq)


def asymptotic_fixed(x: ToricVariety, d: Divisor, n_max: int = DEFAULT_NMAX, ample: Divisor | None = None,
                     check: bool = True) -> Divisor:
    """``F(d) = inf (1/n) Fix(n d)``.

    Computed by the real-polytope LP. With ``check`` the value must also be
    reached by the multiplier ladder (three equal consecutive values equal to
    the LP value); divisors that are not big are additionally matched against
    the limit of ``F(d + eps A)`` for two ample ``A``.
    """
    if not is_pseudo_effective(x, d):
        raise ToricError("divisor is not pseudo-effective")
    F = lp_fixed(x, d)
    if not check:
        return F
    L = denominator_lcm(x.coeffs(d))

    def val(nn):
        fix = _ilp_fixed(x, d * nn, range(len(x.names)))
        return Divisor(fix, x.registry) / nn if fix is not None else None

    seq = _ladder(val, L, n_max)
    if not _stable_tail(seq, F):
        raise NotStabilized(f"multiplier ladder did not reach the LP value {F} (last {seq[-1][1]})")
    if not is_big(x, d):
        for A in two_amples(x, ample):
            if nakayama_limit(x, d, A) != F:
                raise NotStabilized("epsilon ladder disagrees with the LP value")
    return F


def two_amples(x: ToricVariety, ample: Divisor | None = None):
    """Two non-proportional ample divisors for the epsilon recipe."""
    first = ample if ample is not None else _default_ample(x)
    if not is_ample(x, first):
        raise ToricError("the supplied divisor is not ample")
    for n in x.names:
        cand = first + x.prime(n)
        if is_ample(x, cand):
            return [first, cand]
    return [first, first * 2]


def _default_ample(x: ToricVariety) -> Divisor:
    """``-K`` if ample, else the first ample ``-K + k D_rho`` (k = 1..3)."""
    base = x.anticanonical()
    if is_ample(x, base):
        return base
    for k in range(1, 4):
        for n in x.names:
            cand = base + x.prime(n) * k
            if is_ample(x, cand):
                return cand
    raise ToricError("no ample divisor found near -K; supply one")


def nakayama_limit(x: ToricVariety, d: Divisor, A: Divisor, steps: int = 6) -> Divisor:
    """``lim_{eps -> 0} F(d + eps A)`` from an exact epsilon ladder.

    For small eps the LP value is affine in eps; the last three ladder values
    are required to be collinear before extrapolating to eps = 0.
    """
    eps = [Fraction(1, 2 ** (k + 2)) for k in range(steps)]
    vals = [lp_fixed(x, d + A * e) for e in eps]
    e0, e1, e2 = eps[-3:]
    v0, v1, v2 = vals[-3:]
    out = {}
    for n in x.names:
        s01 = (v1[n] - v0[n]) / (e1 - e0)
        s12 = (v2[n] - v1[n]) / (e2 - e1)
        if s01 != s12:
            raise NotStabilized("epsilon ladder is not yet affine")
        out[n] = v2[n] - s12 * e2
    return Divisor(out, x.registry)


def is_ample(x: ToricVariety, d: Divisor) -> bool:
    """Strict convexity of the support function across every wall."""
    a = x.coeffs(d)
    msig = []
    for c in x.max_cones:
        m = solve([list(x.rays[i]) for i in c], [-a[i] for i in c])
        msig.append(m)
    for k1, k2, o1, o2 in x.walls():
        # o2 is the ray of cone k2 not in k1
        if not dot(msig[k1], x.rays[o2]) > -a[o2]:
            return False
        if not dot(msig[k2], x.rays[o1]) > -a[o1]:
            return False
    return True


def is_nef(x: ToricVariety, d: Divisor) -> bool:
    a = x.coeffs(d)
    msig = [solve([list(x.rays[i]) for i in c], [-a[i] for i in c]) for c in x.max_cones]
    return all(dot(msig[k1], x.rays[o2]) >= -a[o2] and dot(msig[k2], x.rays[o1]) >= -a[o1]
               for k1, k2, o1, o2 in x.walls())


# -- restriction to a boundary divisor ------------------------------------------------

class Restriction:
    """Data for restricting to ``S = D_rho``: the star fan and lattice maps."""

    def __init__(self, x: ToricVariety, s):
        self.x = x
        self.i = x.index(s)
        self.name = x.names[self.i]
        v = x.rays[self.i]
        self.v = v
        # u with <u, v> = 1 (v primitive, so such u exists)
        self.u = _unimodular_dual(v)
        self.basis = integer_kernel([list(v)], x.dim)  # basis of v^perp in M
        adj = sorted({j for c in x.max_cones if self.i in c for j in c if j != self.i})
        self.adjacent = adj
        rays = [tuple(dot(b, x.rays[j]) for b in self.basis) for j in adj]
        cones = [tuple(adj.index(j) for j in c if j != self.i) for c in x.max_cones if self.i in c]
        names = [x.names[j] for j in adj]
        if x.dim == 1:
            self.surface = ToricVariety([], [()], [], label=f"{x.label or 'X'}|{self.name}")
            return
        self.surface = ToricVariety(rays, cones, names, label=f"{x.label or 'X'}|{self.name}")

    def restrict_divisor(self, d: Divisor) -> Divisor:
        """``D|_S`` after moving ``D`` off ``S`` by ``div(chi^(a_rho u))``."""
        a = self.x.coeffs(d)
        ar = a[self.i]
        return Divisor({self.x.names[j]: a[j] - ar * dot(self.u, self.x.rays[j]) for j in self.adjacent},
                       self.surface.registry)

    def to_surface(self, m, a_rho):
        """Image on S of a monomial ``m`` with ``<m, v> = -a_rho``."""
        mp = [mi + a_rho * ui for mi, ui in zip(m, self.u)]
        B = [[b[k] for b in self.basis] for k in range(self.x.dim)]
        c = solve(B, mp)
        return tuple(int(t) for t in c)

    def lift(self, c, a_rho):
        mp = [sum(ck * b[k] for ck, b in zip(c, self.basis)) for k in range(self.x.dim)]
        return tuple(mk - a_rho * uk for mk, uk in zip(mp, self.u))

    def restricted_monomials(self, d: Divisor):
        """Monomials of |d| not vanishing on S, as lattice points of S."""
        a = self.x.coeffs(d)
        fl = [floor(t) for t in a]
        ar = fl[self.i]
        ineqs = [(list(v), -fa) for v, fa in zip(self.x.rays, fl)]
        eqs = [(list(self.v), -ar)]
        pts = polytope_lattice_points(ineqs, eqs, self.x.dim)
        return sorted(self.to_surface(m, ar) for m in pts), pts

    def fixed_of_restricted(self, d: Divisor, pts):
        """Fix of the restricted system on S, measured against the rational ``d``."""
        a = self.x.coeffs(d)
        return Divisor({self.x.names[j]: a[j] + min(dot(m, self.x.rays[j]) for m in pts) for j in self.adjacent},
                       self.surface.registry)

    def lp_restricted_fixed(self, d: Divisor) -> Divisor:
        """``F_S(d)``: ``a_tau + min <m, v_tau>`` over the face ``<m, v_rho> = -a_rho`` of ``P_d``."""
        a = self.x.coeffs(d)
        out = {}
        for j in self.adjacent:
            res = _lp_min(self.x, d, self.x.rays[j], [(list(self.v), -a[self.i])])
            if not res.ok:
                raise ToricError(f"S = {self.name} lies in the stable base locus")
            out[self.x.names[j]] = a[j] + res.value
        return Divisor(out, self.surface.registry)

    def restricted_fixed_ladder(self, d: Divisor, n: int) -> Divisor | None:
        """``(1/n) Fix |n d|_S``; ``n d`` must have integral S-coefficient."""
        dn = d * n
        ar = dn[self.name]
        if Fraction(ar).denominator != 1:
            return None
        fix = _ilp_fixed(self.x, dn, self.adjacent, [(list(self.v), -ar)])
        if fix is None:
            return None
        return Divisor(fix, self.surface.registry) / n


def restriction(x: ToricVariety, s) -> Restriction:
    """The restriction to ``s``, built once per variety so that divisors on
    the same S share one registry."""
    cache = x.__dict__.setdefault("_restrictions", {})
    name = x.names[x.index(s)]
    if name not in cache:
        cache[name] = Restriction(x, name)
    return cache[name]


def _unimodular_dual(v):
    """Integer ``u`` with ``<u, v> = 1`` for primitive ``v``."""
    n = len(v)
    # extended gcd across coordinates
    coeffs = [0] * n
    g = 0
    for i, vi in enumerate(v):
        if g == 0:
            if vi != 0:
                g = abs(vi)
                coeffs = [0] * n
                coeffs[i] = 1 if vi > 0 else -1
            continue
        # combine: g = s*g + t*vi
        s, t, gg = _egcd(g, vi)
        coeffs = [s * c for c in coeffs]
        coeffs[i] = t
        g = gg
    assert dot(coeffs, v) == 1
    return tuple(coeffs)


def _egcd(a, b):
    if b == 0:
        return (1 if a > 0 else -1), 0, abs(a)
    s0, s1, r0, r1 = 1, 0, a, b
    t0, t1 = 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0 < 0:
        r0, s0, t0 = -r0, -s0, -t0
    return s0, t0, r0


def restrict_sections(x: ToricVariety, s, d: Divisor, n_max: int = DEFAULT_NMAX, check: bool = True) -> RestrictedSystem:
    """The restricted system ``|d|_S`` on ``S = D_s`` and ``F_S(d)``."""
    R = restriction(x, s)
    sbl = stable_base_locus(x, d, n_max)
    if sbl.whole or R.name in sbl.components:
        raise ToricError(f"S = {R.name} lies in the stable base locus of {d}")
    monos, pts = R.restricted_monomials(d)
    fixed = R.fixed_of_restricted(d, pts) if pts else None
    F_S = R.lp_restricted_fixed(d)
    if check:
        L = denominator_lcm(x.coeffs(d))
        seq = _ladder(lambda nn: R.restricted_fixed_ladder(d, nn), L, n_max)
        if not _stable_tail(seq, F_S):
            raise NotStabilized(f"restricted ladder did not reach the LP value {F_S}")
    return RestrictedSystem(R.surface, R.restrict_divisor(d), monos, fixed, F_S)


def restricted_fixed(x: ToricVariety, s, d: Divisor) -> Divisor:
    """``F_S(d)`` by the LP formula alone (no base-locus or ladder checks)."""
    return restriction(x, s).lp_restricted_fixed(d)


# -- regions -----------------------------------------------------------------------

def _hull(points, k):
    """H-description of ``conv(points)`` in R^k via the homogenised cone."""
    if not points:
        return [], []
    hom = [(Fraction(1),) + tuple(p) for p in points]
    C = Cone(hom, k + 1)
    ineqs = [(tuple(f[1:]), -f[0]) for f in C.facets]
    eqs = [(tuple(e[1:]), -e[0]) for e in C.equations]
    return ineqs, eqs


def _projected_region(x, base: Divisor, V, extra_eq_ray=None) -> RegionResult:
    """``{b in [0,1]^V : P_{base + sum b_j B_j} nonempty [and touches the S-face]}``."""
    n, k = x.dim, len(V)
    a = x.coeffs(base)
    vidx = [x.index(v) for v in V]
    ineqs = []
    for i, v in enumerate(x.rays):
        # <m, v_i> + a_i + b_j [i == V_j] >= 0
        row = list(v) + [1 if vidx[j] == i else 0 for j in range(k)]
        ineqs.append((row, -a[i]))
    for j in range(k):
        e = [0] * (n + k)
        e[n + j] = 1
        ineqs.append((e, 0))
        ineqs.append(([-t for t in e], -1))
    eqs = []
    if extra_eq_ray is not None:
        i = x.index(extra_eq_ray)
        row = list(x.rays[i]) + [1 if vidx[j] == i else 0 for j in range(k)]
        eqs.append((row, -a[i]))
    verts = vertices(ineqs, eqs, n + k)
    pts = sorted({tuple(v[n:]) for v in verts})
    if not pts:
        return RegionResult(k, [], [], [])
    hi, he = _hull(pts, k)
    # keep only true vertices of the projection
    ext = [p for p in pts if _is_vertex(p, hi, he, k)]
    return RegionResult(k, ext, hi, he)


def _is_vertex(p, ineqs, eqs, k):
    tight = [list(a) for a, b in ineqs if dot(a, p) == b] + [list(a) for a, _ in eqs]
    return rank(tight) == k if tight else k == 0


def adjoint_regions(x: ToricVariety, V, A: Divisor):
    """Rational polytopes ``L_V``, ``E_{V,A}`` and ``B^{S=1}_{V,A}`` (one per S in V).

    Coordinates are the coefficients ``b_j`` of ``B = sum b_j B_j``, ``B_j`` in ``V``.
    """
    if not is_ample(x, A):
        raise ToricError("A is not ample")
    V = list(V)
    for v in V:
        x.index(v)
    k = len(V)
    box_v = [tuple(int(t >> j & 1) for j in range(k)) for t in range(2 ** k)]
    box_i = []
    for j in range(k):
        e = [0] * k
        e[j] = 1
        box_i.append((tuple(e), 0))
        box_i.append((tuple(-t for t in e), -1))
    L = RegionResult(k, sorted(box_v), box_i, [])
    base = x.K + A
    E = _projected_region(x, base, V)
    B1 = {s: _projected_region(x, base, V, s) for s in V}
    return {"L_V": L, "E_VA": E, "B_S1": B1}
