"""Restricted linear systems on a boundary divisor S and the lifting checks.

Everything is torus invariant: a member of ``|D|_S`` is the restriction of a
monomial ``chi^m`` of ``|D|`` with ``<m, v_S> = -a_S``, identified with a
lattice point of S. Both sides of a lifting statement become sets of lattice
points of S and are compared exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, floor, lcm

from .cones import Cone, hilbert_basis
from .diophantine import _coords, approximate
from .divisors import CharacteristicSystem, Divisor, DivisorError, wedge
from .exact import as_exact, dot, rank, solve
from .graded import (GeneratorSet, GradedRing, GradedRingError, closure, support_cone,
                     verify_generation, _Ring)
from .toric import (Restriction, ToricError, restriction, ToricVariety, asymptotic_fixed, fix_mob, is_ample,
                    sections, stable_base_locus, DEFAULT_NMAX)

__all__ = [
    "LiftingInstance", "LiftingError", "ThetaData", "LiftReport",
    "theta_phi_omega", "simple_lifting_check", "sharp_lifting_check", "admissible_phis",
    "lemma6_search", "extend_convex", "ConvexPL", "restricted_ring_generators", "RestrictedRing",
    "SurfaceContext", "Lemma3Certificate", "Lemma3Report", "FailedItem", "verify_dio_certificate",
    "make_lemma3_certificate", "LEMMA3_STAGES",
]


class LiftingError(ValueError):
    pass


def _frac_integral(d: Divisor):
    return all(Fraction(v).denominator == 1 for v in d.coeffs.values())


@dataclass
class LiftingInstance:
    """``(X, Delta = S + A + B)`` with ``p Delta`` integral; ``Omega = (A + B)|_S``."""

    variety: ToricVariety
    S: str
    A: Divisor
    B: Divisor
    p: int = 1
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        x = self.variety
        self._R = restriction(x, self.S)
        if self.A[self.S] != 0 or self.B[self.S] != 0:
            raise LiftingError("A and B must not contain S (S has coefficient exactly 1 in Delta)")
        if not is_ample(x, self.A):
            raise LiftingError("A is not ample")
        for n in x.names:
            if n == self.S:
                continue
            # A stands for a general member of its class; only B is a boundary
            if self.B[n] < 0 or not self.B[n] < 1:
                raise LiftingError(f"B has coefficient {self.B[n]} along {n}, outside [0, 1)")
        if not _frac_integral(self.Delta * self.p):
            raise LiftingError("p * Delta is not integral")

    @property
    def restriction(self) -> Restriction:
        return self._R

    @property
    def surface(self) -> ToricVariety:
        return self._R.surface

    @property
    def Delta(self) -> Divisor:
        return self.variety.prime(self.S) + self.A + self.B

    @property
    def Omega(self) -> Divisor:
        return self._R.restrict_divisor(self.A + self.B)

    @property
    def adjoint(self) -> Divisor:
        return self.variety.K + self.Delta

    @property
    def K_S(self) -> Divisor:
        return self.surface.K


# -- restricted systems as monomial sets ----------------------------------------------

def restricted_set(x: ToricVariety, S, D: Divisor, R: Restriction | None = None):
    """``|D|_S`` as a set of lattice points of S."""
    R = R or restriction(x, S)
    monos, _ = R.restricted_monomials(D)
    return frozenset(monos)


def _surface_set(S: ToricVariety, D: Divisor):
    return frozenset(sections(S, D).monomials)


@dataclass
class LiftReport:
    holds: bool
    lhs: frozenset
    rhs: frozenset
    detail: dict = field(default_factory=dict)


def simple_lifting_check(inst: LiftingInstance) -> LiftReport:
    """``|p(K+Delta)|_S = |p(K_S + Theta_p)| + p Phi_p`` as monomial sets."""
    x, p = inst.variety, inst.p
    D = inst.adjoint * p
    sbl = stable_base_locus(x, inst.adjoint)
    if sbl.whole or inst.S in sbl.components:
        raise LiftingError("S lies in the stable base locus of K + Delta")
    R = inst.restriction
    lhs, pts = _restricted_lhs(inst)
    if not pts:
        raise LiftingError("|p(K+Delta)|_S is empty")
    F_p = R.fixed_of_restricted(D, pts) / p
    Omega = inst.Omega
    Phi = wedge(Omega, F_p)
    Theta = Omega - Phi
    rhs = _surface_set(inst.surface, (inst.K_S + Theta) * p)
    return LiftReport(lhs == rhs, lhs, rhs, {"F_p": F_p, "Phi_p": Phi, "Theta_p": Theta})


def _lower_bound(inst: LiftingInstance, mode: str, eps=None):
    key = ("lower", mode, None if eps is None else as_exact(eps))
    if key not in inst._cache:
        inst._cache[key] = _compute_lower_bound(inst, mode, eps)
    return inst._cache[key]


def _restricted_lhs(inst: LiftingInstance):
    """``|p(K+Delta)|_S`` as lattice points of S (cached on the instance)."""
    if "lhs" not in inst._cache:
        D = inst.adjoint * inst.p
        R = inst.restriction
        _, pts = R.restricted_monomials(D)
        inst._cache["lhs"] = (frozenset(R.to_surface(m, D[inst.S]) for m in pts), pts)
    return inst._cache["lhs"]


def _compute_lower_bound(inst: LiftingInstance, mode: str, eps=None):
    x, p = inst.variety, inst.p
    R = inst.restriction
    if mode == "sharp":
        D = inst.adjoint + inst.A / p
        sbl = stable_base_locus(x, D)
        if sbl.whole or inst.S in sbl.components:
            raise LiftingError("S lies in the stable base locus of K + Delta + A/p")
        F = R.lp_restricted_fixed(D)
    elif mode in ("tinker", "tinkering"):
        if eps is None:
            raise LiftingError("tinkering mode needs eps")
        eps = as_exact(eps)
        if not eps > 0:
            raise LiftingError("eps must be positive")
        if not is_ample(x, inst.adjoint * eps + inst.A):
            raise LiftingError("eps(K + Delta) + A is not ample")
        sbl = stable_base_locus(x, inst.adjoint)
        if sbl.whole or inst.S in sbl.components:
            raise LiftingError("S lies in the stable base locus of K + Delta")
        F = R.lp_restricted_fixed(inst.adjoint) * (1 - eps / p)
    else:
        raise LiftingError(f"unknown mode {mode!r}")
    return wedge(inst.Omega, F)


def sharp_lifting_check(inst: LiftingInstance, Phi: Divisor, mode: str = "sharp", eps=None) -> LiftReport:
    """``|p(K+Delta)|_S  ⊇  |p(K_S + Theta)| + p Phi`` with ``Theta = Omega - Phi``."""
    p = inst.p
    lo = _lower_bound(inst, mode, eps)
    Omega = inst.Omega
    if not _frac_integral(Phi * p):
        raise LiftingError("p * Phi is not integral")
    if not (lo <= Phi and Phi <= Omega):
        raise LiftingError("Phi lies outside the admissible interval")
    Theta = Omega - Phi
    lhs, _ = _restricted_lhs(inst)
    rhs = _surface_set(inst.surface, (inst.K_S + Theta) * p)
    return LiftReport(rhs <= lhs, lhs, rhs, {"lower": lo, "Theta": Theta})


def admissible_phis(inst: LiftingInstance, mode: str = "sharp", eps=None):
    """All ``Phi`` with ``p Phi`` integral in the box ``[lower, Omega]``."""
    p = inst.p
    lo = _lower_bound(inst, mode, eps)
    Om = inst.Omega
    names = inst.surface.names
    ranges = []
    for n in names:
        a, b = lo[n] * p, Om[n] * p
        ranges.append([Fraction(k, p) for k in range(ceil(a), floor(b) + 1)])
    return [Divisor(dict(zip(names, vals)), inst.surface.registry) for vals in product(*ranges)]


# -- Theta / Phi / Omega for strictly dlt systems ---------------------------------------

@dataclass
class ThetaData:
    w: tuple
    Omega: Divisor
    F_S: Divisor
    Phi: Divisor
    Theta: Divisor


def _check_strict(sys: CharacteristicSystem, S):
    if not sys.is_adjoint_form:
        raise LiftingError("system carries no adjoint data")


def omega_at(x: ToricVariety, S, sys: CharacteristicSystem, w, R: Restriction | None = None) -> Divisor:
    R = R or restriction(x, S)
    Delta = sys.eval_Delta(w)
    if Delta[S] != 1:
        raise LiftingError(f"S = {S} does not have coefficient one in Delta({w})")
    return Divisor({x.names[j]: Delta[x.names[j]] for j in R.adjacent}, R.surface.registry)


def restricted_F_at(x: ToricVariety, S, sys: CharacteristicSystem, w, R: Restriction | None = None) -> Divisor:
    """``F_S(K + Delta(w))``: the restricted asymptotic fixed part, normalised to degree 0."""
    R = R or restriction(x, S)
    return R.lp_restricted_fixed(x.K + sys.eval_Delta(w))


def theta_phi_omega(ctx, sys: CharacteristicSystem, w) -> ThetaData:
    """``Phi(w) = Omega(w) ∧ F_S(w)``, ``Theta(w) = Omega(w) - Phi(w)``.

    ``ctx`` is anything with ``.variety`` and ``.S``. ``F_S(w)`` is taken at
    ``K + Delta(w)`` (degree 0), which is ``F_S(D(w)) / r(w)``. Works for
    points with quadratic irrational coordinates. Raises if S lies in the
    stable base locus (the face of the polytope is empty).
    """
    _check_strict(sys, ctx.S)
    x, S = ctx.variety, ctx.S
    R = restriction(x, S)
    w = tuple(as_exact(t) for t in w)
    Om = omega_at(x, S, sys, w, R)
    try:
        F = restricted_F_at(x, S, sys, w, R)
    except ToricError as exc:
        raise LiftingError(str(exc)) from exc
    Phi = wedge(Om, F)
    Theta = Om - Phi
    return ThetaData(w, Om, F, Phi, Theta)


@dataclass
class SurfaceContext:
    variety: ToricVariety
    S: str


def lemma6_search(ctx, sys: CharacteristicSystem, lam, n_max: int = DEFAULT_NMAX):
    """Smallest ``n <= n_max`` with ``Phi(lam) = Omega(lam) ∧ (1/(n r)) Fix |D(n lam)|_S``."""
    x, S = ctx.variety, ctx.S
    R = restriction(x, S)
    lam = tuple(as_exact(t) for t in lam)
    td = theta_phi_omega(ctx, sys, lam)
    r = sys.eval_r(lam)
    D = sys.eval(lam)
    for n in range(1, n_max + 1):
        Fn = R.restricted_fixed_ladder(D, n)
        if Fn is None:
            continue
        if wedge(td.Omega, Fn / r) == td.Phi:
            return n
    return None


# -- convex extension of sampled restricted fixed parts -------------------------------------

class ConvexPL:
    """Degree-1 homogeneous PL convex function given by one linear map per piece."""

    def __init__(self, cone: Cone, pieces, maps, names, registry=None):
        self.cone, self.pieces, self.maps, self.names, self.registry = cone, pieces, maps, tuple(names), registry
        self.flagged = []

    def evaluate(self, q) -> Divisor:
        """``max_k L_k(q)`` coefficientwise: the continuous extension."""
        vals = [[dot(row, q) for row in M] for M in self.maps]
        best = [max(v[i] for v in vals) for i in range(len(self.names))]
        return Divisor(dict(zip(self.names, best)), self.registry)

    def is_linear(self):
        return all(M == self.maps[0] for M in self.maps)


def extend_convex(samples: dict, decomposition, names=None, registry=None) -> ConvexPL:
    """Fit one linear map per piece from interior samples and check convexity.

    Samples on the boundary of the cone are compared with the continuous
    extension and listed in ``.flagged`` as possible boundary discontinuities
    when they disagree.
    """
    cone = decomposition.parent
    pts = {tuple(as_exact(t) for t in k): v for k, v in samples.items()}
    if names is None:
        names = sorted({n for v in pts.values() for n in v.support()})
        registry = registry or next(iter(pts.values())).registry
    vec = {k: tuple(v[n] for n in names) for k, v in pts.items()}
    for k, v in vec.items():
        for n2 in (2, 3):
            kk = tuple(n2 * t for t in k)
            if kk in vec and vec[kk] != tuple(n2 * t for t in v):
                raise LiftingError(f"samples are not homogeneous of degree one at {k}")
    interior = {k: v for k, v in vec.items() if cone.in_relative_interior(k)}
    boundary = {k: v for k, v in vec.items() if k not in interior}
    r = cone.ambient_dim
    maps = []
    for piece in decomposition.pieces:
        inside = [(k, v) for k, v in interior.items() if piece.contains(k)]
        if not inside:
            raise LiftingError("a piece contains no interior sample")
        rows = [list(k) for k, _ in inside]
        M = []
        for i in range(len(names)):
            sol = solve(rows, [v[i] for _, v in inside])
            if sol is None:
                raise LiftingError("samples are not linear on a piece")
            M.append(tuple(sol))
        if rank(rows) < piece.span_dim:
            raise LiftingError("not enough samples to determine a piece")
        maps.append(M)
    # convexity: on each piece, its own map is the maximum of all maps
    for k, piece in enumerate(decomposition.pieces):
        for g in piece.rays:
            own = [dot(row, g) for row in maps[k]]
            for j, M in enumerate(maps):
                other = [dot(row, g) for row in M]
                if any(o > s for o, s in zip(other, own)):
                    raise LiftingError("samples violate convexity")
    f = ConvexPL(cone, decomposition.pieces, maps, names, registry)
    for k, v in sorted(boundary.items()):
        ext = f.evaluate(k)
        if tuple(ext[n] for n in names) != v:
            f.flagged.append(k)
    for k, v in interior.items():
        ext = f.evaluate(k)
        assert tuple(ext[n] for n in names) == v
    return f


# -- restricted rings of strictly dlt pieces ----------------------------------------------

class RestrictedRing(_Ring):
    """``R_S = sum_lam image(H^0(X, D(lam)) -> H^0(S, D(lam)|_S))`` for a linear ring."""

    def __init__(self, ring: GradedRing, S):
        self.ring = ring
        self.S = S
        self.R = restriction(ring.variety, S)
        self.tau = ring.tau

    def piece(self, lam):
        lam = tuple(lam)
        if not self.ring.in_grading(lam):
            return frozenset()
        D = self.ring.divisor_at(lam)
        monos, _ = self.R.restricted_monomials(D)
        return frozenset(monos)

    def ambient_piece(self, lam):
        return self.piece(lam)

    def degrees(self, bound):
        return [l for l in self.ring.degrees(bound) if self.piece(l)]

    def contains(self, element, ambient=True):
        lam, c = element
        return tuple(c) in self.piece(lam)

    def lift(self, element):
        """The monomial on X restricting to ``element`` (unique for fixed degree)."""
        lam, c = element
        D = self.ring.divisor_at(lam)
        a = floor(D[self.S])
        m = self.R.lift(c, a)
        if tuple(m) not in self.ring.ambient_piece(lam):
            raise LiftingError(f"restricted generator {element} admits no lift")
        return (tuple(lam), tuple(m))


def restricted_ring_generators(ring: GradedRing, S, verify_bound: int | None = None):
    """Generators of the restricted ring on ``S`` and their lifts.

    The monomials restricting nonzero to S are the lattice points of the face
    ``<m, v_S> + D(lam)_S = 0`` of the support cone; its Hilbert basis maps
    onto a generating set of the restricted ring. Returns
    ``(restricted GeneratorSet, lifted GeneratorSet, RestrictedRing)``.
    """
    x = ring.variety
    C = support_cone(ring)
    r = ring.rank
    i = x.index(S)
    M = ring.system.maps[0]
    idx = {name: k for k, name in enumerate(ring.system.names)}
    row = tuple(M[idx[S]]) + tuple(x.rays[i]) if S in idx else (0,) * r + tuple(x.rays[i])
    face = Cone([g for g in C.rays if dot(row, g) == 0], C.ambient_dim)
    RR = RestrictedRing(ring, S)
    if not face.rays:
        return GeneratorSet([]), GeneratorSet([]), RR
    hb = hilbert_basis(face)
    lifted, restricted = [], []
    for h in hb:
        lam = tuple(int(t) for t in h[:r])
        m = tuple(int(t) for t in h[r:])
        D = ring.divisor_at(lam)
        c = RR.R.to_surface(m, floor(D[S]))
        restricted.append((lam, c))
        lifted.append(RR.lift((lam, c)))
    gs = GeneratorSet(restricted)
    if verify_bound is not None:
        rep = verify_generation(RR, gs, verify_bound)
        if not rep.ok:
            raise LiftingError(f"restricted generators fail at {rep.first_failure or rep.unsound}")
    return gs, GeneratorSet(lifted), RR


# -- Diophantine certificates for local affineness of Theta --------------------------------

@dataclass
class Lemma3Certificate:
    """Rational approximants ``(w_i, Theta_i)`` of ``(x, Theta(x))`` on the slice r = 1."""

    x: tuple
    points: list
    thetas: list
    weights: list
    denominators: list
    eps: Fraction
    delta: Fraction
    C: Fraction
    M: int = 1


@dataclass
class FailedItem:
    code: str
    index: int | None = None
    prime: str | None = None
    message: str = ""

    def __str__(self):
        where = []
        if self.index is not None:
            where.append(f"i={self.index}")
        if self.prime is not None:
            where.append(f"P={self.prime}")
        loc = f" [{', '.join(where)}]" if where else ""
        return f"{self.code}{loc}: {self.message}"


@dataclass
class Lemma3Report:
    passed: bool
    failed_items: list = field(default_factory=list)
    stages: list = field(default_factory=list)
    affine_points: list = field(default_factory=list)

    @property
    def codes(self):
        return sorted({f.code for f in self.failed_items})

    def __bool__(self):
        return self.passed


# verification order; the first stage with a failure ends the run, since every
# later step of the argument uses the earlier ones
LEMMA3_STAGES = (
    ("setup", ("setup",)),
    ("assumption", ("additional-assumption",)),
    ("features", ("(a)", "(b)", "(c)", "(d)", "(e)", "(f)")),
    ("conditions", ("(1)", "(2)", "(3)", "(4)")),
    ("key", ("case1", "case2", "key")),
    ("conclusion", ("conclusion",)),
)


def _sup(vals):
    vals = list(vals)
    return max((abs(as_exact(v)) for v in vals), default=Fraction(0))


def _argmax_prime(d: Divisor, names):
    best, arg = None, None
    for n in names:
        v = abs(as_exact(d[n]))
        if best is None or v > best:
            best, arg = v, n
    return arg


def _combine(weights, vecs):
    n = len(vecs[0])
    return tuple(sum((w * v[j] for w, v in zip(weights, vecs)), Fraction(0)) for j in range(n))


def _interior_points(points, count=5):
    """``count`` rational points in the relative interior of the hull."""
    m = len(points)
    out = []
    for k in range(1, count + 1):
        if m == 2:
            bary = [Fraction(k, count + 1), Fraction(count + 1 - k, count + 1)]
        else:
            raw = [Fraction(k) if j == (k - 1) % m else Fraction(1) for j in range(m)]
            s = sum(raw)
            bary = [t / s for t in raw]
        out.append((tuple(bary), _combine(bary, points)))
    return out


def verify_dio_certificate(cert: Lemma3Certificate, ctx, sys: CharacteristicSystem) -> Lemma3Report:
    """Check a certificate that Theta is affine near ``cert.x``.

    Items are grouped in stages (set-up, additional assumption, features
    (a)-(f), conditions (1)-(4), the case analysis behind the key inclusion
    together with the inclusion itself, conclusion). Every item of a stage is
    checked; the run stops after the first stage that has a failure.
    """
    _check_strict(sys, ctx.S)
    x_var, S = ctx.variety, ctx.S
    R = restriction(x_var, S)
    surf = R.surface
    names = surf.names
    report = Lemma3Report(False)
    fails = report.failed_items

    def fail(code, msg, i=None, P=None):
        fails.append(FailedItem(code, i, P, msg))

    def finish_stage(name):
        report.stages.append(name)
        return bool(fails)

    # -- set-up ------------------------------------------------------------------
    m = len(cert.points)
    x = tuple(as_exact(t) for t in cert.x)
    eps, delta, C = as_exact(cert.eps), as_exact(cert.delta), as_exact(cert.C)
    if m == 0 or not (len(cert.thetas) == len(cert.weights) == len(cert.denominators) == m):
        fail("setup", "points, thetas, weights and denominators differ in length")
        finish_stage("setup")
        return report
    pts = [tuple(as_exact(t) for t in w) for w in cert.points]
    mus = [as_exact(t) for t in cert.weights]
    ps = list(cert.denominators)
    thetas = [Divisor({n: as_exact(th[n]) for n in names}, surf.registry) for th in cert.thetas]
    for i, w in enumerate(pts):
        if not all(isinstance(t, (int, Fraction)) for t in w):
            fail("setup", "approximant is not rational", i)
        elif not sys.cone.contains(w) or sys.eval_r(w) != 1:
            fail("setup", "approximant is not on the slice r = 1 of the cone", i)
    if not sys.cone.contains(x) or sys.eval_r(x) != 1:
        fail("setup", "x is not on the slice r = 1 of the cone")
    if any(not isinstance(p, int) or p < 1 for p in ps):
        fail("setup", "denominators must be positive integers")
    if not isinstance(cert.M, int) or cert.M < 1:
        fail("setup", "M must be a positive integer")
    if not fails:
        try:
            tdx = theta_phi_omega(ctx, sys, x)
            tdw = [theta_phi_omega(ctx, sys, w) for w in pts]
        except LiftingError as exc:
            fail("setup", str(exc))
    if finish_stage("setup"):
        return report

    # -- additional assumption -----------------------------------------------------
    for P in names:
        if tdx.Omega[P] == tdx.F_S[P]:
            fail("additional-assumption", "mult_P Omega(x) = mult_P F_S(x)", P=P)
    if finish_stage("assumption"):
        return report

    # -- features ------------------------------------------------------------------
    dist = [_sup(a - b for a, b in zip(x, w)) for w in pts]
    # (a) midpoint concavity on the hull of the certificate points and x
    nodes = [(x, tdx.Theta)] + [(w, td.Theta) for w, td in zip(pts, tdw)]
    for j in range(len(nodes)):
        for k in range(j + 1, len(nodes)):
            (u, tu), (v, tv) = nodes[j], nodes[k]
            mid = tuple((a + b) / 2 for a, b in zip(u, v))
            tm = theta_phi_omega(ctx, sys, mid).Theta
            for P in names:
                if tm[P] < (tu[P] + tv[P]) / 2:
                    fail("(a)", f"Theta is not concave between nodes {j} and {k}", P=P)
    # (b) Lipschitz constant on the certificate's own points
    for i, td in enumerate(tdw):
        diff = td.Theta - tdx.Theta
        if _sup(diff[n] for n in names) > C * dist[i]:
            fail("(b)", "||Theta(w) - Theta(x)|| exceeds C ||w - x||", i, _argmax_prime(diff, names))
    # (c) margin
    if not (0 < delta < 1):
        fail("(c)", "delta must lie in (0, 1)")
    if not eps < delta:
        fail("(c)", "eps must be smaller than delta")
    for P in names:
        if tdx.Omega[P] - tdx.Theta[P] > 0:
            for i, td in enumerate(tdw):
                if not td.Omega[P] - td.Theta[P] > delta:
                    fail("(c)", f"mult_P (Omega - Theta)(w) = {td.Omega[P] - td.Theta[P]} is not above delta", i, P)
    # (d) and (e) ampleness
    Dx = sys.eval_Delta(x)
    for i, (w, p) in enumerate(zip(pts, ps)):
        if not is_ample(x_var, sys.eval_Delta(w) - Dx + sys.A / p):
            fail("(d)", "Delta(w) - Delta(x) + A/p is not ample", i)
    for i, w in enumerate([x] + pts):
        if not is_ample(x_var, (x_var.K + sys.eval_Delta(w)) * ((C + 1) * eps / delta) + sys.A):
            fail("(e)", "(C+1)(eps/delta)(K + Delta(w)) + A is not ample", None if i == 0 else i - 1)
    # (f) no component of Theta_i in F(K_S + Theta_i)
    F_asym = []
    for i, th in enumerate(thetas):
        try:
            Fi = asymptotic_fixed(surf, surf.K + th, check=False)
        except ToricError:
            fail("(f)", "K_S + Theta_i is not pseudo-effective", i)
            F_asym.append(None)
            continue
        F_asym.append(Fi)
        for P in names:
            if th[P] != 0 and Fi[P] != 0:
                fail("(f)", "component of Theta_i in F(K_S + Theta_i)", i, P)
    if finish_stage("features"):
        return report

    # -- conditions ----------------------------------------------------------------
    if sum(mus, Fraction(0)) != 1 or not all(0 < mu < 1 for mu in mus) and m > 1:
        fail("(1)", "weights must lie in (0, 1) and sum to 1")
    if any(as_exact(a - b) != 0 for a, b in zip(_combine(mus, pts), x)):
        fail("(1)", "x is not the weighted combination of the w_i")
    for P in names:
        if as_exact(sum((mu * th[P] for mu, th in zip(mus, thetas)), Fraction(0)) - tdx.Theta[P]) != 0:
            fail("(1)", "Theta(x) is not the weighted combination of the Theta_i", P=P)
    for i, (w, th, p) in enumerate(zip(pts, thetas, ps)):
        if p % cert.M:
            fail("(2)", f"M = {cert.M} does not divide p_i = {p}", i)
        if any(Fraction(p * t).denominator != 1 for t in w):
            fail("(2)", "p_i w_i is not integral", i)
        for P in names:
            if Fraction(p * th[P]).denominator != 1:
                fail("(2)", "p_i Theta_i is not integral", i, P)
        if not dist[i] < eps / p:
            fail("(2)", "||x - w_i|| is not below eps/p_i", i)
        diff = tdx.Theta - th
        if not _sup(diff[n] for n in names) < eps / p:
            fail("(2)", "||Theta(x) - Theta_i|| is not below eps/p_i", i, _argmax_prime(diff, names))
    for P in names:
        tx, ox = tdx.Theta[P], tdx.Omega[P]
        for i, (th, td) in enumerate(zip(thetas, tdw)):
            if tx < ox and not th[P] < td.Omega[P]:
                fail("(3)", "strict inequality Theta < Omega is not preserved", i, P)
            if tx == ox and th[P] != td.Omega[P]:
                fail("(3)", "mult_P Theta_i must equal mult_P Omega(w_i)", i, P)
            if tx == 0 and th[P] != 0:
                fail("(3)", "mult_P Theta_i must vanish", i, P)
    for i, (th, p) in enumerate(zip(thetas, ps)):
        if F_asym[i] is None:
            continue
        D = (surf.K + th) * p
        try:
            fix, _ = fix_mob(surf, D)
        except ToricError:
            fail("(4)", "|p_i (K_S + Theta_i)| is empty", i)
            continue
        for P in names:
            if F_asym[i][P] != fix[P] / p:
                fail("(4)", f"F = {F_asym[i][P]} but Fix/p_i = {fix[P] / p}", i, P)
    if finish_stage("conditions"):
        return report

    # -- the case analysis and the key inclusion ------------------------------------
    for i, (w, th, p, td) in enumerate(zip(pts, thetas, ps, tdw)):
        try:
            Fi = R.lp_restricted_fixed(x_var.K + sys.eval_Delta(w) + sys.A / p)
        except ToricError:
            fail("key", "S lies in the stable base locus of K + Delta(w_i) + A/p_i", i)
            continue
        shrink = 1 - (C + 1) * eps / (p * delta)
        for P in names:
            target = min(td.Omega[P], Fi[P]) <= td.Omega[P] - th[P]
            if tdx.Theta[P] == tdx.Omega[P]:
                if not Fi[P] <= tdx.F_S[P]:
                    fail("case1", "mult_P F_i exceeds mult_P F_S(x)", i, P)
                if not target:
                    fail("case1", "mult_P (Omega(w_i) ∧ F_i) exceeds mult_P (Omega(w_i) - Theta_i)", i, P)
            else:
                if not Fi[P] <= shrink * td.F_S[P]:
                    fail("case2", "mult_P F_i exceeds (1 - (C+1) eps/(p_i delta)) mult_P F_S(w_i)", i, P)
                if not abs(td.Theta[P] - th[P]) <= (C + 1) * eps / p:
                    fail("case2", "|Theta(w_i) - Theta_i| exceeds (C+1) eps/p_i", i, P)
                if not target:
                    fail("case2", "mult_P (Omega(w_i) ∧ F_i) exceeds mult_P (Omega(w_i) - Theta_i)", i, P)
        D = (x_var.K + sys.eval_Delta(w)) * p
        monos, _ = R.restricted_monomials(D)
        lhs = frozenset(monos)
        rhs = _surface_set(surf, (surf.K + th) * p)
        missing = sorted(rhs - lhs)
        if missing:
            fail("key", f"{len(missing)} members of |p_i(K_S + Theta_i)| do not lift, e.g. {missing[0]}", i)
    if finish_stage("key"):
        return report

    # -- conclusion ----------------------------------------------------------------
    for i, (th, td) in enumerate(zip(thetas, tdw)):
        for P in names:
            if not th[P] <= td.Theta[P]:
                fail("conclusion", "Theta_i is not below Theta(w_i)", i, P)
    for P in names:
        s = sum((mu * td.Theta[P] for mu, td in zip(mus, tdw)), Fraction(0))
        if as_exact(s - tdx.Theta[P]) != 0:
            fail("conclusion", "sum mu_i Theta(w_i) differs from Theta(x)", P=P)
    checks = [((Fraction(1, 2), Fraction(1, 2)), (j, k)) for j in range(m) for k in range(j + 1, m)]
    for bary, (j, k) in checks:
        mid = tuple((a + b) / 2 for a, b in zip(pts[j], pts[k]))
        tm = theta_phi_omega(ctx, sys, mid).Theta
        for P in names:
            if tm[P] != (tdw[j].Theta[P] + tdw[k].Theta[P]) / 2:
                fail("conclusion", f"Theta is not affine at the midpoint of w_{j} and w_{k}", P=P)
    if m > 1:
        for bary, q in _interior_points(pts):
            tq = theta_phi_omega(ctx, sys, q).Theta
            for P in names:
                expect = sum((b * td.Theta[P] for b, td in zip(bary, tdw)), Fraction(0))
                if tq[P] != expect:
                    fail("conclusion", f"Theta is not affine at {q}", P=P)
            report.affine_points.append(q)
    finish_stage("conclusion")
    report.passed = not fails
    return report


def _affine_along(ctx, sys, x, u, t_lo, t_hi, a):
    """``Theta(a + t u) = theta0 + t theta1`` from two rational parameters."""
    def at(t):
        return theta_phi_omega(ctx, sys, tuple(ai + t * ui for ai, ui in zip(a, u))).Theta
    lo, hi = at(t_lo), at(t_hi)
    theta1 = (hi - lo) / (t_hi - t_lo)
    theta0 = lo - theta1 * t_lo
    return theta0, theta1


def make_lemma3_certificate(ctx, sys: CharacteristicSystem, x, eps, delta, C=None, M: int = 1) -> Lemma3Certificate:
    """A certificate with ``Theta_i = Theta(w_i)`` for a point ``x`` of the slice.

    Theta is assumed affine along the rational line through ``x`` near ``x``
    (the verifier checks it). The approximation is refined so that
    ``p_i Theta(w_i)`` is integral and ``||Theta(x) - Theta_i|| < eps/p_i``.
    """
    eps, delta = as_exact(eps), as_exact(delta)
    first = approximate(x, eps, M)
    names = restriction(ctx.variety, ctx.S).surface.names
    if len(first.points) == 1:
        w = first.points[0]
        th = theta_phi_omega(ctx, sys, w).Theta
        p = first.denominators[0] * lcm(*(Fraction(th[n]).denominator for n in names))
        return Lemma3Certificate(tuple(first.x.a), [w], [th], [Fraction(1)], [p], eps, delta,
                                 as_exact(C) if C is not None else Fraction(0), M)
    U = first.subspace
    u = U.direction_basis[0]
    a = tuple(first.x.a)
    ts = []
    for w in first.points:
        k = next(j for j, t in enumerate(u) if t != 0)
        ts.append((w[k] - a[k]) / u[k])
    theta0, theta1 = _affine_along(ctx, sys, x, u, ts[0], ts[1], a)
    den = lcm(*(Fraction(v[n]).denominator for v in (theta0, theta1) for n in names))
    unorm = max(abs(t) for t in u)
    slope = max(abs(theta1[n]) for n in names) / unorm
    ratio = max(Fraction(1), slope)
    cert = approximate(x, eps / ratio, M * den)
    thetas = [theta_phi_omega(ctx, sys, w).Theta for w in cert.points]
    if C is None:
        C = slope
    return Lemma3Certificate(tuple(_coords(cert.x)), cert.points, thetas,
                             cert.weights, cert.denominators, eps, delta, as_exact(C), M)

