"""Simultaneous rational approximation inside the rational affine hull.

A point ``x = a + b sqrt(d)`` spans the rational line ``a + R b`` (or is the
rational point ``a``). Writing ``x = a + t* u`` with ``u`` primitive and
``t*`` a quadratic irrational, two consecutive continued-fraction
convergents of ``t*`` give rational points on both sides of ``x``; scaling
their denominators by ``M`` gives the divisibility condition for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor

from .cones import AffineSubspaceQ, rational_affine_hull
from .exact import QuadNumber, QuadVec, as_exact, denominator_lcm, lcm

__all__ = ["DioCertificate", "DioCheck", "continued_fraction", "convergents", "approximate",
           "check_certificate"]


def continued_fraction(alpha, k: int):
    """First ``k`` partial quotients (fewer if ``alpha`` is rational)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    alpha = as_exact(alpha)
    out = []
    for _ in range(k):
        a = floor(alpha)
        out.append(int(a))
        rest = alpha - a
        if rest == 0:
            break
        alpha = 1 / rest
    return out


def convergents(alpha, k: int):
    """First ``k`` continued-fraction convergents, exact."""
    h0, h1 = 1, 0
    k0, k1 = 0, 1
    out = []
    for a in continued_fraction(alpha, k):
        h0, h1 = a * h0 + h1, h0
        k0, k1 = a * k0 + k1, k0
        out.append(Fraction(h0, k0))
    return out


def _max_norm_lt(diffs, bound):
    """``max |diffs_i| < bound`` compared exactly (quadratic-field signs)."""
    return all(abs(as_exact(t)) < bound for t in diffs)


@dataclass
class DioCertificate:
    x: QuadVec
    subspace: AffineSubspaceQ
    points: list
    weights: list
    denominators: list
    eps: Fraction
    M: int


@dataclass
class DioCheck:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _coords(x: QuadVec):
    return [QuadNumber(a, b, x.d) if b else Fraction(a) for a, b in zip(x.a, x.b)]


def approximate(x, eps, M: int = 1) -> DioCertificate:
    """Rational points ``w_i`` of the affine hull with ``M | p_i``,
    ``p_i w_i`` integral, ``||x - w_i|| < eps / p_i`` and ``x`` a convex
    combination with weights strictly between 0 and 1."""
    eps = as_exact(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if M < 1:
        raise ValueError("M must be a positive integer")
    if not isinstance(x, QuadVec):
        x = QuadVec.from_entries([as_exact(t) for t in x])
    U = rational_affine_hull(x)
    La = denominator_lcm(list(x.a))
    if x.is_rational:
        w = tuple(x.a)
        return DioCertificate(x, U, [w], [Fraction(1)], [M * La], eps, M)
    u = U.direction_basis[0]
    i = next(k for k, t in enumerate(u) if t != 0)
    s = x.b[i] / u[i]
    tstar = QuadNumber(0, s, x.d)
    unorm = max(abs(t) for t in u)
    threshold = M * La * unorm / eps
    picked = []
    k = 4
    while len(picked) < 2:
        cs = convergents(tstar, k)
        picked = []
        for c in cs:
            if c.denominator > threshold or picked:
                picked.append(c)
            if len(picked) == 2:
                break
        k *= 2
    pts, dens = [], []
    for t in picked:
        pts.append(tuple(a + t * ui for a, ui in zip(x.a, u)))
        dens.append(M * La * t.denominator)
    t1, t2 = picked
    r1 = (t2 - tstar) / (t2 - t1)
    r2 = 1 - r1
    return DioCertificate(x, U, pts, [as_exact(r1), as_exact(r2)], dens, eps, M)


def check_certificate(c: DioCertificate) -> DioCheck:
    """Verify every invariant exactly; failures are listed by name."""
    fails = []
    x = c.x
    m = len(c.points)
    if not (len(c.weights) == m == len(c.denominators)) or m == 0:
        return DioCheck(False, ["shape"])
    ws = [as_exact(r) for r in c.weights]
    if sum(ws, Fraction(0)) != 1 or (m > 1 and not all(0 < r < 1 for r in ws)):
        fails.append("weights")
    xs = _coords(x)
    comb = [sum((r * w[j] for r, w in zip(ws, c.points)), Fraction(0)) for j in range(len(xs))]
    if any(as_exact(a - b) != 0 for a, b in zip(comb, xs)):
        fails.append("combination")
    if not all(c.subspace.contains(w) for w in c.points) or not c.subspace.contains(x):
        fails.append("subspace")
    if any(p < 1 or p % c.M for p in c.denominators):
        fails.append("divisibility")
    if any(Fraction(p * t).denominator != 1 for p, w in zip(c.denominators, c.points) for t in w):
        fails.append("integrality")
    for p, w in zip(c.denominators, c.points):
        if not _max_norm_lt([a - b for a, b in zip(xs, w)], c.eps / p):
            fails.append("bound")
            break
    if m != c.subspace.dim + 1:
        fails.append("interior")
    return DioCheck(not fails, fails)
