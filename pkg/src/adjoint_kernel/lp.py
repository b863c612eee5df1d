"""Exact linear programming.

A dense two-phase simplex with Bland's rule, a branch-and-bound integer
maximiser built on it, and brute-force vertex enumeration for the small
bounded polytopes that come out of toric divisors. All routines are
field-generic: coefficients may be Fractions or QuadNumbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import floor, ceil

from .exact import row_reduce, rank, dot

__all__ = ["LPResult", "linprog", "feasible_point", "ilp_max", "vertices", "minimize_over_vertices"]


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list | None = None
    value: object = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _pivot(T, basis, r, c):
    pv = T[r][c]
    T[r] = [v / pv for v in T[r]]
    for i in range(len(T)):
        if i != r and T[i][c] != 0:
            f = T[i][c]
            Ti, Tr = T[i], T[r]
            T[i] = [a - f * b for a, b in zip(Ti, Tr)]
    basis[r] = c


def _simplex(T, basis, ncols, allowed):
    """Minimise the objective stored in the last row of tableau ``T``.

    Columns outside ``allowed`` never enter. Returns "optimal" or "unbounded".
    """
    m = len(T) - 1
    while True:
        obj = T[-1]
        enter = None
        for c in range(ncols):
            if c in allowed and obj[c] < 0:
                enter = c
                break
        if enter is None:
            return "optimal"
        best, leave = None, None
        for r in range(m):
            a = T[r][enter]
            if a > 0:
                ratio = T[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best, leave = ratio, r
        if leave is None:
            return "unbounded"
        _pivot(T, basis, leave, enter)


def linprog(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), maximize=False, nonneg=False) -> LPResult:
    """Optimise ``c.x`` subject to ``A_ub x <= b_ub`` and ``A_eq x == b_eq``.

    Variables are free unless ``nonneg``. Exact; Bland's rule prevents cycling.
    """
    n = len(c)
    sign = -1 if maximize else 1
    # free variables split as x = xp - xm
    nv = n if nonneg else 2 * n

    def expand(row):
        row = list(row)
        return row if nonneg else row + [-v for v in row]

    rows, rhs = [], []
    n_slack = len(A_ub)
    for k, (a, b) in enumerate(zip(A_ub, b_ub)):
        slack = [0] * n_slack
        slack[k] = 1
        rows.append(expand(a) + slack)
        rhs.append(b)
    for a, b in zip(A_eq, b_eq):
        rows.append(expand(a) + [0] * n_slack)
        rhs.append(b)
    m = len(rows)
    width = nv + n_slack
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    # phase one with one artificial per row
    T = []
    for i in range(m):
        art = [0] * m
        art[i] = 1
        T.append([Fraction(v) if isinstance(v, int) else v for v in rows[i]] + art + [rhs[i]])
    total = width + m
    obj = [Fraction(0)] * (total + 1)
    for i in range(m):
        obj = [o - t for o, t in zip(obj, T[i])]
    for i in range(m):
        obj[width + i] = Fraction(0)
    T.append(obj)
    basis = [width + i for i in range(m)]
    _simplex(T, basis, total, set(range(total)))
    if T[-1][-1] != 0:
        return LPResult("infeasible")
    # drive artificial columns out of the basis where possible
    for r in range(m):
        if basis[r] >= width:
            for c2 in range(width):
                if T[r][c2] != 0:
                    _pivot(T, basis, r, c2)
                    break
    keep = [r for r in range(m) if basis[r] < width]
    T = [T[r][:width] + [T[r][-1]] for r in keep]
    basis = [basis[r] for r in keep]
    cost = expand([sign * v for v in c]) + [0] * n_slack
    obj = [Fraction(v) if isinstance(v, int) else v for v in cost] + [Fraction(0)]
    for r, b in enumerate(basis):
        if obj[b] != 0:
            f = obj[b]
            obj = [o - f * t for o, t in zip(obj, T[r])]
    T.append(obj)
    status = _simplex(T, basis, width, set(range(width)))
    if status == "unbounded":
        return LPResult("unbounded")
    sol = [Fraction(0)] * width
    for r, b in enumerate(basis):
        sol[b] = T[r][-1]
    x = sol[:n] if nonneg else [sol[i] - sol[n + i] for i in range(n)]
    return LPResult("optimal", x, dot(c, x))


def feasible_point(A_ub=(), b_ub=(), A_eq=(), b_eq=(), n=None):
    """Some point of ``{A_ub x <= b_ub, A_eq x = b_eq}`` or None."""
    if n is None:
        n = len((list(A_ub) + list(A_eq))[0])
    res = linprog([0] * n, A_ub, b_ub, A_eq, b_eq)
    return res.x if res.ok else None


def ilp_max(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), _depth=0) -> LPResult:
    """Maximise ``c.x`` over integer points of a polyhedron by branch and bound.

    Terminates when the relaxation is bounded in every branching direction,
    which holds for all callers (bounded polytopes).
    """
    best = LPResult("infeasible")
    stack = [(list(A_ub), list(b_ub))]
    while stack:
        Au, bu = stack.pop()
        res = linprog(c, Au, bu, A_eq, b_eq, maximize=True)
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            return LPResult("unbounded")
        if best.ok and res.value <= best.value:
            continue
        frac = next((i for i, v in enumerate(res.x) if Fraction(v).denominator != 1), None)
        if frac is None:
            if not best.ok or res.value > best.value:
                best = res
            continue
        v = res.x[frac]
        e = [0] * len(c)
        e[frac] = 1
        neg = [0] * len(c)
        neg[frac] = -1
        stack.append((Au + [e], bu + [floor(v)]))
        stack.append((Au + [neg], bu + [-ceil(v)]))
    if best.ok:
        best.x = [Fraction(v) for v in best.x]
    return best


def vertices(ineqs, eqs=(), dim=None):
    """Vertices of ``{x : a.x >= b for (a, b) in ineqs; a.x == b for (a, b) in eqs}``.

    Brute force over square subsystems; intended for dim <= 6 and a few dozen
    constraints. Returns a list of tuples (deduplicated). Unbounded polyhedra
    return only their vertices.
    """
    ineqs = [(list(a), b) for a, b in ineqs]
    eqs = [(list(a), b) for a, b in eqs]
    if dim is None:
        dim = len((ineqs + eqs)[0][0])
    eq_rows = [a for a, _ in eqs]
    r_eq = rank(eq_rows) if eq_rows else 0
    need = dim - r_eq
    out = {}
    for idx in combinations(range(len(ineqs)), need):
        rows = eq_rows + [ineqs[i][0] for i in idx]
        rhs = [b for _, b in eqs] + [ineqs[i][1] for i in idx]
        aug = [list(r) + [b] for r, b in zip(rows, rhs)]
        R, piv = row_reduce(aug, dim + 1)
        if dim in piv or len(piv) < dim:
            continue
        x = [None] * dim
        for i, p in enumerate(piv):
            x[p] = R[i][dim]
        if all(dot(a, x) >= b for a, b in ineqs):
            key = tuple(x)
            out[key] = key
    return list(out.values())


def minimize_over_vertices(c, verts):
    return min(dot(c, v) for v in verts)
