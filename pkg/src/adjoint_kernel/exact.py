"""Exact scalars and dense linear algebra over ordered fields.

Everything in the kernel is computed with :class:`fractions.Fraction` or with
:class:`QuadNumber`, an element ``a + b*sqrt(d)`` of a real quadratic field.
The linear-algebra helpers below only use ``+ - * /`` and comparisons, so they
work unchanged over either field.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, isqrt
import numbers

__all__ = [
    "Fraction", "QuadNumber", "QuadVec", "as_exact", "parse_rational",
    "format_rational", "lcm", "lcm_many", "denominator_lcm", "is_integral",
    "squarefree", "rank", "solve", "nullspace", "row_reduce", "integer_kernel",
    "primitive", "dot", "det", "inverse",
]


def lcm(a: int, b: int) -> int:
    return abs(a * b) // gcd(a, b) if a and b else 0


def lcm_many(values) -> int:
    return reduce(lcm, values, 1)


def squarefree(d: int) -> bool:
    if d < 2:
        return False
    k = 2
    while k * k <= d:
        if d % (k * k) == 0:
            return False
        k += 1
    return True


class QuadNumber:
    """``a + b*sqrt(d)`` with rational ``a``, ``b`` and squarefree ``d > 1``.

    Instances with ``b == 0`` compare and hash like the rational ``a``.
    Mixing two different fields raises ``ValueError``.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 2):
        if not squarefree(d):
            raise ValueError(f"d={d} is not a squarefree integer > 1")
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = int(d)

    @classmethod
    def sqrt(cls, d: int) -> "QuadNumber":
        return cls(0, 1, d)

    # -- coercion -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, QuadNumber):
            if other.b and self.b and other.d != self.d:
                raise ValueError("cannot mix different quadratic fields")
            d = self.d if self.b else other.d
            return other.a, other.b, d
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0), self.d
        return None

    def _make(self, a, b, d):
        if b == 0:
            return QuadNumber(a, 0, d)
        return QuadNumber(a, b, d)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def to_fraction(self) -> Fraction:
        if self.b:
            raise ValueError(f"{self} is irrational")
        return self.a

    def conjugate(self) -> "QuadNumber":
        return QuadNumber(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, d = c
        return self._make(self.a + a, self.b + b, d if b else self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, d = c
        return self._make(self.a - a, self.b - b, d if b else self.d)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, d = c
        dd = d if b else self.d
        return self._make(self.a * a + self.b * b * dd, self.a * b + self.b * a, dd)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, d = c
        other_q = QuadNumber(a, b, d if b else self.d)
        n = other_q.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        return self * QuadNumber(a / n, -b / n, other_q.d)

    def __rtruediv__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, d = c
        return QuadNumber(a, b, d if b else self.d) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = QuadNumber(1, 0, self.d)
        for _ in range(k):
            out = out * self
        return out

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- order ----------------------------------------------------------------
    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = a * a, b * b * self.d
        if lhs == rhs:
            return 0
        return sa if lhs > rhs else sb

    def _cmp(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return (self - QuadNumber(c[0], c[1], c[2] if c[1] else self.d)).sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is NotImplemented else c >= 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __floor__(self):
        # floor via a rational bracket refined until it is decisive
        lo = int(float(self.a) + float(self.b) * self.d ** 0.5) - 2
        while QuadNumber(lo + 1, 0, self.d) <= self:
            lo += 1
        while QuadNumber(lo, 0, self.d) > self:
            lo -= 1
        return lo

    def __float__(self):
        return float(self.a) + float(self.b) * self.d ** 0.5

    def __repr__(self):
        if self.b == 0:
            return f"QuadNumber({self.a})"
        return f"QuadNumber({self.a}, {self.b}, d={self.d})"

    def __str__(self):
        if self.b == 0:
            return format_rational(self.a)
        sign = "+" if self.b > 0 else "-"
        return f"{format_rational(self.a)}{sign}{format_rational(abs(self.b))}*sqrt({self.d})"


def as_exact(x):
    """Coerce ints/strings/Fractions to Fraction; pass QuadNumbers through.

    Rational-valued QuadNumbers collapse to Fraction. Floats are rejected.
    """
    if isinstance(x, QuadNumber):
        return x.a if x.b == 0 else x
    if isinstance(x, bool):
        raise TypeError("booleans are not exact scalars")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    raise TypeError(f"inexact or unsupported scalar {x!r}")


def parse_rational(s: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"``; decimal notation is refused."""
    s = s.strip()
    if not s or any(ch in s for ch in ".eE"):
        raise ValueError(f"rationals must be written as 'p/q', got {s!r}")
    parts = s.split("/")
    if len(parts) > 2:
        raise ValueError(f"malformed rational {s!r}")
    try:
        num = int(parts[0])
        den = int(parts[1]) if len(parts) == 2 else 1
    except ValueError:
        raise ValueError(f"rationals must be written as 'p/q', got {s!r}") from None
    if den == 0:
        raise ValueError(f"zero denominator in {s!r}")
    return Fraction(num, den)


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def denominator_lcm(values) -> int:
    return lcm_many(Fraction(v).denominator for v in values)


def is_integral(values) -> bool:
    return all(Fraction(v).denominator == 1 for v in values)


def primitive(v):
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    v = [Fraction(x) for x in v]
    L = denominator_lcm(v)
    ints = [int(x * L) for x in v]
    g = reduce(gcd, (abs(i) for i in ints), 0)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return tuple(i // g for i in ints)


def dot(u, v):
    s = 0
    for a, b in zip(u, v):
        s = s + a * b
    return s


class QuadVec:
    """A vector with entries in one quadratic field, stored as ``a + b*sqrt(d)``
    with rational vectors ``a`` and ``b``."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=None, d: int = 2):
        if not squarefree(d):
            raise ValueError(f"d={d} is not a squarefree integer > 1")
        self.a = tuple(Fraction(x) for x in a)
        self.b = tuple(Fraction(x) for x in (b if b is not None else [0] * len(self.a)))
        if len(self.a) != len(self.b):
            raise ValueError("rational and irrational parts differ in length")
        self.d = int(d)

    @classmethod
    def from_entries(cls, entries, d: int | None = None) -> "QuadVec":
        a, b, ds = [], [], set()
        for e in entries:
            if isinstance(e, QuadNumber):
                a.append(e.a)
                b.append(e.b)
                if e.b:
                    ds.add(e.d)
            else:
                a.append(Fraction(e))
                b.append(Fraction(0))
        if len(ds) > 1:
            raise ValueError("entries live in different quadratic fields")
        dd = ds.pop() if ds else (d or 2)
        return cls(a, b, dd)

    def __len__(self):
        return len(self.a)

    def __getitem__(self, i):
        return as_exact(QuadNumber(self.a[i], self.b[i], self.d))

    def entries(self):
        return [self[i] for i in range(len(self))]

    @property
    def is_rational(self) -> bool:
        return not any(self.b)

    def rational_part(self):
        return self.a

    def irrational_part(self):
        return self.b

    def __eq__(self, other):
        if not isinstance(other, QuadVec):
            return NotImplemented
        return self.a == other.a and self.b == other.b and (self.is_rational or self.d == other.d)

    def __hash__(self):
        return hash((self.a, self.b, self.d if any(self.b) else 0))

    def __repr__(self):
        return "QuadVec([" + ", ".join(str(QuadNumber(x, y, self.d)) for x, y in zip(self.a, self.b)) + "])"


# -- dense linear algebra over an ordered field --------------------------------

def row_reduce(rows, ncols: int | None = None):
    """Reduced row echelon form. Returns (rref rows, pivot column list)."""
    M = [[Fraction(x) if isinstance(x, int) else x for x in r] for r in rows]
    if not M:
        return [], []
    n = ncols if ncols is not None else len(M[0])
    pivots = []
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, len(M)):
            if M[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        pv = M[r][c]
        M[r] = [x / pv for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def _int_rows(rows):
    out = []
    for r in rows:
        row = []
        for x in r:
            if isinstance(x, int):
                row.append(x)
            elif isinstance(x, Fraction) and x.denominator == 1:
                row.append(x.numerator)
            else:
                return None
        out.append(row)
    return out


def _int_rank(M) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    M = [list(r) for r in M if any(r)]
    if not M:
        return 0
    n = len(M[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        for i in range(r + 1, len(M)):
            f = M[i][c]
            if f:
                row = [p * x - f * y for x, y in zip(M[i], M[r])]
                g = reduce(gcd, (abs(x) for x in row), 0)
                M[i] = [x // g for x in row] if g > 1 else row
        r += 1
        if r == len(M):
            break
    return r


def rank(rows) -> int:
    rows = list(rows)
    if not rows:
        return 0
    ints = _int_rows(rows)
    if ints is not None:
        return _int_rank(ints)
    rows = [[as_exact(x) for x in r] for r in rows]
    return len(row_reduce(rows)[1])


def nullspace(rows, ncols: int):
    """Basis of {x : rows @ x = 0} (right kernel)."""
    rows = [[as_exact(x) for x in r] for r in rows]
    R, piv = row_reduce(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = -R[i][f]
        basis.append(v)
    return basis


def solve(A, b):
    """Solve A x = b. Returns one solution or None when inconsistent."""
    n = len(A[0]) if A else 0
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    R, piv = row_reduce(aug, n + 1)
    if n in piv:
        return None
    x = [Fraction(0) for _ in range(n)]
    for i, p in enumerate(piv):
        x[p] = R[i][n]
    return x


def det(M):
    M = [[Fraction(x) if isinstance(x, int) else x for x in r] for r in M]
    n = len(M)
    out = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            out = -out
        out = out * M[c][c]
        for i in range(c + 1, n):
            if M[i][c] != 0:
                f = M[i][c] / M[c][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return out


def inverse(M):
    n = len(M)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    R, piv = row_reduce(aug, n)
    if piv != list(range(n)):
        raise ValueError("matrix is singular")
    return [r[n:] for r in R]


def integer_kernel(rows, ncols: int):
    """Lattice basis of {x in Z^n : rows @ x = 0} for rational ``rows``.

    Column-style Hermite reduction with a unimodular transform; the trailing
    columns of the transform span the integer kernel.
    """
    A = []
    for r in rows:
        L = denominator_lcm(r)
        A.append([int(Fraction(x) * L) for x in r])
    n = ncols
    U = [[int(i == j) for j in range(n)] for i in range(n)]  # columns are basis vectors
    cols = [[A[i][j] for i in range(len(A))] for j in range(n)]
    r = 0
    for i in range(len(A)):
        # eliminate row i in columns r..n-1 via extended gcd steps
        while True:
            nz = [j for j in range(r, n) if cols[j][i] != 0]
            if len(nz) <= 1:
                break
            j0 = min(nz, key=lambda j: abs(cols[j][i]))
            for j in nz:
                if j == j0:
                    continue
                q = cols[j][i] // cols[j0][i]
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[j0])]
                U[j] = [x - q * y for x, y in zip(U[j], U[j0])]
        nz = [j for j in range(r, n) if cols[j][i] != 0]
        if nz:
            j = nz[0]
            cols[r], cols[j] = cols[j], cols[r]
            U[r], U[j] = U[j], U[r]
            r += 1
    return [tuple(U[j]) for j in range(r, n)]
