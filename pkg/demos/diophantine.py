"""Simultaneous rational approximation of a point with quadratic coordinates."""

from fractions import Fraction

from adjoint_kernel.diophantine import approximate, check_certificate
from adjoint_kernel.exact import QuadNumber, QuadVec

t = QuadNumber(0, Fraction(1, 2), 2)
x = QuadVec.from_entries([t, 1 - t])
cert = approximate(x, Fraction(1, 100), 6)
for w, p, r in zip(cert.points, cert.denominators, cert.weights):
    print(f"w = ({', '.join(map(str, w))}), p = {p}, weight = {r}")
print("certificate valid:", check_certificate(cert).ok)
