"""Hilbert basis of a cone and section counts on the projective plane."""

from adjoint_kernel.cones import Cone, hilbert_basis
from adjoint_kernel.toric import projective_space, sections

cone = Cone([(1, 0), (1, 3)])
print("Hilbert basis of cone((1,0),(1,3)):", hilbert_basis(cone))

P2 = projective_space(2)
H = P2.prime("D3")
for d in range(5):
    print(f"h0(P2, {d}H) =", len(sections(P2, H * d)))
