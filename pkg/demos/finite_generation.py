"""Generators of an adjoint ring on the projective line, with a degree bound."""

from adjoint_kernel.construction import run_pipeline
from adjoint_kernel.io import bundled_instance, parse_instance

doc = parse_instance(bundled_instance("p1"))
cert = run_pipeline(doc.variety, doc.system, "P1")
for reps in cert.pieces:
    for r in reps:
        print(f"base point {tuple(str(t) for t in r.base_point)}: N = {r.N}, "
              f"{len(r.generators)} generators, verified to degree {r.verified_to}")
for gs in cert.image_generators:
    print("generators of the image ring:")
    for lam, m in gs:
        print("  degree", lam, "monomial", m)
