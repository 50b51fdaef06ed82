"""Exact surface jets versus discrete operators.

Evaluates closed-form geometry (metric, second fundamental form, mean
curvature, curvature gradient) on a sphere, a torus and a cylinder, then
triangulates each surface and compares the mesh estimates against the
jets stored at the sampled vertices.
"""
import numpy as np

from curvbc import (AnalyticSurface, adapted_coefficient_divergence,
                    curvature_identity_residual, evaluate_jet, mean_curvature,
                    sample_mesh)

sphere = AnalyticSurface.sphere(2.0)
torus = AnalyticSurface.torus(2.0, 0.5)
cylinder = AnalyticSurface.cylinder(0.5, 2.0)

print("pointwise jets")
jet = evaluate_jet(sphere, 1.1, 0.7)
print(f"  sphere R=2 at (1.1, 0.7): H = {jet.mean_curvature:.6f} (exact 0.5), "
      f"det g = {np.linalg.det(jet.metric):.6f}, |d_H| = {np.abs(jet.d_H).max():.1e}")

jet = evaluate_jet(torus, 0.9, 0.0)     # outer equator
print(f"  torus (2, 0.5) outer equator: H = {jet.mean_curvature:.6f} (exact 1.2)")
jet = evaluate_jet(torus, 0.9, np.pi)   # inner equator
print(f"  torus inner equator:          H = {jet.mean_curvature:.6f} (exact 2/3)")

jet = evaluate_jet(cylinder, 0.3, 2.0)
print(f"  cylinder r=0.5 lateral wall:  H = {jet.mean_curvature:.6f} (exact 1.0)")

# sampled meshes carry the exact jet at every chart-regular vertex
print()
print("sampled meshes vs jets")
for name, surface, res in [("sphere", sphere, (32, 64)),
                           ("torus", torus, (32, 64)),
                           ("cylinder", cylinder, (12, 32))]:
    mesh, jets = sample_mesh(surface, res)
    H = mean_curvature(mesh)
    devs = [abs(H[i] - j.mean_curvature) for i, j in enumerate(jets) if j is not None]
    n_sing = sum(j is None for j in jets)
    print(f"  {name:<8} {res}: {mesh.n_vertices} verts, "
          f"{n_sing} chart-singular, max |H_mesh - H_jet| = {max(devs):.2e}, "
          f"identity residual = {curvature_identity_residual(mesh):.3f}")

# the cylinder residual is dominated by the cap rim, a genuine crease where
# the smooth identity does not apply; smooth surfaces converge instead
mesh, _ = sample_mesh(torus, (64, 128))
print(f"  torus    (64, 128): identity residual = "
      f"{curvature_identity_residual(mesh):.3f}")

# covariant divergence of a tangential coefficient field, adapted layout:
# rows are the two chart directions, columns (tangent, tangent, inward normal)
print()
jet = evaluate_jet(torus, 0.4, 1.7)
coeffs = np.array([[0.3, -0.1, 0.7],
                   [0.2, 0.5, -0.4]])
div = adapted_coefficient_divergence(jet, coeffs)
print(f"covariant divergence at a torus point (Cartesian 3-vector): {div}")
# a pure normal column contributes through the curvature terms only
normal_only = np.zeros((2, 3))
normal_only[:, 2] = coeffs[:, 2]
div_n = adapted_coefficient_divergence(jet, normal_only)
print(f"normal-column part alone:                                   {div_n}")
