"""Flat symplectic bundles presented by holonomy matrices.

A flat symplectic vector bundle over a scalar manifold is captured, for
computational purposes, by the images of fundamental-group generators in
Sp(2n, R).  Based automorphisms of the bundle form the centralizer of the
holonomy; adding a compatible fiber taming cuts this down further.  Trace
vectors of holonomy words separate presentations up to conjugation.
"""

import numpy as np

from emduality import (BundlePresentation, autb_theta_algebra,
                       centralizer_algebra, conjugacy_invariants, gamma,
                       presentation_check, ElectromagneticPair)
from emduality.symplectic import random_sp

rng = np.random.default_rng(5)


def rotation(theta):
    return np.array([[np.cos(theta), -np.sin(theta)],
                     [np.sin(theta), np.cos(theta)]])


print("== trivial holonomy: everything survives ==")
for nv in (1, 2, 3):
    _, dim = centralizer_algebra(BundlePresentation(nv))
    print(f"n = {nv}: centralizer dim {dim} = dim sp({2 * nv})")

print("\n== one generator cuts it down ==")
for gen, label in ((rotation(0.7), "elliptic (rotation by 0.7)"),
                   (np.diag([2.0, 0.5]), "hyperbolic diag(2, 1/2)")):
    _, dim = centralizer_algebra(BundlePresentation(1, [gen]))
    print(f"{label}: centralizer dim {dim}")

print("\n== adding a fiber taming: the unitary subalgebra ==")
for nv in (1, 2):
    j0 = gamma(ElectromagneticPair(np.zeros((nv, nv)), np.eye(nv)))
    _, dim = autb_theta_algebra(BundlePresentation(nv), j0)
    print(f"trivial holonomy, n = {nv}: dim {dim} = dim u({nv})")

print("\n== relations are checked, not assumed ==")
g1, g2 = random_sp(1, rng), random_sp(1, rng)
torus = BundlePresentation(1, [g1, g2], relations=[[1, 2, -1, -2]])
diag = presentation_check(torus)
print("two random generators with a commutator relation:",
      "pass" if diag.ok else f"fail (violation {diag.relation_violations[0]:.3f})")
commuting = BundlePresentation(1, [rotation(0.3), rotation(1.1)],
                               relations=[[1, 2, -1, -2]])
print("two rotations with the same relation:",
      "pass" if presentation_check(commuting).ok else "fail")

print("\n== conjugation invariants ==")
pres = BundlePresentation(1, [g1, g2])
s = random_sp(1, rng)
conj = BundlePresentation(1, [s @ g @ np.linalg.inv(s) for g in pres.generators])
v1 = conjugacy_invariants(pres, 4)
v2 = conjugacy_invariants(conj, 4)
print(f"trace vectors of a presentation and its conjugate differ by "
      f"{np.max(np.abs(v1 - v2)):.2e} ({len(v1)} words up to length 4)")
w1 = conjugacy_invariants(BundlePresentation(1, [rotation(0.7)]), 1)
w2 = conjugacy_invariants(BundlePresentation(1, [rotation(0.8)]), 1)
print(f"rotations by 0.7 vs 0.8 are separated already at length 1: "
      f"traces {w1[0]:.4f} vs {w2[0]:.4f}")
