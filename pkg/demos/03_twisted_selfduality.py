"""Twisted self-duality: how the doubled field strength ties to the couplings.

The doubled two-form block V = (F, G) with G = R F - I *F satisfies the
pointwise constraint *V = -J(V), where J is the taming of the couplings.
Equivalently V lies in the +1 eigenspace of the twisted star (Hodge on the
form index, J on the fiber index), and its self-dual complexification has
lower block conj(R + iI) F+.  The gauge stress tensor can be written purely
symplectically as omega(V, J V) without mentioning (R, I).
"""

import numpy as np

from emduality import (assemble_V, complexify_plus, gamma, hodge2, project_sd,
                       random_couplings, selfduality_violation, stress_gauge,
                       stress_gauge_couplings, twisted_star)
from emduality.fields import ETA, random_lorentz_metric, random_two_forms
from emduality.symplectic import conjugate_taming, random_sp

rng = np.random.default_rng(7)

print("== involution signs ==")
g = random_lorentz_metric(rng)
w = random_two_forms(1, rng)[0]
print("** w + w      =", np.max(np.abs(hodge2(g, hodge2(g, w)) + w)), " (Hodge squares to -1)")
em = random_couplings(2, rng)
j = gamma(em)
v = random_two_forms(4, rng)
ts2 = twisted_star(g, j, twisted_star(g, j, v))
print("star_J^2 v - v =", np.max(np.abs(ts2 - v)), " (twisted star squares to +1)")

print("\n== the constraint and its block solution ==")
f = random_two_forms(2, rng)
v = assemble_V(f, em, g)
print("V = (F, R F - I *F) solves *V = -J V to", selfduality_violation(g, j, v))
vp, vm = project_sd(g, j, v)
print("its twisted-star -1 component is", np.max(np.abs(vm)),
      "(solutions carry eigenvalue +1)")

print("\n== the period-matrix block identity ==")
vplus = complexify_plus(v, g)
n_mat = em.R + 1j * em.I
pred = np.einsum("LS,Smn->Lmn", n_mat.conj(), vplus[:2])
print("lower block of V+ minus conj(N) F+:", np.max(np.abs(vplus[2:] - pred)))

print("\n== gauge stress, two ways ==")
t_sympl = stress_gauge(g, j, v)
t_coupl = stress_gauge_couplings(g, em, f)
print("omega-form vs coupling-form:", np.max(np.abs(t_sympl - t_coupl)))
print("trace (should vanish):      ",
      abs(np.einsum("ab,ab->", np.linalg.inv(g), t_sympl)))

print("\n== duality invariance of the stress ==")
worst = 0.0
for _ in range(100):
    a = random_sp(2, rng)
    ja = conjugate_taming(a, j)
    va = np.einsum("AB,Bmn->Amn", a, v)
    worst = max(worst, np.max(np.abs(stress_gauge(g, ja, va) - t_sympl)))
print("stress_gauge(g, A J A^-1, A V) - stress_gauge(g, J, V):", worst)

print("\n== a constant electric field ==")
e_val = 0.8
f1 = np.zeros((1, 4, 4))
f1[0, 0, 1], f1[0, 1, 0] = e_val, -e_val
from emduality import ElectromagneticPair
em1 = ElectromagneticPair(np.zeros((1, 1)), np.eye(1))
t = stress_gauge(ETA, gamma(em1), assemble_V(f1, em1, ETA))
print("stress of E dt^dx on flat space:", np.diag(t),
      " (energy density, tension along x, transverse pressure)")
