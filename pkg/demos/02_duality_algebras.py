"""Duality algebras of the four built-in period-map models.

For a Siegel-valued map N on a chart V, the duality pairs are (isometry f of
V, symplectic A) with A . N = N o f.  Working at the Lie algebra level, the
package computes the dimension of the A-stabilizer of N, the joint algebra of
compatible pairs, and which isometry generators lift -- reproducing:

    constant map         dim (u, stab, iso) = (4, 1, 3)   stab = u(1)
    identity map on H    (3, 0, 3)   the algebra embeds sl(2, R) in sp(2, R)
    axio-dilaton         (4, 1, 3)   stab = diagonal so(2) + so(2)
    cubic two-field      (3, 0, 3)   trivial stabilizer
"""

import numpy as np
import scipy.linalg

from emduality import (builtin, check_uduality_pair, killing_basis,
                       lift_killing_field, parse_isometry, stab_sp_algebra,
                       uduality_algebra)
from emduality.models import identity_isometry

for name in ("constant-i", "identity-tau", "axio-dilaton", "t3"):
    model = builtin(name)
    stab = stab_sp_algebra(model)
    udu = uduality_algebra(model)
    print(f"{name:14s} stab dim {stab.dim_stab_sp}   "
          f"(u, stab, iso_pr) = ({udu.dim_u}, {udu.dim_stab_sp}, {udu.dim_iso_pr})"
          f"   exactness gap {udu.exactness_gap}")
    for kname, x, res in udu.lift_table:
        tag = "lift found" if x is not None else "NO LIFT"
        print(f"   {kname:30s} residual {res:.1e}  {tag}")

print("\n== the discrete part ==")
rep = stab_sp_algebra(builtin("identity-tau"))
print("identity map: algebra dim 0, but -Id fixes the period map exactly:",
      rep.minus_id_fixes_period)
print("(" + rep.notes + ")")

print("\n== a finite duality pair ==")
model = builtin("identity-tau")
f = parse_isometry("translate:1.0", model.chart)
a = np.array([[1.0, 0.0], [1.0, 1.0]])
print("pair (tau -> tau+1, lower-triangular A): residual",
      f"{check_uduality_pair(f, a, model):.2e}")
print("pair (tau -> tau+1, Id):                 residual",
      f"{check_uduality_pair(f, np.eye(2), model):.2e}  (not a duality pair)")

print("\n== exponentiating stabilizer elements ==")
model = builtin("axio-dilaton")
stab = stab_sp_algebra(model)
x = stab.basis[0]
ident = identity_isometry(model.chart)
for t in (0.1, 0.5, 1.0):
    res = check_uduality_pair(ident, scipy.linalg.expm(t * x), model)
    print(f"exp({t:.1f} X) fixes the period map to {res:.2e}")

print("\n== lifting a translation ==")
model = builtin("identity-tau")
xi = killing_basis(model.chart)[0]
x, res = lift_killing_field(model, xi)
print(f"d_x lifts with residual {res:.1e}; the lift is the nilpotent generator:")
print(x)
