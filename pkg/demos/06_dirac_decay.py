"""
How fast the Dirac phase commutes with translations
===================================================

Row sums of [F, u] fall off like 1/r away from the Dirac centre; this is what
makes the Fredholm module summable.
"""

import numpy as np

from nctopo import Lattice, TwistMatrix, build_gammas, dirac_phase, magnetic_translation
from nctopo.lattice_rep import commutator_decay, fit_power_law

lat = Lattice(2, 41, "open")
x0 = (0.5, 0.5)
F = dirac_phase([1, 2], x0, lat, build_gammas(2), dense=False)
for q in [(1, 0), (0, 1), (1, 1)]:
    U = magnetic_translation(q, TwistMatrix.zero(2), lat, dense=False).matrix
    shells = commutator_decay(F, U, lat, x0, [1, 2])
    print(f"q={q}: fitted exponent {fit_power_law(shells, 2, 15):+.3f}")
    print("   r  :", " ".join(f"{r:>6d}" for r in (2, 4, 8, 16)))
    print("  max :", " ".join(f"{shells[r]:6.3f}" for r in (2, 4, 8, 16)))
print("r * max row sum at r = 8, 16:", np.round([8 * shells[8], 16 * shells[16]], 3))
