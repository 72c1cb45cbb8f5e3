"""
Weak invariant of a layered crystal
===================================

Stacking Chern layers along the third direction gives a three-dimensional
insulator whose pairing over the directions {1, 2} equals the layer Chern
number per layer.  Interlayer hopping that keeps the gap open leaves it
unchanged.
"""

from nctopo import Lattice, build_hamiltonian, fermi_projection, hofstadter2d, stacked_chern3d
from nctopo.invariants import index_invariant_even, local_invariant_even

layer = fermi_projection(build_hamiltonian(hofstadter2d(1 / 3), None, Lattice(2, 12)), bands=1, n_bands=3)
print(f"single layer, L=12: {local_invariant_even(layer, [1, 2]).value:.5f}")

lat = Lattice(3, 12)
for t3 in (0.0, 0.1, 0.3):
    fd = fermi_projection(build_hamiltonian(stacked_chern3d(1 / 3, t3), None, lat), bands=1, n_bands=3)
    print(f"t3={t3:.1f}: gap {fd.gap}, local {local_invariant_even(fd, [1, 2]).value:.5f},"
          f" index {index_invariant_even(fd, [1, 2]).value:.5f}")
