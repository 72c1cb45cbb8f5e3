"""
Winding number of a chiral chain
================================

The Fermi unitary of the two-band chiral chain carries the odd invariant.
The local formula pairs it with the one-direction cocycle; the index route
computes the index of the Toeplitz-like compression P u P + (1 - P).
"""

from nctopo import DisorderSample, Lattice, build_hamiltonian, fermi_projection, fermi_unitary, ssh1d
from nctopo.invariants import index_invariant_odd, local_invariant_odd

lat = Lattice(1, 128)
for t1, t2, lam in [(0.5, 1.0, 0.0), (1.0, 0.5, 0.0), (0.0, 1.0, 0.0), (0.7, 1.0, 0.8)]:
    model = ssh1d(t1, t2, disorder=lam)
    sample = DisorderSample.generate(1, lat.shape, model.n_channels)
    fd = fermi_projection(build_hamiltonian(model, sample, lat), 0.0)
    U = fermi_unitary(fd, model.chiral_structure())
    loc = local_invariant_odd(U, [1])
    idx = index_invariant_odd(U, [1])
    print(f"t1={t1:.1f} t2={t2:.1f} lambda={lam:.1f}:  pairing {loc.zeta_value:+.4f}"
          f"  local {loc.value:+.4f}  index {idx.value:+.4f}")
