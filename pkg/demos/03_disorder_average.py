"""
Quantization under random hopping
=================================

Random hopping amplitudes t (1 + lambda w) with w uniform in [-1/2, 1/2).
The gap shrinks as lambda grows but the Chern number stays put while the
Fermi level sits in a gap.
"""

import numpy as np

from nctopo import DisorderSample, Lattice, build_hamiltonian, fermi_projection, hofstadter2d
from nctopo.invariants import index_invariant_even, local_invariant_even

lat = Lattice(2, 24)
for lam in (0.0, 0.5, 1.0, 1.5):
    model = hofstadter2d(1 / 3, disorder=lam)
    loc, idx, gaps = [], [], []
    for seed in range(5):
        sample = DisorderSample.generate(seed, lat.shape, model.n_channels)
        fd = fermi_projection(build_hamiltonian(model, sample, lat), bands=1, n_bands=3)
        gaps.append(fd.gap[1] - fd.gap[0])
        loc.append(local_invariant_even(fd, [1, 2]).value)
        idx.append(index_invariant_even(fd, [1, 2]).value)
    print(f"lambda={lam:.1f}  gap={np.mean(gaps):.3f}  local={np.mean(loc):.4f}+-{np.std(loc):.4f}"
          f"  index={np.mean(idx):.4f}+-{np.std(idx):.4f}")
