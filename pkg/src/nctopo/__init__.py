"""Topological invariants of disordered lattice models from twisted crossed
product algebras: local cocycle formulas and Fedosov index traces."""

from .clifford import CliffordRep, build_gammas
from .invariants import (
    CONSTANTS,
    InvariantReport,
    NormalizationConstants,
    fedosov_trace_index,
    index_invariant_even,
    index_invariant_odd,
    local_invariant_even,
    local_invariant_odd,
)
from .lattice_rep import (
    DisorderSample,
    FiniteRep,
    Lattice,
    commuting_translation,
    dirac_phase,
    magnetic_translation,
    represent,
)
from .nc_algebra import (
    DynamicalSystem,
    NCElement,
    TwistMatrix,
    adjoint,
    cesaro_sum,
    derivation,
    fourier_coeff,
    multiply,
    trace,
    zeta,
)
from .spectral import (
    ChiralStructure,
    FermiData,
    GapViolationError,
    Hop,
    LatticeModel,
    build_hamiltonian,
    fermi_projection,
    fermi_unitary,
    hofstadter2d,
    ssh1d,
    stacked_chern3d,
)

__version__ = "0.1.0"
