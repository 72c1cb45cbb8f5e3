"""Hamiltonians from hop specifications, Fermi projections and Fermi unitaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .lattice_rep import DisorderSample, FiniteRep, Lattice, represent
from .nc_algebra import NCElement, TwistMatrix

GAP_TOL = 1e-8


class GapViolationError(ValueError):
    """Raised when the Fermi energy lies in the spectrum."""

    def __init__(self, mu: float, nearest: np.ndarray):
        self.mu = mu
        self.nearest = np.asarray(nearest)
        super().__init__(f"Fermi energy {mu!r} is within {GAP_TOL} of eigenvalues {self.nearest.tolist()}")


class ChiralityError(ValueError):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"Hamiltonian is not chiral: ||JHJ + H|| = {residual:.3e}")


@dataclass(frozen=True)
class Hop:
    """Hop ``W_q(omega) = matrix * (1 + coupling * omega_channel(origin))``.

    ``channel=None`` gives a configuration-independent hop.  A general
    coefficient function may be given as ``function(values) -> (n, N, N)``
    acting on the per-site disorder values of shape (n, n_channels).
    """

    q: tuple[int, ...]
    matrix: np.ndarray
    channel: int | None = None
    coupling: float = 0.0
    function: Callable | None = None

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        """Fiber function on the configuration points given their values."""
        m = np.asarray(self.matrix, dtype=complex)
        if self.function is not None:
            return np.asarray(self.function(values), dtype=complex)
        if self.channel is None or self.coupling == 0.0:
            return np.broadcast_to(m, (values.shape[0],) + m.shape).copy()
        return m[None] * (1.0 + self.coupling * values[:, self.channel])[:, None, None]


@dataclass
class LatticeModel:
    """Hop list with magnetic twist.

    Only one of each pair ``q, -q`` is given; the partner is generated from
    ``W_{-q}(omega) = W_q(tau_q omega)^dagger``.  ``q = 0`` entries are the
    on-site terms and must be hermitian fiberwise.
    """

    d: int
    N: int
    hops: list[Hop]
    phi: TwistMatrix
    n_channels: int = 0
    chiral: bool = False
    n_bands: int | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for h in self.hops:
            q = tuple(int(v) for v in h.q)
            if len(q) != self.d:
                raise ValueError(f"hop {q} has wrong dimension")
            if q in seen or tuple(-v for v in q) in seen and any(q):
                raise ValueError(f"hop {q} given twice (partners are generated automatically)")
            seen.add(q)
            m = np.asarray(h.matrix)
            if m.shape != (self.N, self.N):
                raise ValueError(f"hop {q} matrix must be {self.N}x{self.N}")
            if not any(q) and h.function is None and not np.allclose(m, m.conj().T, atol=1e-12):
                raise ValueError("on-site term is not hermitian")
            if h.channel is not None and not 0 <= h.channel < self.n_channels:
                raise ValueError(f"hop {q} uses channel {h.channel} but only {self.n_channels} exist")
            if self.chiral:
                half = self.N // 2
                if self.N % 2 or np.abs(m[:half, :half]).max() > 1e-14 or np.abs(m[half:, half:]).max() > 1e-14:
                    raise ValueError("chiral models need block off-diagonal hops in the (A, B) grading")
        if self.phi.d != self.d:
            raise ValueError("flux matrix dimension mismatch")
        if self.n_bands is None:
            self.n_bands = self.N

    @property
    def radius(self) -> int:
        return max((max(abs(v) for v in h.q) for h in self.hops), default=0)

    def element(self, sample: DisorderSample | None, lat: Lattice) -> NCElement:
        """Hamiltonian as a polynomial element over the orbit of ``sample``."""
        if sample is None:
            sample = DisorderSample.zeros(lat.shape, max(self.n_channels, 1))
        if sample.shape != lat.shape:
            raise ValueError("disorder sample shape does not match the lattice")
        system = sample.system(self.N)
        # point y of the orbit sees the sample at array index y
        vals = np.asarray(sample.values)
        coeffs: dict = {}
        for h in self.hops:
            q = tuple(int(v) for v in h.q)
            w = h.evaluate(vals)
            if any(q):
                partner = tuple(-v for v in q)
                back = system.act(w, q).conj().transpose(0, 2, 1)
                coeffs[q] = coeffs.get(q, 0) + w
                coeffs[partner] = coeffs.get(partner, 0) + back
            else:
                w = 0.5 * (w + w.conj().transpose(0, 2, 1))
                coeffs[q] = coeffs.get(q, 0) + w
        return NCElement.from_dict(system, self.phi, coeffs)

    def chiral_structure(self) -> "ChiralStructure":
        if not self.chiral:
            raise ValueError("model is not chiral")
        return ChiralStructure(self.N // 2)


@dataclass(frozen=True)
class ChiralStructure:
    """Grading ``J = diag(1_n, -1_n)`` on a fiber of size 2n."""

    half: int

    @property
    def J(self) -> np.ndarray:
        return np.diag(np.r_[np.ones(self.half), -np.ones(self.half)])

    def full(self, n_sites: int) -> np.ndarray:
        return np.tile(np.r_[np.ones(self.half), -np.ones(self.half)], n_sites)


@dataclass
class FermiData:
    projector: FiniteRep
    mu: float
    gap: tuple[float, float]
    rank: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    hamiltonian: FiniteRep | None = field(default=None, repr=False)
    fermi_unitary: FiniteRep | None = field(default=None, repr=False)

    @property
    def occupied(self) -> np.ndarray:
        """Orthonormal basis of the range of the projector (columns)."""
        return self.eigenvectors[:, : self.rank]


def build_hamiltonian(model: LatticeModel, sample: DisorderSample | None, lat: Lattice) -> FiniteRep:
    """Matrix of ``H = sum_q sum_x U_q |x><x| (x) W_q(tau_{-x} omega)``."""
    if lat.bc == "periodic" and 2 * model.radius >= lat.L:
        raise ValueError(f"hop radius {model.radius} is not below L/2")
    h = model.element(sample, lat)
    origin = sample.origin if sample is not None else DisorderSample.zeros(lat.shape, 1).origin
    rep = represent(h, origin, lat)
    m = rep.matrix
    resid = abs(m - m.conj().T).max()
    if resid > 1e-12:
        raise ValueError(f"hop list is not hermitian (residual {resid:.2e})")
    rep.metadata.update({"kind": "hamiltonian", "model": model.name, "seed": getattr(sample, "seed", None)})
    return rep


def spectrum(H: FiniteRep) -> np.ndarray:
    return sla.eigvalsh(H.dense())


def mu_from_bands(eigenvalues: np.ndarray, bands: int, n_bands: int) -> float:
    """Midpoint of the gap above the lowest ``bands`` of ``n_bands`` bands."""
    ev = np.sort(eigenvalues)
    if not 0 < bands < n_bands:
        raise ValueError(f"band count must be in 1..{n_bands - 1}")
    n = len(ev) * bands // n_bands
    return float(0.5 * (ev[n - 1] + ev[n]))


def fermi_projection(H: FiniteRep, mu: float | None = None, bands: int | None = None, n_bands: int | None = None) -> FermiData:
    """Spectral projection of H below mu by dense diagonalization.

    Either ``mu`` or ``bands`` (with the total ``n_bands``) must be given.
    """
    evals, evecs = sla.eigh(H.dense())
    if mu is None:
        if bands is None or n_bands is None:
            raise ValueError("give either mu or bands and n_bands")
        mu = mu_from_bands(evals, bands, n_bands)
    mu = float(mu)
    close = np.abs(evals - mu) <= GAP_TOL
    if np.any(close):
        raise GapViolationError(mu, evals[close])
    rank = int(np.searchsorted(evals, mu))
    V = evecs[:, :rank]
    P = V @ V.conj().T
    lower = float(evals[rank - 1]) if rank > 0 else -np.inf
    upper = float(evals[rank]) if rank < len(evals) else np.inf
    proj = FiniteRep(P, H.internal_dim, H.lattice, {"kind": "fermi_projection", "mu": mu})
    return FermiData(proj, mu, (lower, upper), rank, evals, evecs, H)


def chirality_residual(H: FiniteRep, chi: ChiralStructure) -> float:
    j = chi.full(H.lattice.n_sites)
    m = H.dense()
    return float(np.linalg.norm(j[:, None] * m * j[None, :] + m, ord=2))


def fermi_unitary(fd: FermiData, chi: ChiralStructure) -> FiniteRep:
    """Lower-left block of ``1 - 2 P_F`` in the (A, B) grading, mapping A to B."""
    if fd.hamiltonian is None:
        raise ValueError("Fermi data carry no Hamiltonian to check chirality against")
    resid = chirality_residual(fd.hamiltonian, chi)
    if resid > 1e-10:
        raise ChiralityError(resid)
    if abs(fd.mu) > 1e-12:
        raise ValueError("Fermi unitary needs mu = 0")
    j = chi.full(fd.projector.lattice.n_sites)
    Q = np.eye(fd.projector.dim) - 2.0 * fd.projector.dense()
    a, b = j > 0, j < 0
    U = Q[np.ix_(b, a)]
    rep = FiniteRep(U, chi.half, fd.projector.lattice, {"kind": "fermi_unitary"})
    fd.fermi_unitary = rep
    return rep


def assemble_flat_hamiltonian(U: FiniteRep, chi: ChiralStructure) -> np.ndarray:
    """``1 - 2 P_F`` rebuilt from its lower-left block ``U``."""
    n = U.lattice.n_sites
    j = chi.full(n)
    a, b = np.flatnonzero(j > 0), np.flatnonzero(j < 0)
    out = np.zeros((len(j), len(j)), dtype=complex)
    out[np.ix_(b, a)] = U.dense()
    out[np.ix_(a, b)] = U.dense().conj().T
    return out


# presets ------------------------------------------------------------------


def hofstadter2d(flux: float = 1.0 / 3.0, disorder: float = 0.0, t: float = 1.0) -> LatticeModel:
    """Square-lattice Hofstadter model with random hopping amplitudes.

    ``flux`` is the flux per plaquette in units of 2 pi.  The twist entry is
    ``phi_12 = pi * flux`` because the symmetric-gauge plaquette phase is
    ``2 phi_12``.  Hops are ``W_{e_j} = t (1 + disorder * omega_j)``.
    """
    phi = TwistMatrix.from_upper(2, {(1, 2): np.pi * flux})
    hops = [Hop((1, 0), np.array([[t]]), 0, disorder), Hop((0, 1), np.array([[t]]), 1, disorder)]
    q = Fraction(flux).limit_denominator(1000).denominator
    return LatticeModel(2, 1, hops, phi, n_channels=2, n_bands=q, name="hofstadter2d",
                        params={"flux": flux, "disorder": disorder, "t": t})


def ssh1d(t1: float = 0.5, t2: float = 1.0, disorder: float = 0.0) -> LatticeModel:
    """Chiral two-band chain with orbitals ordered (A, B).

    Intra-cell amplitude ``t1`` and inter-cell amplitude ``t2`` from B at x to
    A at x+1; both carry random relative fluctuations of strength
    ``disorder``.  ``|t2| > |t1|`` is the winding-one phase.
    """
    onsite = np.array([[0.0, t1], [t1, 0.0]])
    inter = np.array([[0.0, t2], [0.0, 0.0]])

    def onsite_fn(values):
        s = 1.0 + disorder * values[:, 0]
        return onsite[None] * s[:, None, None]

    hops = [Hop((0,), onsite, None, 0.0, onsite_fn if disorder else None), Hop((1,), inter, 1, disorder)]
    return LatticeModel(1, 2, hops, TwistMatrix.zero(1), n_channels=2, chiral=True, n_bands=2, name="ssh1d",
                        params={"t1": t1, "t2": t2, "disorder": disorder})


def stacked_chern3d(flux: float = 1.0 / 3.0, t3: float = 0.0, disorder: float = 0.0, t: float = 1.0) -> LatticeModel:
    """Hofstadter layers in the (1, 2) plane coupled by hopping ``t3`` along 3."""
    phi = TwistMatrix.from_upper(3, {(1, 2): np.pi * flux})
    hops = [
        Hop((1, 0, 0), np.array([[t]]), 0, disorder),
        Hop((0, 1, 0), np.array([[t]]), 1, disorder),
    ]
    if t3:
        hops.append(Hop((0, 0, 1), np.array([[t3]]), 2, disorder))
    q = Fraction(flux).limit_denominator(1000).denominator
    return LatticeModel(3, 1, hops, phi, n_channels=3, n_bands=q, name="stacked_chern3d",
                        params={"flux": flux, "t3": t3, "disorder": disorder, "t": t})


PRESETS = {"hofstadter2d": hofstadter2d, "ssh1d": ssh1d, "stacked_chern3d": stacked_chern3d}

__all__ = [
    "Hop",
    "LatticeModel",
    "ChiralStructure",
    "FermiData",
    "GapViolationError",
    "ChiralityError",
    "build_hamiltonian",
    "spectrum",
    "mu_from_bands",
    "fermi_projection",
    "fermi_unitary",
    "assemble_flat_hamiltonian",
    "chirality_residual",
    "hofstadter2d",
    "ssh1d",
    "stacked_chern3d",
    "PRESETS",
]
