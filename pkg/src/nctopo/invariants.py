"""Topological invariants by the local cocycle formula and by Fedosov-type
index traces, with the normalization constants linking the two."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .clifford import build_gammas
from .lattice_rep import FiniteRep, Lattice, clifford_extend, dirac_phase
from .nc_algebra import permutations_with_sign
from .spectral import FermiData

ROUND_THRESHOLD = 0.15


# normalization constants ----------------------------------------------------


def half_factorial(m: int) -> float:
    """``(m - 1/2)! = (m - 1/2)(m - 3/2) ... (1/2)``."""
    return math.prod(j - 0.5 for j in range(1, m + 1))


def double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


@dataclass(frozen=True)
class NormalizationConstants:
    """Constants of the index theorems.

    ``lambda_odd`` is ``1 / (2^(m+1) (2m-1)!!)``, the value for which
    ``Lambda * Gamma = (-1)^m / 4^m`` so that index and pairing agree (a pure
    shift has index -1 and ``zeta_1(u*, u) = -4``).  The alternative
    ``1 / (2^(m-1) (2m-1)!!)`` is kept as :meth:`lambda_odd_alt`; it is four
    times larger.
    """

    @staticmethod
    def gamma_even(m: int) -> float:
        return (-1) ** m * math.factorial(m) / 2.0

    @staticmethod
    def gamma_odd(m: int) -> float:
        return 2.0 * (-1) ** m * half_factorial(m)

    @staticmethod
    def lambda_even(m: int) -> float:
        return 1.0 / math.factorial(m)

    @staticmethod
    def lambda_odd(m: int) -> float:
        return 1.0 / (2 ** (m + 1) * double_factorial(2 * m - 1))

    @staticmethod
    def lambda_odd_alt(m: int) -> float:
        return 1.0 / (2 ** (m - 1) * double_factorial(2 * m - 1))

    @staticmethod
    def delta(k: int) -> complex:
        if k % 2 == 0:
            return (2j * np.pi) ** (k // 2)
        return -4j * (2j * np.pi) ** ((k - 1) // 2)

    @staticmethod
    def lambda_tilde_even(k: int) -> complex:
        return (2j * np.pi) ** (k // 2) / math.factorial(k // 2)

    @classmethod
    def index_factor(cls, k: int) -> float:
        """Factor turning a pairing ``zeta_I`` into an index, ``k = |I|``."""
        return cls.lambda_even(k // 2) if k % 2 == 0 else cls.lambda_odd((k + 1) // 2)

    @classmethod
    def identity_residual(cls, k: int) -> float:
        """``|2 Gamma_k Lambda~_k - i^k Delta_k|`` for even k."""
        if k % 2:
            raise ValueError("identity is stated for even k")
        lhs = 2.0 * cls.gamma_even(k // 2) * cls.lambda_tilde_even(k)
        return float(abs(lhs - 1j**k * cls.delta(k)))


CONSTANTS = NormalizationConstants()


# reports --------------------------------------------------------------------


@dataclass
class InvariantReport:
    """Result of one invariant computation.

    ``value`` is on the index scale (``Lambda_|I| * zeta_I``) with the
    normalized fiber trace; ``zeta_value`` is the cocycle pairing itself;
    ``per_site_value`` multiplies ``value`` by the fiber size, and
    ``rounded`` / ``deviation`` refer to it.
    """

    I: list[int]
    route: str
    value: float
    zeta_value: float
    per_site_value: float
    rounded: int | None
    deviation: float
    samples: list[float]
    seeds: list
    x0: list
    lattice: dict
    mu: float | None
    power: int | None
    fiber_dim: int
    imag_residual: float
    wall_time: float
    threshold: float = ROUND_THRESHOLD
    flags: list[str] = field(default_factory=list)

    @property
    def std(self) -> float:
        return float(np.std(self.samples)) if self.samples else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _report(I, route, samples, zeta_samples, imag, fiber_dim, lat, seeds, x0s, mu, power, t0, threshold, flags=()):
    value = float(np.mean(samples))
    per_site = value * fiber_dim
    nearest = int(round(per_site))
    dev = abs(per_site - nearest)
    return InvariantReport(
        I=list(I),
        route=route,
        value=value,
        zeta_value=float(np.mean(zeta_samples)),
        per_site_value=per_site,
        rounded=nearest if dev < threshold else None,
        deviation=dev,
        samples=[float(s) for s in samples],
        seeds=list(seeds),
        x0=[list(map(float, x)) for x in x0s],
        lattice={"d": lat.d, "L": lat.L, "bc": lat.bc},
        mu=mu,
        power=power,
        fiber_dim=fiber_dim,
        imag_residual=float(imag),
        wall_time=time.perf_counter() - t0,
        threshold=threshold,
        flags=list(flags),
    )


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def _check_I(I, d, parity):
    I = list(I)
    if not I or len(set(I)) != len(I) or any(not 1 <= j <= d for j in I):
        raise ValueError(f"index set {I} must consist of distinct directions in 1..{d}")
    if len(I) % 2 != parity:
        raise ValueError(f"index set {I} has the wrong parity for this route")
    return I


# local route ----------------------------------------------------------------


def displacement(lat: Lattice, j: int, fiber_dim: int) -> np.ndarray:
    """Minimal-image displacement matrix ``x_j - y_j`` over sites x fiber."""
    x = lat.coords()[:, j - 1]
    diff = lat.minimal_image(x[:, None] - x[None, :]).astype(float)
    return np.kron(diff, np.ones((fiber_dim, fiber_dim)))


def derivation_surrogate(A: np.ndarray, disp: np.ndarray) -> np.ndarray:
    """``(D_j A)_{xy} = -i (x_j - y_j) A_{xy}`` with minimal-image displacement."""
    return -1j * disp * A


def local_pairing(args: Sequence[np.ndarray], I: Sequence[int], lat: Lattice, fiber_dim: int) -> complex:
    """``Delta_k sum_rho (-1)^rho (1/V) Tr(a_0 prod_i D_{rho_i} a_i)``,
    ``V = n_sites * fiber_dim``."""
    if lat.bc != "periodic":
        raise ValueError("the local route needs periodic boundary conditions")
    I = list(I)
    disps = {j: displacement(lat, j, fiber_dim) for j in set(I)}
    derivs = {(i, j): derivation_surrogate(a, disps[j]) for i, a in enumerate(args[1:]) for j in set(I)}
    total = 0.0 + 0.0j
    for sign, perm in permutations_with_sign(len(I)):
        prod = args[0]
        for i, slot in enumerate(perm):
            prod = prod @ derivs[i, I[slot]]
        total += sign * np.trace(prod)
    return CONSTANTS.delta(len(I)) * total / (lat.n_sites * fiber_dim)


def local_invariant_even(
    P: FermiData | Sequence[FermiData],
    I: Sequence[int],
    lat: Lattice | None = None,
    seeds: Sequence | None = None,
    threshold: float = ROUND_THRESHOLD,
) -> InvariantReport:
    """Even pairing ``zeta_I(p, ..., p)`` of Fermi projections, averaged over
    the given disorder samples."""
    t0 = time.perf_counter()
    data = _as_list(P)
    lat = lat or data[0].projector.lattice
    if lat.bc != "periodic":
        raise ValueError("the local route needs periodic boundary conditions")
    I = _check_I(I, lat.d, 0)
    N = data[0].projector.internal_dim
    zs, imag = [], 0.0
    for fd in data:
        p = fd.projector.dense()
        z = local_pairing([p] * (len(I) + 1), I, lat, N)
        zs.append(z.real)
        imag = max(imag, abs(z.imag))
    factor = CONSTANTS.index_factor(len(I))
    vals = [factor * z for z in zs]
    seeds = list(seeds) if seeds is not None else [fd.projector.metadata.get("seed") for fd in data]
    return _report(I, "local", vals, zs, imag, N, lat, seeds, [], data[0].mu, None, t0, threshold)


def local_invariant_odd(
    U: FiniteRep | Sequence[FiniteRep],
    I: Sequence[int],
    lat: Lattice | None = None,
    seeds: Sequence | None = None,
    threshold: float = ROUND_THRESHOLD,
) -> InvariantReport:
    """Odd pairing ``zeta_I(u*, u, u*, ..., u)`` of Fermi unitaries."""
    t0 = time.perf_counter()
    data = _as_list(U)
    lat = lat or data[0].lattice
    if lat.bc != "periodic":
        raise ValueError("the local route needs periodic boundary conditions")
    I = _check_I(I, lat.d, 1)
    N = data[0].internal_dim
    zs, imag = [], 0.0
    for rep in data:
        u = rep.dense()
        us = u.conj().T
        args = [us if i % 2 == 0 else u for i in range(len(I) + 1)]
        z = local_pairing(args, I, lat, N)
        zs.append(z.real)
        imag = max(imag, abs(z.imag))
    factor = CONSTANTS.index_factor(len(I))
    vals = [factor * z for z in zs]
    seeds = list(seeds) if seeds is not None else [rep.metadata.get("seed") for rep in data]
    return _report(I, "local", vals, zs, imag, N, lat, seeds, [], 0.0, None, t0, threshold)


# index route ----------------------------------------------------------------


def fedosov_trace_index(
    T: np.ndarray,
    n: int,
    domain_weights: np.ndarray | None = None,
    codomain_weights: np.ndarray | None = None,
) -> float:
    """``Tr (1 - T*T)^n - Tr (1 - TT*)^n`` for a (possibly rectangular) T.

    Optional weights (vectors for diagonal weights, or matrices) multiply the
    two powers inside the traces.
    """
    if n < 1:
        raise ValueError("power must be at least 1")
    T = np.asarray(T.dense() if isinstance(T, FiniteRep) else T)
    m, k = T.shape
    norm = np.linalg.norm(T, ord=2) if T.size else 0.0
    if norm > 1.0 + 1e-8:
        raise ValueError(f"operator norm {norm:.6g} exceeds 1")
    dom = np.linalg.matrix_power(np.eye(k) - T.conj().T @ T, n)
    cod = np.linalg.matrix_power(np.eye(m) - T @ T.conj().T, n)
    return float(np.real(_weighted_trace(dom, domain_weights) - _weighted_trace(cod, codomain_weights)))


def _weighted_trace(M: np.ndarray, w) -> complex:
    if w is None:
        return np.trace(M)
    w = np.asarray(w)
    if w.ndim == 1:
        return np.dot(np.diagonal(M), w)
    return np.trace(M @ w)


def x0_points(policy, k: int) -> list[tuple[float, ...]]:
    """Sample points for the Dirac shift.

    ``"center"`` or ``None`` gives ``(1/2, ..., 1/2)``; an integer G gives
    the G^k midpoint grid; an explicit list is returned unchanged.
    """
    if policy is None or policy == "center":
        return [(0.5,) * k]
    if isinstance(policy, (int, np.integer)):
        g = (np.arange(policy) + 0.5) / policy
        return [tuple(p) for p in np.array(np.meshgrid(*([g] * k), indexing="ij")).reshape(k, -1).T]
    pts = [tuple(float(v) for v in np.atleast_1d(p)) for p in policy]
    if any(len(p) != k for p in pts):
        raise ValueError("x0 points must have one entry per direction")
    return pts


def default_window(lat: Lattice) -> float:
    return lat.L / 4.0


def window_weights(lat: Lattice, I: Sequence[int], x0, radius: float, fiber_dim: int) -> np.ndarray:
    """Indicator of sites with ``|X_I + x0| <= radius`` over sites x fiber."""
    pos = lat.coords()[:, [j - 1 for j in I]] + np.asarray(x0, float)
    inside = (np.linalg.norm(pos, axis=1) <= radius).astype(float)
    return np.repeat(inside, fiber_dim)


def index_even_sample(
    occupied: np.ndarray,
    I: Sequence[int],
    x0,
    lat: Lattice,
    fiber_dim: int,
    n: int,
    window: float | None = None,
) -> float:
    """Graded Fedosov trace for the projection onto span(occupied).

    The compression of the Dirac phase to ``Ran P (x) C^c`` is split by the
    chiral grading into ``A : Ran P (x) E_+ -> Ran P (x) E_-`` and the
    windowed difference ``Tr (1 - A*A)^n W - Tr (1 - AA*)^n W`` is returned.
    On a finite torus the unwindowed difference vanishes identically; the
    window keeps the trace near the Dirac centre and away from the seam.
    """
    I = list(I)
    cr = build_gammas(len(I))
    evals, evecs = np.linalg.eigh(cr.chiral)
    Ep, Em = evecs[:, evals > 0], evecs[:, evals < 0]
    pos = lat.coords()[:, [j - 1 for j in I]] + np.asarray(x0, float)
    unit = np.repeat(pos / np.linalg.norm(pos, axis=1, keepdims=True), fiber_dim, axis=0)
    V = occupied
    A = 0.0
    for i, g in enumerate(cr.gammas):
        block = Em.conj().T @ g @ Ep
        A = A + np.kron(block, V.conj().T @ (unit[:, i, None] * V))
    radius = default_window(lat) if window is None else window
    w = window_weights(lat, I, x0, radius, fiber_dim)
    Wr = V.conj().T @ (w[:, None] * V)
    half = Ep.shape[1]
    Wg = np.kron(np.eye(half), Wr)
    return fedosov_trace_index(A, n, Wg, Wg)


def index_odd_sample(
    u: np.ndarray,
    I: Sequence[int],
    x0,
    lat: Lattice,
    fiber_dim: int,
    n: int,
    window: float | None = None,
) -> float:
    """Windowed Fedosov trace of ``T = P_x0 u P_x0 + (1 - P_x0)`` with
    ``P_x0 = (1 + F_x0)/2``."""
    I = list(I)
    cr = build_gammas(len(I))
    F = dirac_phase(I, x0, lat, cr, fiber_dim, dense=True).dense()
    P = 0.5 * (np.eye(F.shape[0]) + F)
    Ue = clifford_extend(u, cr.dim)
    T = P @ Ue @ P + (np.eye(F.shape[0]) - P)
    radius = default_window(lat) if window is None else window
    w = np.tile(window_weights(lat, I, x0, radius, fiber_dim), cr.dim)
    return fedosov_trace_index(T, n, w, w)


def _transverse_volume(lat: Lattice, I) -> int:
    return lat.L ** (lat.d - len(I))


def index_invariant_even(
    P: FermiData | Sequence[FermiData],
    I: Sequence[int],
    x0_policy=None,
    n: int | None = None,
    lat: Lattice | None = None,
    window: float | None = None,
    seeds: Sequence | None = None,
    threshold: float = ROUND_THRESHOLD,
) -> InvariantReport:
    """Index route for even |I|; the value is divided by transverse volume
    times fiber size and averaged over x0 points and samples."""
    t0 = time.perf_counter()
    data = _as_list(P)
    lat = lat or data[0].projector.lattice
    I = _check_I(I, lat.d, 0)
    k = len(I)
    n_default = k // 2 + 1
    n = n_default if n is None else int(n)
    flags = [] if n >= n_default else [f"power {n} below the summability bound {n_default}"]
    N = data[0].projector.internal_dim
    pts = x0_points(x0_policy, k)
    norm = _transverse_volume(lat, I) * N
    vals = []
    for fd in data:
        per_x0 = [index_even_sample(fd.occupied, I, x0, lat, N, n, window) / norm for x0 in pts]
        vals.append(float(np.mean(per_x0)))
    factor = CONSTANTS.index_factor(k)
    zs = [v / factor for v in vals]
    seeds = list(seeds) if seeds is not None else [fd.projector.metadata.get("seed") for fd in data]
    return _report(I, "index", vals, zs, 0.0, N, lat, seeds, pts, data[0].mu, n, t0, threshold, flags)


def index_invariant_odd(
    U: FiniteRep | Sequence[FiniteRep],
    I: Sequence[int],
    x0_policy=None,
    n: int | None = None,
    lat: Lattice | None = None,
    window: float | None = None,
    seeds: Sequence | None = None,
    threshold: float = ROUND_THRESHOLD,
) -> InvariantReport:
    """Index route for odd |I| applied to unitaries."""
    t0 = time.perf_counter()
    data = _as_list(U)
    lat = lat or data[0].lattice
    I = _check_I(I, lat.d, 1)
    k = len(I)
    n_default = (k + 1) // 2
    n = n_default if n is None else int(n)
    flags = [] if n >= n_default else [f"power {n} below the summability bound {n_default}"]
    N = data[0].internal_dim
    pts = x0_points(x0_policy, k)
    norm = _transverse_volume(lat, I) * N
    vals = []
    for rep in data:
        u = rep.dense()
        resid = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
        if resid > 1e-8:
            raise ValueError(f"input is not unitary (residual {resid:.2e})")
        per_x0 = [index_odd_sample(u, I, x0, lat, N, n, window) / norm for x0 in pts]
        vals.append(float(np.mean(per_x0)))
    factor = CONSTANTS.index_factor(k)
    zs = [v / factor for v in vals]
    seeds = list(seeds) if seeds is not None else [rep.metadata.get("seed") for rep in data]
    return _report(I, "index", vals, zs, 0.0, N, lat, seeds, pts, 0.0, n, t0, threshold, flags)


__all__ = [
    "NormalizationConstants",
    "CONSTANTS",
    "InvariantReport",
    "local_pairing",
    "local_invariant_even",
    "local_invariant_odd",
    "fedosov_trace_index",
    "index_even_sample",
    "index_odd_sample",
    "index_invariant_even",
    "index_invariant_odd",
    "x0_points",
    "window_weights",
    "displacement",
]
