"""Finite-volume matrix realizations: lattices, magnetic translations, the
covariant representation of polynomial elements, and Dirac phases."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .clifford import CliffordRep
from .nc_algebra import DynamicalSystem, NCElement, TwistMatrix

DENSE_LIMIT = 12000
_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Lattice:
    """Hypercube of L^d sites with centred integer coordinates.

    Array index ``n = 0..L-1`` corresponds to the coordinate ``n - L // 2``,
    which is symmetric about 0 for odd L and spans ``[-L/2, L/2 - 1]`` for
    even L.  Sites are ordered lexicographically.
    """

    d: int
    L: int
    bc: str = "periodic"

    def __post_init__(self):
        if self.d < 1 or self.L < 1:
            raise ValueError("dimension and size must be positive")
        if self.bc not in ("periodic", "open"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    @property
    def n_sites(self) -> int:
        return self.L**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.L,) * self.d

    @property
    def offset(self) -> int:
        return self.L // 2

    def coords(self) -> np.ndarray:
        """Centred coordinates of all sites, shape (n_sites, d)."""
        grids = np.indices(self.shape).reshape(self.d, -1).T
        return grids - self.offset

    def index(self, coords: np.ndarray) -> np.ndarray:
        """Site index of centred coordinates; wraps for periodic bc and
        returns -1 outside the box for open bc."""
        arr = np.asarray(coords) + self.offset
        if self.bc == "periodic":
            arr = np.mod(arr, self.L)
            inside = np.ones(arr.shape[:-1], dtype=bool)
        else:
            inside = np.all((arr >= 0) & (arr < self.L), axis=-1)
            arr = np.where(inside[..., None], arr, 0)
        flat = np.ravel_multi_index(tuple(np.moveaxis(arr, -1, 0)), self.shape)
        return np.where(inside, flat, -1)

    def minimal_image(self, diff: np.ndarray) -> np.ndarray:
        """Map coordinate differences into ``[-L/2, L/2)``."""
        return np.mod(np.asarray(diff) + self.L // 2, self.L) - self.L // 2


@dataclass
class FiniteRep:
    """Matrix on ``l2(sites) (x) C^internal_dim``.

    Basis index is ``site * internal_dim + internal`` unless the metadata key
    ``layout`` says otherwise.
    """

    matrix: np.ndarray | sp.spmatrix
    internal_dim: int
    lattice: Lattice
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.lattice.n_sites * self.internal_dim
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match {n} = sites x internal_dim")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if sp.issparse(self.matrix) else np.asarray(self.matrix)

    def to_json(self) -> dict:
        m = self.dense()
        return {
            "lattice": {"d": self.lattice.d, "L": self.lattice.L, "bc": self.lattice.bc},
            "internal_dim": self.internal_dim,
            "metadata": {k: v for k, v in self.metadata.items() if isinstance(v, (str, int, float, bool, list))},
            "matrix": np.stack([m.real, m.imag], axis=-1).tolist(),
        }


def _finish(rows, cols, vals, n, dense: bool | None):
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    if dense is None:
        dense = n <= DENSE_LIMIT
    return mat.toarray() if dense else mat


def commensurate_size(theta: np.ndarray, L: int, max_size: int = 10000) -> int | None:
    """Smallest size >= L with ``theta * size`` in 2 pi Z, or None."""
    for m in range(max(L, 1), max_size + 1):
        if _is_commensurate(theta, m):
            return m
    return None


def _is_commensurate(theta: np.ndarray, L: int, tol: float = 1e-9) -> bool:
    r = np.asarray(theta) * L / _TWO_PI
    return bool(np.all(np.abs(r - np.round(r)) < tol))


def _check_flux(phi: TwistMatrix, lat: Lattice):
    if lat.bc == "periodic" and not _is_commensurate(phi.theta, lat.L):
        hint = commensurate_size(phi.theta, lat.L)
        extra = f"; smallest commensurate size is L={hint}" if hint else ""
        raise ValueError(f"flux matrix is not commensurate with periodic size L={lat.L}{extra}")


def _translation(q, phi: TwistMatrix, lat: Lattice, sign: float, dense):
    q = np.asarray(q, dtype=np.int64)
    if q.shape != (lat.d,):
        raise ValueError("shift vector has wrong dimension")
    _check_flux(phi, lat)
    x = lat.coords()
    rows = lat.index(x + q)
    keep = rows >= 0
    vals = np.exp(sign * 1j * (x @ (phi.theta.T @ q)))
    cols = np.arange(lat.n_sites)
    return _finish(rows[keep], cols[keep], vals[keep], lat.n_sites, dense)


def magnetic_translation(q, phi: TwistMatrix, lat: Lattice, dense: bool | None = None) -> FiniteRep:
    """Dual magnetic translation ``U_q delta_x = exp(i (q, phi x)) delta_{x+q}``."""
    m = _translation(q, phi, lat, 1.0, dense)
    return FiniteRep(m, 1, lat, {"kind": "dual_magnetic_translation", "q": list(map(int, q))})


def commuting_translation(q, phi: TwistMatrix, lat: Lattice, dense: bool | None = None) -> FiniteRep:
    """Magnetic translation ``V_q delta_x = exp(-i (q, phi x)) delta_{x+q}``,
    which commutes with every ``U_p``."""
    m = _translation(q, phi, lat, -1.0, dense)
    return FiniteRep(m, 1, lat, {"kind": "magnetic_translation", "q": list(map(int, q))})


@dataclass(frozen=True)
class DisorderSample:
    """I.i.d. values in ``[-1/2, 1/2)`` for every (site, channel) of a
    periodic cell.

    Each value comes from a counter-based Philox stream keyed on the seed and
    counted by (centred site coordinates, channel), so a value does not
    depend on the cell size or on the order of generation.
    """

    seed: int
    shape: tuple[int, ...]
    n_channels: int
    values: np.ndarray = field(repr=False)

    @classmethod
    def generate(cls, seed: int, shape: Sequence[int], n_channels: int) -> "DisorderSample":
        shape = tuple(int(s) for s in shape)
        if len(shape) > 3:
            raise ValueError("disorder samples support d <= 3")
        lat_coords = np.indices(shape).reshape(len(shape), -1).T - np.array([s // 2 for s in shape])
        mask = (1 << 64) - 1
        vals = np.empty((lat_coords.shape[0], n_channels))
        for i, x in enumerate(lat_coords.tolist()):
            x = list(x) + [0] * (3 - len(x))
            for c in range(n_channels):
                counter = np.array([v & mask for v in x] + [c], dtype=np.uint64)
                gen = np.random.Generator(np.random.Philox(key=int(seed) & mask, counter=counter))
                vals[i, c] = gen.random() - 0.5
        vals.setflags(write=False)
        return cls(int(seed), shape, int(n_channels), vals)

    @classmethod
    def zeros(cls, shape: Sequence[int], n_channels: int) -> "DisorderSample":
        shape = tuple(int(s) for s in shape)
        return cls(-1, shape, n_channels, np.zeros((int(np.prod(shape)), n_channels)))

    def value(self, site_coords, channel: int) -> float:
        arr = np.mod(np.asarray(site_coords) + np.array([s // 2 for s in self.shape]), self.shape)
        return float(self.values[np.ravel_multi_index(tuple(arr), self.shape), channel])

    def system(self, fiber_dim: int = 1) -> DynamicalSystem:
        """Translation orbit of this configuration (see
        :meth:`DynamicalSystem.torus_orbit`)."""
        return DynamicalSystem.torus_orbit(self.shape, fiber_dim)

    @property
    def origin(self) -> int:
        """Point of :meth:`system` whose configuration is seen unshifted."""
        return int(np.ravel_multi_index(tuple(s // 2 for s in self.shape), self.shape))


def orbit_points(system: DynamicalSystem, omega: int, lat: Lattice) -> np.ndarray:
    """Indices of ``tau_{-x}(omega)`` for every site x of the lattice."""
    x = lat.coords()
    pts = np.full(lat.n_sites, int(omega), dtype=np.intp)
    lo, hi = int(x.min(initial=0)), int(x.max(initial=0))
    for j, perm in enumerate(system.action):
        inv = np.argsort(perm)
        # table[n - lo] = tau_{-n e_j} as an index array
        table = np.empty((hi - lo + 1, system.n_points), dtype=np.intp)
        table[-lo] = np.arange(system.n_points)
        for n in range(1, hi + 1):
            table[n - lo] = inv[table[n - 1 - lo]]
        for n in range(-1, lo - 1, -1):
            table[n - lo] = perm[table[n + 1 - lo]]
        pts = table[x[:, j] - lo, pts]
    return pts


def check_torus_compatible(system: DynamicalSystem, twist: TwistMatrix, lat: Lattice):
    """A torus representation is a homomorphism only if the twist is
    commensurate and every ``tau_{L e_j}`` is the identity."""
    if lat.bc != "periodic":
        return
    _check_flux(twist, lat)
    for j in range(1, system.d + 1):
        if lat.L % system.period(j):
            raise ValueError(
                f"action in direction {j} has period {system.period(j)}, which does not divide L={lat.L}"
            )


def represent(
    a: NCElement,
    omega,
    lat: Lattice,
    dense: bool | None = None,
    allow_aliasing: bool = False,
) -> FiniteRep:
    """``pi_omega(a) = sum_q U_q sum_x |x><x| (x) b_q(tau_{-x} omega)``.

    ``omega`` is a point index of ``a.system`` or a :class:`DisorderSample`
    whose torus orbit is ``a.system`` (its origin point is used).  With
    periodic bc the support radius must be below L/2 unless
    ``allow_aliasing`` is set; the map is still multiplicative then but no
    longer injective.
    """
    if isinstance(omega, DisorderSample):
        if omega.shape != lat.shape:
            raise ValueError("disorder sample shape does not match the lattice")
        omega = omega.origin
    omega = int(omega)
    if lat.d != a.d:
        raise ValueError("lattice and element dimensions differ")
    if not 0 <= omega < a.system.n_points:
        raise ValueError("configuration index out of range")
    if lat.bc == "periodic":
        if not allow_aliasing and 2 * a.radius >= lat.L:
            raise ValueError(f"support radius {a.radius} is not below L/2 = {lat.L / 2}: hops would alias")
        check_torus_compatible(a.system, a.twist, lat)

    N = a.system.fiber_dim
    S = lat.n_sites
    x = lat.coords()
    pts = orbit_points(a.system, omega, lat)
    cols_site = np.arange(S)
    rows, cols, vals = [], [], []
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    for q, b in zip(a.qs, a.coeffs):
        target = lat.index(x + q)
        keep = target >= 0
        phase = np.exp(1j * (x[keep] @ (a.twist.theta.T @ q)))
        blocks = b[pts[keep]] * phase[:, None, None]
        r = target[keep][:, None, None] * N + ii[None]
        c = cols_site[keep][:, None, None] * N + jj[None]
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(blocks.ravel())
    n = S * N
    if rows:
        mat = _finish(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), n, dense)
    else:
        mat = _finish([], [], [], n, dense)
    return FiniteRep(mat, N, lat, {"kind": "represent", "omega": omega})


def dirac_phase(
    I: Sequence[int],
    x0,
    lat: Lattice,
    cr: CliffordRep,
    fiber_dim: int = 1,
    dense: bool | None = None,
) -> FiniteRep:
    """Dirac phase ``F = sum_i gamma_i (x) (X_i + x0_i) / |X_I + x0|``.

    The Clifford factor is the outer tensor slot: the basis index is
    ``s * (n_sites * fiber_dim) + site * fiber_dim + n``.  Centred
    coordinates are used in the I directions regardless of the bc.
    """
    I = list(I)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if len(I) != cr.k:
        raise ValueError(f"|I| = {len(I)} but the Clifford representation has {cr.k} generators")
    if x0.shape != (len(I),) or np.any((x0 <= 0) | (x0 >= 1)):
        raise ValueError("x0 must have one entry per direction, each in (0, 1)")
    if any(not 1 <= j <= lat.d for j in I) or len(set(I)) != len(I):
        raise ValueError("index set must consist of distinct directions in 1..d")
    pos = lat.coords()[:, [j - 1 for j in I]] + x0
    unit = pos / np.linalg.norm(pos, axis=1, keepdims=True)
    unit = np.repeat(unit, fiber_dim, axis=0)
    n = lat.n_sites * fiber_dim
    c = cr.dim
    if dense is None:
        dense = n * c <= DENSE_LIMIT
    if dense:
        F = np.zeros((c, n, c, n), dtype=complex)
        diag = np.arange(n)
        for i, g in enumerate(cr.gammas):
            F[:, diag, :, diag] += unit[:, i, None, None] * g[None]
        F = F.reshape(c * n, c * n)
    else:
        F = sp.csr_matrix((c * n, c * n), dtype=complex)
        for i, g in enumerate(cr.gammas):
            F = F + sp.kron(sp.csr_matrix(g), sp.diags(unit[:, i]), format="csr")
    meta = {"kind": "dirac_phase", "I": I, "x0": x0.tolist(), "layout": "clifford_outer", "clifford_dim": c}
    return FiniteRep(F, fiber_dim * c, lat, meta)


def clifford_extend(op: np.ndarray, clifford_dim: int) -> np.ndarray:
    """``1_Clifford (x) op`` in the clifford-outer layout used by
    :func:`dirac_phase`."""
    return np.kron(np.eye(clifford_dim), op) if not sp.issparse(op) else sp.kron(sp.eye(clifford_dim), op)


def commutator_decay(
    F: FiniteRep, U: np.ndarray, lat: Lattice, x0, I: Sequence[int], radii: Sequence[int] | None = None
) -> dict[int, float]:
    """Largest row sum of ``|[F, 1 (x) U]|`` among sites at each rounded
    distance ``r = round(|X_I + x0|)``."""
    c = F.metadata.get("clifford_dim", 1)
    Fm = sp.csr_matrix(F.matrix)
    Um = sp.kron(sp.eye(c), sp.csr_matrix(U), format="csr")
    comm = Fm @ Um - Um @ Fm
    fiber = F.internal_dim // c
    rowsum = np.asarray(abs(comm).sum(axis=1)).reshape(c, lat.n_sites, fiber).max(axis=(0, 2))
    dist = np.linalg.norm(lat.coords()[:, [j - 1 for j in I]] + np.asarray(x0, float), axis=1)
    shells = np.rint(dist).astype(int)
    if radii is None:
        radii = sorted(set(shells.tolist()))
    out = {}
    for r in radii:
        sel = shells == r
        if np.any(sel):
            out[int(r)] = float(rowsum[sel].max())
    return out


def fit_power_law(data: dict[int, float], r_min: float, r_max: float) -> float:
    """Least-squares slope of log(value) against log(r) on ``[r_min, r_max]``."""
    r = np.array([k for k in data if r_min <= k <= r_max], dtype=float)
    v = np.array([data[int(k)] for k in r])
    if len(r) < 2:
        raise ValueError("need at least two radii to fit")
    slope, _ = np.polyfit(np.log(r), np.log(v), 1)
    return float(slope)


__all__ = [
    "Lattice",
    "FiniteRep",
    "DisorderSample",
    "magnetic_translation",
    "commuting_translation",
    "represent",
    "dirac_phase",
    "clifford_extend",
    "commutator_decay",
    "fit_power_law",
    "orbit_points",
    "commensurate_size",
    "check_torus_compatible",
]
