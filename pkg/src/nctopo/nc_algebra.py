"""Twisted crossed products B x_xi^theta Z^d over a finite dynamical system.

B is the algebra of N x N matrix valued functions on a finite set Omega.  An
element of B is stored as an array of shape ``(n_omega, N, N)``.  Z^d acts on
Omega by commuting permutations and on B by ``xi_y(f) = f o tau_y``.  A
polynomial ``a = sum_q u_q b_q`` is an :class:`NCElement`.

Direction indices ``j`` follow the mathematical convention ``1 <= j <= d``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_RTOL = 1e-10


def _sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


def permutations_with_sign(k: int):
    """Yield ``(sign, perm)`` for every permutation of ``range(k)``."""
    for perm in itertools.permutations(range(k)):
        yield _sign(perm), perm


@dataclass(frozen=True, eq=False)
class DynamicalSystem:
    """Finite set with a Z^d action by commuting permutations.

    ``action[j][i]`` is the index of ``tau_{e_{j+1}}(omega_i)``.  Weights must
    be invariant under every permutation.
    """

    action: tuple[np.ndarray, ...]
    weights: np.ndarray
    fiber_dim: int
    labels: tuple = ()

    def __post_init__(self):
        action = tuple(np.asarray(p, dtype=np.intp) for p in self.action)
        weights = np.asarray(self.weights, dtype=float)
        n = weights.shape[0]
        object.__setattr__(self, "action", action)
        object.__setattr__(self, "weights", weights)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(n)))
        if self.fiber_dim < 1:
            raise ValueError("fiber_dim must be positive")
        if np.any(weights < 0) or not math.isclose(weights.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("weights must be a probability vector")
        for p in action:
            if p.shape != (n,) or sorted(p.tolist()) != list(range(n)):
                raise ValueError("each action entry must be a permutation of the points")
            if not np.allclose(weights[p], weights, atol=1e-14):
                raise ValueError("weights are not invariant under the action")
        for p, r in itertools.combinations(action, 2):
            if not np.array_equal(p[r], r[p]):
                raise ValueError("the permutations do not commute")
        object.__setattr__(self, "_cache", {})

    @property
    def d(self) -> int:
        return len(self.action)

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def trivial(cls, d: int, fiber_dim: int = 1) -> "DynamicalSystem":
        return cls(tuple(np.zeros(1, dtype=np.intp) for _ in range(d)), np.ones(1), fiber_dim)

    @classmethod
    def torus_orbit(cls, shape: Sequence[int], fiber_dim: int = 1) -> "DynamicalSystem":
        """Orbit of a periodic configuration under lattice translations.

        Points are the sites y of the periodic cell (lexicographic order) and
        ``tau_{e_j}(y) = y - e_j``, so that the configuration seen from
        ``tau_{-x}(omega_0)`` is the one at site x.
        """
        shape = tuple(int(s) for s in shape)
        idx = np.arange(int(np.prod(shape))).reshape(shape)
        action = tuple(np.roll(idx, 1, axis=j).ravel() for j in range(len(shape)))
        n = idx.size
        return cls(action, np.full(n, 1.0 / n), fiber_dim)

    def shift(self, y) -> np.ndarray:
        """Index array of ``tau_y``: point i is sent to ``shift(y)[i]``."""
        y = tuple(int(v) for v in y)
        cache = self._cache
        if y not in cache:
            out = np.arange(self.n_points)
            for p, steps in zip(self.action, y):
                if steps == 0:
                    continue
                base = p if steps > 0 else np.argsort(p)
                for _ in range(abs(steps)):
                    out = base[out]
            cache[y] = out
        return cache[y]

    def act(self, f: np.ndarray, y) -> np.ndarray:
        """``xi_y(f) = f o tau_y`` for a fiber function of shape (n_omega, N, N)."""
        return f[self.shift(y)]

    def period(self, j: int) -> int:
        """Order of the permutation in direction j (1-based)."""
        p = self.action[j - 1]
        cur, order = p.copy(), 1
        ident = np.arange(self.n_points)
        while not np.array_equal(cur, ident):
            cur = p[cur]
            order += 1
        return order

    def same_as(self, other: "DynamicalSystem") -> bool:
        return self is other or (
            self.fiber_dim == other.fiber_dim
            and len(self.action) == len(other.action)
            and all(np.array_equal(p, r) for p, r in zip(self.action, other.action))
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class TwistMatrix:
    theta: np.ndarray

    def __post_init__(self):
        theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        if theta.shape[0] != theta.shape[1]:
            raise ValueError("twist matrix must be square")
        if np.abs(theta + theta.T).max(initial=0.0) > 1e-14:
            raise ValueError("twist matrix must be antisymmetric")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def zero(cls, d: int) -> "TwistMatrix":
        return cls(np.zeros((d, d)))

    @classmethod
    def from_upper(cls, d: int, entries: dict) -> "TwistMatrix":
        """Build from ``{(i, j): value}`` with 1-based i < j."""
        theta = np.zeros((d, d))
        for (i, j), v in entries.items():
            theta[i - 1, j - 1] = v
            theta[j - 1, i - 1] = -v
        return cls(theta)

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    def phase(self, x, y) -> complex:
        """``exp(i (x, theta y))``."""
        return np.exp(1j * (np.asarray(x, float) @ self.theta @ np.asarray(y, float)))

    def same_as(self, other: "TwistMatrix") -> bool:
        return self is other or np.array_equal(self.theta, other.theta)


@dataclass(frozen=True, eq=False)
class NCElement:
    """Finite Fourier polynomial ``sum_q u_q b_q``.

    ``qs`` has shape (n, d) and ``coeffs`` shape (n, n_omega, N, N); support
    points are unique and sorted.
    """

    system: DynamicalSystem
    twist: TwistMatrix
    qs: np.ndarray
    coeffs: np.ndarray
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        d = self.system.d
        if self.twist.d != d:
            raise ValueError("twist and dynamical system dimensions differ")
        qs = np.asarray(self.qs, dtype=np.int64).reshape(-1, d)
        coeffs = np.asarray(self.coeffs, dtype=complex)
        shape = (qs.shape[0], self.system.n_points, self.system.fiber_dim, self.system.fiber_dim)
        coeffs = coeffs.reshape(shape)
        keys = [tuple(q) for q in qs.tolist()]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate support points")
        order = sorted(range(len(keys)), key=keys.__getitem__)
        qs, coeffs = qs[order], coeffs[order]
        qs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "qs", qs)
        object.__setattr__(self, "coeffs", coeffs)
        self._index.update({tuple(q): i for i, q in enumerate(qs.tolist())})

    # construction -------------------------------------------------------

    @classmethod
    def from_dict(cls, system, twist, coeffs: dict) -> "NCElement":
        """From ``{q: b}`` where b is an (n_omega, N, N) array, an N x N matrix
        (constant over Omega) or a scalar (times identity)."""
        n, N = system.n_points, system.fiber_dim
        qs, bs = [], []
        for q, b in coeffs.items():
            q = (q,) if np.isscalar(q) else tuple(q)
            b = np.asarray(b, dtype=complex)
            if b.ndim == 0:
                b = b * np.eye(N)
            if b.ndim == 2:
                b = np.broadcast_to(b, (n, N, N))
            qs.append(q)
            bs.append(b)
        if not qs:
            return cls.zero(system, twist)
        return cls(system, twist, np.array(qs), np.array(bs))

    @classmethod
    def zero(cls, system, twist) -> "NCElement":
        N = system.fiber_dim
        return cls(system, twist, np.zeros((0, system.d), dtype=np.int64), np.zeros((0, system.n_points, N, N)))

    @classmethod
    def unit(cls, system, twist) -> "NCElement":
        return cls.from_dict(system, twist, {(0,) * system.d: 1.0})

    @classmethod
    def shift(cls, system, twist, q, b=1.0) -> "NCElement":
        """``u_q b``."""
        return cls.from_dict(system, twist, {tuple(q): b})

    # inspection -----------------------------------------------------------

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def support(self) -> list[tuple[int, ...]]:
        return [tuple(q) for q in self.qs.tolist()]

    @property
    def radius(self) -> int:
        """Max-norm radius of the support."""
        return int(np.abs(self.qs).max(initial=0))

    def coefficient(self, q) -> np.ndarray:
        i = self._index.get(tuple(int(v) for v in q))
        if i is None:
            N = self.system.fiber_dim
            return np.zeros((self.system.n_points, N, N), dtype=complex)
        return np.array(self.coeffs[i])

    def compatible(self, other: "NCElement") -> bool:
        return self.system.same_as(other.system) and self.twist.same_as(other.twist)

    def _check(self, other: "NCElement"):
        if not isinstance(other, NCElement) or not self.compatible(other):
            raise ValueError("elements live over different dynamical systems or twists")

    def pruned(self, atol: float = 0.0) -> "NCElement":
        """Drop support points whose coefficient is at most ``atol`` entrywise."""
        keep = np.abs(self.coeffs).reshape(len(self.qs), -1).max(axis=1, initial=0) > atol
        return NCElement(self.system, self.twist, self.qs[keep], self.coeffs[keep])

    def allclose(self, other: "NCElement", rtol: float = DEFAULT_RTOL, atol: float = 1e-12) -> bool:
        self._check(other)
        scale = max(np.abs(self.coeffs).max(initial=0), np.abs(other.coeffs).max(initial=0), 1.0)
        keys = set(self.support) | set(other.support)
        return all(
            np.abs(self.coefficient(q) - other.coefficient(q)).max(initial=0) <= atol + rtol * scale for q in keys
        )

    # linear structure -----------------------------------------------------

    def _combine(self, other: "NCElement", alpha: complex, beta: complex) -> "NCElement":
        self._check(other)
        acc: dict = {}
        for q, b in zip(self.support, self.coeffs):
            acc[q] = alpha * b
        for q, b in zip(other.support, other.coeffs):
            acc[q] = acc[q] + beta * b if q in acc else beta * b
        return NCElement.from_dict(self.system, self.twist, acc)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def __neg__(self):
        return NCElement(self.system, self.twist, self.qs, -self.coeffs)

    def scale(self, c: complex) -> "NCElement":
        return NCElement(self.system, self.twist, self.qs, c * self.coeffs)

    def __mul__(self, other):
        if isinstance(other, NCElement):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __matmul__(self, other):
        return multiply(self, other)

    # serialization --------------------------------------------------------

    def to_json(self) -> dict:
        def pairs(arr):
            return np.stack([arr.real, arr.imag], axis=-1).tolist()

        return {
            "d": self.d,
            "fiber_dim": self.system.fiber_dim,
            "action": [p.tolist() for p in self.system.action],
            "weights": self.system.weights.tolist(),
            "theta": self.twist.theta.tolist(),
            "support": self.qs.tolist(),
            "coeffs": pairs(self.coeffs),
        }

    @classmethod
    def from_json(cls, data: dict, system: DynamicalSystem | None = None, twist: TwistMatrix | None = None):
        if system is None:
            system = DynamicalSystem(tuple(np.array(p) for p in data["action"]), np.array(data["weights"]), data["fiber_dim"])
        if twist is None:
            twist = TwistMatrix(np.array(data["theta"], dtype=float).reshape(data["d"], data["d"]))
        raw = np.asarray(data["coeffs"], dtype=float)
        coeffs = raw[..., 0] + 1j * raw[..., 1] if raw.size else np.zeros((0,))
        return cls(system, twist, np.asarray(data["support"], dtype=np.int64).reshape(-1, data["d"]), coeffs)


def multiply(a: NCElement, b: NCElement) -> NCElement:
    """Product ``a b``; coefficient at q is
    ``sum_p exp(i (q, theta p)) xi_{-p}(a_{q-p}) b_p``."""
    a._check(b)
    if len(a.qs) == 0 or len(b.qs) == 0:
        return NCElement.zero(a.system, a.twist)
    theta = a.twist.theta
    sys = a.system
    out_keys: dict = {}
    targets = []
    for p in b.qs:
        targets.append([out_keys.setdefault(tuple(q), len(out_keys)) for q in (a.qs + p).tolist()])
    acc = np.zeros((len(out_keys),) + a.coeffs.shape[1:], dtype=complex)
    for p, bp, tgt in zip(b.qs, b.coeffs, targets):
        # (q, theta p) with q = q' + p reduces to (q', theta p)
        phases = np.exp(1j * (a.qs @ (theta @ p)))
        shifted = a.coeffs[:, sys.shift(-p)]
        np.add.at(acc, tgt, phases[:, None, None, None] * (shifted @ bp))
    qs = np.array(list(out_keys.keys()), dtype=np.int64)
    return NCElement(a.system, a.twist, qs, acc)


def adjoint(a: NCElement) -> NCElement:
    """``a^*``; coefficient at q is ``xi_{-q}(b_{-q}^dagger)``."""
    sys = a.system
    qs = -a.qs
    coeffs = np.array([sys.act(b.conj().transpose(0, 2, 1), p) for p, b in zip(a.qs, a.coeffs)]).reshape(a.coeffs.shape)
    return NCElement(a.system, a.twist, qs, coeffs)


def fourier_coeff(a: NCElement, q, grid: int | None = None) -> np.ndarray:
    """Fourier coefficient Phi_q(a).

    With ``grid=None`` this is a lookup.  With ``grid=M`` the torus integral is
    replaced by the average of ``lambda^{-q} rho_lambda(a)`` over the M^d
    grid of roots of unity; the result must have no component along
    ``u_p, p != q`` (guaranteed when ``M > 2 * radius + 1``), otherwise
    ValueError is raised.
    """
    q = np.asarray(q, dtype=np.int64)
    if grid is None:
        return a.coefficient(q)
    M = int(grid)
    roots = np.exp(2j * np.pi * np.arange(M) / M)
    N = a.system.fiber_dim
    out = np.zeros((a.system.n_points, N, N), dtype=complex)
    for p, bp in zip(a.qs, a.coeffs):
        weight = np.prod([np.mean(roots ** int(dp)) for dp in (p - q)])
        if abs(weight) < 1e-12:
            continue
        if np.any(p != q):
            raise ValueError(f"grid of {M} points aliases u_{tuple(p)} onto u_{tuple(q)}")
        out += weight * bp
    return out


def cesaro_sum(a: NCElement, n: int) -> NCElement:
    """Fejer mean ``sum_{|q_i| <= n} prod_j (1 - |q_j|/(n+1)) u_q Phi_q(a)``."""
    if n < 0:
        raise ValueError("order must be non-negative")
    w = np.prod(np.clip(1.0 - np.abs(a.qs) / (n + 1.0), 0.0, None), axis=1)
    keep = w > 0
    return NCElement(a.system, a.twist, a.qs[keep], a.coeffs[keep] * w[keep, None, None, None])


def derivation(a: NCElement, j: int) -> NCElement:
    """``(partial_j a)_q = -i q_j b_q`` for 1-based direction j."""
    if not 1 <= j <= a.d:
        raise ValueError(f"direction {j} out of range 1..{a.d}")
    factor = -1j * a.qs[:, j - 1]
    return NCElement(a.system, a.twist, a.qs, a.coeffs * factor[:, None, None, None])


def fiber_trace(system: DynamicalSystem, b: np.ndarray) -> complex:
    """``T_B(b) = sum_omega w(omega) tr_N(b(omega))`` with ``tr_N(1) = 1``."""
    return complex(np.einsum("w,wii->", system.weights, b) / system.fiber_dim)


def trace(a: NCElement) -> complex:
    """Canonical trace: ``T_B`` of the q = 0 coefficient."""
    return fiber_trace(a.system, a.coefficient((0,) * a.d))


def fiber_abs(b: np.ndarray, power: float = 1.0) -> np.ndarray:
    """``|b|^power = (b^dagger b)^(power/2)`` pointwise over Omega."""
    evals, evecs = np.linalg.eigh(b.conj().transpose(0, 2, 1) @ b)
    evals = np.clip(evals, 0.0, None) ** (power / 2.0)
    return (evecs * evals[:, None, :]) @ evecs.conj().transpose(0, 2, 1)


def fiber_norm(b: np.ndarray) -> float:
    """C*-norm of a fiber function: max over Omega of the operator norm."""
    return float(np.linalg.norm(b, ord=2, axis=(1, 2)).max(initial=0.0))


def _delta(k: int) -> complex:
    if k % 2 == 0:
        return (2j * np.pi) ** (k // 2)
    return -4j * (2j * np.pi) ** ((k - 1) // 2)


def zeta(I: Sequence[int], args: Sequence[NCElement]) -> complex:
    """Cyclic cocycle ``zeta_I(a_0, ..., a_|I|)``.

    ``Delta_|I| sum_rho (-1)^rho T(a_0 prod_i partial_{I[rho(i)]} a_i)`` with
    ``Delta_k = (2 pi i)^{k/2}`` for even k and ``-4i (2 pi i)^{(k-1)/2}`` for
    odd k.
    """
    I = list(I)
    if len(args) != len(I) + 1:
        raise ValueError(f"zeta over {len(I)} directions needs {len(I) + 1} arguments, got {len(args)}")
    a0, rest = args[0], list(args[1:])
    for a in rest:
        a0._check(a)
    derivs = {(i, j): derivation(a, j) for i, a in enumerate(rest) for j in set(I)}
    total = 0.0 + 0.0j
    for sign, perm in permutations_with_sign(len(I)):
        prod = a0
        for i, slot in enumerate(perm):
            prod = multiply(prod, derivs[i, I[slot]])
        total += sign * trace(prod)
    return _delta(len(I)) * total


def coefficient_decay(a: NCElement) -> dict[int, float]:
    """Largest coefficient norm on each max-norm shell ``|q| = r``."""
    out: dict[int, float] = {}
    for q, b in zip(a.qs, a.coeffs):
        r = int(np.abs(q).max(initial=0))
        out[r] = max(out.get(r, 0.0), fiber_norm(b))
    return dict(sorted(out.items()))
