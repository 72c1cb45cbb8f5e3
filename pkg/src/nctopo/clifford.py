"""Matrix representations of the complex Clifford algebras C_k."""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

MAX_GENERATORS = 8


@dataclass(frozen=True)
class CliffordRep:
    """Irreducible gamma matrices for C_k.

    ``chiral`` is the grading element ``(-i)^(k/2) g_1 ... g_k`` for even k and
    ``None`` for odd k.  For odd k, ``parity_sign`` is the scalar s with
    ``g_1 ... g_k = s * id``.
    """

    k: int
    gammas: tuple[np.ndarray, ...]
    chiral: np.ndarray | None
    parity_sign: complex

    @property
    def dim(self) -> int:
        return self.gammas[0].shape[0]

    def product(self, indices=None) -> np.ndarray:
        """Ordered product of the generators with the given 0-based indices."""
        if indices is None:
            indices = range(self.k)
        return reduce(np.matmul, (self.gammas[i] for i in indices), np.eye(self.dim, dtype=complex))

    def residuals(self) -> dict[str, float]:
        """Max entrywise violation of every structural identity."""
        eye = np.eye(self.dim)
        out = {"anticommutation": 0.0, "hermiticity": 0.0}
        for i, gi in enumerate(self.gammas):
            out["hermiticity"] = max(out["hermiticity"], np.abs(gi - gi.conj().T).max())
            for j, gj in enumerate(self.gammas):
                target = 2.0 * eye if i == j else 0.0
                out["anticommutation"] = max(out["anticommutation"], np.abs(gi @ gj + gj @ gi - target).max())
        if self.chiral is not None:
            c = self.chiral
            out["chiral_square"] = np.abs(c @ c - eye).max()
            out["chiral_hermiticity"] = np.abs(c - c.conj().T).max()
            out["chiral_anticommutation"] = max(np.abs(c @ g @ c + g).max() for g in self.gammas)
        else:
            out["parity"] = np.abs(self.product() - self.parity_sign * eye).max()
        return out


def _even_gammas(k: int) -> list[np.ndarray]:
    gammas = [SIGMA_1, SIGMA_2]
    while len(gammas) < k:
        eye = np.eye(gammas[0].shape[0], dtype=complex)
        gammas = [np.kron(SIGMA_1, g) for g in gammas] + [np.kron(SIGMA_2, eye), np.kron(SIGMA_3, eye)]
    return gammas


def build_gammas(k: int) -> CliffordRep:
    """Build the gamma matrices of C_k for ``1 <= k <= 8``.

    Even k uses recursive doubling from the Pauli pair.  Odd k > 1 appends the
    chiral element of C_{k-1}, with its sign fixed by :func:`odd_parity_sign`
    (``g_1 ... g_k = i^k`` whenever that is attainable).  For k = 1 the
    one-dimensional representation ``g_1 = +1`` is used.
    """
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_GENERATORS:
        raise ValueError(f"number of generators must be an integer in [1, {MAX_GENERATORS}], got {k!r}")
    k = int(k)
    if k == 1:
        return CliffordRep(1, (np.ones((1, 1), dtype=complex),), None, odd_parity_sign(1))

    m = k // 2
    gammas = _even_gammas(2 * m)
    chiral = (-1j) ** m * reduce(np.matmul, gammas)
    if k % 2 == 0:
        return CliffordRep(k, tuple(gammas), chiral, 1.0 + 0j)

    last = chiral.copy()
    sign = odd_parity_sign(k)
    prod = reduce(np.matmul, gammas + [last])
    if np.allclose(prod, -sign * np.eye(prod.shape[0])):
        last = -last
    gammas.append(last)
    return CliffordRep(k, tuple(gammas), None, complex(sign))


def odd_parity_sign(k: int) -> complex:
    """Scalar s with ``g_1 ... g_k = s * id`` for odd k.

    The product squares to ``(-1)^(k(k-1)/2)``, so ``s = i^k`` is attainable
    only for ``k = 3 mod 4``.  For ``k = 1 mod 4`` the real value
    ``i^(k-1)`` is used, which gives ``g_1 = +1`` for k = 1.
    """
    if k % 2 == 0:
        raise ValueError("parity sign is defined for odd k")
    return complex(1j**k) if k % 4 == 3 else complex(1j ** (k - 1))
