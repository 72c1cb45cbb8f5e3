"""Independent reference computations used to freeze expected values.

Nothing here imports the package: each oracle works in momentum space or by
direct enumeration.
"""

import numpy as np


def fhs_chern(bloch, n_occ, nk1, nk2, period1=2 * np.pi, period2=2 * np.pi):
    """Lattice Chern number of the lowest ``n_occ`` bands of ``bloch(k1, k2)``.

    Link-variable method with the Berry connection ``A = i <u|grad u>``, so
    the result is ``(1/2pi) * integral of curl A``.
    """
    k1 = np.arange(nk1) * period1 / nk1
    k2 = np.arange(nk2) * period2 / nk2
    frames = np.empty((nk1, nk2), dtype=object)
    for a, x in enumerate(k1):
        for b, y in enumerate(k2):
            _, v = np.linalg.eigh(bloch(x, y))
            frames[a, b] = v[:, :n_occ]

    def link(u, v):
        z = np.linalg.det(u.conj().T @ v)
        return z / abs(z)

    total = 0.0
    for a in range(nk1):
        for b in range(nk2):
            u0 = frames[a, b]
            u1 = frames[(a + 1) % nk1, b]
            u12 = frames[(a + 1) % nk1, (b + 1) % nk2]
            u2 = frames[a, (b + 1) % nk2]
            loop = link(u0, u1) * link(u1, u12) * link(u12, u2) * link(u2, u0)
            total += np.angle(loop)
    return -total / (2 * np.pi)


def landau_bloch(flux_num, flux_den, t=1.0):
    """Bloch matrix of the square-lattice flux model in Landau gauge.

    Magnetic cell of ``flux_den`` sites along direction 1; hop x -> x + e1
    has amplitude t and x -> x + e2 amplitude ``t exp(-2 pi i f x_1)``, which
    gives counter-clockwise plaquette product ``exp(-2 pi i f)``.  A hop by
    cell vector R contributes ``exp(i k.R)``.
    """
    q = flux_den
    f = flux_num / flux_den

    def h(k1, k2):
        m = np.zeros((q, q), dtype=complex)
        for j in range(q):
            # hop along e2 stays in the same column j of the cell
            m[j, j] += 2 * t * np.cos(k2 - 2 * np.pi * f * j)
            nxt = (j + 1) % q
            phase = np.exp(1j * k1 * q) if j == q - 1 else 1.0
            m[nxt, j] += t * phase
            m[j, nxt] += t * np.conj(phase)
        return m

    return h


def landau_spectrum(flux_num, flux_den, L, t=1.0):
    """Eigenvalues of the Landau-gauge model on an L x L torus via Bloch
    reduction (L divisible by flux_den)."""
    h = landau_bloch(flux_num, flux_den, t)
    q = flux_den
    out = []
    for n in range(L // q):
        for m in range(L):
            out.extend(np.linalg.eigvalsh(h(2 * np.pi * n / L, 2 * np.pi * m / L)))
    return np.sort(out)


def qwz_bloch(m):
    """Two-band Chern insulator ``sin k1 s1 + sin k2 s2 + (m + cos k1 + cos k2) s3``."""
    s1 = np.array([[0, 1], [1, 0]], complex)
    s2 = np.array([[0, -1j], [1j, 0]])
    s3 = np.diag([1.0 + 0j, -1.0])

    def h(k1, k2):
        return np.sin(k1) * s1 + np.sin(k2) * s2 + (m + np.cos(k1) + np.cos(k2)) * s3

    return h


def winding_number(symbol, nk=4096):
    """``(1/2 pi i) * contour integral of d log symbol(k)`` over [0, 2 pi)."""
    k = np.arange(nk + 1) * 2 * np.pi / nk
    z = np.array([symbol(x) for x in k])
    return float(np.sum(np.angle(z[1:] / z[:-1])) / (2 * np.pi))


def ssh_symbol(t1, t2):
    """Bloch symbol of the B <- A block ``t1 + t2 S*``.

    Bloch waves ``psi_x = exp(i k x) u`` turn a hop by q into
    ``exp(-i k q)``; the backward shift S* (q = -1) becomes ``exp(i k)``.
    """
    return lambda k: t1 + t2 * np.exp(1j * k)


def kernel_count_isometry(rng, m, n, rank):
    """Random m x n partial isometry of the given rank.

    Returns ``(T, dim ker T - dim ker T*)`` computed by counting.
    """
    a = np.linalg.qr(rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m)))[0][:, :rank]
    b = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0][:, :rank]
    return a @ b.conj().T, (n - rank) - (m - rank)
