"""Random test data shared by the test modules."""

import itertools

import numpy as np

from nctopo.nc_algebra import DynamicalSystem, NCElement, TwistMatrix


def cyclic_action(n_points, period):
    """Permutation of ``n_points`` made of cycles of length ``period``."""
    perm = np.arange(n_points)
    for start in range(0, n_points - n_points % period, period):
        block = np.arange(start, start + period)
        perm[block] = np.roll(block, -1)
    return perm


def random_system(rng, d, n_points, N, periods=None):
    """Finite system whose j-th generator cycles points with ``periods[j]``
    (1 means trivial).  All generators are powers of one permutation, so
    they commute; weights are uniform."""
    periods = periods or [1] * d
    base = cyclic_action(n_points, max(periods))
    action = []
    for p in periods:
        if p == 1:
            action.append(np.arange(n_points))
        else:
            action.append(base.copy())
    return DynamicalSystem(tuple(action), np.full(n_points, 1.0 / n_points), N)


def random_twist(rng, d, L=None):
    """Antisymmetric matrix; commensurate with L when L is given."""
    theta = np.zeros((d, d))
    for i, j in itertools.combinations(range(d), 2):
        theta[i, j] = 2 * np.pi * rng.integers(0, L) / L if L else rng.normal()
        theta[j, i] = -theta[i, j]
    return TwistMatrix(theta)


def random_element(rng, system, twist, radius=2, n_terms=3):
    """Sparse random polynomial with support in the cube of given radius."""
    d, n, N = system.d, system.n_points, system.fiber_dim
    cube = list(itertools.product(range(-radius, radius + 1), repeat=d))
    pick = rng.choice(len(cube), size=min(n_terms, len(cube)), replace=False)
    qs = np.array([cube[i] for i in pick])
    coeffs = rng.normal(size=(len(qs), n, N, N)) + 1j * rng.normal(size=(len(qs), n, N, N))
    return NCElement(system, twist, qs, coeffs)


def random_triple_setup(rng, L=None):
    """System, twist and three elements with d <= 3, |Omega| <= 4, N <= 2,
    radius <= 2.  With L given, the data are compatible with an L-torus."""
    d = int(rng.integers(1, 4))
    N = int(rng.integers(1, 3))
    n_points = int(rng.integers(1, 5))
    if L is None:
        periods = [int(rng.integers(1, n_points + 1)) if n_points > 1 else 1 for _ in range(d)]
        periods = [p if p in (1, max(periods)) else 1 for p in periods]
    else:
        periods = [1] * d
    system = random_system(rng, d, n_points, N, periods)
    twist = random_twist(rng, d, L)
    elems = [random_element(rng, system, twist, 2, int(rng.integers(1, 4))) for _ in range(3)]
    return system, twist, elems


def algebra_identity_errors(a, b, c):
    """Largest coefficient error of associativity, involution, Leibniz and
    trace cyclicity on one triple."""
    from nctopo.nc_algebra import adjoint, derivation, multiply, trace

    def diff(x, y):
        keys = set(x.support) | set(y.support)
        return max((np.abs(x.coefficient(q) - y.coefficient(q)).max() for q in keys), default=0.0)

    scale = max(1.0, *(np.abs(e.coeffs).max(initial=0) for e in (a, b, c)))
    ab = multiply(a, b)
    err = {
        "associativity": diff(multiply(ab, c), multiply(a, multiply(b, c))) / scale**3,
        "involution": max(diff(adjoint(adjoint(a)), a), diff(adjoint(ab), multiply(adjoint(b), adjoint(a)) ) / scale**2),
        "leibniz": max(
            diff(derivation(ab, j), multiply(derivation(a, j), b) + multiply(a, derivation(b, j))) / scale**2
            for j in range(1, a.d + 1)
        ) / 2,
        "trace_cyclicity": abs(trace(ab) - trace(multiply(b, a))) / scale**2,
    }
    return err


def fiber_trace_violations(system, b, b2, shift):
    """Violations (positive means failure) of the fiber trace properties:
    conjugation, modulus symmetry, invariance, module bound, Hoelder with
    exponents (1, 2, 2) and the triangle inequality for s = 1, 2."""
    from nctopo.nc_algebra import fiber_abs, fiber_norm, fiber_trace

    T = lambda x: fiber_trace(system, x)
    dag = lambda x: x.conj().transpose(0, 2, 1)
    absb = T(fiber_abs(b)).real
    out = {
        "conjugate": abs(T(dag(b)) - np.conj(T(b))),
        "abs_adjoint": abs(absb - T(fiber_abs(dag(b))).real),
        "abs_invariance": abs(T(fiber_abs(system.act(b, shift))).real - absb),
        "module_bound": T(fiber_abs(b2 @ b)).real - fiber_norm(b2) * absb,
        "trace_bound": abs(T(b)) - absb,
        "hoelder": T(fiber_abs(b @ b2)).real - np.sqrt(T(fiber_abs(b, 2)).real * T(fiber_abs(b2, 2)).real),
    }
    for s in (1, 2):
        lhs = T(fiber_abs(b + b2, s)).real ** (1 / s)
        rhs = T(fiber_abs(b, s)).real ** (1 / s) + T(fiber_abs(b2, s)).real ** (1 / s)
        out[f"triangle_{s}"] = lhs - rhs
    return out
