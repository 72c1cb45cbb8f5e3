"""
Polynomial elements of a twisted crossed product
================================================

Build a few elements over a small dynamical system, multiply them, and check
that the finite torus representation turns the algebra into matrices.
"""

import numpy as np

from nctopo import DynamicalSystem, Lattice, NCElement, TwistMatrix, adjoint, multiply, represent, trace

# Three configurations cycled by the first generator, fixed by the second.
system = DynamicalSystem((np.array([1, 2, 0]), np.arange(3)), np.full(3, 1 / 3), fiber_dim=2)
theta = TwistMatrix.from_upper(2, {(1, 2): 2 * np.pi / 6})

u1 = NCElement.shift(system, theta, (1, 0))
u2 = NCElement.shift(system, theta, (0, 1))

# u1 u2 and u2 u1 differ by the phase exp(2 i theta_12)
print("u1 u2 coefficient:", multiply(u1, u2).coefficient((1, 1))[0, 0, 0])
print("u2 u1 coefficient:", multiply(u2, u1).coefficient((1, 1))[0, 0, 0])

rng = np.random.default_rng(0)
b = rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2))
a = NCElement.from_dict(system, theta, {(0, 0): b, (1, -1): b.conj()})
print("trace of a a*:", trace(multiply(a, adjoint(a))).real)

# On a 6 x 6 torus the action (period 3) and the twist are both periodic, so
# represent() is a *-homomorphism.
lat = Lattice(2, 6)
A = represent(a, 0, lat).dense()
AA = represent(multiply(a, adjoint(a)), 0, lat).dense()
print("||pi(a a*) - pi(a) pi(a)*|| =", np.abs(AA - A @ A.conj().T).max())
