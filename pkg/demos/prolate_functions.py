"""
Prolate functions and the plunge
================================

The prolate functions for bandwidth parameter ``c`` are the band-limited
functions that keep as much energy as possible inside ``[-1, 1]``.  Their
concentration eigenvalues stay close to one up to index ``2c/pi`` and then
fall off a cliff.
"""

import math

import numpy as np

from prolate_spectral import build_basis, default_basis_size

c = 20.0
basis = build_basis(c, default_basis_size(c))
print(f"c = {c}, {basis.n_basis} functions, 2c/pi = {2 * c / math.pi:.2f}")
print(" n   lambda_n            1 - lambda_n")
for n, lam in enumerate(basis.lam):
    print(f"{n:2d}   {lam:.15f}   {1 - lam:.2e}")

# the eigenvalues add up to the dimension of the time-and-band-limited space
print(f"sum of lambda = {basis.lam.sum():.12f}   2c/pi = {2 * c / math.pi:.12f}")

# values on a coarse grid; psi_n has n zeros and is positive at x = 1
x = np.linspace(-1, 1, 9)
np.set_printoptions(precision=3, suppress=True, linewidth=120)
print("psi_0 .. psi_3 on", x)
print(basis.values(x)[:, :4].T)
