"""
Frequencies and amplitudes from a finite record
===============================================

Three lines inside the band ``[omega0 - W, omega0 + W]``, sampled on a grid
twice as fine as Nyquist with a little noise.  The solver builds the Gram
pencil over prolate test functions, keeps the dimensions that stand above the
noise and reads off frequencies and amplitudes.
"""

import numpy as np

from prolate_spectral import LineSpectrum, NoiseModel, ObservationWindow
from prolate_spectral import assemble, eigenvector_profile, oversampled_grid, sample, solve

truth = LineSpectrum([1.2, 2.1, 3.4], [1.0, 0.5j, -0.8])
window = ObservationWindow(T=6.0, W=1.5, omega0=2.3)
band = window.omega0 + window.W

grid = oversampled_grid(-2 * window.T, 2 * window.T, band)
record = sample(truth, grid, NoiseModel.iid(1e-5, seed=0))
print(f"{len(record)} samples on [{grid[0]:.2f}, {grid[-1]:.2f}]")

problem = assemble(record, window, signal_band=band)
result = solve(problem)
print(f"detected dimension {result.rank}, threshold {result.diagnostics['threshold']:.2e}")
for w, a, r in zip(result.omegas, result.alphas, result.residuals):
    print(f"omega = {w: .8f}   alpha = {a.real: .6f}{a.imag:+.6f}i   residual = {r:.1e}")
print("true omegas:", truth.omegas)

# each eigenvector's test function is blind to the other lines
F = eigenvector_profile(problem, result.coeff_vectors[:, 0])
print("|F| of the first test function at the recovered lines:", np.abs(F(result.omegas)))
