"""
Observation time against line density
=====================================

Eight lines fill the band ``[-4, 4]`` evenly, one line per unit of frequency.
Below ``T = pi`` the record is too short to hold eight independent
frequencies; the singular values of the Gram matrix show it.  The scan prints
the frequency error with and without noise.
"""

import math

import numpy as np

from prolate_spectral import LineSpectrum, ObservationWindow, assemble, oversampled_grid, sample
from prolate_spectral.experiments import ScanConfig, equispaced_lines, run_scan

K, W = 8, 4.0
Ts = [math.pi * f for f in (0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.5, 2.0, 3.0, 4.0)]

for sigma in (0.0, 1e-6):
    cfg = ScanConfig("transition", {"T": Ts, "K": [K]}, params={"W": W, "sigma": sigma})
    rows = run_scan(cfg, workers=1).rows
    print(f"sigma = {sigma:g}")
    for row in rows:
        err = row["max_error"]
        err = err if isinstance(err, str) else f"{err:.1e}"
        print(f"  T = {row['T'] / math.pi:.2f} pi   rank {row['rank']}   max error {err}")

# the smallest of the eight leading singular values against T
omegas = equispaced_lines(K, W)
for T in Ts[:6]:
    window = ObservationWindow(T, W)
    rec = sample(LineSpectrum(omegas, np.ones(K)), oversampled_grid(-2 * T, 2 * T, W))
    s = np.linalg.svd(assemble(rec, window, signal_band=W).B, compute_uv=False)
    print(f"T = {T / math.pi:.2f} pi   sigma_8 / sigma_1 = {s[K - 1] / s[0]:.1e}")
