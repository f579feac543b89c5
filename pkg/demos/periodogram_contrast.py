"""
Two lines closer than the Fourier resolution
============================================

On ``[-T, T]`` the periodogram cannot separate lines closer than about
``2 pi / (2T)``.  Two lines half that distance apart show up as one peak.  The
prolate solver only needs the record to be long enough for the number of
lines in the band, so it separates them.
"""

import math

from prolate_spectral import LineSpectrum, ObservationWindow, assemble, oversampled_grid, sample, solve
from prolate_spectral.signals import uniform_grid
from prolate_spectral.experiments import baseline_fft

T = 10.0
sep = 0.5 * 2 * math.pi / (2 * T)
truth = LineSpectrum([1.0 - sep / 2, 1.0 + sep / 2], [1.0, 0.7])

peaks = baseline_fft(sample(truth, uniform_grid(-T, T, 401)))
print("periodogram:", peaks)

window = ObservationWindow(T, W=2.5 * sep, omega0=1.0)
band = window.omega0 + window.W
record = sample(truth, oversampled_grid(-2 * T, 2 * T, band))
result = solve(assemble(record, window, signal_band=band))
print("solver:     ", result.as_line_spectrum())
print("true:       ", truth)
