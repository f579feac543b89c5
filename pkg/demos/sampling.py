"""
Reconstruction from Nyquist samples
===================================

A signal that is band-limited to ``[-W, W]`` and concentrated on ``[-T, T]``
is pinned down by about ``2WT/pi`` samples.  Fitting prolate coefficients uses
that concentration; the truncated cardinal series ignores it and pays at the
edges of the record.
"""

import math

import numpy as np

from prolate_spectral import BandWindow, SampleRecord, build_basis, default_basis_size
from prolate_spectral.sampling import prolate_interpolate, required_samples, sinc_interpolate

W, T = 1.0, 16.0
win = BandWindow(W, T)
basis = build_basis(win.c, default_basis_size(win.c))

# a concentrated test signal: a random mix of the leading prolate functions
rng = np.random.default_rng(1)
k = int(2 * win.c / math.pi) - 1
weights = np.zeros(basis.n_basis, dtype=complex)
weights[:k] = rng.standard_normal(k) + 1j * rng.standard_normal(k)


def signal(t):
    return basis.transform(np.asarray(t) / T) @ weights


te = np.linspace(-0.9 * T, 0.9 * T, 401)
ref = signal(te)
need = required_samples(win)
print(f"W = {W}, T = {T}: at least {need} samples")
# samples that only just reach the ends of [-T, T] leave the tails of the
# prolate functions unconstrained; a few spacings of margin fixes that
print("  n   grid reach / T   prolate error   sinc error")
for extra in [1, 3, 5, 8, 10, 14]:
    n = need + extra
    t = (np.arange(n) - (n - 1) / 2) * win.nyquist_spacing
    if t[-1] < T:
        continue  # the grid must reach the ends of [-T, T]
    rec = SampleRecord(t, signal(t))
    e_p = np.max(np.abs(prolate_interpolate(rec, win, basis)(te) - ref)) / np.max(np.abs(ref))
    e_s = np.max(np.abs(sinc_interpolate(rec, win)(te) - ref)) / np.max(np.abs(ref))
    print(f"{n:4d}   {t[-1] / T:12.2f}   {e_p:13.2e}   {e_s:10.2e}")
