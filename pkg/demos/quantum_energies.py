"""
Energies from an autocorrelation signal
=======================================

A random 16-level Hamiltonian, a random initial state, and a device that
returns ``<Psi(t), Psi(0)>`` either exactly or from a finite number of
Hadamard-test shots.  The recovered energies are compared with exact
diagonalization, and the shot-noise error shrinks like ``1/sqrt(M)``.
"""

import numpy as np

from prolate_spectral import QpdConfig, QuantumState, ShotModel, build_hamiltonian, qpd_pipeline

H = build_hamiltonian("random", {"dim": 16}, seed=7)
psi = QuantumState.random(16, seed=3)

report = qpd_pipeline(QpdConfig(H, psi, omega0=0.0, W=1.05, T=40.0))
print("exact samples: max energy error", max(report.errors))
print("total simulated time", report.resource_time)

for shots in (10**4, 10**5, 10**6):
    errs = []
    for seed in range(10):
        rep = qpd_pipeline(QpdConfig(H, psi, 0.0, 1.05, 80.0, shots=ShotModel(shots, seed)))
        strong = rep.true_weights >= 0.05
        errs.append(np.median([e for e, s in zip(rep.errors, strong) if s and e is not None]))
    print(f"M = {shots:>7d}: median error {np.median(errs):.2e} over {rep.n_device_samples} device times")
