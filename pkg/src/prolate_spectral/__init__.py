"""Frequency extraction from finite, sampled, noisy signals with prolate test functions."""

__version__ = "0.1.0"

from .pswf import (
    ConvergenceError,
    PswfBasis,
    build_basis,
    concentration_eigenvalue,
    default_basis_size,
    evaluate,
    evaluate_derivative,
)
from .signals import LineSpectrum, NoiseModel, SampleRecord, eval_derivative, eval_signal, sample
from .sampling import (
    BandWindow,
    InsufficientSamplesError,
    bandlimited_reconstruct,
    oversampled_grid,
    prolate_interpolate,
    sinc_interpolate,
)
from .solver import (
    ObservationWindow,
    RecoveredSpectrum,
    SpectralProblem,
    assemble,
    detect_dimension,
    eigenvector_profile,
    recover_amplitudes,
    solve,
)
from .quantum import (
    Hamiltonian,
    QpdConfig,
    QuantumState,
    ShotModel,
    autocorrelation,
    build_hamiltonian,
    observable_signal,
    qpd_pipeline,
    shot_estimate,
)
from .experiments import ScanConfig, ScanResult, baseline_fft, scan_noise, scan_sampling, scan_transition

__all__ = [
    "BandWindow",
    "ConvergenceError",
    "Hamiltonian",
    "InsufficientSamplesError",
    "LineSpectrum",
    "NoiseModel",
    "ObservationWindow",
    "PswfBasis",
    "QpdConfig",
    "QuantumState",
    "RecoveredSpectrum",
    "SampleRecord",
    "ScanConfig",
    "ScanResult",
    "ShotModel",
    "SpectralProblem",
    "assemble",
    "autocorrelation",
    "bandlimited_reconstruct",
    "baseline_fft",
    "build_basis",
    "build_hamiltonian",
    "concentration_eigenvalue",
    "default_basis_size",
    "detect_dimension",
    "eigenvector_profile",
    "eval_derivative",
    "eval_signal",
    "evaluate",
    "evaluate_derivative",
    "observable_signal",
    "oversampled_grid",
    "prolate_interpolate",
    "qpd_pipeline",
    "recover_amplitudes",
    "sample",
    "scan_noise",
    "scan_sampling",
    "scan_transition",
    "shot_estimate",
    "sinc_interpolate",
    "solve",
]
