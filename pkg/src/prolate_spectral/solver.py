"""Frequency extraction as a generalized eigenvalue problem.

For a signal ``S`` and a test function ``f`` supported in ``[-T, T]`` the
identity ``-i d/dt (S * f) = omega (S * f)`` holds exactly when ``S`` is a
single exponential of frequency ``omega``.  Expanding ``f`` in time-limited
prolate functions and testing against the same functions turns this into a
matrix pencil ``(A, B)``::

    B_mn = T int int psi_m(x) S0(T(x - y)) psi_n(y) dy dx
    A_mn = T int int psi_m(x) (-i S0')(T(x - y)) psi_n(y) dy dx

with ``S0(t) = S(t) exp(-i omega0 t)`` the signal shifted to the band center.
For ``S = sum alpha_k exp(i omega_k t)`` the pencil factors as
``B = T V^H diag(alpha) V`` and ``A = T V^H diag(alpha (omega - omega0)) V``,
so its finite eigenvalues are the shifted line frequencies.
"""

from __future__ import annotations

import functools
import hashlib
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .pswf import PswfBasis, build_basis, default_basis_size, gauss_legendre
from .sampling import WINDOW_C, bandlimited_reconstruct
from .signals import LineSpectrum, SampleRecord

__all__ = [
    "AmplitudeFit",
    "IllConditionedWarning",
    "ObservationWindow",
    "RecoveredSpectrum",
    "SolverError",
    "SpectralProblem",
    "assemble",
    "detect_dimension",
    "eigenvector_profile",
    "rank_threshold",
    "recover_amplitudes",
    "solve",
]

REL_RANK_TOL = 1e-10
NOISE_KAPPA = 5.0
IM_TOL = 1e-6
RES_TOL = 1e-6
NOISY_TOL_FACTOR = 10.0
BAND_SLACK = 1.1
MERGE_TOL = 1e-9
ILL_CONDITIONED = 1e12
# seeds of the unit-variance noise records used to calibrate the noise floor
CALIBRATION_SEEDS = (101, 202, 303)


class SolverError(RuntimeError):
    """The reduced eigenproblem could not be solved."""


class IllConditionedWarning(UserWarning):
    """The amplitude design matrix is close to singular."""


@dataclass(frozen=True)
class ObservationWindow:
    """Observation half-time ``T`` and analysis band ``[omega0 - W, omega0 + W]``."""

    T: float
    W: float
    omega0: float = 0.0

    def __post_init__(self):
        if not (self.T > 0 and self.W > 0):
            raise ValueError("T and W must be positive")
        if not math.isfinite(self.omega0):
            raise ValueError("band center must be finite")

    @property
    def c(self) -> float:
        return self.W * self.T

    @property
    def capacity(self) -> float:
        """Largest resolvable line density ``T/pi``."""
        return self.T / math.pi

    def default_basis(self) -> PswfBasis:
        return _cached_basis(self.c, default_basis_size(self.c))


@functools.lru_cache(maxsize=32)
def _cached_basis(c: float, n: int) -> PswfBasis:
    return build_basis(c, n)


@dataclass(frozen=True, eq=False)
class SpectralProblem:
    """Assembled pencil ``(A, B)`` with its window and provenance.

    ``noise_sigma`` is the per-quadrature noise level of the samples (``0`` for
    exact data, ``None`` when unknown).  ``noise_norms`` holds the spectral
    norms of ``B`` and ``A`` assembled from unit noise on the same grid, and
    ``noise_diag_rms`` the RMS of the trailing diagonal of that ``B``.
    """

    A: np.ndarray
    B: np.ndarray
    window: ObservationWindow
    basis: PswfBasis
    assembly: str
    quad_order: int
    hermitian: bool = False
    noise_sigma: float | None = 0.0
    noise_norms: tuple[float, float] | None = None
    noise_diag_rms: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_basis(self) -> int:
        return self.basis.n_basis

    @property
    def basis_id(self) -> str:
        b = self.basis
        return f"pswf(c={b.c:.12g}, n={b.n_basis}, m={b.m_legendre})"


def _quad_order(basis: PswfBasis, window: ObservationWindow, max_offset: float, quad_order: int | None) -> int:
    if quad_order is None:
        # e^{i nu T x} needs about |nu| T points beyond the polynomial degree
        q = max(4 * basis.n_basis, int(math.ceil((basis.m_legendre + max_offset * window.T) / 2)) + 20)
    else:
        q = int(quad_order)
    if q < 2 * basis.n_basis:
        raise ValueError(f"quadrature order {q} is below 2*n_basis = {2 * basis.n_basis}")
    return q


def _galerkin(basis: PswfBasis, T: float, q: int, kernel_s: np.ndarray, kernel_d: np.ndarray):
    x, w = gauss_legendre(q)
    pw = basis.values(x) * w[:, None]
    B = T * (pw.T @ kernel_s @ pw)
    A = T * (pw.T @ kernel_d @ pw)
    return A, B


def _lags(T: float, q: int) -> np.ndarray:
    x, _ = gauss_legendre(q)
    return T * (x[:, None] - x[None, :])


def _check_basis(basis: PswfBasis, window: ObservationWindow) -> None:
    if not math.isclose(basis.c, window.c, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"basis bandwidth c={basis.c} does not match W*T={window.c}")


def assemble(
    source: LineSpectrum | SampleRecord,
    window: ObservationWindow,
    basis: PswfBasis | None = None,
    quad_order: int | None = None,
    *,
    signal_band: float | None = None,
    window_c: float = WINDOW_C,
) -> SpectralProblem:
    """Galerkin pencil for a line spectrum or a sampled record.

    Parameters
    ----------
    source : LineSpectrum or SampleRecord
        Exact lines use the analytic derivative.  Records are reconstructed
        with a windowed cardinal series and differentiated analytically; the
        record's derivative channel is used when present.
    window : ObservationWindow
    basis : PswfBasis, optional
        Prolate functions with ``c = W*T``; default ``ceil(2c/pi) + 10``
        functions.
    quad_order : int, optional
        Gauss-Legendre points per axis.  Default ``4*n_basis``, raised when
        line offsets from the band center need more.
    signal_band : float, optional
        Records only: largest ``|omega|`` in the signal.  Defaults to half
        the grid cutoff ``pi/h``, i.e. a record sampled twice as fast as
        Nyquist.
    window_c : float
        Records only: taper bandwidth of the reconstruction kernel.

    Returns
    -------
    SpectralProblem
    """
    basis = basis or window.default_basis()
    _check_basis(basis, window)
    T, w0 = window.T, window.omega0

    if isinstance(source, LineSpectrum):
        nu = source.omegas - w0
        q = _quad_order(basis, window, float(np.max(np.abs(nu), initial=0.0)), quad_order)
        x, _ = gauss_legendre(q)
        if len(source) == 0:
            zero = np.zeros((basis.n_basis, basis.n_basis), dtype=complex)
            return SpectralProblem(zero, zero.copy(), window, basis, "analytic_derivative", q, True)
        # S0 on the tensor grid as E diag(alpha) E^H with E = exp(i nu T x)
        e = np.exp(1j * T * np.outer(x, nu))
        kernel_s = (e * source.alphas) @ e.conj().T
        kernel_d = (e * (source.alphas * nu)) @ e.conj().T
        A, B = _galerkin(basis, T, q, kernel_s, kernel_d)
        hermitian = bool(np.all(source.alphas.imag == 0) and np.all(source.alphas.real >= 0))
        if hermitian:
            _assert_hermitian(A, B)
            A, B = 0.5 * (A + A.conj().T), 0.5 * (B + B.conj().T)
        return SpectralProblem(A, B, window, basis, "analytic_derivative", q, hermitian)

    if not isinstance(source, SampleRecord):
        raise TypeError("source must be a LineSpectrum or a SampleRecord")
    record = source
    h = record.spacing()
    band = 0.5 * math.pi / h if signal_band is None else float(signal_band)
    q = _quad_order(basis, window, 0.0, quad_order)
    interp = bandlimited_reconstruct(record, band, window_c)
    if not interp.covers(-2 * T, 2 * T):
        lo = -2 * T - interp.tau
        hi = 2 * T + interp.tau
        raise ValueError(
            f"insufficient sample coverage: the record must span [{lo:.6g}, {hi:.6g}] "
            f"(lags up to 2T plus the reconstruction half-width {interp.tau:.4g})"
        )
    op_s, op_d = _lag_operators(record, band, window_c, T, q)
    values = record.values
    use_channel = record.derivative_values is not None
    deriv = record.derivative_values if use_channel else None
    kernel_s, kernel_d = _demodulated_kernels(op_s, op_d, values, deriv, T, q, w0)
    A, B = _galerkin(basis, T, q, kernel_s, kernel_d)

    hermitian = _conjugate_symmetric(record)
    if hermitian:
        A, B = 0.5 * (A + A.conj().T), 0.5 * (B + B.conj().T)

    # unit-noise calibration of the noise floor on this grid
    norms_a, norms_b, diag = [], [], []
    tail = slice(max(0, basis.n_basis - max(2, basis.n_basis // 4)), basis.n_basis)
    for seed in CALIBRATION_SEEDS:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(len(record)) + 1j * rng.standard_normal(len(record))
        ks, kd = _demodulated_kernels(op_s, op_d, z, None, T, q, w0)
        ea, eb = _galerkin(basis, T, q, ks, kd)
        norms_a.append(np.linalg.norm(ea, 2))
        norms_b.append(np.linalg.norm(eb, 2))
        diag.append(np.abs(np.diag(eb)[tail]) ** 2)
    noise = record.noise
    sigma: float | None
    if noise.kind == "none" and "kind" in record.noise_meta:
        sigma = 0.0
    elif noise.kind in ("iid_gaussian", "growing", "shot"):
        env = noise.envelope(record.times[np.abs(record.times) <= 2 * T + interp.tau])
        sigma = float(np.max(env, initial=0.0))
    else:
        sigma = None
    return SpectralProblem(
        A,
        B,
        window,
        basis,
        "interpolated_derivative",
        q,
        hermitian,
        noise_sigma=sigma,
        noise_norms=(float(np.mean(norms_b)), float(np.mean(norms_a))),
        noise_diag_rms=float(np.sqrt(np.mean(diag))),
        meta={"signal_band": band, "reconstruction_half_width": interp.tau, "derivative_channel": use_channel},
    )


def _assert_hermitian(A: np.ndarray, B: np.ndarray, tol: float = 1e-10) -> None:
    nb = np.linalg.norm(B)
    na = np.linalg.norm(A)
    if np.linalg.norm(B - B.conj().T) > tol * max(nb, 1e-300):
        raise AssertionError("B is not Hermitian although all amplitudes are nonnegative")
    if na > 0 and np.linalg.norm(A - A.conj().T) > tol * na:
        raise AssertionError("A is not Hermitian although all amplitudes are nonnegative")


def _conjugate_symmetric(record: SampleRecord, tol: float = 1e-12) -> bool:
    t = record.times
    if not np.allclose(t, -t[::-1], rtol=0, atol=1e-12 * max(1.0, abs(t[-1]))):
        return False
    v = record.values
    scale = max(np.max(np.abs(v)), 1e-300)
    return bool(np.max(np.abs(v - np.conj(v[::-1]))) <= tol * scale)


def _record_key(record: SampleRecord) -> str:
    return hashlib.sha1(record.times.tobytes()).hexdigest()


_OPERATOR_CACHE: dict = {}
_OPERATOR_CACHE_SIZE = 8


def _lag_operators(record: SampleRecord, band: float, window_c: float, T: float, q: int):
    key = (_record_key(record), band, window_c, T, q)
    hit = _OPERATOR_CACHE.get(key)
    if hit is None:
        interp = bandlimited_reconstruct(record, band, window_c)
        lags = _lags(T, q).ravel()
        hit = (interp.operator(lags), interp.operator(lags, derivative=True))
        if len(_OPERATOR_CACHE) >= _OPERATOR_CACHE_SIZE:
            _OPERATOR_CACHE.pop(next(iter(_OPERATOR_CACHE)))
        _OPERATOR_CACHE[key] = hit
    return hit


def _demodulated_kernels(op_s, op_d, values, deriv, T, q, w0):
    lags = _lags(T, q)
    s = (op_s @ values).reshape(q, q)
    ds = (op_s @ deriv if deriv is not None else op_d @ values).reshape(q, q)
    if w0 == 0.0:
        return s, -1j * ds
    phase = np.exp(-1j * w0 * lags)
    return s * phase, -1j * (ds - 1j * w0 * s) * phase


def rank_threshold(
    problem: SpectralProblem,
    noise_floor: float | None = None,
    *,
    sigma: float | None = None,
    kappa: float = NOISE_KAPPA,
    rel_tol: float = REL_RANK_TOL,
) -> tuple[float, dict]:
    """Singular-value threshold used by :func:`detect_dimension`.

    Returns the threshold and a dict describing how it was obtained.
    """
    smax = float(np.linalg.norm(problem.B, 2)) if problem.B.size else 0.0
    rel = rel_tol * smax
    if noise_floor is not None:
        return float(noise_floor), {"rule": "noise_floor", "sigma": sigma}
    if sigma is None:
        sigma = problem.noise_sigma
    estimated = False
    if sigma is None and problem.noise_diag_rms:
        n = problem.n_basis
        tail = slice(max(0, n - max(2, n // 4)), n)
        sigma = float(np.sqrt(np.mean(np.abs(np.diag(problem.B)[tail]) ** 2)) / problem.noise_diag_rms)
        estimated = True
    if sigma and problem.noise_norms:
        tau = kappa * sigma * problem.noise_norms[0]
        return max(tau, rel), {"rule": "noise", "sigma": sigma, "sigma_estimated": estimated, "kappa": kappa}
    return rel, {"rule": "relative", "rel_tol": rel_tol, "sigma": sigma or 0.0}


def detect_dimension(problem: SpectralProblem, noise_floor: float | None = None, **kwargs) -> int:
    """Number of singular values of ``B`` above the rank threshold.

    Without ``noise_floor`` the threshold is ``kappa * sigma * ||E||`` for
    noisy records, where ``||E||`` is the norm of ``B`` assembled from unit
    noise on the same grid and ``sigma`` the noise level (taken from the
    record or estimated from the trailing diagonal of ``B``), and
    ``1e-10 * sigma_max(B)`` for exact data.
    """
    tau, _ = rank_threshold(problem, noise_floor, **kwargs)
    if not problem.B.size:
        return 0
    s = np.linalg.svd(problem.B, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tau))


@dataclass(frozen=True, eq=False)
class RecoveredSpectrum:
    """Frequencies and amplitudes extracted from a pencil.

    Attributes
    ----------
    rank : int
        Detected dimension.
    omegas : ndarray
        Reported frequencies, ascending.
    coeff_vectors : ndarray, shape (n_basis, len(omegas))
        Test-function coefficients, one column per frequency.
    alphas : ndarray of complex
    residuals : ndarray
        ``||(A - w B) v|| / ||B v||``.
    window : ObservationWindow
    diagnostics : dict
    """

    rank: int
    omegas: np.ndarray
    coeff_vectors: np.ndarray
    alphas: np.ndarray
    residuals: np.ndarray
    window: ObservationWindow
    diagnostics: dict = field(default_factory=dict)

    @property
    def delta_eff_est(self) -> float:
        return self.rank / (2.0 * self.window.W)

    def __len__(self) -> int:
        return self.omegas.size

    def as_line_spectrum(self) -> LineSpectrum:
        return LineSpectrum(self.omegas, self.alphas)

    def to_dict(self) -> dict:
        return {
            "rank": int(self.rank),
            "lines": [
                {"omega": float(w), "re": float(a.real), "im": float(a.imag), "residual": float(r)}
                for w, a, r in zip(self.omegas, self.alphas, self.residuals)
            ],
            "discarded": self.diagnostics.get("discarded", []),
            "delta_eff": self.delta_eff_est,
            "capacity_T_over_pi": self.window.capacity,
        }


def _profile_transform(basis: PswfBasis, window: ObservationWindow, omega: np.ndarray) -> np.ndarray:
    # int psi_n(y) exp(-i (omega - omega0) T y) dy for each omega
    u = (np.asarray(omega, dtype=float) - window.omega0) / window.W
    out = np.empty(u.shape + (basis.n_basis,), dtype=complex)
    inside = np.abs(u) <= 1.0
    if np.any(inside):
        out[inside] = basis.values(u[inside]) * np.conj(basis.mu)
    if np.any(~inside):
        out[~inside] = basis.transform(-u[~inside])
    return out


def eigenvector_profile(problem: SpectralProblem, v):
    """Fourier transform ``F`` of the test function with coefficients ``v``.

    ``F(omega) = sum_n v_n int psi_n(y) exp(-i (omega - omega0) T y) dy``,
    which inside the band equals ``sum_n v_n conj(mu_n) psi_n((omega - omega0)/W)``.
    For an eigenvector of the line at ``omega_k`` it vanishes at every other
    line of the signal.
    """
    v = np.asarray(v, dtype=complex).ravel()
    basis, window = problem.basis, problem.window

    def profile(omega):
        omega = np.asarray(omega, dtype=float)
        out = _profile_transform(basis, window, omega) @ v
        return complex(out) if omega.ndim == 0 else out

    return profile


def solve(
    problem: SpectralProblem,
    rank_policy: int | float | str | None = None,
    *,
    im_tol: float = IM_TOL,
    res_tol: float = RES_TOL,
    sigma: float | None = None,
    kappa: float = NOISE_KAPPA,
) -> RecoveredSpectrum:
    """Solve the pencil on the dominant subspace of ``B``.

    Parameters
    ----------
    problem : SpectralProblem
    rank_policy : None, "auto", int or float
        ``None``/``"auto"`` detects the rank, an ``int`` fixes it, a
        ``float`` is used as the singular-value threshold.
    im_tol, res_tol : float
        Eigenvalues with ``|Im w| > im_tol*W`` or residual above
        ``res_tol*W`` are discarded.  For noisy data both tolerances are
        raised to ten times the expected noise-induced perturbation.
    sigma : float, optional
        Noise level overriding the one stored in the problem.
    kappa : float
        Safety factor of the noise threshold.

    Returns
    -------
    RecoveredSpectrum
    """
    window = problem.window
    W, w0 = window.W, window.omega0
    A, B = problem.A, problem.B
    n = B.shape[0]

    if isinstance(rank_policy, (int, np.integer)) and not isinstance(rank_policy, bool):
        tau, rule = None, {"rule": "fixed"}
    else:
        floor = float(rank_policy) if isinstance(rank_policy, (float, np.floating)) else None
        tau, rule = rank_threshold(problem, floor, sigma=sigma, kappa=kappa)

    if problem.hermitian:
        evals, evecs = np.linalg.eigh(B)
        order = np.argsort(evals)[::-1]
        svals, basis_vecs = evals[order], evecs[:, order]
        positive = svals > 0
        magnitude = np.abs(svals)
    else:
        U, svals, Vh = np.linalg.svd(B)
        magnitude = svals
        positive = np.ones_like(svals, dtype=bool)

    if rule["rule"] == "fixed":
        r = min(int(rank_policy), n)
    elif magnitude.size == 0 or magnitude.max() == 0:
        r = 0
    else:
        kept = (magnitude > tau) & positive
        r = int(np.sum(kept)) if problem.hermitian else int(np.sum(svals > tau))
    diagnostics = {
        "singular_values": magnitude.tolist(),
        "threshold": tau,
        "rank_rule": rule,
        "discarded": [],
        "merged": [],
    }
    empty = RecoveredSpectrum(
        r, np.zeros(0), np.zeros((n, 0), dtype=complex), np.zeros(0, dtype=complex), np.zeros(0), window, diagnostics
    )
    if r == 0:
        return empty

    try:
        if problem.hermitian:
            sel = svals[:r]
            if np.any(sel <= 0):
                raise SolverError("Hermitian projection hit a nonpositive eigenvalue of B")
            Ur = basis_vecs[:, :r] / np.sqrt(sel)
            Mr = Ur.conj().T @ A @ Ur
            Mr = 0.5 * (Mr + Mr.conj().T)
            ev, Y = np.linalg.eigh(Mr)
            ev = ev.astype(complex)
            V = Ur @ Y
        else:
            Mr = (U[:, :r].conj().T @ A @ Vh[:r].conj().T) / svals[:r, None]
            ev, Y = np.linalg.eig(Mr)
            V = Vh[:r].conj().T @ Y
    except np.linalg.LinAlgError as exc:
        cond = float(magnitude[0] / magnitude[r - 1]) if r else float("inf")
        raise SolverError(f"reduced eigenproblem failed (rank {r}, cond(B_r) = {cond:.3e}): {exc}") from exc

    ev = ev + w0
    BV = B @ V
    res = np.linalg.norm(A @ V - BV * (ev - w0), axis=0) / np.maximum(np.linalg.norm(BV, axis=0), 1e-300)

    im_lim = im_tol * W
    res_lim = res_tol * W
    sig = sigma if sigma is not None else rule.get("sigma")
    if sig and problem.noise_norms:
        nb, na = problem.noise_norms
        noisy = NOISY_TOL_FACTOR * sig * (na + BAND_SLACK * W * nb) / magnitude[r - 1]
        im_lim = max(im_lim, noisy)
        res_lim = max(res_lim, noisy)
    diagnostics["im_limit"] = im_lim
    diagnostics["residual_limit"] = res_lim

    keep = []
    for j in range(r):
        reason = None
        if abs(ev[j].imag) > im_lim:
            reason = "imaginary"
        elif res[j] > res_lim:
            reason = "residual"
        elif abs(ev[j].real - w0) > BAND_SLACK * W:
            reason = "out_of_band"
        if reason:
            diagnostics["discarded"].append(
                {"omega": float(ev[j].real), "imag": float(ev[j].imag), "residual": float(res[j]), "reason": reason}
            )
        else:
            keep.append(j)
    if not keep:
        return empty

    keep = np.array(keep)
    omegas = ev[keep].real
    V = V[:, keep]
    res = res[keep]
    order = np.argsort(omegas)
    omegas, V, res = omegas[order], V[:, order], res[order]
    V = V / np.linalg.norm(V, axis=0)

    # amplitude of each line from v^H B v = T alpha |F(omega)|^2
    prof = _profile_transform(problem.basis, window, omegas)
    F = np.einsum("kn,nk->k", prof, V)
    quad = np.einsum("nk,nk->k", V.conj(), B @ V)
    alphas = quad / (window.T * np.abs(F) ** 2)

    # merge near-duplicates
    groups = [[0]]
    for k in range(1, omegas.size):
        if omegas[k] - omegas[groups[-1][-1]] <= MERGE_TOL * W:
            groups[-1].append(k)
        else:
            groups.append([k])
    if any(len(g) > 1 for g in groups):
        idx = [g[0] for g in groups]
        for g in groups:
            if len(g) > 1:
                diagnostics["merged"].append({"omega": float(omegas[g[0]]), "count": len(g)})
        alphas = np.array([alphas[g].sum() for g in groups])
        omegas, V, res, F = omegas[idx], V[:, idx], res[idx], F[idx]

    # each test function should vanish at the other recovered lines
    if omegas.size > 1:
        cross = np.abs(_profile_transform(problem.basis, window, omegas) @ V)
        cross = cross / np.abs(F)[None, :]
        np.fill_diagonal(cross, 0.0)
        diagnostics["profile_leakage"] = cross.max(axis=0).tolist()
    else:
        diagnostics["profile_leakage"] = [0.0] * omegas.size

    return RecoveredSpectrum(r, omegas, V, alphas, res, window, diagnostics)


@dataclass(frozen=True)
class AmplitudeFit:
    """Least-squares amplitudes with the conditioning of the fit."""

    alphas: np.ndarray
    condition: float
    ill_conditioned: bool


def recover_amplitudes(record: SampleRecord, omegas) -> AmplitudeFit:
    """Least-squares amplitudes for known frequencies.

    Minimizes ``sum_j |S(t_j) - sum_k alpha_k exp(i omega_k t_j)|^2`` with a
    rank-revealing solver.  A condition number above ``1e12`` triggers an
    :class:`IllConditionedWarning`; the result is still returned.
    """
    omegas = np.asarray(omegas, dtype=float).ravel()
    if omegas.size == 0:
        return AmplitudeFit(np.zeros(0, dtype=complex), 1.0, False)
    if len(record) < omegas.size:
        raise ValueError(f"need at least {omegas.size} samples for {omegas.size} amplitudes, got {len(record)}")
    design = np.exp(1j * np.outer(record.times, omegas))
    alphas, *_ = scipy.linalg.lstsq(design, record.values, lapack_driver="gelsd")
    svals = np.linalg.svd(design, compute_uv=False)
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else float("inf")
    ill = cond > ILL_CONDITIONED
    if ill:
        warnings.warn(f"amplitude design matrix condition number {cond:.2e}", IllConditionedWarning, stacklevel=2)
    return AmplitudeFit(np.asarray(alphas, dtype=complex), cond, ill)
