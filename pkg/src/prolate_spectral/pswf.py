"""Prolate spheroidal wave functions on [-1, 1].

The functions are expanded in normalized Legendre polynomials
``Pbar_k = sqrt(k + 1/2) P_k``.  In that basis the prolate differential
operator is symmetric and couples only indices of equal parity that differ by
two, so each parity block is a symmetric tridiagonal matrix whose eigenvectors
give the expansion coefficients.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "ConvergenceError",
    "PswfBasis",
    "build_basis",
    "concentration_eigenvalue",
    "default_basis_size",
    "evaluate",
    "evaluate_derivative",
    "gauss_legendre",
]

# Legendre coefficients beyond this magnitude at the end of the table mean
# the expansion was truncated too early.
TAIL_TOL = 1e-13

# Below this value the sinc-kernel Rayleigh quotient loses relative accuracy
# (its absolute error is about machine epsilon), so the small eigenvalues are
# taken from the self-reproduction ratio instead.
RAYLEIGH_FLOOR = 1e-8


class ConvergenceError(ValueError):
    """Raised when the Legendre expansion table is too short."""


@functools.lru_cache(maxsize=64)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = npleg.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1] (cached, read-only)."""
    if order < 1:
        raise ValueError("quadrature order must be positive")
    return _gauss_legendre(int(order))


def default_basis_size(c: float, buffer: int = 10) -> int:
    """Basis size ``ceil(2c/pi) + buffer`` covering the plunge region."""
    return int(math.ceil(2.0 * c / math.pi - 1e-12)) + buffer


def default_legendre_order(c: float, n_basis: int) -> int:
    return max(2 * n_basis, int(math.ceil(2.0 * c)) + 30)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PswfBasis:
    """Immutable table of the first ``n_basis`` prolate functions for one ``c``.

    Attributes
    ----------
    c : float
        Bandwidth parameter ``W*T``.
    n_basis : int
        Number of retained functions.
    legendre_coeffs : ndarray, shape (m_legendre, n_basis)
        Column ``n`` holds the coefficients of ``psi_n`` in the normalized
        Legendre polynomials.
    chi : ndarray
        Sturm-Liouville eigenvalues, ascending.
    lam : ndarray
        Concentration eigenvalues, descending.
    mu : ndarray or None
        Self-reproduction constants ``i**n sqrt(2 pi lam_n / c)``.  ``None``
        when ``c == 0``, where they are undefined.
    """

    c: float
    n_basis: int
    legendre_coeffs: np.ndarray
    chi: np.ndarray
    lam: np.ndarray
    mu: np.ndarray | None

    @property
    def m_legendre(self) -> int:
        return self.legendre_coeffs.shape[0]

    @functools.cached_property
    def _monomial_scaled(self) -> np.ndarray:
        # coefficients with respect to the unnormalized P_k
        k = np.arange(self.m_legendre)
        return _frozen(self.legendre_coeffs * np.sqrt(k + 0.5)[:, None])

    def values(self, x, derivative: bool = False) -> np.ndarray:
        """All retained functions at the points ``x``.

        Parameters
        ----------
        x : array_like
            Points in [-1, 1].
        derivative : bool
            Return ``psi_n'(x)`` instead of ``psi_n(x)``.

        Returns
        -------
        ndarray, shape x.shape + (n_basis,)
        """
        x = np.asarray(x, dtype=float)
        if np.any(np.abs(x) > 1.0 + 1e-12):
            raise ValueError("prolate functions are evaluated on [-1, 1] only")
        coeffs = self._monomial_scaled
        if derivative:
            coeffs = npleg.legder(coeffs, axis=0)
            if coeffs.shape[0] == 0:
                return np.zeros(x.shape + (self.n_basis,))
        vander = npleg.legvander(x.ravel(), coeffs.shape[0] - 1)
        return (vander @ coeffs).reshape(x.shape + (self.n_basis,))

    def transform(self, x) -> np.ndarray:
        """Finite Fourier transform ``g_n(x) = int psi_n(y) exp(i c x y) dy``.

        Defined for every real ``x``.  Inside [-1, 1] it equals
        ``mu_n psi_n(x)``; outside it is the band-limited extension.
        """
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        span = float(np.max(np.abs(flat), initial=0.0))
        order = max(4 * self.m_legendre, int(math.ceil(self.c * span)) + self.m_legendre + 40)
        y, w = gauss_legendre(order)
        weighted = self.values(y) * w[:, None]
        out = np.empty((flat.size, self.n_basis), dtype=complex)
        # chunk to bound the size of the exponential table
        step = max(1, 2_000_000 // order)
        for start in range(0, flat.size, step):
            chunk = flat[start:start + step]
            out[start:start + step] = np.exp(1j * self.c * np.outer(chunk, y)) @ weighted
        return out.reshape(x.shape + (self.n_basis,))


def _prolate_tridiagonal(c: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(m, dtype=float)
    c2 = c * c
    diag = k * (k + 1) + c2 * (2 * k * (k + 1) - 1) / ((2 * k - 1) * (2 * k + 3))
    off = c2 * (k + 1) * (k + 2) / ((2 * k + 3) * np.sqrt((2 * k + 1) * (2 * k + 5)))
    return diag, off


def _rayleigh_lambdas(c: float, coeffs: np.ndarray) -> np.ndarray:
    m = coeffs.shape[0]
    x, w = gauss_legendre(4 * m)
    k = np.arange(m)
    psi = npleg.legvander(x, m - 1) @ (coeffs * np.sqrt(k + 0.5)[:, None])
    pw = psi * w[:, None]
    kernel = (c / np.pi) * np.sinc((c / np.pi) * (x[:, None] - x[None, :]))
    return np.einsum("in,in->n", pw, kernel @ pw)


def _ratio_lambdas(c: float, coeffs: np.ndarray) -> np.ndarray:
    # even n: int psi_n = mu_n psi_n(0); odd n: i c int y psi_n = mu_n psi_n'(0)
    m, n_basis = coeffs.shape
    k = np.arange(m)
    scaled = coeffs * np.sqrt(k + 0.5)[:, None]
    at0 = npleg.legval(0.0, scaled)
    slope0 = npleg.legval(0.0, npleg.legder(scaled, axis=0)) if m > 1 else np.zeros(n_basis)
    mag = np.empty(n_basis)
    even = np.arange(n_basis) % 2 == 0
    mag[even] = math.sqrt(2.0) * coeffs[0, even] / at0[even]
    odd = ~even
    if m > 1:
        mag[odd] = (2.0 * c / 3.0) * math.sqrt(1.5) * coeffs[1, odd] / slope0[odd]
    return c * mag**2 / (2.0 * np.pi)


def build_basis(c: float, n_basis: int, m_legendre: int | None = None) -> PswfBasis:
    """Compute the first ``n_basis`` prolate functions for bandwidth ``c``.

    Parameters
    ----------
    c : float
        Bandwidth parameter, ``c >= 0``.
    n_basis : int
        Number of functions to keep.
    m_legendre : int, optional
        Length of the Legendre expansion.  Defaults to
        ``max(2*n_basis, ceil(2c) + 30)``.

    Returns
    -------
    PswfBasis

    Raises
    ------
    ValueError
        If ``c < 0`` or ``n_basis < 1``.
    ConvergenceError
        If the Legendre tail of a retained function is not negligible.
    """
    c = float(c)
    if not math.isfinite(c) or c < 0:
        raise ValueError(f"bandwidth parameter must be finite and >= 0, got {c}")
    n_basis = int(n_basis)
    if n_basis < 1:
        raise ValueError("n_basis must be >= 1")
    m = default_legendre_order(c, n_basis) if m_legendre is None else int(m_legendre)
    if m < n_basis + 2:
        raise ConvergenceError(
            f"m_legendre={m} is too small for n_basis={n_basis}; increase m_legendre"
        )

    diag, off = _prolate_tridiagonal(c, m)
    coeffs = np.zeros((m, n_basis))
    chi = np.empty(n_basis)
    for parity in (0, 1):
        idx = np.arange(parity, m, 2)
        count = (n_basis - parity + 1) // 2
        if count == 0:
            continue
        evals, evecs = eigh_tridiagonal(
            diag[idx], off[idx[:-1]], select="i", select_range=(0, count - 1)
        )
        cols = 2 * np.arange(count) + parity
        chi[cols] = evals
        coeffs[np.ix_(idx, cols)] = evecs

    # psi_n(1) = sum_k coeff_k sqrt(k + 1/2) > 0
    at_one = np.sqrt(np.arange(m) + 0.5) @ coeffs
    coeffs *= np.where(at_one < 0, -1.0, 1.0)

    tail = np.abs(coeffs[-2:]).max()
    if tail > TAIL_TOL:
        raise ConvergenceError(
            f"Legendre tail {tail:.1e} exceeds {TAIL_TOL:.0e}; increase m_legendre"
        )

    if c == 0.0:
        lam = np.zeros(n_basis)
        mu = None
    else:
        lam = _rayleigh_lambdas(c, coeffs)
        small = lam < RAYLEIGH_FLOOR
        if np.any(small):
            lam[small] = _ratio_lambdas(c, coeffs)[small]
        lam = np.clip(lam, 0.0, 1.0)
        mu = _frozen((1j ** np.arange(n_basis)) * np.sqrt(2.0 * np.pi * lam / c))

    return PswfBasis(
        c=c,
        n_basis=n_basis,
        legendre_coeffs=_frozen(coeffs),
        chi=_frozen(chi),
        lam=_frozen(lam),
        mu=mu,
    )


def _check_index(basis: PswfBasis, n: int) -> int:
    n = int(n)
    if not 0 <= n < basis.n_basis:
        raise IndexError(f"index {n} out of range for a basis of size {basis.n_basis}")
    return n


def evaluate(basis: PswfBasis, n: int, x):
    """Value of ``psi_n`` at ``x`` (scalar or array) in [-1, 1]."""
    n = _check_index(basis, n)
    out = basis.values(x)[..., n]
    return float(out) if np.ndim(out) == 0 else out


def evaluate_derivative(basis: PswfBasis, n: int, x):
    """Derivative ``psi_n'(x)`` from the differentiated Legendre series."""
    n = _check_index(basis, n)
    out = basis.values(x, derivative=True)[..., n]
    return float(out) if np.ndim(out) == 0 else out


def concentration_eigenvalue(basis: PswfBasis, n: int) -> float:
    """Fraction of the energy of the band-limited ``psi_n`` inside [-1, 1]."""
    return float(basis.lam[_check_index(basis, n)])
