"""Small quantum systems as signal sources.

Time evolution is exact, through the eigendecomposition of a dense
Hamiltonian.  A Hadamard-test shot model supplies the statistical noise of a
device that can only estimate ``<Psi(t), Psi(0)>`` from a finite number of
measurements.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .sampling import WINDOW_C, oversampled_grid
from .signals import LineSpectrum, NoiseModel, SampleRecord, mirror_conjugate
from .solver import ObservationWindow, RecoveredSpectrum, assemble, solve

__all__ = [
    "Hamiltonian",
    "QpdConfig",
    "QpdReport",
    "QuantumState",
    "ShotModel",
    "autocorrelation",
    "autocorrelation_spectrum",
    "build_hamiltonian",
    "evolve",
    "match_lines",
    "observable_signal",
    "observable_spectrum",
    "parse_hamiltonian",
    "parse_state",
    "qpd_pipeline",
    "shot_estimate",
]

HERMITIAN_TOL = 1e-12
MAX_RANDOM_DIM = 2048
MAX_SITES = 12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Dense Hermitian matrix with its cached eigendecomposition.

    Attributes
    ----------
    matrix : ndarray, shape (d, d)
    energies : ndarray
        Eigenvalues, ascending.
    states : ndarray, shape (d, d)
        Orthonormal eigenvectors as columns.
    provenance : str
    """

    matrix: np.ndarray
    energies: np.ndarray
    states: np.ndarray
    provenance: str

    @classmethod
    def from_matrix(cls, matrix, provenance: str = "matrix") -> "Hamiltonian":
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        scale = max(np.max(np.abs(m)), 1.0)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale:
            raise ValueError("Hamiltonian is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        energies, states = np.linalg.eigh(m)
        return cls(_frozen(m), _frozen(energies), _frozen(states), provenance)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def save(self, path) -> None:
        """CSV with ``d`` rows of ``2d`` numbers: ``re, im`` pairs, row-major."""
        d = self.dim
        table = np.empty((d, 2 * d))
        table[:, 0::2] = self.matrix.real
        table[:, 1::2] = self.matrix.imag
        np.savetxt(path, table, delimiter=",", fmt="%.17g")

    @classmethod
    def load(cls, path) -> "Hamiltonian":
        flat = np.loadtxt(path, delimiter=",", ndmin=1).ravel()
        d = int(round(math.sqrt(flat.size / 2)))
        if 2 * d * d != flat.size:
            raise ValueError(f"{path}: expected 2*d^2 numbers, found {flat.size}")
        pairs = flat.reshape(d, d, 2)
        return cls.from_matrix(pairs[..., 0] + 1j * pairs[..., 1], provenance=f"file:{path}")


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized state vector."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("state vector must be nonzero")
        object.__setattr__(self, "vector", _frozen(v / norm))

    @property
    def dim(self) -> int:
        return self.vector.size

    @classmethod
    def random(cls, dim: int, seed: int | None = 0) -> "QuantumState":
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))

    @classmethod
    def basis(cls, dim: int, index: int) -> "QuantumState":
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for dimension {dim}")
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)


def _spin_ops():
    sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
    sy = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz


def _site_op(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    left = np.eye(2**site)
    right = np.eye(2 ** (n_sites - site - 1))
    return np.kron(np.kron(left, op), right)


def heisenberg_chain(n_sites: int, J: float = 1.0, h: float = 0.0, periodic: bool = False) -> np.ndarray:
    """``H = J sum S_i . S_{i+1} + h sum S^z_i`` with spin-1/2 operators."""
    spins = _spin_ops()
    d = 2**n_sites
    H = np.zeros((d, d), dtype=complex)
    bonds = [(i, i + 1) for i in range(n_sites - 1)]
    if periodic and n_sites > 2:
        bonds.append((n_sites - 1, 0))
    for i, j in bonds:
        for s in spins:
            H += J * (_site_op(s, i, n_sites) @ _site_op(s, j, n_sites))
    if h:
        for i in range(n_sites):
            H += h * _site_op(spins[2], i, n_sites)
    return H


def build_hamiltonian(kind: str, params: dict | None = None, seed: int | None = 0) -> Hamiltonian:
    """Desk-scale Hamiltonians.

    Parameters
    ----------
    kind : {"random", "heisenberg_chain", "from_file"}
    params : dict
        ``random``: ``dim`` and optional ``norm`` (spectral radius after
        rescaling, default 1).  ``heisenberg_chain``: ``n_sites``, ``J``,
        ``h``, ``periodic``.  ``from_file``: ``path``.
    seed : int
        Seed of the random ensemble.
    """
    params = dict(params or {})
    if kind == "random":
        d = int(params.get("dim", 16))
        if not 1 <= d <= MAX_RANDOM_DIM:
            raise ValueError(f"random Hamiltonian dimension must be in [1, {MAX_RANDOM_DIM}]")
        rng = np.random.default_rng(seed)
        g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
        m = 0.5 * (g + g.conj().T)
        norm = params.get("norm", 1.0)
        if norm is not None:
            radius = np.max(np.abs(np.linalg.eigvalsh(m)))
            m = m * (float(norm) / radius)
        return Hamiltonian.from_matrix(m, provenance=f"random(dim={d}, seed={seed}, norm={norm})")
    if kind in ("heisenberg_chain", "heis"):
        n = int(params.get("n_sites", 2))
        if not 1 <= n <= MAX_SITES:
            raise ValueError(f"n_sites must be in [1, {MAX_SITES}]")
        J = float(params.get("J", 1.0))
        h = float(params.get("h", 0.0))
        periodic = bool(params.get("periodic", False))
        m = heisenberg_chain(n, J, h, periodic)
        return Hamiltonian.from_matrix(m, provenance=f"heisenberg_chain(n_sites={n}, J={J}, h={h}, periodic={periodic})")
    if kind in ("from_file", "file"):
        return Hamiltonian.load(params["path"])
    raise ValueError(f"unknown Hamiltonian kind {kind!r}")


def parse_hamiltonian(text: str) -> Hamiltonian:
    """Parse ``random:16:seed7``, ``heis:8:J=1:h=0.5`` or ``file:h.csv``."""
    try:
        return _parse_hamiltonian(text)
    except (IndexError, KeyError, TypeError) as exc:
        raise ValueError(f"cannot parse Hamiltonian spec {text!r}") from exc


def _parse_hamiltonian(text: str) -> Hamiltonian:
    parts = text.split(":")
    head = parts[0].lower()
    if head == "random":
        dim = int(parts[1])
        seed = 0
        params = {"dim": dim}
        for p in parts[2:]:
            if p.startswith("seed"):
                seed = int(p[4:].lstrip("="))
            elif p.startswith("norm="):
                params["norm"] = float(p[5:])
        return build_hamiltonian("random", params, seed)
    if head in ("heis", "heisenberg", "heisenberg_chain"):
        params = {"n_sites": int(parts[1])}
        for p in parts[2:]:
            key, _, val = p.partition("=")
            if key == "periodic":
                params[key] = val.lower() in ("1", "true", "yes")
            else:
                params[key] = float(val)
        return build_hamiltonian("heisenberg_chain", params)
    if head == "file":
        return build_hamiltonian("from_file", {"path": text[len("file:"):]})
    raise ValueError(f"cannot parse Hamiltonian spec {text!r}")


def parse_state(text: str, dim: int) -> QuantumState:
    """Parse ``random:seed3`` or ``basis:0``."""
    head, _, rest = text.partition(":")
    if head == "random":
        seed = int(rest[4:].lstrip("=")) if rest.startswith("seed") else int(rest or 0)
        return QuantumState.random(dim, seed)
    if head == "basis":
        return QuantumState.basis(dim, int(rest or 0))
    raise ValueError(f"cannot parse state spec {text!r}")


def _check_dims(H: Hamiltonian, psi0: QuantumState) -> None:
    if H.dim != psi0.dim:
        raise ValueError(f"dimension mismatch: Hamiltonian {H.dim}, state {psi0.dim}")


def evolve(H: Hamiltonian, psi0: QuantumState, t: float) -> np.ndarray:
    """``Psi(t) = exp(-i H t) Psi(0)``."""
    _check_dims(H, psi0)
    c = H.states.conj().T @ psi0.vector
    return H.states @ (np.exp(-1j * H.energies * t) * c)


def _overlaps(H: Hamiltonian, psi0: QuantumState) -> np.ndarray:
    _check_dims(H, psi0)
    return H.states.conj().T @ psi0.vector


def autocorrelation_spectrum(H: Hamiltonian, psi0: QuantumState) -> LineSpectrum:
    """Lines ``(E_n, |<phi_n, Psi(0)>|^2)``; degenerate levels are merged."""
    c = _overlaps(H, psi0)
    return LineSpectrum(H.energies, np.abs(c) ** 2)


def autocorrelation(H: Hamiltonian, psi0: QuantumState, t):
    """``S(t) = <Psi(t), Psi(0)> = sum_n |<phi_n, Psi(0)>|^2 exp(i E_n t)``."""
    w = np.abs(_overlaps(H, psi0)) ** 2
    t_arr = np.asarray(t, dtype=float)
    out = np.exp(1j * np.multiply.outer(t_arr, H.energies)) @ w
    return complex(out) if t_arr.ndim == 0 else out


def _observable_weights(H: Hamiltonian, psi0: QuantumState, O) -> np.ndarray:
    O = np.asarray(O, dtype=complex)
    if O.shape != (H.dim, H.dim):
        raise ValueError(f"observable must be {H.dim}x{H.dim}")
    if np.max(np.abs(O - O.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(O))):
        raise ValueError("observable is not Hermitian")
    c = _overlaps(H, psi0)
    Ok = H.states.conj().T @ O @ H.states
    # alpha_kl = <Psi0, phi_k> <phi_k, O phi_l> <phi_l, Psi0>
    return np.conj(c)[:, None] * Ok * c[None, :]


def observable_signal(H: Hamiltonian, psi0: QuantumState, O, t):
    """``S(t) = <Psi(t), O Psi(t)> = sum_kl alpha_kl exp(i (E_k - E_l) t)``."""
    alpha = _observable_weights(H, psi0, O)
    E = H.energies
    t_arr = np.asarray(t, dtype=float)
    phase = np.exp(1j * np.multiply.outer(t_arr, E))
    # sum_kl conj-free: e^{i E_k t} alpha_kl e^{-i E_l t}
    out = np.einsum("...k,kl,...l->...", phase, alpha, np.conj(phase))
    return complex(out) if t_arr.ndim == 0 else out


def observable_spectrum(H: Hamiltonian, psi0: QuantumState, O) -> LineSpectrum:
    """Difference spectrum ``(E_k - E_l, alpha_kl)``, equal differences merged."""
    alpha = _observable_weights(H, psi0, O)
    E = H.energies
    diff = E[:, None] - E[None, :]
    return LineSpectrum(diff.ravel(), alpha.ravel())


@dataclass(frozen=True)
class ShotModel:
    """``shots`` Hadamard-test repetitions per quadrature and time point."""

    shots: int
    seed: int | None = 0

    def __post_init__(self):
        if int(self.shots) < 1:
            raise ValueError("shots must be >= 1")


def shot_estimate(value, model: ShotModel, rng: np.random.Generator | None = None):
    """Hadamard-test estimate of a value in the unit disk.

    Real and imaginary parts are estimated independently as
    ``2 * Binomial(M, (1 + x)/2) / M - 1``.

    Parameters
    ----------
    value : complex or array of complex
        ``|value| <= 1``.
    model : ShotModel
    rng : numpy Generator, optional
        Overrides the generator seeded from ``model.seed``.
    """
    v = np.asarray(value, dtype=complex)
    if np.any(np.abs(v) > 1 + 1e-9):
        raise ValueError("shot estimates need values in the unit disk")
    rng = rng or np.random.default_rng(model.seed)
    M = int(model.shots)
    p_re = np.clip((1 + v.real) / 2, 0.0, 1.0)
    p_im = np.clip((1 + v.imag) / 2, 0.0, 1.0)
    re = 2.0 * rng.binomial(M, p_re) / M - 1.0
    im = 2.0 * rng.binomial(M, p_im) / M - 1.0
    out = re + 1j * im
    return complex(out) if v.ndim == 0 else out


def match_lines(true_omegas, found_omegas) -> list[float | None]:
    """One-to-one greedy matching by ascending distance.

    Returns, for each true frequency, the absolute error of its match or
    ``None`` when it stays unmatched.
    """
    true_omegas = np.asarray(true_omegas, dtype=float)
    found_omegas = np.asarray(found_omegas, dtype=float)
    errors: list[float | None] = [None] * true_omegas.size
    if true_omegas.size == 0 or found_omegas.size == 0:
        return errors
    dist = np.abs(true_omegas[:, None] - found_omegas[None, :])
    order = np.argsort(dist, axis=None, kind="stable")
    used_t, used_f = set(), set()
    for flat in order:
        i, j = divmod(int(flat), found_omegas.size)
        if i in used_t or j in used_f:
            continue
        errors[i] = float(dist[i, j])
        used_t.add(i)
        used_f.add(j)
        if len(used_t) == true_omegas.size or len(used_f) == found_omegas.size:
            break
    return errors


@dataclass(frozen=True)
class QpdConfig:
    """End-to-end QPD run.

    Attributes
    ----------
    hamiltonian : Hamiltonian
    psi0 : QuantumState
    omega0, W, T : float
        Analysis band and observation half-time.
    grid : ndarray, optional
        Device times ``t >= 0`` starting at 0.  Default: the oversampled grid
        needed by the sampled assembly.
    shots : ShotModel, optional
        ``None`` for exact samples.
    growth : tuple (sigma, rate), optional
        Additional growing-envelope Gaussian noise modelling imperfect
        evolution.
    n_basis : int, optional
    alpha_min : float
        Eigenvalues with weight below this are not expected to be recovered.
    oversampling : float
        Sampling rate relative to the Nyquist rate of the full spectrum.
    """

    hamiltonian: Hamiltonian
    psi0: QuantumState
    omega0: float
    W: float
    T: float
    grid: np.ndarray | None = None
    shots: ShotModel | None = None
    growth: tuple[float, float] | None = None
    n_basis: int | None = None
    alpha_min: float = 1e-6
    oversampling: float = 2.0


@dataclass(frozen=True, eq=False)
class QpdReport:
    recovered: RecoveredSpectrum
    true_energies: np.ndarray
    true_weights: np.ndarray
    errors: list
    resource_time: float
    n_device_samples: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "recovered": self.recovered.to_dict(),
            "true_in_band": [
                {"energy": float(e), "weight": float(w)} for e, w in zip(self.true_energies, self.true_weights)
            ],
            "errors": [e if e is not None else "unresolved" for e in self.errors],
            "total_simulated_time": self.resource_time,
            "n_device_samples": self.n_device_samples,
            **self.extra,
        }


def _signal_band(H: Hamiltonian) -> float:
    return float(np.max(np.abs(H.energies), initial=0.0)) * 1.02 + 1e-3


def device_grid(config: QpdConfig) -> np.ndarray:
    """Default device times ``0 = t_0 < t_1 < ...`` for the sampled assembly."""
    band = _signal_band(config.hamiltonian)
    grid = oversampled_grid(0.0, 2 * config.T, band, config.oversampling, WINDOW_C)
    return grid[grid >= 0]


def qpd_pipeline(config: QpdConfig) -> QpdReport:
    """Simulate the device, solve for the energies and compare with the truth.

    Exact runs (no shots, no growth noise) assemble the pencil from the exact
    autocorrelation lines.  Noisy runs estimate ``S(t_j)`` on the device
    grid, mirror it with ``S(-t) = conj S(t)`` and assemble from samples.
    The resource metric is the total simulated time over the device grid.
    """
    H, psi0 = config.hamiltonian, config.psi0
    _check_dims(H, psi0)
    window = ObservationWindow(config.T, config.W, config.omega0)
    basis = None
    if config.n_basis is not None:
        from .pswf import build_basis

        basis = build_basis(window.c, config.n_basis)
    spec = autocorrelation_spectrum(H, psi0)
    grid = np.asarray(config.grid if config.grid is not None else device_grid(config), dtype=float)
    if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("device grid must start at t = 0 and increase strictly")
    exact = config.shots is None and config.growth is None
    if exact:
        problem = assemble(spec, window, basis)
    else:
        values = autocorrelation(H, psi0, grid)
        meta = {"kind": "none", "seed": None}
        if config.shots is not None:
            values = shot_estimate(values, config.shots)
            meta = NoiseModel.shot(config.shots.shots, config.shots.seed).meta()
        if config.growth is not None:
            sigma, rate = config.growth
            noise = NoiseModel.growing(sigma, rate, seed=None if config.shots is None else config.shots.seed)
            rng = np.random.default_rng(noise.seed)
            env = noise.envelope(grid)
            values = values + env * (rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size))
            if config.shots is None:
                meta = noise.meta()
            else:
                # shot and growth noise add in quadrature
                meta = {"kind": "growing", "sigma": math.hypot(sigma, 1 / math.sqrt(config.shots.shots)),
                        "rate": rate, "seed": noise.seed}
        record = mirror_conjugate(SampleRecord(grid, values, None, meta))
        problem = assemble(record, window, basis, signal_band=_signal_band(H))
    recovered = solve(problem)

    lo, hi = config.omega0 - config.W, config.omega0 + config.W
    in_band = (spec.omegas >= lo) & (spec.omegas <= hi) & (spec.alphas.real > config.alpha_min)
    true_e = spec.omegas[in_band]
    true_w = spec.alphas.real[in_band]
    errors = match_lines(true_e, recovered.omegas)
    return QpdReport(
        recovered=recovered,
        true_energies=true_e,
        true_weights=true_w,
        errors=errors,
        resource_time=float(np.sum(np.abs(grid))),
        n_device_samples=int(grid.size),
        extra={"hamiltonian": H.provenance, "assembly": problem.assembly},
    )
