"""Finite sums of complex exponentials, their samples, and noise models."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "LineSpectrum",
    "NoiseModel",
    "SampleRecord",
    "eval_derivative",
    "eval_signal",
    "mirror_conjugate",
    "sample",
    "uniform_grid",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class LineSpectrum:
    """Set of lines ``(omega_k, alpha_k)`` defining ``S(t) = sum alpha_k exp(i omega_k t)``.

    Lines with exactly equal frequencies are merged by adding their
    amplitudes.  The lines are stored sorted by frequency and the object is
    immutable.

    Parameters
    ----------
    omegas : array_like of float
        Angular frequencies.
    alphas : array_like of complex
        Amplitudes, same length as ``omegas``.
    """

    __slots__ = ("omegas", "alphas")

    def __init__(self, omegas: Iterable[float] = (), alphas: Iterable[complex] = ()):
        om = np.asarray(list(omegas) if not isinstance(omegas, np.ndarray) else omegas, dtype=float).ravel()
        al = np.asarray(list(alphas) if not isinstance(alphas, np.ndarray) else alphas, dtype=complex).ravel()
        if om.shape != al.shape:
            raise ValueError("omegas and alphas must have the same length")
        if not np.all(np.isfinite(om)):
            raise ValueError("frequencies must be finite")
        if om.size:
            uniq, inverse = np.unique(om, return_inverse=True)
            merged = np.zeros(uniq.size, dtype=complex)
            np.add.at(merged, inverse, al)
            om, al = uniq, merged
        object.__setattr__(self, "omegas", _frozen(om))
        object.__setattr__(self, "alphas", _frozen(al))

    def __setattr__(self, name, value):
        raise AttributeError("LineSpectrum is immutable")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, complex]]) -> "LineSpectrum":
        pairs = list(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    def __len__(self) -> int:
        return self.omegas.size

    def __iter__(self):
        return iter(zip(self.omegas.tolist(), self.alphas.tolist()))

    def __repr__(self) -> str:
        body = ", ".join(f"({w:.6g}, {a:.6g})" for w, a in self)
        return f"LineSpectrum([{body}])"

    def __eq__(self, other) -> bool:
        if not isinstance(other, LineSpectrum):
            return NotImplemented
        return np.array_equal(self.omegas, other.omegas) and np.array_equal(self.alphas, other.alphas)

    __hash__ = None

    def scaled(self, factor: complex) -> "LineSpectrum":
        return LineSpectrum(self.omegas, self.alphas * factor)

    def __add__(self, other: "LineSpectrum") -> "LineSpectrum":
        """Union of the two line sets, merging equal frequencies."""
        return LineSpectrum(
            np.concatenate([self.omegas, other.omegas]),
            np.concatenate([self.alphas, other.alphas]),
        )

    def __rmul__(self, factor: complex) -> "LineSpectrum":
        return self.scaled(factor)

    def norm(self) -> float:
        """Sum of absolute amplitudes, an upper bound of ``max |S(t)|``."""
        return float(np.abs(self.alphas).sum())

    def __call__(self, t):
        return eval_signal(self, t)

    def to_dict(self) -> dict:
        return {
            "lines": [
                {"omega": float(w), "re": float(a.real), "im": float(a.imag)}
                for w, a in zip(self.omegas, self.alphas)
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LineSpectrum":
        if not isinstance(data, dict) or not isinstance(data.get("lines"), list):
            raise ValueError('line spectrum JSON needs a "lines" list of {"omega", "re", "im"}')
        lines = data["lines"]
        return cls(
            [float(line["omega"]) for line in lines],
            [complex(float(line.get("re", 0.0)), float(line.get("im", 0.0))) for line in lines],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "LineSpectrum":
        return cls.from_dict(json.loads(text))


def _exp_table(spec: LineSpectrum, t) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(t, dtype=float)
    return t, np.exp(1j * np.multiply.outer(t, spec.omegas))


def eval_signal(spec: LineSpectrum, t):
    """``S(t) = sum_k alpha_k exp(i omega_k t)`` for scalar or array ``t``."""
    t, table = _exp_table(spec, t)
    out = table @ spec.alphas if spec.omegas.size else np.zeros(t.shape, dtype=complex)
    return complex(out) if t.ndim == 0 else out


def eval_derivative(spec: LineSpectrum, t):
    """``S'(t) = sum_k i omega_k alpha_k exp(i omega_k t)``."""
    t, table = _exp_table(spec, t)
    weights = 1j * spec.omegas * spec.alphas
    out = table @ weights if spec.omegas.size else np.zeros(t.shape, dtype=complex)
    return complex(out) if t.ndim == 0 else out


NOISE_KINDS = ("none", "iid_gaussian", "growing", "shot")


@dataclass(frozen=True)
class NoiseModel:
    """Additive measurement noise applied to samples.

    ``iid_gaussian`` adds independent normal noise of standard deviation
    ``sigma`` to the real and the imaginary part.  ``growing`` uses the
    envelope ``sigma * (1 + rate*|t|)``.  ``shot`` replaces each value by a
    Hadamard-test estimate with ``shots`` repetitions per quadrature.
    """

    kind: str = "none"
    sigma: float = 0.0
    rate: float = 0.0
    shots: int = 1
    seed: int | None = 0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {NOISE_KINDS}")
        if not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if not self.rate >= 0:
            raise ValueError("rate must be >= 0")
        if int(self.shots) < 1:
            raise ValueError("shots must be >= 1")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def iid(cls, sigma: float, seed: int | None = 0) -> "NoiseModel":
        return cls("iid_gaussian", sigma=sigma, seed=seed)

    @classmethod
    def growing(cls, sigma: float, rate: float, seed: int | None = 0) -> "NoiseModel":
        return cls("growing", sigma=sigma, rate=rate, seed=seed)

    @classmethod
    def shot(cls, shots: int, seed: int | None = 0) -> "NoiseModel":
        return cls("shot", shots=int(shots), seed=seed)

    @classmethod
    def parse(cls, text: str, seed: int | None = 0) -> "NoiseModel":
        """Parse ``none``, ``iid:SIGMA``, ``growing:SIGMA:RATE`` or ``shot:M``."""
        parts = text.strip().split(":")
        head = parts[0].lower()
        try:
            if head == "none":
                return cls.none()
            if head in ("iid", "iid_gaussian"):
                return cls.iid(float(parts[1]), seed)
            if head == "growing":
                return cls.growing(float(parts[1]), float(parts[2]), seed)
            if head == "shot":
                return cls.shot(int(float(parts[1])), seed)
        except (IndexError, ValueError) as exc:
            raise ValueError(f"cannot parse noise model {text!r}") from exc
        raise ValueError(f"unknown noise model {text!r}")

    def envelope(self, t) -> np.ndarray:
        """Standard deviation per quadrature at times ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "iid_gaussian":
            return np.full(t.shape, float(self.sigma))
        if self.kind == "growing":
            return self.sigma * (1.0 + self.rate * np.abs(t))
        if self.kind == "shot":
            # worst case of (1 - x^2)/M
            return np.full(t.shape, 1.0 / math.sqrt(self.shots))
        return np.zeros(t.shape)

    def meta(self) -> dict:
        out = {"kind": self.kind, "seed": self.seed}
        if self.kind in ("iid_gaussian", "growing"):
            out["sigma"] = float(self.sigma)
        if self.kind == "growing":
            out["rate"] = float(self.rate)
        if self.kind == "shot":
            out["shots"] = int(self.shots)
        return out

    @classmethod
    def from_meta(cls, meta: dict | None) -> "NoiseModel":
        if not meta:
            return cls.none()
        return cls(
            kind=meta.get("kind", "none"),
            sigma=float(meta.get("sigma", 0.0)),
            rate=float(meta.get("rate", 0.0)),
            shots=int(meta.get("shots", 1)),
            seed=meta.get("seed"),
        )


@dataclass(frozen=True, eq=False)
class SampleRecord:
    """Samples ``S(t_j)`` on a strictly increasing grid.

    Attributes
    ----------
    times : ndarray of float
    values : ndarray of complex
    derivative_values : ndarray of complex or None
        Exact ``S'(t_j)`` when available (noiseless samples only).
    noise_meta : dict
        Noise model tag, parameters and seed.  Empty when the provenance is
        unknown, e.g. measured data; the solver then estimates the noise
        level from the data.
    """

    times: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray | None = None
    noise_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).ravel()
        values = np.asarray(self.values, dtype=complex).ravel()
        _check_grid(times)
        if values.shape != times.shape:
            raise ValueError("values must have the same length as times")
        object.__setattr__(self, "times", _frozen(times))
        object.__setattr__(self, "values", _frozen(values))
        if self.derivative_values is not None:
            d = np.asarray(self.derivative_values, dtype=complex).ravel()
            if d.shape != times.shape:
                raise ValueError("derivative_values must have the same length as times")
            object.__setattr__(self, "derivative_values", _frozen(d))
        object.__setattr__(self, "noise_meta", dict(self.noise_meta or {}))

    def __len__(self) -> int:
        return self.times.size

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel.from_meta(self.noise_meta)

    def spacing(self, rtol: float = 1e-9) -> float:
        """Grid step, or ``ValueError`` when the grid is not uniform."""
        if self.times.size < 2:
            raise ValueError("a uniform spacing needs at least two samples")
        steps = np.diff(self.times)
        h = (self.times[-1] - self.times[0]) / (self.times.size - 1)
        if np.max(np.abs(steps - h)) > rtol * max(abs(h), np.max(np.abs(self.times))):
            raise ValueError("sample grid is not uniform")
        return float(h)

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        try:
            self.spacing(rtol)
        except ValueError:
            return False
        return True

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# noise: " + json.dumps(self.noise_meta, sort_keys=True) + "\n")
        cols = ["t", "re", "im"]
        data = [self.times, self.values.real, self.values.imag]
        if self.derivative_values is not None:
            cols += ["dre", "dim"]
            data += [self.derivative_values.real, self.derivative_values.imag]
        buf.write(",".join(cols) + "\n")
        for row in zip(*data):
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampleRecord":
        meta: dict = {}
        lines = text.splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                if line.startswith("# noise:"):
                    meta = json.loads(line[len("# noise:"):])
                continue
            if line.strip():
                body.append(line)
        if not body:
            raise ValueError("empty sample file")
        header = [h.strip() for h in body[0].split(",")]
        if header[:3] != ["t", "re", "im"]:
            raise ValueError("sample CSV must start with columns t,re,im")
        if len(body) == 1:
            raise ValueError("sample file has no rows")
        data = np.array([[float(v) for v in row.split(",")] for row in body[1:]])
        col = {name: data[:, i] for i, name in enumerate(header)}
        deriv = None
        if "dre" in col and "dim" in col:
            deriv = col["dre"] + 1j * col["dim"]
        return cls(col["t"], col["re"] + 1j * col["im"], deriv, meta)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())

    @classmethod
    def load(cls, path) -> "SampleRecord":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv(fh.read())


def _check_grid(times: np.ndarray) -> None:
    if times.ndim != 1 or times.size == 0:
        raise ValueError("grid must be a non-empty 1-d array")
    if not np.all(np.isfinite(times)):
        raise ValueError("grid must be finite")
    if np.any(np.diff(times) <= 0):
        raise ValueError("grid must be strictly increasing")


def uniform_grid(t_min: float, t_max: float, n: int) -> np.ndarray:
    """``n`` equally spaced points from ``t_min`` to ``t_max`` inclusive."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return np.array([float(t_min)])
    return np.linspace(float(t_min), float(t_max), int(n))


def sample(spec: LineSpectrum, grid, noise: NoiseModel | None = None) -> SampleRecord:
    """Sample ``spec`` on ``grid`` and add noise drawn from ``noise``.

    Parameters
    ----------
    spec : LineSpectrum
    grid : array_like
        Strictly increasing sample times.
    noise : NoiseModel, optional
        Defaults to no noise.  The derivative channel is filled only for
        noiseless records.

    Returns
    -------
    SampleRecord
    """
    noise = noise or NoiseModel.none()
    times = np.asarray(grid, dtype=float).ravel()
    _check_grid(times)
    clean = np.asarray(eval_signal(spec, times), dtype=complex).reshape(times.shape)
    if noise.kind == "none":
        deriv = np.asarray(eval_derivative(spec, times), dtype=complex).reshape(times.shape)
        return SampleRecord(times, clean, deriv, noise.meta())
    if noise.kind == "shot":
        from .quantum import ShotModel, shot_estimate

        values = shot_estimate(clean, ShotModel(noise.shots, noise.seed))
        return SampleRecord(times, values, None, noise.meta())
    rng = np.random.default_rng(noise.seed)
    env = noise.envelope(times)
    perturb = env * (rng.standard_normal(times.size) + 1j * rng.standard_normal(times.size))
    return SampleRecord(times, clean + perturb, None, noise.meta())


def mirror_conjugate(record: SampleRecord, rtol: float = 1e-9) -> SampleRecord:
    """Extend a record on ``t >= 0`` to negative times using ``S(-t) = conj S(t)``.

    The input grid must start at ``t = 0``.  Used for autocorrelations, where
    only nonnegative times have to be simulated.
    """
    t = record.times
    if abs(t[0]) > rtol * max(1.0, abs(t[-1])):
        raise ValueError("mirroring needs a record that starts at t = 0")
    v = record.values.copy()
    v[0] = v[0].real
    times = np.concatenate([-t[:0:-1], t])
    values = np.concatenate([np.conj(v[:0:-1]), v])
    deriv = None
    if record.derivative_values is not None:
        d = record.derivative_values
        # d/dt conj S(-t) = -conj S'(-t)
        deriv = np.concatenate([-np.conj(d[:0:-1]), d])
    return SampleRecord(times, values, deriv, record.noise_meta)
