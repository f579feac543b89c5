"""Reproducible parameter scans and the periodogram baseline.

Every scan is a product of parameter axes times a number of trials.  Each
cell derives its own seed from the base seed and its axis values, so rows do
not depend on the order in which cells run.  Finished cells are appended to a
``<output>.cells.jsonl`` journal so an interrupted scan resumes where it
stopped.
"""

from __future__ import annotations

import concurrent.futures
import csv
import hashlib
import io
import itertools
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .pswf import build_basis, default_basis_size
from .quantum import ShotModel, match_lines, shot_estimate
from .sampling import (
    BandWindow,
    InsufficientSamplesError,
    oversampled_grid,
    prolate_interpolate,
    required_samples,
    sinc_interpolate,
)
from .signals import LineSpectrum, NoiseModel, SampleRecord, eval_signal, sample
from .solver import ObservationWindow, assemble, recover_amplitudes, solve

__all__ = [
    "UNRESOLVED",
    "ScanConfig",
    "ScanResult",
    "baseline_fft",
    "cell_seed",
    "equispaced_lines",
    "loglog_slope",
    "run_scan",
    "scan_noise",
    "scan_sampling",
    "scan_transition",
]

UNRESOLVED = "unresolved"
REFUSED = "refused"
WORKERS_ENV = "PROLATE_SPECTRAL_WORKERS"

DEFAULTS = {
    "transition": {
        "W": 4.0,
        "omega0": 0.0,
        "sigma": 0.0,
        "source": "samples",
        "oversampling": 2.0,
        "buffer": 10,
    },
    "sampling": {
        "W": 1.0,
        "signal": "prolate_mix",
        "eval_fraction": 0.9,
        "eval_points": 401,
    },
    "noise": {
        "K": 3,
        "W": 4.0,
        "T": 4.0,
        "omega0": 0.0,
        "margin": 2.0,
        "magnitudes": [1.0, 0.8, 1.2],
        "oversampling": 2.0,
        "buffer": 10,
    },
}
REQUIRED_AXES = {"transition": ("T", "K"), "sampling": ("c", "n_offset"), "noise": ()}


@dataclass
class ScanConfig:
    """Scan description.

    Attributes
    ----------
    experiment : {"transition", "sampling", "noise"}
    axes : dict
        Axis name to list of values.
    trials : int
    base_seed : int
    output : str, optional
        CSV path; a JSON echo of the resolved config is written next to it.
    params : dict
        Experiment parameters; missing entries take the defaults.
    include_runtime : bool
        Add a wall-clock column.  Off by default so tables are
        byte-reproducible.
    """

    experiment: str
    axes: dict
    trials: int = 1
    base_seed: int = 0
    output: str | None = None
    params: dict = field(default_factory=dict)
    include_runtime: bool = False

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.axes or any(len(list(v)) == 0 for v in self.axes.values()):
            raise ValueError("axes must be non-empty")
        if int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        missing = [a for a in REQUIRED_AXES[self.experiment] if a not in self.axes]
        if missing:
            raise ValueError(f"{self.experiment} scan needs axes {missing}")
        if self.experiment == "noise" and not ({"sigma", "shots"} & set(self.axes)):
            raise ValueError("noise scan needs a 'sigma' or 'shots' axis")
        self.axes = {k: [_plain(v) for v in vals] for k, vals in self.axes.items()}
        self.params = {**DEFAULTS[self.experiment], **(self.params or {})}
        self.trials = int(self.trials)

    def resolved(self) -> dict:
        return {
            "experiment": self.experiment,
            "axes": self.axes,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "params": self.params,
            "include_runtime": self.include_runtime,
            "version": __version__,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        known = {"experiment", "axes", "trials", "base_seed", "output", "params", "include_runtime"}
        extra = {k: v for k, v in data.items() if k not in known}
        params = {**extra, **data.get("params", {})}
        return cls(
            experiment=data["experiment"],
            axes=data["axes"],
            trials=data.get("trials", 1),
            base_seed=data.get("base_seed", 0),
            output=data.get("output"),
            params=params,
            include_runtime=bool(data.get("include_runtime", False)),
        )

    @classmethod
    def load(cls, path) -> "ScanConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def cell_seed(base_seed: int, axis_values: dict, trial: int) -> int:
    """Seed of one cell, a hash of the base seed, the axis values and the trial."""
    key = json.dumps([int(base_seed), sorted(axis_values.items()), int(trial)], sort_keys=True)
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big") >> 1


@dataclass
class ScanResult:
    """Long-format rows plus the resolved config."""

    rows: list
    columns: list
    config: dict

    @property
    def version(self) -> str:
        return self.config.get("version", __version__)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(row.get(c, "")) for c in self.columns])
        return buf.getvalue()

    def write(self, path) -> None:
        path = Path(path)
        path.write_text(self.to_csv(), encoding="utf-8")
        _echo_path(path).write_text(json.dumps(self.config, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def column(self, name: str) -> list:
        return [row.get(name) for row in self.rows]


def _echo_path(path: Path) -> Path:
    return path.with_name(path.name + ".config.json")


def _journal_path(path: Path) -> Path:
    return path.with_name(path.name + ".cells.jsonl")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


# -- line spectra used by the scans -------------------------------------------------


def equispaced_lines(K: int, W: float, omega0: float = 0.0) -> np.ndarray:
    """``K`` frequencies at the centers of ``K`` equal cells of ``[omega0 - W, omega0 + W]``."""
    return omega0 - W + (np.arange(K) + 0.5) * (2.0 * W / K)


def _phases(rng: np.random.Generator, K: int) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(K))


def _errors_summary(true_omegas, found_omegas) -> dict:
    errs = match_lines(true_omegas, found_omegas)
    matched = [e for e in errs if e is not None]
    out = {
        "max_error": max(matched) if matched and len(matched) == len(errs) else UNRESOLVED,
        "median_error": float(np.median(matched)) if matched else UNRESOLVED,
        "n_matched": len(matched),
    }
    if len(found_omegas):
        nearest = np.min(np.abs(np.asarray(true_omegas)[:, None] - np.asarray(found_omegas)[None, :]), axis=1)
        out["nearest_max_error"] = float(nearest.max())
    else:
        out["nearest_max_error"] = UNRESOLVED
    return out


def _record_for(spec: LineSpectrum, window: ObservationWindow, band: float, oversampling: float, noise: NoiseModel):
    grid = oversampled_grid(-2 * window.T, 2 * window.T, band, oversampling)
    return sample(spec, grid, noise)


# -- cells --------------------------------------------------------------------------


def _transition_cell(params: dict, axis: dict, seed: int) -> dict:
    T, K = float(axis["T"]), int(axis["K"])
    W = float(axis.get("W", params["W"]))
    w0 = float(params["omega0"])
    sigma = float(axis.get("sigma", params["sigma"]))
    rng = np.random.default_rng(seed)
    omegas = equispaced_lines(K, W, w0)
    spec = LineSpectrum(omegas, _phases(rng, K))
    window = ObservationWindow(T, W, w0)
    basis = build_basis(window.c, default_basis_size(window.c, int(params["buffer"])))
    if params["source"] == "spectrum" and sigma == 0:
        problem = assemble(spec, window, basis)
    else:
        band = abs(w0) + W
        noise = NoiseModel.iid(sigma, seed) if sigma > 0 else NoiseModel.none()
        record = _record_for(spec, window, band, float(params["oversampling"]), noise)
        problem = assemble(record, window, basis, signal_band=band)
    rec = solve(problem)
    return {"rank": rec.rank, "n_reported": len(rec), **_errors_summary(omegas, rec.omegas)}


def _prolate_mix(basis, T, rng):
    n_sig = max(1, int(math.floor(2 * basis.c / math.pi)) - 1)
    coeffs = np.zeros(basis.n_basis, dtype=complex)
    coeffs[:n_sig] = rng.standard_normal(n_sig) + 1j * rng.standard_normal(n_sig)
    scaled = coeffs / np.where(basis.mu == 0, 1.0, basis.mu)

    def signal(t):
        return basis.transform(np.asarray(t, dtype=float) / T) @ scaled

    return signal


def _sampling_cell(params: dict, axis: dict, seed: int) -> dict:
    c = float(axis["c"])
    offset = int(axis["n_offset"])
    W = float(params["W"])
    T = c / W
    win = BandWindow(W, T)
    rng = np.random.default_rng(seed)
    basis = build_basis(c, default_basis_size(c))
    kind = params["signal"]
    if kind == "prolate_mix":
        signal = _prolate_mix(basis, T, rng)
    elif kind == "tone":
        spec = LineSpectrum([0.5 * W], [np.exp(2j * np.pi * rng.random())])
        signal = lambda t: eval_signal(spec, t)  # noqa: E731
    else:
        raise ValueError(f"unknown test signal {kind!r}")
    need = required_samples(win)
    n = need + offset
    times = (np.arange(n) - (n - 1) / 2.0) * win.nyquist_spacing
    record = SampleRecord(times, signal(times))
    te = np.linspace(-params["eval_fraction"] * T, params["eval_fraction"] * T, int(params["eval_points"]))
    ref = signal(te)
    scale = float(np.max(np.abs(ref)))
    row = {"n_samples": n, "required": need}
    try:
        p = prolate_interpolate(record, win, basis)
        row["prolate_error"] = float(np.max(np.abs(p(te) - ref)) / scale)
    except (InsufficientSamplesError, ValueError):
        row["prolate_error"] = REFUSED
    s = sinc_interpolate(record, win)
    row["sinc_error"] = float(np.max(np.abs(s(te) - ref)) / scale)
    return row


def _noise_cell(params: dict, axis: dict, seed: int) -> dict:
    K = int(params["K"])
    W, T, w0 = float(params["W"]), float(params["T"]), float(params["omega0"])
    spacing = float(params["margin"]) * math.pi / T
    omegas = w0 + spacing * (np.arange(K) - (K - 1) / 2.0)
    if np.any(np.abs(omegas - w0) > W):
        raise ValueError("lines do not fit in the band; lower K or margin")
    rng = np.random.default_rng(seed)
    mags = np.resize(np.asarray(params["magnitudes"], dtype=float), K)
    alphas = mags * _phases(rng, K)
    window = ObservationWindow(T, W, w0)
    basis = build_basis(window.c, default_basis_size(window.c, int(params["buffer"])))
    band = abs(w0) + W
    grid = oversampled_grid(-2 * T, 2 * T, band, float(params["oversampling"]))
    if "shots" in axis:
        alphas = alphas / np.abs(alphas).sum()
        spec = LineSpectrum(omegas, alphas)
        values = shot_estimate(eval_signal(spec, grid), ShotModel(int(axis["shots"]), seed))
        record = SampleRecord(grid, values, None, NoiseModel.shot(int(axis["shots"]), seed).meta())
    else:
        spec = LineSpectrum(omegas, alphas)
        sigma = float(axis["sigma"])
        record = sample(spec, grid, NoiseModel.iid(sigma, seed) if sigma > 0 else NoiseModel.none())
    problem = assemble(record, window, basis, signal_band=band)
    rec = solve(problem)
    summary = _errors_summary(omegas, rec.omegas)
    errs = match_lines(omegas, rec.omegas)
    spurious = len(rec) - sum(e is not None for e in errs)
    spurious += sum(1 for e in errs if e is not None and e > 0.5 * spacing)
    row = {"rank": rec.rank, "rank_ok": rec.rank == K, "n_reported": len(rec), "n_spurious": spurious, **summary}
    if summary["max_error"] != UNRESOLVED:
        # amplitude error with the recovered frequencies, least squares on the record
        fit = recover_amplitudes(record, rec.omegas)
        row["amplitude_error"] = float(np.max(np.abs(fit.alphas - spec.alphas) / np.abs(spec.alphas)))
    else:
        row["amplitude_error"] = UNRESOLVED
    return row


CELLS = {"transition": _transition_cell, "sampling": _sampling_cell, "noise": _noise_cell}
COLUMNS = {
    "transition": ["rank", "n_reported", "max_error", "median_error", "nearest_max_error", "n_matched"],
    "sampling": ["n_samples", "required", "prolate_error", "sinc_error"],
    "noise": [
        "rank", "rank_ok", "n_reported", "n_spurious", "max_error", "median_error",
        "nearest_max_error", "n_matched", "amplitude_error",
    ],
}


def _run_one(experiment: str, params: dict, axis: dict, trial: int, seed: int, with_runtime: bool) -> dict:
    start = time.perf_counter()
    row = {**axis, "trial": trial, "seed": seed}
    try:
        row.update(CELLS[experiment](params, axis, seed))
        row["status"] = "ok"
    except Exception as exc:  # a failing cell is recorded, not fatal
        row["status"] = f"failed: {type(exc).__name__}: {exc}".replace("\n", " ")
    if with_runtime:
        row["runtime"] = time.perf_counter() - start
    return row


def _cells(config: ScanConfig):
    names = list(config.axes)
    for values in itertools.product(*(config.axes[n] for n in names)):
        axis = dict(zip(names, values))
        for trial in range(config.trials):
            yield axis, trial, cell_seed(config.base_seed, axis, trial)


def _row_key(row: dict, names) -> str:
    return json.dumps([[n, row[n]] for n in names] + [row["trial"], row["seed"]])


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        return max(1, int(raw))
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def run_scan(config: ScanConfig, output: str | os.PathLike | None = None, workers: int | None = None) -> ScanResult:
    """Execute all cells of ``config``, resuming from a journal when present."""
    output = output if output is not None else config.output
    names = list(config.axes)
    echo = config.resolved()
    done: dict[str, dict] = {}
    journal = None
    if output is not None:
        out = Path(output)
        jpath = _journal_path(out)
        echo_file = _echo_path(out)
        same_config = echo_file.exists() and json.loads(echo_file.read_text()) == echo
        if same_config and out.exists() and not jpath.exists():
            for row in csv.DictReader(io.StringIO(out.read_text())):
                parsed = {k: _parse(v) for k, v in row.items()}
                done[_row_key(parsed, names)] = parsed
        if jpath.exists():
            header, *lines = jpath.read_text().splitlines() or [""]
            if header and json.loads(header) == echo:
                for line in lines:
                    if line.strip():
                        try:
                            row = json.loads(line)
                        except json.JSONDecodeError:
                            continue  # torn last line of an interrupted run
                        done[_row_key(row, names)] = row
            else:
                jpath.unlink()
        echo_file.write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        if not jpath.exists():
            jpath.write_text(json.dumps(echo) + "\n", encoding="utf-8")
        journal = open(jpath, "a", encoding="utf-8")

    todo = []
    for axis, trial, seed in _cells(config):
        key = _row_key({**axis, "trial": trial, "seed": seed}, names)
        if key not in done:
            todo.append((axis, trial, seed))

    def record(row):
        done[_row_key(row, names)] = row
        if journal is not None:
            journal.write(json.dumps(row) + "\n")
            journal.flush()

    n_workers = workers if workers is not None else _workers()
    args = [(config.experiment, config.params, axis, trial, seed, config.include_runtime) for axis, trial, seed in todo]
    try:
        if n_workers > 1 and len(args) > 1:
            with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
                futures = [pool.submit(_run_one, *a) for a in args]
                for fut in concurrent.futures.as_completed(futures):
                    record(fut.result())
        else:
            for a in args:
                record(_run_one(*a))
    finally:
        if journal is not None:
            journal.close()

    columns = names + ["trial", "seed"] + COLUMNS[config.experiment] + ["status"]
    if config.include_runtime:
        columns.append("runtime")
    order = {json.dumps(axis_vals): i for i, axis_vals in enumerate(itertools.product(*(config.axes[n] for n in names)))}

    def sort_key(row):
        return (order[json.dumps(tuple(row[n] for n in names))], row["trial"])

    rows = sorted(done.values(), key=sort_key)
    result = ScanResult(rows, columns, echo)
    if output is not None:
        result.write(output)
        _journal_path(Path(output)).unlink(missing_ok=True)
    return result


def scan_transition(config: ScanConfig, **kwargs) -> ScanResult:
    """Frequency error against observation time for equispaced lines.

    Axes ``T`` and ``K`` are required; ``W`` and ``sigma`` may also be axes.
    Lines sit at the centers of ``K`` equal cells of the band, so the line
    density is ``K/(2W)``.
    """
    if config.experiment != "transition":
        raise ValueError("scan_transition needs a 'transition' config")
    return run_scan(config, **kwargs)


def scan_sampling(config: ScanConfig, **kwargs) -> ScanResult:
    """Prolate against sinc reconstruction error around ``ceil(2WT/pi)`` samples.

    Axes ``c`` and ``n_offset`` (sample count relative to ``ceil(2WT/pi)``).
    """
    if config.experiment != "sampling":
        raise ValueError("scan_sampling needs a 'sampling' config")
    return run_scan(config, **kwargs)


def scan_noise(config: ScanConfig, **kwargs) -> ScanResult:
    """Error and rank detection against noise level (``sigma``) or shot count (``shots``)."""
    if config.experiment != "noise":
        raise ValueError("scan_noise needs a 'noise' config")
    return run_scan(config, **kwargs)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log10 y`` against ``log10 x``."""
    x = np.log10(np.asarray(x, dtype=float))
    y = np.log10(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def baseline_fft(
    record: SampleRecord,
    window: ObservationWindow | None = None,
    floor: float = 0.1,
    pad_factor: int = 16,
) -> LineSpectrum:
    """Periodogram peak picking with parabolic refinement.

    Parameters
    ----------
    record : SampleRecord
        Uniform grid.
    window : ObservationWindow, optional
        Restricts peaks to ``[omega0 - W, omega0 + W]``.
    floor : float
        Peaks below ``floor`` times the maximum power are ignored.  The
        default sits above the first sidelobe of the rectangular window.
    pad_factor : int
        Zero padding of the FFT.

    Returns
    -------
    LineSpectrum
        One line per peak, amplitude from the periodogram value.
    """
    h = record.spacing()
    n = len(record)
    nfft = int(2 ** math.ceil(math.log2(max(n * pad_factor, 8))))
    spec = np.fft.fft(record.values, nfft)
    freqs = 2 * np.pi * np.fft.fftfreq(nfft, d=h)
    order = np.argsort(freqs)
    freqs, spec = freqs[order], spec[order]
    power = np.abs(spec) ** 2
    pmax = power.max()
    if pmax <= 0:
        return LineSpectrum()
    peaks = np.flatnonzero(
        (power[1:-1] > power[:-2]) & (power[1:-1] >= power[2:]) & (power[1:-1] >= floor * pmax)
    ) + 1
    dw = freqs[1] - freqs[0]
    omegas, alphas = [], []
    for k in peaks:
        a, b, c = power[k - 1], power[k], power[k + 1]
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
        w = freqs[k] + shift * dw
        if window is not None and abs(w - window.omega0) > window.W:
            continue
        # phase reference: DFT uses exp(-i w t_j) relative to t_0
        amp = spec[k] * np.exp(-1j * freqs[k] * record.times[0]) / n
        omegas.append(w)
        alphas.append(amp)
    return LineSpectrum(omegas, alphas)
