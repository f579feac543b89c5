"""Command line interface: ``prolate-spectral <command> ...`` or ``python -m prolate_spectral``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import ScanConfig, run_scan
from .pswf import build_basis
from .quantum import QpdConfig, ShotModel, parse_hamiltonian, parse_state, qpd_pipeline
from .sampling import WINDOW_C, BandWindow, prolate_interpolate, sinc_interpolate
from .signals import LineSpectrum, NoiseModel, SampleRecord, sample, uniform_grid
from .solver import ObservationWindow, assemble, solve


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _csv_text(header, rows) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_pswf(args) -> int:
    basis = build_basis(args.c, args.n)
    x = np.linspace(-1.0, 1.0, args.grid)
    values = basis.values(x)
    header = ["n", "chi", "lambda"] + [f"x={v:.6g}" for v in x]
    rows = [
        [n, repr(float(basis.chi[n])), repr(float(basis.lam[n]))] + [repr(float(v)) for v in values[:, n]]
        for n in range(basis.n_basis)
    ]
    _write_text(args.dump, _csv_text(header, rows))
    return 0


def cmd_synth(args) -> int:
    spec = LineSpectrum.from_json(Path(args.spec).read_text())
    noise = NoiseModel.parse(args.noise, seed=args.seed)
    record = sample(spec, uniform_grid(args.tmin, args.tmax, args.n), noise)
    _write_text(args.out, record.to_csv())
    return 0


def cmd_interp(args) -> int:
    record = SampleRecord.load(args.samples)
    win = BandWindow(args.W, args.T)
    if args.method == "prolate":
        ev = prolate_interpolate(record, win)
    else:
        ev = sinc_interpolate(record, win)
    lo = -args.T if args.tmin is None else args.tmin
    hi = args.T if args.tmax is None else args.tmax
    t = np.linspace(lo, hi, args.points)
    values, extrapolated = ev.evaluate(t)
    rows = [
        [repr(float(a)), repr(float(v.real)), repr(float(v.imag)), int(e)]
        for a, v, e in zip(t, values, extrapolated)
    ]
    _write_text(args.eval_grid, _csv_text(["t", "re", "im", "extrapolated"], rows))
    return 0


def cmd_solve(args) -> int:
    window = ObservationWindow(args.T, args.W, args.omega0)
    basis = build_basis(window.c, args.nbasis) if args.nbasis else None
    if args.spec:
        source = LineSpectrum.from_json(Path(args.spec).read_text())
    else:
        source = SampleRecord.load(args.samples)
    kwargs = {"signal_band": args.signal_band} if isinstance(source, SampleRecord) else {}
    problem = assemble(source, window, basis, **kwargs)
    policy = args.noise_floor if args.noise_floor is not None else None
    result = solve(problem, policy, sigma=args.sigma)
    _write_text(args.out, json.dumps(result.to_dict(), indent=2) + "\n")
    return 0


def _grid_for_count(n: int, T: float, band: float) -> np.ndarray:
    """Device grid of ``n`` points from 0 whose reach covers the lags the solver needs."""

    def reach(h):
        tau = WINDOW_C / (math.pi / h - band)
        return (n - 2) * h - 2 * T - tau

    h_max = math.pi / band
    hs = np.linspace(h_max * 1e-3, h_max * 0.999, 4000)
    ok = [h for h in hs if reach(h) >= 0]
    if not ok:
        raise SystemExit(f"--n-samples {n} is too small to cover the lags up to 2T = {2 * T}")
    return np.arange(n) * ok[0]


def cmd_qpd(args) -> int:
    H = parse_hamiltonian(args.ham)
    psi0 = parse_state(args.psi0, H.dim)
    shots = ShotModel(args.shots, args.seed) if args.shots else None
    grid = None
    if args.n_samples:
        band = float(np.max(np.abs(H.energies))) * 1.02 + 1e-3
        grid = _grid_for_count(args.n_samples, args.T, band)
    config = QpdConfig(H, psi0, args.omega0, args.W, args.T, grid=grid, shots=shots)
    report = qpd_pipeline(config)
    _write_text(args.out, json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def cmd_scan(args) -> int:
    data = json.loads(Path(args.config).read_text())
    data.setdefault("experiment", args.experiment)
    if data["experiment"] != args.experiment:
        print(f"config is for a {data['experiment']!r} scan, not {args.experiment!r}", file=sys.stderr)
        return 2
    config = ScanConfig.from_dict(data)
    result = run_scan(config, args.out, workers=args.workers)
    failed = sum(1 for row in result.rows if row.get("status") != "ok")
    print(f"{len(result.rows)} rows written to {args.out} ({failed} cells recorded as failed)", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prolate-spectral", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pswf", help="tabulate prolate functions")
    p.add_argument("--c", type=float, required=True, help="bandwidth parameter W*T")
    p.add_argument("--n", type=int, required=True, help="number of functions")
    p.add_argument("--grid", type=int, default=11, help="points of the x grid on [-1, 1]")
    p.add_argument("--dump", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_pswf)

    p = sub.add_parser("synth", help="sample a line spectrum")
    p.add_argument("--spec", required=True, help="line spectrum JSON")
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", default="none", help="none | iid:SIGMA | growing:SIGMA:RATE | shot:M")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("interp", help="reconstruct a band-limited signal from Nyquist samples")
    p.add_argument("--method", choices=["prolate", "sinc"], default="prolate")
    p.add_argument("--samples", required=True)
    p.add_argument("--W", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--eval-grid", dest="eval_grid", help="output CSV of the evaluated signal (default stdout)")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("solve", help="extract frequencies and amplitudes")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--samples")
    src.add_argument("--spec")
    p.add_argument("--omega0", type=float, default=0.0)
    p.add_argument("--W", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--nbasis", type=int)
    p.add_argument("--noise-floor", dest="noise_floor", type=float)
    p.add_argument("--sigma", type=float, help="noise level per quadrature, overrides the record")
    p.add_argument("--signal-band", dest="signal_band", type=float, help="largest |omega| in the record")
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("qpd", help="run the quantum prolate diagonalization pipeline")
    p.add_argument("--ham", required=True, help="random:D:seedS | heis:N:J=..:h=.. | file:PATH")
    p.add_argument("--psi0", default="random:seed0", help="random:seedS | basis:K")
    p.add_argument("--omega0", type=float, default=0.0)
    p.add_argument("--W", type=float, required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--n-samples", dest="n_samples", type=int)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_qpd)

    p = sub.add_parser("scan", help="run a parameter scan")
    p.add_argument("experiment", choices=["transition", "sampling", "noise"])
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, help="parallel cells (default: PROLATE_SPECTRAL_WORKERS or CPU count)")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
