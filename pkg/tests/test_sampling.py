import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from prolate_spectral.pswf import build_basis
from prolate_spectral.sampling import (
    BandWindow,
    InsufficientSamplesError,
    bandlimited_reconstruct,
    oversampled_grid,
    prolate_interpolate,
    required_samples,
    sinc_interpolate,
)
from prolate_spectral.signals import LineSpectrum, SampleRecord, eval_derivative, eval_signal, sample


def nyquist_record(signal, win: BandWindow, n: int) -> SampleRecord:
    t = (np.arange(n) - (n - 1) / 2.0) * win.nyquist_spacing
    return SampleRecord(t, signal(t))


def minimal_covering_count(win: BandWindow) -> int:
    """Smallest odd count of centered Nyquist samples reaching +-T."""
    half = math.ceil(win.T / win.nyquist_spacing - 1e-12)
    return 2 * half + 1


def concentrated_signal(c, T, seed):
    rng = np.random.default_rng(seed)
    k = max(1, int(math.floor(2 * c / math.pi)) - 1)
    return oracles.prolate_mix_signal(c, T, rng.standard_normal(k) + 1j * rng.standard_normal(k))


def rel_max_error(ev, signal, T, frac=0.9):
    te = np.linspace(-frac * T, frac * T, 401)
    ref = signal(te)
    return float(np.max(np.abs(ev(te) - ref)) / np.max(np.abs(ref)))


def test_window():
    win = BandWindow(2.0, 3.0)
    assert win.c == 6.0
    assert win.nyquist_spacing == pytest.approx(math.pi / 2)
    assert required_samples(win) == math.ceil(12 / math.pi)
    with pytest.raises(ValueError):
        BandWindow(0.0, 1.0)


def test_zero_signal_gives_zero_evaluator():
    win = BandWindow(1.0, 10.0)
    rec = nyquist_record(lambda t: np.zeros(t.shape, complex), win, required_samples(win) + 10)
    ev = prolate_interpolate(rec, win)
    assert np.all(ev(np.linspace(-12, 12, 33)) == 0)


def test_single_sample_sinc():
    win = BandWindow(2.0, 1.0)
    ev = sinc_interpolate(SampleRecord([0.0], [1.0]), win)
    t = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(ev(t), np.sinc(win.W * t / math.pi), atol=1e-15)


@pytest.mark.parametrize("method", ["prolate", "sinc"])
@pytest.mark.parametrize("c", [6.0, 12.0, 25.0])
def test_reproduces_samples(method, c):
    W = 1.5
    win = BandWindow(W, c / W)
    signal = concentrated_signal(c, win.T, seed=int(c))
    rec = nyquist_record(signal, win, required_samples(win) + 10)
    ev = prolate_interpolate(rec, win) if method == "prolate" else sinc_interpolate(rec, win)
    scale = np.max(np.abs(rec.values))
    assert np.max(np.abs(ev(rec.times) - rec.values)) <= 1e-10 * scale


def test_sinc_convergence_trend():
    W, omega = 1.0, 0.6
    spec = LineSpectrum([omega], [1.0])
    h = math.pi / W
    errors = []
    for n in [21, 41, 81, 161, 321]:
        rec = sample(spec, (np.arange(n) - (n - 1) / 2) * h)
        ev = sinc_interpolate(rec, BandWindow(W, (n - 1) / 2 * h))
        mid = np.array([0.5 * h, -1.5 * h, 2.5 * h])
        errors.append(np.max(np.abs(ev(mid) - eval_signal(spec, mid))))
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert errors[-1] < errors[0] / 8


@pytest.mark.parametrize("c", [4.0, 8.0, 12.0, 20.0, 32.0])
@pytest.mark.parametrize("seed", [0, 1])
def test_count_law(c, seed):
    W = 1.0
    win = BandWindow(W, c / W)
    signal = concentrated_signal(c, win.T, seed)
    n = required_samples(win) + 10
    ev = prolate_interpolate(nyquist_record(signal, win, n), win)
    assert rel_max_error(ev, signal, win.T) <= 1e-4


@pytest.mark.parametrize("c", [8.0, 12.0, 20.0])
def test_prolate_beats_truncated_sinc(c):
    win = BandWindow(1.0, c)
    signal = concentrated_signal(c, win.T, seed=3)
    rec = nyquist_record(signal, win, required_samples(win) + 10)
    e_prolate = rel_max_error(prolate_interpolate(rec, win), signal, win.T)
    e_sinc = rel_max_error(sinc_interpolate(rec, win), signal, win.T)
    assert e_sinc >= 10 * e_prolate


def test_single_tone_reconstruction():
    # a tone at half the band, c = 12, samples at pi/W covering [-T, T]
    win = BandWindow(1.0, 12.0)
    spec = LineSpectrum([0.5 * win.W], [1.0])
    signal = lambda t: eval_signal(spec, t)  # noqa: E731
    rec = nyquist_record(signal, win, minimal_covering_count(win))
    assert rel_max_error(prolate_interpolate(rec, win), signal, win.T) <= 1e-4


def test_single_tone_prolate_versus_sinc():
    win = BandWindow(1.0, 12.0)
    spec = LineSpectrum([0.5 * win.W], [1.0])
    signal = lambda t: eval_signal(spec, t)  # noqa: E731
    rec = nyquist_record(signal, win, minimal_covering_count(win))
    e_prolate = rel_max_error(prolate_interpolate(rec, win), signal, win.T)
    e_sinc = rel_max_error(sinc_interpolate(rec, win), signal, win.T)
    assert e_sinc >= 10 * e_prolate


def test_tone_is_not_concentrated():
    # A tone carries the same energy outside [-T, T] as inside, so samples on
    # [-T, T] do not determine it there: two band-limited signals that agree
    # on every sample differ by O(1) between the samples.
    win = BandWindow(1.0, 12.0)
    n = minimal_covering_count(win)
    h = win.nyquist_spacing
    t = (np.arange(n) - (n - 1) / 2) * h
    tone = lambda s: np.exp(0.5j * s)  # noqa: E731
    # add a cardinal function centered one step beyond the last sample: it vanishes at every sample
    bump = lambda s: np.sinc((s - t[-1] - h) / h)  # noqa: E731
    np.testing.assert_allclose(tone(t) + bump(t), tone(t), atol=1e-15)
    te = np.linspace(-0.9 * win.T, 0.9 * win.T, 401)
    assert np.max(np.abs(bump(te))) > 0.05


def test_band_limited_by_construction():
    c = 12.0
    win = BandWindow(1.0, c)
    signal = concentrated_signal(c, win.T, seed=5)
    ev = prolate_interpolate(nyquist_record(signal, win, required_samples(win) + 10), win)
    omega = np.linspace(-3, 3, 601)
    dens = ev.spectrum(omega)
    assert np.all(dens[np.abs(omega) > win.W] == 0)
    # the density reproduces the evaluator: s(t) = int F(w) exp(iwt) dw
    y, w = np.polynomial.legendre.leggauss(200)
    t0 = 3.7
    assert np.sum(w * win.W * ev.spectrum(win.W * y) * np.exp(1j * win.W * y * t0)) == pytest.approx(ev(t0), abs=1e-12)


@pytest.mark.parametrize("method", ["prolate", "sinc"])
def test_fft_energy_outside_band(method):
    # dense samples of the evaluator over a long span, Kaiser taper to keep
    # window leakage below the tolerance
    c = 12.0
    win = BandWindow(1.0, c)
    signal = concentrated_signal(c, win.T, seed=6)
    rec = nyquist_record(signal, win, required_samples(win) + 10)
    ev = prolate_interpolate(rec, win) if method == "prolate" else sinc_interpolate(rec, win)
    dt = math.pi / (4 * win.W)
    t = np.arange(-1000.0, 1000.0, dt)
    v = ev(t) * np.kaiser(t.size, 30)
    spec = np.abs(np.fft.fft(v, 8 * t.size)) ** 2
    omega = 2 * np.pi * np.fft.fftfreq(8 * t.size, dt)
    assert spec[np.abs(omega) > 1.05 * win.W].sum() <= 1e-6 * spec.sum()


def test_extrapolation_flag():
    win = BandWindow(1.0, 10.0)
    signal = concentrated_signal(10.0, 10.0, seed=0)
    ev = prolate_interpolate(nyquist_record(signal, win, required_samples(win) + 10), win)
    values, flag = ev.evaluate([-12.0, -10.0, 0.0, 10.0, 11.0])
    np.testing.assert_array_equal(flag, [True, False, False, False, True])
    assert values.shape == (5,)


def test_refuses_too_few_samples():
    win = BandWindow(1.0, 20.0)
    need = required_samples(win)
    rec = nyquist_record(lambda t: np.ones(t.shape, complex), win, need - 1)
    with pytest.raises(InsufficientSamplesError, match=f"= {need} samples"):
        prolate_interpolate(rec, win)


def test_rejects_bad_grids():
    win = BandWindow(1.0, 5.0)
    t = np.linspace(-6, 6, 9)  # uniform but not at pi/W
    with pytest.raises(ValueError, match="Nyquist"):
        prolate_interpolate(SampleRecord(t, np.ones(9)), win)
    t = np.array([-6.0, -3.0, 0.0, 1.0, 4.0, 7.0])
    with pytest.raises(ValueError):
        prolate_interpolate(SampleRecord(t, np.ones(6)), win)
    with pytest.raises(ValueError):
        sinc_interpolate(SampleRecord(t, np.ones(6)), win)
    # spacing right but not reaching T
    t = np.arange(5) * math.pi
    with pytest.raises(ValueError, match="cover"):
        prolate_interpolate(SampleRecord(t, np.ones(5)), win)


def test_basis_window_mismatch():
    win = BandWindow(1.0, 5.0)
    rec = nyquist_record(lambda t: np.ones(t.shape, complex), win, 15)
    with pytest.raises(ValueError, match="does not match"):
        prolate_interpolate(rec, win, build_basis(6.0, 10))


@settings(max_examples=20, deadline=None)
@given(
    omegas=st.lists(st.floats(-2.0, 2.0), min_size=1, max_size=4),
    t0=st.floats(-20, 20),
)
def test_windowed_reconstruction_of_oversampled_lines(omegas, t0):
    band = 2.0
    spec = LineSpectrum(omegas, np.ones(len(omegas)))
    grid = oversampled_grid(-25, 25, band)
    ev = bandlimited_reconstruct(sample(spec, grid), band)
    assert ev.covers(-25, 25)
    assert abs(ev(t0) - eval_signal(spec, t0)) <= 1e-10 * len(omegas)
    assert abs(ev.derivative(t0) - eval_derivative(spec, t0)) <= 1e-9 * len(omegas)


def test_windowed_reconstruction_needs_oversampling():
    rec = SampleRecord(np.arange(10.0), np.ones(10))
    with pytest.raises(ValueError, match="sample faster"):
        bandlimited_reconstruct(rec, math.pi)
    with pytest.raises(ValueError):
        oversampled_grid(0, 1, 1.0, oversampling=1.0)
