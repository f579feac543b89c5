import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from prolate_spectral.experiments import equispaced_lines
from prolate_spectral.pswf import build_basis
from prolate_spectral.quantum import match_lines
from prolate_spectral.sampling import oversampled_grid
from prolate_spectral.signals import LineSpectrum, NoiseModel, SampleRecord, sample, uniform_grid
from prolate_spectral.solver import (
    IllConditionedWarning,
    ObservationWindow,
    assemble,
    detect_dimension,
    eigenvector_profile,
    rank_threshold,
    recover_amplitudes,
    solve,
)


def record_for(spec, window, noise=None, band=None, oversampling=2.0):
    band = band or max(float(np.max(np.abs(spec.omegas), initial=0.0)), window.W + abs(window.omega0))
    grid = oversampled_grid(-2 * window.T, 2 * window.T, band, oversampling)
    return sample(spec, grid, noise), band


def max_line_error(true_omegas, found):
    errs = match_lines(np.asarray(true_omegas), np.asarray(found))
    return math.inf if errs is None else max(errs)


def test_window():
    win = ObservationWindow(3.0, 2.0, 1.0)
    assert win.c == 6.0
    assert win.capacity == pytest.approx(3 / math.pi)
    with pytest.raises(ValueError):
        ObservationWindow(0.0, 1.0)


def test_single_line():
    win = ObservationWindow(3.0, 5.0)
    res = solve(assemble(LineSpectrum([2.0], [1.0]), win, build_basis(win.c, 12)))
    assert res.omegas.size == 1
    assert abs(res.omegas[0] - 2.0) <= 1e-9
    assert res.alphas[0] == pytest.approx(1.0, abs=1e-9)


def test_cosine():
    win = ObservationWindow(5.0, 3.0)
    res = solve(assemble(LineSpectrum([1.0, -1.0], [0.5, 0.5]), win))
    np.testing.assert_allclose(res.omegas, [-1.0, 1.0], atol=1e-8)
    np.testing.assert_allclose(res.alphas, [0.5, 0.5], atol=1e-8)


def test_band_center_line_gives_zero_A():
    win = ObservationWindow(2.0, 3.0, omega0=1.7)
    prob = assemble(LineSpectrum([1.7], [2.0 - 1j]), win)
    assert np.abs(prob.A).max() <= 1e-12 * np.abs(prob.B).max()
    res = solve(prob)
    np.testing.assert_allclose(res.omegas, [1.7], atol=1e-12)
    assert res.alphas[0] == pytest.approx(2.0 - 1j, abs=1e-10)


def test_zero_signal():
    win = ObservationWindow(2.0, 3.0)
    prob = assemble(LineSpectrum(), win)
    assert not prob.A.any() and not prob.B.any()
    assert detect_dimension(prob) == 0
    res = solve(prob)
    assert res.rank == 0 and len(res) == 0


@pytest.mark.parametrize(
    "c,n,omega0,omegas,alphas",
    [
        (15.0, 12, 0.0, [-1.0, 1.3], [1.0, 0.7]),
        (20.0, 16, 0.5, [-0.8, 0.9, 2.0], [1.0, 0.3 + 0.4j, -0.5j]),
        (40.0, 16, -1.0, [-3.5, 0.6], [2.0, 1.0]),
    ],
)
def test_rank_factored_form(c, n, omega0, omegas, alphas):
    T = 5.0
    win = ObservationWindow(T, c / T, omega0)
    prob = assemble(LineSpectrum(omegas, alphas), win, build_basis(c, n))
    A_ref, B_ref = oracles.rank_factored_pencil(c, n, T, omega0, omegas, alphas)
    assert np.linalg.norm(prob.B - B_ref) <= 1e-8 * np.linalg.norm(B_ref)
    assert np.linalg.norm(prob.A - A_ref) <= 1e-8 * np.linalg.norm(A_ref)


def test_rank_detection_three_lines():
    win = ObservationWindow(6.0, 2.0)
    prob = assemble(LineSpectrum([-1.2, 0.1, 1.5], [1.0, 0.5, 0.8]), win, build_basis(win.c, 10))
    s = np.linalg.svd(prob.B, compute_uv=False)
    assert s[3] / s[0] < 1e-10
    assert detect_dimension(prob) == 3


def test_noise_floor_overrides():
    win = ObservationWindow(6.0, 2.0)
    prob = assemble(LineSpectrum([-1.2, 0.1, 1.5], [1.0, 0.5, 1e-4]), win, build_basis(win.c, 10))
    assert detect_dimension(prob) == 3
    assert detect_dimension(prob, noise_floor=1e-2) == 2
    tau, info = rank_threshold(prob, 1e-2)
    assert tau == 1e-2 and info["rule"] == "noise_floor"


def test_rank_detection_under_noise():
    K, W, T = 3, 4.0, 4.0
    win = ObservationWindow(T, W)
    successes = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        omegas = equispaced_lines(K, W) + rng.uniform(-0.2, 0.2, K)
        spec = LineSpectrum(omegas, np.array([1.0, 0.8, 1.2]) * np.exp(2j * np.pi * rng.random(K)))
        rec, band = record_for(spec, win, NoiseModel.iid(1e-3, seed=seed))
        successes += detect_dimension(assemble(rec, win, signal_band=band)) == K
    assert successes >= 19


def test_noise_level_estimated_when_unknown():
    win = ObservationWindow(4.0, 4.0)
    spec = LineSpectrum([-2.0, 0.5, 2.5], [1.0, 0.8, 1.2])
    rec, band = record_for(spec, win, NoiseModel.iid(1e-3, seed=4))
    bare = SampleRecord(rec.times, rec.values)
    prob = assemble(bare, win, signal_band=band)
    assert prob.noise_sigma is None
    tau, info = rank_threshold(prob)
    assert info["sigma_estimated"]
    assert 0.3e-3 < info["sigma"] < 3e-3
    assert detect_dimension(prob) == 3


@pytest.mark.parametrize("omega0", [0.0, 0.9])
def test_sampled_record_recovers_lines(omega0):
    win = ObservationWindow(4.0, 3.0, omega0)
    spec = LineSpectrum([-1.5, 0.2, 2.3], [1.0, 0.6 - 0.2j, 0.9j])
    rec, band = record_for(spec, win)
    prob = assemble(rec, win, signal_band=band)
    assert prob.assembly == "interpolated_derivative"
    res = solve(prob)
    np.testing.assert_allclose(res.omegas, spec.omegas, atol=1e-9 * win.W)
    np.testing.assert_allclose(res.alphas, spec.alphas, atol=1e-8)


def test_sampled_record_too_short():
    win = ObservationWindow(4.0, 3.0)
    rec = sample(LineSpectrum([1.0], [1.0]), uniform_grid(-8, 8, 101))
    with pytest.raises(ValueError, match="coverage"):
        assemble(rec, win)


def test_resolution_fails_below_threshold():
    # K = 8 equispaced lines, T half of pi * K / (2W)
    K, W = 8, 4.0
    T = 0.5 * math.pi * K / (2 * W)
    win = ObservationWindow(T, W)
    omegas = equispaced_lines(K, W)
    res = solve(assemble(LineSpectrum(omegas, np.ones(K)), win))
    assert max_line_error(omegas, res.omegas) > 1e-2 * W


@pytest.mark.parametrize("T", [4.0, 6.0])
def test_admissible_eigenvalues(T):
    K, W = 5, 2.0
    win = ObservationWindow(T, W)
    rng = np.random.default_rng(int(T))
    omegas = equispaced_lines(K, W) + rng.uniform(-0.1, 0.1, K)
    res = solve(assemble(LineSpectrum(omegas, rng.uniform(0.5, 1.5, K) * np.exp(1j * rng.random(K))), win))
    for w in res.omegas:
        assert np.min(np.abs(omegas - w)) <= 1e-6 * W
    assert np.all(np.diff(res.omegas) > 0)
    assert np.all(np.abs(res.omegas - win.omega0) <= 1.1 * W)


def test_shift_covariance():
    spec = LineSpectrum([-1.1, 0.3, 1.2], [1.0, 0.5j, 0.7])
    a = solve(assemble(spec, ObservationWindow(5.0, 2.0, 0.0)))
    b = solve(assemble(spec, ObservationWindow(5.0, 2.0, 0.4)))
    np.testing.assert_allclose(a.omegas, b.omegas, atol=1e-9 * 2.0)


@settings(max_examples=10, deadline=None)
@given(gamma=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_amplitude_scale_invariance(gamma):
    win = ObservationWindow(5.0, 2.0)
    spec = LineSpectrum([-1.1, 0.3, 1.2], [1.0, 0.5, 0.7])
    a = solve(assemble(spec, win))
    b = solve(assemble(gamma * spec, win))
    np.testing.assert_allclose(b.omegas, a.omegas, atol=1e-10 * win.W)
    np.testing.assert_allclose(b.alphas, gamma * a.alphas, rtol=1e-8)


def test_hermitian_case():
    win = ObservationWindow(4.0, 3.0)
    prob = assemble(LineSpectrum([-2.0, 0.5, 1.0], [0.2, 0.5, 0.3]), win)
    assert prob.hermitian
    assert np.array_equal(prob.B, prob.B.conj().T)
    assert np.array_equal(prob.A, prob.A.conj().T)
    lam = np.linalg.eigvalsh(prob.B)
    assert lam.min() >= -1e-10 * np.abs(lam).max()
    assert not assemble(LineSpectrum([0.5], [1j]), win).hermitian


def test_conjugate_symmetric_record_takes_hermitian_path():
    win = ObservationWindow(4.0, 3.0)
    spec = LineSpectrum([-2.0, 0.5, 1.0], [0.2, 0.5, 0.3])
    rec, band = record_for(spec, win)
    prob = assemble(rec, win, signal_band=band)
    assert prob.hermitian
    res = solve(prob)
    np.testing.assert_allclose(res.omegas, spec.omegas, atol=1e-9)


def test_two_line_profile_annihilation():
    win = ObservationWindow(4.0, 2.0)
    spec = LineSpectrum([-0.6, 0.9], [1.0, 0.4])
    prob = assemble(spec, win)
    res = solve(prob)
    F = eigenvector_profile(prob, res.coeff_vectors[:, 0])
    assert abs(F(res.omegas[1])) <= 1e-6 * abs(F(res.omegas[0]))
    F = eigenvector_profile(prob, res.coeff_vectors[:, 1])
    assert abs(F(res.omegas[0])) <= 1e-6 * abs(F(res.omegas[1]))


def test_single_line_profile_nonzero():
    win = ObservationWindow(4.0, 2.0)
    prob = assemble(LineSpectrum([0.3], [1.0]), win)
    res = solve(prob)
    assert abs(eigenvector_profile(prob, res.coeff_vectors[:, 0])(0.3)) > 1e-3


def test_five_line_profile_annihilation():
    K, W = 5, 2.0
    win = ObservationWindow(6.0, W)
    omegas = equispaced_lines(K, W)
    prob = assemble(LineSpectrum(omegas, np.linspace(0.5, 1.5, K)), win)
    res = solve(prob)
    assert res.omegas.size == K
    for k in range(K):
        F = eigenvector_profile(prob, res.coeff_vectors[:, k])(res.omegas)
        others = np.delete(np.abs(F), k)
        assert others.max() <= 1e-5 * abs(F[k])
    assert max(res.diagnostics["profile_leakage"]) <= 1e-5


def test_profile_outside_band_continuous():
    win = ObservationWindow(4.0, 2.0)
    prob = assemble(LineSpectrum([0.3], [1.0]), win)
    F = eigenvector_profile(prob, np.ones(prob.n_basis))
    assert F(2.0 - 1e-9) == pytest.approx(F(2.0 + 1e-9), abs=1e-7)


def test_diagnostics_and_json():
    win = ObservationWindow(5.0, 3.0)
    res = solve(assemble(LineSpectrum([1.0, -1.0], [0.5, 0.5]), win))
    d = res.to_dict()
    assert d["rank"] == 2
    assert [line["omega"] for line in d["lines"]] == pytest.approx([-1.0, 1.0])
    assert d["delta_eff"] == pytest.approx(2 / 6)
    assert d["capacity_T_over_pi"] == pytest.approx(5 / math.pi)
    assert res.diagnostics["rank_rule"]["rule"] == "relative"


def test_fixed_rank_policy_exposes_spurious_eigenvalues():
    win = ObservationWindow(5.0, 3.0)
    prob = assemble(LineSpectrum([1.0, -1.0], [0.5, 0.5]), win)
    res = solve(prob, 6)
    assert res.rank == 6
    np.testing.assert_allclose(res.omegas, [-1.0, 1.0], atol=1e-6)
    assert len(res.diagnostics["discarded"]) == 4


def test_assembly_deterministic():
    win = ObservationWindow(4.0, 3.0)
    spec = LineSpectrum([-1.5, 0.2], [1.0, 0.5j])
    rec, band = record_for(spec, win)
    a = assemble(rec, win, signal_band=band)
    b = assemble(rec, win, signal_band=band)
    assert np.array_equal(a.A, b.A) and np.array_equal(a.B, b.B)


def test_basis_mismatch():
    with pytest.raises(ValueError):
        assemble(LineSpectrum([0.0], [1.0]), ObservationWindow(4.0, 3.0), build_basis(10.0, 12))


def test_amplitudes_single_line_exact():
    rec = sample(LineSpectrum([0.7], [1.3 - 0.2j]), uniform_grid(0, 10, 50))
    fit = recover_amplitudes(rec, [0.7])
    assert abs(fit.alphas[0] - (1.3 - 0.2j)) <= 1e-12
    assert not fit.ill_conditioned


def test_amplitudes_two_close_lines():
    spec = LineSpectrum([1.0, 1.05], [1.0, -0.5j])
    rec = sample(spec, uniform_grid(0, 100, 400))
    fit = recover_amplitudes(rec, spec.omegas)
    np.testing.assert_allclose(fit.alphas, spec.alphas, atol=1e-8)


def test_amplitude_error_linear_in_noise():
    spec = LineSpectrum([-1.0, 0.4, 1.3], [1.0, 0.5j, 0.8])
    grid = uniform_grid(0, 60, 300)
    sigmas = [1e-4, 1e-3, 1e-2]
    errs = []
    for s in sigmas:
        e = [
            np.linalg.norm(recover_amplitudes(sample(spec, grid, NoiseModel.iid(s, seed=k)), spec.omegas).alphas - spec.alphas)
            for k in range(30)
        ]
        errs.append(np.sqrt(np.mean(np.square(e))))
    slope = np.polyfit(np.log(sigmas), np.log(errs), 1)[0]
    assert abs(slope - 1) <= 0.2


def test_amplitudes_ill_conditioned_warning():
    rec = sample(LineSpectrum([1.0], [1.0]), uniform_grid(0, 1, 20))
    with pytest.warns(IllConditionedWarning):
        fit = recover_amplitudes(rec, [1.0, 1.0 + 1e-13])
    assert fit.ill_conditioned and fit.condition > 1e12
    assert np.all(np.isfinite(fit.alphas))


def test_amplitudes_need_enough_samples():
    rec = sample(LineSpectrum([1.0], [1.0]), [0.0])
    with pytest.raises(ValueError):
        recover_amplitudes(rec, [1.0, 2.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert recover_amplitudes(rec, []).alphas.size == 0
