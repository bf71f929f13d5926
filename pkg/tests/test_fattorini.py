import math

import numpy as np
import pytest

from core.errors import ConfigError
from core.numerics import ExponentialProfile
from core.params import ChannelParams, TolerancePolicy
from models.fattorini import VerdictStatus
from models.spectral import SpectralPoint
from services.adjoint import basis_exponents, solve_eigenfunction
from services.fattorini import (F_value, build_R, det_r_large_alpha, ibp_boundary_identity, leading_factor,
                                merge_zeros, scan_alpha, two_control_verdict, uc_verdict)
from services.spectra import stokes_eigenvalues


def test_det_R_equals_minus_F():
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(1, 6)) * (1 if rng.random() < 0.5 else -1)
        m1, m2 = rng.uniform(0.1, 10.0, size=2)
        L = rng.uniform(0.5, 2 * math.pi)
        matrix = build_R(k, 1j * m1, 1j * m2, L, check=False)
        det = matrix.det()
        scale = float(np.prod(np.linalg.norm(matrix.entries, axis=1)))
        worst = max(worst, abs(det + F_value(k, m1, m2, L)) / max(abs(det), scale))
    assert worst <= 1e-10


def test_leading_factor_never_vanishes():
    for k in (1, 2, 5):
        for m in np.linspace(0.05, 20.0, 400):
            assert leading_factor(k, m, 1.3) < 0


def test_normalized_det_is_scale_free():
    matrix = build_R(2, 1.1j, 0.3j, 1.7)
    assert 0.0 < matrix.normalized_det() <= 1.0
    coeffs = np.array([0.3, -1.0, 2.0])
    assert np.allclose(matrix.apply(2 * coeffs), 2 * matrix.apply(coeffs))


def _scan(grid_step):
    policy = TolerancePolicy()
    return [scan_alpha(1, j, 1.0, math.pi, (0.05, 0.95), grid_step, policy) for j in (1, 2, 3)]


def test_alpha_scan_is_stable_under_refinement():
    coarse, fine = _scan(1e-3), _scan(5e-4)
    for a, b in zip(coarse, fine):
        assert len(a.zeros) == len(b.zeros)
        for za, zb in zip(a.zeros, b.zeros):
            assert abs(za.alpha - zb.alpha) <= 1e-8
        for zero in a.zeros + b.zeros:
            assert zero.confirmed
            assert zero.residual <= 1e-8
            assert 0.05 < zero.alpha < 0.95
            assert zero.bracket[0] <= zero.alpha <= zero.bracket[1]
    merged = merge_zeros(coarse)
    assert [z.alpha for z in merged] == sorted(z.alpha for z in merged)


def test_alpha_scan_margin_and_lambda(policy):
    report = scan_alpha(2, 1, 1.0, math.pi, (0.1, 0.9), 1e-2, policy)
    params = ChannelParams(nu=1.0, alpha=0.4, L=math.pi)
    assert report.lam == pytest.approx(stokes_eigenvalues(2, params, 1, policy)[0].lam, rel=1e-14)
    assert report.grid_points == 81
    assert report.verdict_margin is None or report.verdict_margin > 0


@pytest.mark.parametrize("interval", [(0.1, 1.0), (0.0, 0.5), (0.6, 0.4), (0.5, 1.2)])
def test_alpha_scan_rejects_bad_intervals(policy, interval):
    with pytest.raises(ConfigError):
        scan_alpha(1, 1, 1.0, math.pi, interval, 1e-3, policy)


def test_alpha_scan_rejects_non_stokes_lambda(policy):
    with pytest.raises(ConfigError, match="not a Stokes eigenvalue"):
        scan_alpha(1, 1, 1.0, math.pi, (0.1, 0.9), 1e-2, policy, lam=-0.5)


def test_dirichlet_rows_are_observable(params, policy):
    for k in range(1, 6):
        for j in range(1, 6):
            verdict = uc_verdict(SpectralPoint.dirichlet(k, j, params), params, policy)
            assert verdict.status == VerdictStatus.OBSERVABLE.value
            assert verdict.obs_abs == pytest.approx(j * math.pi / params.L)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_generic_stokes_rows_are_observable(params, policy, k):
    for point in stokes_eigenvalues(k, params, 5, policy):
        verdict = uc_verdict(point, params, policy)
        assert verdict.status == VerdictStatus.OBSERVABLE.value, verdict
        assert verdict.det_r_normalized > policy.det_threshold
        assert verdict.regime == "proof_regime"
        assert not verdict.resonance.flagged


def test_small_determinant_is_inconclusive(params):
    strict = TolerancePolicy(det_threshold=2.0)
    point = stokes_eigenvalues(1, params, 1, strict)[0]
    verdict = uc_verdict(point, params, strict)
    assert verdict.status == VerdictStatus.INCONCLUSIVE.value
    assert verdict.notes


def test_resonant_point_is_inconclusive(params, policy):
    point = stokes_eigenvalues(1, params, 1, policy)[0]
    resonant = ChannelParams(nu=params.nu, alpha=-point.lam / 10.0, L=params.L)
    verdict = uc_verdict(point, resonant, policy)
    assert verdict.status == VerdictStatus.INCONCLUSIVE.value
    assert verdict.resonance.tag == "sin_resonance"


def test_outside_proof_regime_is_labelled(params, policy):
    p = params.with_alpha(1.5)
    point = stokes_eigenvalues(1, p, 1, policy)[0]
    verdict = uc_verdict(point, p, policy)
    assert verdict.regime == "outside_proof_regime"
    assert verdict.status in {s.value for s in VerdictStatus}


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.5])
def test_two_control_verdict_holds_for_any_alpha(policy, alpha):
    p = ChannelParams(nu=1.0, alpha=alpha, L=math.pi)
    for k in (1, 2):
        for point in stokes_eigenvalues(k, p, 5, policy):
            verdict = two_control_verdict(point, p, policy)
            assert verdict.status == VerdictStatus.OBSERVABLE.value
            assert verdict.f_prime_0 <= 1e-14 * abs(k)
            assert verdict.normalized > 0.5


def test_two_control_reports_pressure_observation(params, policy):
    point = stokes_eigenvalues(1, params, 1, policy)[0]
    eigenfunction = solve_eigenfunction(point, params, policy)
    verdict = two_control_verdict(point, params, policy, eigenfunction=eigenfunction)
    assert verdict.q_at_L == pytest.approx(abs(eigenfunction.obs_pressure))


def test_large_alpha_determinant_decays(params, policy):
    point = stokes_eigenvalues(1, params, 1, policy)[0]
    values = [value for _, value in det_r_large_alpha(point, params, [1.5, 1.5e2, 1.5e4, 1.5e6])]
    assert values[1] > values[2] > values[3]
    assert values[3] < 1e-3


@pytest.mark.parametrize("j", [1, 2, 3])
def test_multiplier_identity(params, policy, j):
    point = stokes_eigenvalues(1, params, j, policy)[j - 1]
    eigenfunction = solve_eigenfunction(point, params, policy)
    check = ibp_boundary_identity(eigenfunction, (1.0, 0.5, -2.0), params)
    assert check.identity_defect <= 1e-7
    assert check.quadrature_defect <= 1e-8
    assert max(check.f_even_derivatives_at_0) <= 1e-12

    doubled = ibp_boundary_identity(eigenfunction, (2.0, 1.0, -4.0), params)
    assert doubled.reduced_boundary == 2 * check.reduced_boundary


def test_identity_rejects_dirichlet_eigenfunctions(params, policy):
    eigenfunction = solve_eigenfunction(SpectralPoint.dirichlet(1, 1, params), params, policy, N=65)
    with pytest.raises(ValueError):
        ibp_boundary_identity(eigenfunction, (1.0, 1.0, 1.0), params)


def test_R_columns_match_direct_evaluation():
    k, mu1, mu2, L = 2, 1.3j, 0.6, 1.9
    matrix = build_R(k, mu1, mu2, L)
    assert np.allclose(matrix.apply([1.0, 0.0, 0.0]), [k, math.sinh(k * L), k * math.cosh(k * L)], rtol=1e-15)

    rng = np.random.default_rng(4)
    r = basis_exponents(k, mu1, mu2)
    for _ in range(20):
        a, b, c = rng.standard_normal(3)
        f = ExponentialProfile(r, 0.5 * np.array([a, -a, b, -b, c, -c], dtype=complex), np.zeros(6))
        direct = np.array([f.derivative(1)(0.0)[0], f(L)[0], f.derivative(1)(L)[0]])
        assert np.allclose(matrix.apply([a, b, c]), direct, rtol=0, atol=1e-12 * np.max(np.abs(direct)))


def test_R_is_singular_when_mu2_meets_k():
    assert build_R(1, 0.8j, 1.0, 2.0, check=False).normalized_det() <= 1e-14


def test_F_vanishes_at_zero_mu2():
    assert F_value(1, 1.7, 0.0, math.pi) == 0.0


def test_verdict_changes_only_at_scanned_zeros(policy):
    report = scan_alpha(1, 1, 1.0, math.pi, (0.05, 0.95), 1e-3, policy)
    plain = [z for z in report.zeros if z.tag is None]
    assert plain
    zero = plain[-1]
    point = stokes_eigenvalues(1, ChannelParams(nu=1.0, alpha=0.5, L=math.pi), 1, policy)[0]

    at_zero = uc_verdict(point, ChannelParams(nu=1.0, alpha=zero.alpha, L=math.pi), policy)
    assert at_zero.status != VerdictStatus.OBSERVABLE.value
    assert at_zero.det_r_normalized <= policy.det_threshold
    for shift in (-10 * report.grid_step, 10 * report.grid_step):
        nearby = ChannelParams(nu=1.0, alpha=zero.alpha + shift, L=math.pi)
        assert uc_verdict(point, nearby, policy).status == VerdictStatus.OBSERVABLE.value


def test_resonant_zeros_are_tagged_and_keep_diagnostics(policy):
    report = scan_alpha(1, 1, 1.0, math.pi, (0.05, 0.95), 1e-3, policy)
    resonant = [z for z in report.zeros if z.tag == "sin_resonance"]
    assert resonant and len(resonant) < len(report.zeros)
    point = stokes_eigenvalues(1, ChannelParams(nu=1.0, alpha=0.5, L=math.pi), 1, policy)[0]
    for zero in resonant:
        assert abs(zero.sin_value) <= 1e-9
        verdict = uc_verdict(point, ChannelParams(nu=1.0, alpha=zero.alpha, L=math.pi), policy)
        assert verdict.status != VerdictStatus.OBSERVABLE.value
        assert verdict.det_r_normalized is not None
        assert verdict.det_r_normalized <= policy.det_threshold
        assert verdict.leading_factor < 0


def test_close_pair_of_zeros_is_found_on_a_coarse_grid(policy):
    for step in (1e-2, 1e-3):
        report = scan_alpha(1, 3, 1.0, math.pi, (0.05, 0.95), step, policy)
        pair = [z.alpha for z in report.zeros if 0.0800 < z.alpha < 0.0812]
        assert len(pair) == 2
        assert pair[0] == pytest.approx(0.08036267483286405, abs=1e-9)
        assert pair[1] == pytest.approx(0.08084190860706908, abs=1e-9)
        assert report.refined_points > report.grid_points


@pytest.mark.parametrize("k", [6, 7])
def test_high_modes_stay_observable(policy, k):
    p = ChannelParams(nu=1.0, alpha=0.4, L=math.pi)
    for point in stokes_eigenvalues(k, p, 3, policy):
        verdict = uc_verdict(point, p, policy)
        assert verdict.status == VerdictStatus.OBSERVABLE.value, verdict
        assert verdict.det_r_normalized > 1e-6
        assert verdict.leading_factor < 0


def test_normalized_det_survives_large_kL():
    matrix = build_R(40, 3.3j, 2.2j, math.pi)
    value = matrix.normalized_det()
    assert math.isfinite(value)
    assert 0.0 < value <= 1.0
    assert np.all(np.isfinite(matrix.scaled_entries()))


def test_verdict_notes_record_the_leading_factor(params, policy):
    point = stokes_eigenvalues(1, params, 1, policy)[0]
    verdict = uc_verdict(point, params, policy)
    assert verdict.leading_factor == pytest.approx(leading_factor(1, point.mu1_tilde, params.L))
    assert any(note.startswith("leading factor") and note.endswith("nonzero") for note in verdict.notes)
