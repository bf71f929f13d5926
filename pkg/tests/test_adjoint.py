import math

import numpy as np
import pytest

from core.errors import DegenerateSeparationError
from core.params import ChannelParams
from models.spectral import Branch, SpectralPoint
from services.adjoint import (build_M, det_factored, determinant_check, mu1_k_factors, sin_resonance_check,
                              solve_eigenfunction)
from services.spectra import dispersion_kernel, merge_spectrum, stokes_eigenvalues


def test_determinant_identity_over_random_samples():
    report = determinant_check(1000, seed=2024)
    assert report.samples == 1000
    assert report.passed
    assert report.max_rel_err <= 1e-9


def test_determinant_check_is_reproducible():
    assert determinant_check(50, seed=9) == determinant_check(50, seed=9)
    assert determinant_check(50, seed=9) != determinant_check(50, seed=10)


def test_degenerate_sample_vanishes_on_both_sides():
    report = determinant_check(10, seed=1, inject_degenerate=True)
    sample = report.degenerate
    assert sample.mu1 == sample.mu2
    assert sample.factored == 0
    assert sample.rel_err <= 1e-9


def test_unscaled_determinant_matches_closed_form():
    matrix = build_M(2, 1.3j, 0.7, 1.1)
    assert matrix.unscaled_det() == pytest.approx(det_factored(2, 1.3j, 0.7, 1.1, scaled=False), rel=1e-9)


def test_mu1_k_factors_reduce_to_dispersion_kernel():
    k, mu1, L = 1, 0.9j, 2.0
    first, second = mu1_k_factors(k, mu1, L)
    expected = 4 * np.exp((mu1 + k) * L) * dispersion_kernel(k, mu1, L)
    assert first * second == pytest.approx(expected, rel=1e-10)


def test_collapsed_roots_are_rejected():
    with pytest.raises(DegenerateSeparationError, match="mu1 = \\+-mu2") as info:
        build_M(1, 2j, 2j, 1.0)
    assert info.value.exit_code == 3
    with pytest.raises(DegenerateSeparationError, match="mu2 = \\+-k"):
        build_M(1, 2j, 1.0, 1.0)
    build_M(1, 2j, 2j, 1.0, check=False)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_eigenfunction_residuals(params, policy, k):
    for point in merge_spectrum(k, params, 5, 5, policy).points:
        eigenfunction = solve_eigenfunction(point, params, policy)
        assert eigenfunction.accepted, (point.label, eigenfunction.residuals)
        assert eigenfunction.max_residual <= 1e-7
        if point.branch is Branch.STOKES:
            assert eigenfunction.null_ratio < policy.svd_null_ratio
            assert np.max(np.abs(eigenfunction.xi)) == pytest.approx(1.0, rel=1e-12)


def test_dirichlet_observation_is_exact(params, policy):
    for k in range(1, 6):
        for j in range(1, 6):
            point = SpectralPoint.dirichlet(k, j, params)
            eigenfunction = solve_eigenfunction(point, params, policy, N=65)
            assert eigenfunction.obs == complex((j * math.pi / params.L) * (-1) ** j)
            assert eigenfunction.dxi[-1] == pytest.approx(eigenfunction.obs, rel=1e-12)


def test_stokes_observation_is_nonzero(params, policy):
    point = stokes_eigenvalues(1, params, 1, policy)[0]
    eigenfunction = solve_eigenfunction(point, params, policy)
    assert abs(eigenfunction.obs) > policy.residual_rel_tol
    assert eigenfunction.obs == pytest.approx(eigenfunction.dxi[-1], rel=1e-12)
    assert eigenfunction.null_dim == 1


def test_sin_resonance_is_flagged(params, policy):
    point = stokes_eigenvalues(1, params, 1, policy)[0]
    # diffusivity with mu2~ L = 3 pi
    alpha = -point.lam / (1 + 9.0)
    resonant = ChannelParams(nu=params.nu, alpha=alpha, L=params.L)
    diagnostic = sin_resonance_check(point, resonant, policy)
    assert diagnostic.flagged
    assert diagnostic.tag == "sin_resonance"
    assert diagnostic.psi2_peak < 1e-10

    assert not sin_resonance_check(point, params, policy).flagged


def test_resonance_check_for_real_mu2(params, policy):
    point = stokes_eigenvalues(1, params, 1, policy)[0]
    diagnostic = sin_resonance_check(point, params.with_alpha(1e4), policy)
    assert not diagnostic.flagged
    assert diagnostic.tag == "mu2_real"


def test_resonance_check_rejects_dirichlet_points(params, policy):
    with pytest.raises(ValueError):
        sin_resonance_check(SpectralPoint.dirichlet(1, 1, params), params, policy)
