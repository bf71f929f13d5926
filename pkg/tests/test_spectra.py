import math

import numpy as np
import pytest

from core.errors import ConfigError, GridExhaustedError
from core.params import ChannelParams, TolerancePolicy
from models.spectral import Branch
from services import spectra
from services.spectra import (dirichlet_eigenvalues, dispersion_kernel, dispersion_value, fd_stokes_oracle,
                              find_dispersion_roots, merge_spectrum, stokes_eigenvalues)


def test_dispersion_vanishes_at_zero_and_is_odd():
    grid = np.linspace(0.1, 8.0, 40)
    for k in (1, 2, -3):
        assert dispersion_value(k, 0.0, math.pi) == 0.0
        assert np.allclose(dispersion_value(k, -grid, math.pi), -dispersion_value(k, grid, math.pi), rtol=1e-15, atol=0)


def test_scaled_dispersion_keeps_sign_and_ratio():
    grid = np.linspace(0.05, 10.0, 97)
    for k in (1, 4):
        raw = dispersion_value(k, grid, 2.0)
        scaled = dispersion_value(k, grid, 2.0, scaled=True)
        assert np.allclose(scaled, raw / math.cosh(2.0 * k), rtol=1e-12, atol=1e-12 * np.max(np.abs(scaled)))
        assert np.array_equal(np.sign(scaled[np.abs(scaled) > 1e-9]), np.sign(raw[np.abs(scaled) > 1e-9]))
    assert np.all(np.isfinite(dispersion_value(200, grid, math.pi, scaled=True)))


def test_dispersion_matches_complex_kernel():
    for m in (0.3, 1.7, 4.2):
        kernel = dispersion_kernel(2, 1j * m, 1.5)
        assert kernel / 1j == pytest.approx(dispersion_value(2, m, 1.5), rel=1e-10)


def test_roots_do_not_depend_on_viscosity():
    policy = TolerancePolicy()
    reference = None
    for nu in (0.5, 1.0, 2.0):
        p = ChannelParams(nu=nu, alpha=0.4, L=math.pi)
        points = stokes_eigenvalues(1, p, 5, policy)
        roots = [pt.mu1_tilde for pt in points]
        scaled = [pt.lam / nu for pt in points]
        if reference is None:
            reference = (roots, scaled)
            continue
        assert np.allclose(roots, reference[0], rtol=1e-12, atol=0)
        assert np.allclose(scaled, reference[1], rtol=1e-12, atol=0)


def test_root_search_diagnostics(policy):
    search = find_dispersion_roots(1, math.pi, 5, policy)
    assert len(search.roots) == 5
    assert search.count_check_passed
    assert search.suspected_double_roots == []
    assert all(b > a for a, b in zip(search.roots, search.roots[1:]))
    for root in search.roots:
        assert abs(dispersion_value(1, root, math.pi, scaled=True)) <= policy.root_value_tol


def test_low_ceiling_exhausts_the_grid(policy):
    with pytest.raises(GridExhaustedError) as info:
        find_dispersion_roots(1, math.pi, 5, policy, ceiling=2.0)
    assert info.value.exit_code == 3


def test_stokes_eigenvalues_below_threshold(params, policy):
    for k in (1, 2, 3):
        for point in stokes_eigenvalues(k, params, 5, policy):
            assert point.branch is Branch.STOKES
            assert point.lam < -params.nu * k * k


@pytest.mark.parametrize("k", [1, 2, 3])
def test_oracle_agrees_with_dispersion_roots(params, policy, k):
    exact = [pt.lam for pt in stokes_eigenvalues(k, params, 5, policy)]
    oracle = fd_stokes_oracle(k, params, 2000, 5)
    assert np.allclose(oracle, exact, rtol=1e-3, atol=0)
    assert all(a > b for a, b in zip(oracle, oracle[1:]))


def test_oracle_converges_at_second_order(params, policy):
    exact = stokes_eigenvalues(1, params, 1, policy)[0].lam
    errors = [abs(fd_stokes_oracle(1, params, n, 1)[0] - exact) for n in (250, 500, 1000)]
    assert errors[0] / errors[1] > 3
    assert errors[1] / errors[2] > 3


def test_oracle_rejects_coarse_grid(params):
    with pytest.raises(ConfigError, match="minimum"):
        fd_stokes_oracle(1, params, 100, 5)


def test_dirichlet_branch_is_exact(params):
    for k in range(1, 6):
        for point in dirichlet_eigenvalues(k, params, 5):
            beta = point.j * math.pi / params.L
            assert point.lam == pytest.approx(-params.alpha * (k * k + beta * beta), rel=1e-15)
            assert point.mu2 == complex(0.0, beta)


def test_zero_mode_is_excluded(params, policy):
    with pytest.raises(ConfigError, match="0-mode excluded"):
        dirichlet_eigenvalues(0, params, 3)
    with pytest.raises(ConfigError, match="0-mode excluded"):
        find_dispersion_roots(0, params.L, 3, policy)


def test_merged_spectrum_is_sorted(params, policy):
    merged = merge_spectrum(1, params, 5, 5, policy)
    assert len(merged.points) == 10
    assert merged.coincidences == []
    lams = [pt.lam for pt in merged.points]
    assert lams == sorted(lams, reverse=True)
    assert {pt.branch for pt in merged.points} == {Branch.STOKES, Branch.DIRICHLET}


def test_coincident_eigenvalue_is_recorded_once(params, policy):
    stokes = stokes_eigenvalues(1, params, 1, policy)[0]
    # diffusivity that puts the first Dirichlet eigenvalue on the first Stokes eigenvalue
    alpha = -stokes.lam / (1 + (math.pi / params.L) ** 2)
    p = ChannelParams(nu=params.nu, alpha=alpha, L=params.L)
    merged = merge_spectrum(1, p, 3, 3, policy)
    assert len(merged.coincidences) == 1
    assert merged.coincidences[0].stokes_j == 1 and merged.coincidences[0].dirichlet_j == 1
    assert len(merged.points) == 5


def test_even_order_root_is_reported(monkeypatch, policy):
    def touching(k, mu_tilde, L, scaled=False):
        m = np.asarray(mu_tilde, dtype=float)
        return (m - 1.5037) ** 2 * (m - 3.2)

    monkeypatch.setattr(spectra, "dispersion_value", touching)
    search = find_dispersion_roots(1, math.pi, 1, policy, ceiling=5.0)
    assert search.roots == [pytest.approx(3.2, abs=1e-10)]
    assert search.suspected_double_roots == [pytest.approx(1.5037, abs=1e-6)]
