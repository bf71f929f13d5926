"""Adjoint eigenfunctions of a single Fourier mode.

For a Stokes eigenvalue the temperature component xi solves a sixth-order ODE with
characteristic roots +-k, +-mu1, +-mu2 and six boundary conditions; the coefficients
are the null vector of the 6x6 boundary matrix M. The velocity, pressure and
observation are recovered analytically from the exponential basis.
"""
import logging
import math

import numpy as np

from core.errors import DegenerateSeparationError, NotAnEigenvalueError
from core.numerics import ExponentialProfile, scaled_cosh, scaled_sinh
from core.params import ChannelParams, TolerancePolicy
from models.adjoint import (AdjointEigenfunction, BoundaryMatrix, DeterminantReport, DeterminantSample,
                            ResonanceDiagnostic)
from models.spectral import Branch, SpectralPoint

logger = logging.getLogger(__name__)

DEFAULT_GRID = 1025


def basis_exponents(k: int, mu1: complex, mu2: complex) -> np.ndarray:
    return np.array([k, -k, mu1, -mu1, mu2, -mu2], dtype=complex)


def check_separation(k: int, mu1: complex, mu2: complex, tol: float) -> None:
    pairs = {
        "mu1 = +-mu2": min(abs(mu1 - mu2), abs(mu1 + mu2)),
        "mu1 = +-k": min(abs(mu1 - k), abs(mu1 + k)),
        "mu2 = +-k": min(abs(mu2 - k), abs(mu2 + k)),
        "mu1 = 0": abs(mu1),
        "mu2 = 0": abs(mu2),
    }
    collapsed = sorted(name for name, gap in pairs.items() if gap <= tol)
    if collapsed:
        raise DegenerateSeparationError(
            f"characteristic roots not separated by {tol:g} (k={k}, mu1={mu1}, mu2={mu2}): {', '.join(collapsed)}")


def ode_coefficients(k: int, lam: float, p: ChannelParams) -> tuple[float, float, float]:
    """(c4, c2, c0) of -xi^(6) + c4 xi^(4) - c2 xi'' + c0 xi = 0."""
    kk = k * k
    a, n = lam / p.alpha, lam / p.nu
    c4 = a + n + 3 * kk
    c2 = (n + 2 * kk) * (a + kk) + kk * (n + kk)
    c0 = kk * (n + kk) * (a + kk)
    return c4, c2, c0


def build_M(k: int, mu1: complex, mu2: complex, L: float, sep_tol: float = 1e-8,
            check: bool = True) -> BoundaryMatrix:
    """Rows: xi(0), xi(L), xi''(0), xi''(L), (xi''' - mu2^2 xi')(0), (xi''' - mu2^2 xi')(L)."""
    mu1, mu2 = complex(mu1), complex(mu2)
    if check:
        check_separation(k, mu1, mu2, sep_tol)
    r = basis_exponents(k, mu1, mu2)
    shifts = np.maximum(r.real, 0.0) * L
    at_0 = np.exp(-shifts)
    at_L = np.exp(r * L - shifts)
    third = r * (r**2 - mu2**2)
    third[4:] = 0.0
    entries = np.vstack([at_0, at_L, r**2 * at_0, r**2 * at_L, third * at_0, third * at_L])
    return BoundaryMatrix(k=k, mu1=mu1, mu2=mu2, L=L, exponents=r, entries=entries, log_scale=shifts)


def mu1_k_factors(k: int, mu1: complex, L: float) -> tuple[complex, complex]:
    """The two mu1-k factors of the determinant product, expanded literally (no overflow protection)."""
    mu1 = complex(mu1)
    both, m_only, k_only = np.exp(mu1 * L + k * L), np.exp(mu1 * L), math.exp(k * L)
    first = (mu1 * both - k * both - mu1 * m_only - k * m_only + k_only * mu1 - mu1 + k * k_only + k)
    second = (mu1 * both - k * both + mu1 * m_only + k * m_only - k_only * mu1 - mu1 - k * k_only + k)
    return complex(first), complex(second)


def det_factored(k: int, mu1: complex, mu2: complex, L: float, scaled: bool = True) -> complex:
    """Closed-form det M.

    The mu1-k factors are evaluated in half-argument form, (first)(second) = 16 e^{(mu1+k)L} h1 h2,
    and (e^{2 mu2 L} - 1) e^{-mu2 L} = 2 sinh(mu2 L). With scaled=True the result shares the
    column scaling of build_M, i.e. it is divided by exp(L (|k| + |Re mu1| + |Re mu2|)).
    """
    mu1, mu2 = complex(mu1), complex(mu2)
    half = 0.5 * L
    c1, s1 = scaled_cosh(mu1 * half), scaled_sinh(mu1 * half)
    ck, sk = scaled_cosh(k * half), scaled_sinh(k * half)
    h1 = mu1 * c1 * sk - k * ck * s1
    h2 = mu1 * s1 * ck - k * c1 * sk
    poly = ((mu2 - k) * (mu2 + k) * (mu2 - mu1) * (mu2 + mu1)) ** 2
    value = complex(32 * h1 * h2 * poly * scaled_sinh(mu2 * L))
    if scaled:
        return value
    return value * math.exp(L * (abs(k) + abs(mu1.real) + abs(mu2.real)))


def _relative(values, scale) -> float:
    top = float(np.max(np.abs(values)))
    bottom = float(np.max(scale))
    return top / bottom if bottom > 0 else top


def _residuals(xi: ExponentialProfile, psi2: ExponentialProfile, psi1: ExponentialProfile,
               point: SpectralPoint, p: ChannelParams, x: np.ndarray) -> dict[str, float]:
    k, lam = point.k, point.lam
    mu2_sq = point.mu2**2
    c4, c2, c0 = ode_coefficients(k, lam, p)
    d = [xi.derivative(n) for n in range(7)]
    values = [dn(x) for dn in d]
    mags = [dn.magnitude(x) for dn in d]

    ode6 = -values[6] + c4 * values[4] - c2 * values[2] + c0 * values[0]
    ode6_scale = mags[6] + abs(c4) * mags[4] + abs(c2) * mags[2] + abs(c0) * mags[0]

    ends = np.array([0.0, p.L])
    boundary = 0.0
    for order in (0, 2):
        boundary = max(boundary, _relative(d[order](ends), d[order].magnitude(ends)))
    combo = d[3](ends) - mu2_sq * d[1](ends)
    boundary = max(boundary, _relative(combo, d[3].magnitude(ends) + abs(mu2_sq) * d[1].magnitude(ends)))

    residuals = {"ode6": _relative(ode6, ode6_scale), "boundary": boundary}
    if point.branch is Branch.DIRICHLET:
        residuals.update(psi2_ode4=0.0, psi2_boundary=0.0, divergence=0.0)
        return residuals

    e = [psi2.derivative(n) for n in range(5)]
    a2, a0 = lam + 2 * p.nu * k * k, k * k * (lam + p.nu * k * k)
    ode4 = p.nu * e[4](x) - a2 * e[2](x) + a0 * e[0](x)
    ode4_scale = p.nu * e[4].magnitude(x) + abs(a2) * e[2].magnitude(x) + abs(a0) * e[0].magnitude(x)
    psi2_boundary = max(_relative(e[0](ends), e[0].magnitude(x)), _relative(e[1](ends), e[1].magnitude(x)))
    divergence = 1j * k * psi1(x) + e[1](x)
    residuals.update(
        psi2_ode4=_relative(ode4, ode4_scale),
        psi2_boundary=psi2_boundary,
        divergence=_relative(divergence, abs(k) * psi1.magnitude(x) + e[1].magnitude(x)),
    )
    return residuals


def _dirichlet_profile(point: SpectralPoint, p: ChannelParams) -> ExponentialProfile:
    beta = point.j * math.pi / p.L
    exponents = np.array([1j * beta, -1j * beta])
    return ExponentialProfile(exponents, np.array([-0.5j, 0.5j]), np.zeros(2))


def _null_vector(matrix: BoundaryMatrix, policy: TolerancePolicy) -> tuple[np.ndarray, float, int]:
    _, sv, vh = np.linalg.svd(matrix.entries)
    ratios = sv / sv[0]
    return vh[-1].conj(), float(ratios[-1]), int(np.count_nonzero(ratios < policy.svd_null_ratio))


def solve_eigenfunction(point: SpectralPoint, p: ChannelParams, policy: TolerancePolicy,
                        N: int = DEFAULT_GRID) -> AdjointEigenfunction:
    x = np.linspace(0.0, p.L, N)
    k = point.k
    if point.branch is Branch.DIRICHLET:
        matrix = build_M(k, point.mu1, point.mu2, p.L, check=False)
        _, null_ratio, null_dim = _null_vector(matrix, policy)
        xi = _dirichlet_profile(point, p)
        coeffs = np.concatenate([np.zeros(4, dtype=complex), xi.weights])
        zero = np.zeros_like(x, dtype=complex)
        obs = (point.j * math.pi / p.L) * (-1) ** point.j
        residuals = _residuals(xi, xi, xi, point, p, x)
        return AdjointEigenfunction(
            point=point, params=p, coeffs=coeffs, x2=x, xi=xi(x), dxi=xi.derivative(1)(x), psi1=zero,
            psi2=zero, q=zero, obs=complex(obs), obs_pressure=0j, null_ratio=null_ratio, null_dim=null_dim,
            residuals=residuals, tolerance=policy.residual_rel_tol, profile=xi)

    point = point.at_alpha(p)
    matrix = build_M(k, point.mu1, point.mu2, p.L, p.sep_tol)
    vector, null_ratio, null_dim = _null_vector(matrix, policy)
    if null_ratio >= policy.svd_null_ratio:
        raise NotAnEigenvalueError(
            f"{point.label}: sigma_min/sigma_max={null_ratio:.3g} not below {policy.svd_null_ratio:g}")
    if null_dim >= 2:
        logger.warning(f"{point.label}: boundary matrix has a {null_dim}-dimensional numerical nullspace")

    r = matrix.exponents
    xi = ExponentialProfile(r, vector, matrix.log_scale)
    samples = xi(x)
    xi = xi.reweighted(1.0 / samples[np.argmax(np.abs(samples))])

    lam, mu2_sq = point.lam, point.mu2**2
    to_psi2 = p.alpha * (mu2_sq - r**2)
    to_psi2[4:] = 0.0
    psi2 = xi.reweighted(to_psi2)
    psi1 = psi2.derivative(1).reweighted(1j / k)
    q = psi2.reweighted(r * (p.nu * r**2 - lam - p.nu * k * k) / (k * k))

    residuals = _residuals(xi, psi2, psi1, point, p, x)
    eigenfunction = AdjointEigenfunction(
        point=point, params=p, coeffs=xi.weights * np.exp(-matrix.log_scale), x2=x, xi=xi(x),
        dxi=xi.derivative(1)(x), psi1=psi1(x), psi2=psi2(x), q=q(x), obs=complex(xi.derivative(1)(p.L)[0]),
        obs_pressure=complex(q(p.L)[0]), null_ratio=null_ratio, null_dim=null_dim, residuals=residuals,
        tolerance=policy.residual_rel_tol, profile=xi)
    if not eigenfunction.accepted:
        logger.warning(f"{point.label}: eigenfunction residuals above tolerance: {residuals}")
    logger.debug(f"{point.label}: obs={eigenfunction.obs:.6g}, null_ratio={null_ratio:.3g}")
    return eigenfunction


def sin_resonance_check(point: SpectralPoint, p: ChannelParams, policy: TolerancePolicy,
                        N: int = DEFAULT_GRID) -> ResonanceDiagnostic:
    """Flag sin(mu2~ L) = 0, where xi is proportional to sin(mu2~ x) and psi2 vanishes."""
    if point.branch is not Branch.STOKES:
        raise ValueError(f"{point.label}: resonance check applies to Stokes points")
    point = point.at_alpha(p)
    if point.mu2_tilde is None:
        return ResonanceDiagnostic(flagged=False, tag="mu2_real")

    sin_value = math.sin(point.mu2_tilde * p.L)
    if abs(sin_value) >= policy.root_abs_tol:
        return ResonanceDiagnostic(flagged=False, sin_value=sin_value)

    mu2 = point.mu2
    xi = ExponentialProfile(np.array([mu2, -mu2]), np.array([0.5, -0.5], dtype=complex), np.zeros(2))
    x = np.linspace(0.0, p.L, N)
    psi2 = -p.alpha * xi.derivative(2)(x) + p.alpha * mu2**2 * xi(x)
    peak = float(np.max(np.abs(psi2)) / (p.alpha * abs(mu2) ** 2 * np.max(np.abs(xi(x)))))
    logger.info(f"{point.label}: sin(mu2~ L)={sin_value:.3g}, excluded from verdicts")
    return ResonanceDiagnostic(flagged=True, sin_value=sin_value, tag="sin_resonance", psi2_peak=peak)


def _determinant_sample(k, mu1, mu2, L, floor_rel) -> DeterminantSample:
    matrix = build_M(k, mu1, mu2, L, check=False)
    direct = matrix.det()
    factored = det_factored(k, mu1, mu2, L)
    floor = floor_rel * matrix.hadamard_bound()
    rel_err = abs(direct - factored) / max(abs(direct), floor)
    return DeterminantSample(k=k, mu1=mu1, mu2=mu2, L=L, direct=direct, factored=factored, rel_err=rel_err)


def determinant_check(samples: int, seed: int, threshold: float = 1e-9, floor_rel: float = 1e-4,
                      inject_degenerate: bool = False) -> DeterminantReport:
    """Compare det M with det_factored on random (k, mu1, mu2, L); mu2 is imaginary or real with equal odds."""
    rng = np.random.default_rng(seed)
    worst = None
    for _ in range(samples):
        k = int(rng.integers(1, 6)) * (1 if rng.random() < 0.5 else -1)
        L = float(rng.uniform(0.5, 2 * math.pi))
        mu1 = complex(0.0, rng.uniform(0.1, 10.0))
        if rng.random() < 0.5:
            mu2 = complex(0.0, rng.uniform(0.1, 10.0))
        else:
            mu2 = complex(rng.uniform(0.1, 5.0), 0.0)
        sample = _determinant_sample(k, mu1, mu2, L, floor_rel)
        if worst is None or sample.rel_err > worst.rel_err:
            worst = sample

    degenerate = None
    if inject_degenerate:
        degenerate = _determinant_sample(1, 1.5j, 1.5j, math.pi, floor_rel)
    logger.info(f"Determinant check: {samples} samples, seed={seed}, max_rel_err={worst.rel_err:.3e}")
    return DeterminantReport(samples=samples, seed=seed, max_rel_err=worst.rel_err, threshold=threshold,
                             floor_rel=floor_rel, worst=worst, degenerate=degenerate)
