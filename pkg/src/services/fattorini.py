"""Unique-continuation test by the multiplier method.

Multiplying the sixth-order equation for xi by f = A sinh(kx) + B sinh(mu1 x) + C sinh(mu2 x)
and integrating by parts leaves boundary values of xi^(4), xi^(5) paired with
(f'(0), f(L), f'(L)) = R (A, B, C). When R is invertible a vanishing observation
xi'(L) forces xi = 0, so the eigenfunction is observed.
"""
import logging
import math

import numpy as np
from scipy.integrate import romb
from scipy.optimize import minimize_scalar

from core.errors import ConfigError, InconsistentVerdictError
from core.numerics import ExponentialProfile, refine_root, sign_change_brackets
from core.params import ChannelParams, TolerancePolicy, require_mode
from models.adjoint import AdjointEigenfunction
from models.fattorini import (AlphaScanReport, AlphaZero, IdentityCheck, MultiplierMatrix, TwoControlVerdict,
                              Verdict, VerdictStatus)
from models.spectral import Branch, SpectralPoint
from services.adjoint import (DEFAULT_GRID, basis_exponents, check_separation, ode_coefficients,
                              sin_resonance_check, solve_eigenfunction)
from services.spectra import find_dispersion_roots

logger = logging.getLogger(__name__)

IDENTITY_POINTS = 4097
MARGIN_CELLS = 10
# F is steep in alpha near small diffusivities; refine alpha to a few ulps
ALPHA_XTOL = 1e-15
# mu2~ L is sampled at least this finely, whatever the alpha step
PHASE_STEP = math.pi / 64
RESONANCE_SIN_TOL = 1e-9


def build_R(k: int, mu1: complex, mu2: complex, L: float, sep_tol: float = 1e-8,
            check: bool = True) -> MultiplierMatrix:
    mu1, mu2 = complex(mu1), complex(mu2)
    if check:
        check_separation(k, mu1, mu2, sep_tol)
    r = np.array([k, mu1, mu2], dtype=complex)
    entries = np.vstack([r, np.sinh(r * L), r * np.cosh(r * L)])
    return MultiplierMatrix(k=k, mu1=mu1, mu2=mu2, L=L, entries=entries)


def F_leading(k: int, mu1_tilde: float, mu2_tilde: float, L: float) -> float:
    s1, c1 = math.sin(mu1_tilde * L), math.cos(mu1_tilde * L)
    sinh_kl, cosh_kl = math.sinh(k * L), math.cosh(k * L)
    return (math.cos(mu2_tilde * L) * (k * s1 - sinh_kl * mu1_tilde)
            + sinh_kl * mu1_tilde * c1 - k * cosh_kl * s1)


def F_value(k: int, mu1_tilde: float, mu2_tilde: float, L: float) -> float:
    """F(mu2~); equals -det R when mu1 = i mu1~ and mu2 = i mu2~."""
    s2 = math.sin(mu2_tilde * L)
    c1 = math.cos(mu1_tilde * L)
    return (F_leading(k, mu1_tilde, mu2_tilde, L) * mu2_tilde
            + mu1_tilde * s2 * k * math.cosh(k * L) - mu1_tilde * c1 * s2 * k)


def leading_factor(k: int, mu1_tilde: float, L: float) -> float:
    """k sin(mu1~ L) - sinh(kL) mu1~, nonzero whenever mu1 != +-k."""
    return k * math.sin(mu1_tilde * L) - math.sinh(k * L) * mu1_tilde


def _f_scale(k, mu1_tilde, mu2_tilde, L) -> float:
    return math.cosh(k * L) * mu1_tilde * (mu2_tilde + abs(k))


def stokes_lambda(k: int, j: int, nu: float, L: float, policy: TolerancePolicy) -> float:
    search = find_dispersion_roots(k, L, j, policy)
    mu = search.roots[j - 1]
    return -nu * (k * k + mu * mu)


def scan_alpha(k: int, j: int, nu: float, L: float, interval: tuple[float, float], grid_step: float,
               policy: TolerancePolicy, lam: float | None = None) -> AlphaScanReport:
    """Zeros of alpha -> F_lambda(sqrt(-k^2 - lambda/alpha)) on a compact sub-interval of (0, nu)."""
    require_mode(k)
    lo, hi = interval
    if not 0 < lo < hi < nu:
        raise ConfigError(f"alpha interval ({lo}, {hi}) must satisfy 0 < lo < hi < nu={nu}")
    if grid_step <= 0:
        raise ConfigError("scan grid_step must be positive")
    if lam is None:
        lam = stokes_lambda(k, j, nu, L, policy)
    if lam >= -nu * k * k:
        raise ConfigError(f"lambda={lam} is not a Stokes eigenvalue (needs lambda < -nu k^2)")

    mu1_tilde = math.sqrt(-k * k - lam / nu)

    def mu2_tilde(alpha):
        return math.sqrt(-k * k - lam / alpha)

    def f(alpha):
        return F_value(k, mu1_tilde, mu2_tilde(alpha), L)

    cells = int(math.ceil((hi - lo) / grid_step - 1e-9))
    uniform = np.linspace(lo, hi, cells + 1)
    grid = np.union1d(uniform, _phase_grid(k, lam, L, lo, hi))
    values = np.array([f(a) for a in grid])

    xtol = min(policy.root_abs_tol, ALPHA_XTOL)
    brackets = sign_change_brackets(grid, values) + _hidden_pairs(f, grid, values, xtol)
    zeros = []
    for left, right in sorted(brackets):
        alpha = refine_root(f, left, right, xtol)
        residual = abs(f(alpha))
        confirmed = residual <= policy.root_value_tol * max(1.0, _f_scale(k, mu1_tilde, mu2_tilde(alpha), L))
        if not confirmed:
            logger.warning(f"Zero of F near alpha={alpha:.12g} (k={k}, j={j}) has terminal |F|={residual:.3g}")
        sin_value = math.sin(mu2_tilde(alpha) * L)
        tag = "sin_resonance" if abs(sin_value) <= RESONANCE_SIN_TOL else None
        zeros.append(AlphaZero(k=k, j=j, alpha=alpha, residual=residual, bracket=(left, right), confirmed=confirmed,
                               sin_value=sin_value, tag=tag))

    away = np.ones(len(grid), dtype=bool)
    for zero in zeros:
        away &= np.abs(grid - zero.alpha) > MARGIN_CELLS * grid_step
    margin = float(np.min(np.abs(values[away]))) if away.any() else None

    logger.info(f"alpha scan k={k}, j={j}: {len(zeros)} zero(s) on ({lo}, {hi}), {len(grid)} points")
    return AlphaScanReport(k=k, j=j, nu=nu, L=L, lam=lam, interval=(lo, hi), grid_step=grid_step,
                           grid_points=len(uniform), refined_points=len(grid), zeros=zeros, verdict_margin=margin)


def _phase_grid(k: int, lam: float, L: float, lo: float, hi: float) -> np.ndarray:
    """Diffusivities at which mu2~ L advances by at most PHASE_STEP across (lo, hi)."""
    top, bottom = math.sqrt(-k * k - lam / lo) * L, math.sqrt(-k * k - lam / hi) * L
    count = int(math.ceil((top - bottom) / PHASE_STEP))
    phase = np.linspace(bottom, top, count + 1)[1:-1]
    return -lam / (k * k + (phase / L) ** 2)


def _hidden_pairs(f, grid: np.ndarray, values: np.ndarray, xtol: float) -> list[tuple[float, float]]:
    """Brackets for two zeros sharing one grid neighbourhood, where F keeps its sign at the grid points."""
    brackets = []
    magnitude = np.abs(values)
    for i in range(1, len(grid) - 1):
        signs = np.sign(values[i - 1:i + 2])
        if not (signs[0] == signs[1] == signs[2] != 0):
            continue
        if not (magnitude[i] < magnitude[i - 1] and magnitude[i] <= magnitude[i + 1]):
            continue
        sign = signs[1]
        result = minimize_scalar(lambda a: sign * f(a), bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                 options={"xatol": xtol})
        if result.fun < 0:
            logger.debug(f"F changes sign twice inside [{grid[i - 1]:.12g}, {grid[i + 1]:.12g}]")
            brackets.extend([(grid[i - 1], float(result.x)), (float(result.x), grid[i + 1])])
    return brackets


def merge_zeros(reports: list[AlphaScanReport]) -> list[AlphaZero]:
    return sorted((z for r in reports for z in r.zeros), key=lambda z: (z.alpha, z.k, z.j))


def uc_verdict(point: SpectralPoint, p: ChannelParams, policy: TolerancePolicy,
               eigenfunction: AdjointEigenfunction | None = None, N: int = DEFAULT_GRID) -> Verdict:
    if point.branch is Branch.DIRICHLET:
        obs = point.j * math.pi / p.L
        return Verdict(branch=point.branch, k=point.k, j=point.j, lam=point.lam,
                       status=VerdictStatus.OBSERVABLE, obs_abs=obs)

    point = point.at_alpha(p)
    regime = "proof_regime" if p.proof_regime else "outside_proof_regime"
    notes = []
    factor = leading_factor(point.k, point.mu1_tilde, p.L)
    if abs(factor) <= policy.root_value_tol * max(1.0, abs(math.sinh(point.k * p.L)) * point.mu1_tilde):
        logger.warning(f"{point.label}: leading factor of F vanishes ({factor:.3g})")
        notes.append(f"leading factor {factor:.6g} vanishes")
    else:
        notes.append(f"leading factor {factor:.6g} nonzero")

    det_n = build_R(point.k, point.mu1, point.mu2, p.L, p.sep_tol).normalized_det()
    if point.mu2_tilde is not None:
        resonance = sin_resonance_check(point, p, policy)
        if resonance.flagged:
            notes.append("excluded: sin(mu2~ L) = 0")
            return Verdict(branch=point.branch, k=point.k, j=point.j, lam=point.lam,
                           status=VerdictStatus.INCONCLUSIVE, det_r_normalized=det_n, leading_factor=factor,
                           obs_abs=abs(eigenfunction.obs) if eigenfunction is not None else None,
                           regime=regime, resonance=resonance, notes=notes)
    else:
        resonance = None
        notes.append("mu2 real: general complex det R used")

    if eigenfunction is None:
        eigenfunction = solve_eigenfunction(point, p, policy, N)
    obs_abs = abs(eigenfunction.obs)

    if det_n > policy.det_threshold:
        if obs_abs <= policy.residual_rel_tol:
            raise InconsistentVerdictError(
                f"{point.label}: det R route says observable (|det R|={det_n:.3g}) but |xi'(L)|={obs_abs:.3g}")
        status = VerdictStatus.OBSERVABLE
    elif obs_abs < policy.residual_rel_tol and eigenfunction.null_ratio < policy.svd_null_ratio:
        status = VerdictStatus.NOT_OBSERVABLE
        notes.append("eigenfunction confirmed with vanishing observation")
    else:
        status = VerdictStatus.INCONCLUSIVE
        notes.append(f"normalized det R={det_n:.3g} below threshold")
    return Verdict(branch=point.branch, k=point.k, j=point.j, lam=point.lam, status=status,
                   det_r_normalized=det_n, obs_abs=obs_abs, leading_factor=factor, regime=regime,
                   resonance=resonance, notes=notes)


def two_control_verdict(point: SpectralPoint, p: ChannelParams, policy: TolerancePolicy,
                        eigenfunction: AdjointEigenfunction | None = None) -> TwoControlVerdict:
    """Observation (q(L), xi'(L)) from controls on u2 and theta at the top wall."""
    if point.branch is not Branch.STOKES:
        raise ValueError(f"{point.label}: two-control verdict applies to Stokes points")
    k, mu1, L = point.k, complex(point.mu1), p.L
    ratio = k / mu1
    f_prime_0 = complex(k - ratio * mu1)
    f_prime_L = complex(k * math.cosh(k * L) - ratio * mu1 * np.cosh(mu1 * L))
    normalized = abs(f_prime_L) / (abs(k) * math.cosh(k * L))
    status = VerdictStatus.OBSERVABLE if normalized > policy.det_threshold else VerdictStatus.INCONCLUSIVE
    q_at_L = abs(eigenfunction.obs_pressure) if eigenfunction is not None else None
    return TwoControlVerdict(k=k, j=point.j, status=status, f_prime_0=abs(f_prime_0), f_prime_L=f_prime_L.real,
                             normalized=normalized, q_at_L=q_at_L)


def det_r_large_alpha(point: SpectralPoint, p: ChannelParams, alphas) -> list[tuple[float, float]]:
    """Normalized |det R| along large diffusivities, where mu2 -> +-k and det R -> 0."""
    rows = []
    for alpha in alphas:
        shifted = point.at_alpha(p.with_alpha(alpha))
        rows.append((float(alpha), build_R(point.k, shifted.mu1, shifted.mu2, p.L, check=False).normalized_det()))
    return rows


def ibp_boundary_identity(eigenfunction: AdjointEigenfunction, coeffs, p: ChannelParams,
                          points: int = IDENTITY_POINTS) -> IdentityCheck:
    point = eigenfunction.point
    if point.branch is not Branch.STOKES:
        raise ValueError(f"{point.label}: multiplier identity applies to Stokes eigenfunctions")
    a, b, c = (float(v) for v in coeffs)
    k, L = point.k, p.L
    r = basis_exponents(k, point.mu1, point.mu2)
    f = ExponentialProfile(r, 0.5 * np.array([a, -a, b, -b, c, -c], dtype=complex), np.zeros(6))
    fd = [f.derivative(n) for n in range(6)]
    xd = [eigenfunction.profile.derivative(n) for n in range(6)]
    c4, c2, c0 = ode_coefficients(k, point.lam, p)
    mu2_sq = point.mu2**2

    def at(profile, x):
        return complex(profile(x)[0])

    obs = at(xd[1], L)
    reduced_terms = [-at(xd[5], L) * at(fd[0], L), at(xd[4], L) * at(fd[1], L), -at(xd[4], 0.0) * at(fd[1], 0.0)]
    obs_terms = [obs * c4 * mu2_sq * at(fd[0], L), obs * c4 * at(fd[2], L), -obs * c2 * at(fd[0], L),
                 -obs * mu2_sq * at(fd[2], L), -obs * at(fd[4], L)]
    full = sum(reduced_terms) + sum(obs_terms)
    full_scale = sum(abs(t) for t in reduced_terms + obs_terms)

    def concomitant_terms(x):
        return [-at(xd[5], x) * at(fd[0], x), at(xd[4], x) * at(fd[1], x), -at(xd[3], x) * at(fd[2], x),
                c4 * at(xd[3], x) * at(fd[0], x), -c4 * at(xd[2], x) * at(fd[1], x), -c2 * at(xd[1], x) * at(fd[0], x)]

    top, bottom = concomitant_terms(L), concomitant_terms(0.0)
    concomitant = sum(top) - sum(bottom)

    x = np.linspace(0.0, L, points)
    dx = L / (points - 1)
    pieces = [xd[3](x) * fd[3](x), c4 * xd[2](x) * fd[2](x), c2 * xd[1](x) * fd[1](x), c0 * xd[0](x) * fd[0](x)]
    quadrature = complex(romb(sum(pieces), dx=dx))
    quadrature_scale = float(romb(sum(np.abs(piece) for piece in pieces), dx=dx)) + sum(abs(t) for t in top + bottom)

    return IdentityCheck(
        coeffs=(a, b, c),
        reduced_boundary=sum(reduced_terms),
        observation_terms=sum(obs_terms),
        identity_defect=abs(full) / full_scale if full_scale > 0 else abs(full),
        concomitant=concomitant,
        quadrature=quadrature,
        quadrature_defect=abs(concomitant + quadrature) / quadrature_scale if quadrature_scale > 0 else 0.0,
        f_even_derivatives_at_0=(abs(at(fd[0], 0.0)), abs(at(fd[2], 0.0)), abs(at(fd[4], 0.0))),
    )
