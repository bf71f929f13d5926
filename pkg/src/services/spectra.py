"""Both branches of the adjoint spectrum for one Fourier mode.

The Dirichlet branch is closed form. The Stokes branch comes from bracketing the
positive roots of the dispersion relation D(mu~) and mapping them to
lambda = -nu (k^2 + mu~^2). A finite-difference discretization of the clamped
fourth-order problem provides an independent oracle and is reused as the Stokes
block of the Galerkin model.
"""
import logging
import math

import numpy as np
from scipy import sparse
from scipy.linalg import LinAlgError, eigh
from scipy.optimize import minimize_scalar

from core.errors import ConfigError, EigenSolverError, GridExhaustedError
from core.numerics import refine_root, sign_change_brackets
from core.params import ChannelParams, TolerancePolicy, require_mode
from models.spectral import Coincidence, DispersionSample, MergedSpectrum, RootSearch, SpectralPoint

logger = logging.getLogger(__name__)

ORACLE_MIN_N = 200


def dispersion_kernel(k: int, mu: complex, L: float) -> complex:
    """G(mu) = (mu^2 + k^2) sinh(kL) sinh(mu L) + 2 k mu (1 - cosh(kL) cosh(mu L)).

    Valid for real and complex mu; G(i mu~) = i D(mu~).
    """
    mu = complex(mu)
    return ((mu * mu + k * k) * math.sinh(k * L) * np.sinh(mu * L)
            + 2 * k * mu * (1 - math.cosh(k * L) * np.cosh(mu * L)))


def dispersion_value(k: int, mu_tilde, L: float, scaled: bool = False):
    """Left-hand side of the dispersion relation.

    With scaled=True the value is divided by cosh(kL); the sign is unchanged and
    the result stays finite for large |k| L.
    """
    mu_tilde = np.asarray(mu_tilde, dtype=float)
    s, c = np.sin(mu_tilde * L), np.cos(mu_tilde * L)
    kl = k * L
    if scaled:
        decay = math.exp(-2 * abs(kl))
        tanh_kl = math.tanh(kl)
        sech_kl = 2 * math.exp(-abs(kl)) / (1 + decay)
        return -tanh_kl * s * mu_tilde**2 + 2 * k * (sech_kl - c) * mu_tilde + k * k * tanh_kl * s
    sinh_kl, cosh_kl = math.sinh(kl), math.cosh(kl)
    return -sinh_kl * s * mu_tilde**2 + 2 * k * (1 - cosh_kl * c) * mu_tilde + k * k * sinh_kl * s


def sample_dispersion(k: int, L: float, mu_grid) -> list[DispersionSample]:
    values = dispersion_value(k, mu_grid, L, scaled=True)
    return [DispersionSample(k=k, mu_tilde=float(m), value=float(v)) for m, v in zip(mu_grid, values)]


def default_ceiling(k: int, L: float, count: int) -> float:
    return (count + 4) * math.pi / L + abs(k)


def _suspected_double_roots(k, L, grid, values, upper, policy) -> list[float]:
    suspects = []
    magnitude = np.abs(values)
    for i in range(1, len(grid) - 1):
        if grid[i] > upper:
            break
        signs = np.sign(values[i - 1:i + 2])
        if not (signs[0] == signs[1] == signs[2] != 0):
            continue
        if not (magnitude[i] < magnitude[i - 1] and magnitude[i] <= magnitude[i + 1]):
            continue
        result = minimize_scalar(lambda m: abs(dispersion_value(k, m, L, scaled=True)),
                                 bounds=(grid[i - 1], grid[i + 1]), method="bounded",
                                 options={"xatol": policy.root_abs_tol})
        if result.fun <= policy.residual_rel_tol * max(magnitude[i - 1], magnitude[i + 1]):
            logger.warning(f"Suspected even-order dispersion root near mu~={result.x:.12g} (k={k}, |D|={result.fun:.3g})")
            suspects.append(float(result.x))
    return suspects


def find_dispersion_roots(k: int, L: float, count: int, policy: TolerancePolicy,
                          ceiling: float | None = None) -> RootSearch:
    """First `count` positive roots of D, independent of nu and alpha."""
    require_mode(k)
    if count < 1:
        raise ConfigError("count must be at least 1")
    ceiling = default_ceiling(k, L, count) if ceiling is None else ceiling
    step = policy.bracket_grid_step
    grid = step * np.arange(1, int(math.ceil(ceiling / step)) + 1)
    values = dispersion_value(k, grid, L, scaled=True)

    brackets = sign_change_brackets(grid, values)
    if len(brackets) < count:
        raise GridExhaustedError(
            f"found {len(brackets)} of {count} dispersion roots for k={k} below the search ceiling mu~={ceiling:.6g}")

    def scaled(m):
        return float(dispersion_value(k, m, L, scaled=True))

    roots = [refine_root(scaled, lo, hi, policy.root_abs_tol) for lo, hi in brackets[:count]]
    for root in roots:
        residual = abs(scaled(root))
        if residual > policy.root_value_tol:
            logger.warning(f"Dispersion root {root:.15g} (k={k}) has terminal |D|={residual:.3g}")

    suspects = _suspected_double_roots(k, L, grid, values, roots[-1], policy)
    expected = math.floor(roots[-1] * L / math.pi) - 2
    count_ok = len(roots) >= expected
    if not count_ok:
        logger.warning(f"Root count check failed for k={k}: {len(roots)} roots below {roots[-1]:.6g}, expected >= {expected}")

    logger.debug(f"Dispersion roots for k={k}, L={L}: {roots}")
    return RootSearch(k=k, L=L, roots=roots, ceiling=ceiling, grid_step=step,
                      suspected_double_roots=suspects, count_check_passed=count_ok)


def dirichlet_eigenvalues(k: int, p: ChannelParams, j_max: int) -> list[SpectralPoint]:
    require_mode(k)
    if j_max < 1:
        raise ConfigError("j_max must be at least 1")
    return [SpectralPoint.dirichlet(k, j, p) for j in range(1, j_max + 1)]


def stokes_eigenvalues(k: int, p: ChannelParams, count: int, policy: TolerancePolicy,
                       search: RootSearch | None = None) -> list[SpectralPoint]:
    if search is None:
        search = find_dispersion_roots(k, p.L, count, policy)
    points = [SpectralPoint.stokes(k, j, mu, p) for j, mu in enumerate(search.roots[:count], start=1)]
    bound = -p.nu * k * k - policy.root_abs_tol
    for point in points:
        if not point.lam < bound:
            raise GridExhaustedError(f"{point.label}: lambda={point.lam!r} too close to -nu*k^2")
    return points


def stokes_pencil(k: int, nu: float, L: float, N: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Clamped second-order finite differences: A = nu (D4 - 2k^2 D2 + k^4 I), B = k^2 I - D2.

    The eigenvalues sigma of A v = sigma B v give lambda = -sigma.
    """
    h = L / (N + 1)
    d2 = sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(N, N)).toarray() / h**2
    d4 = sparse.diags([1.0, -4.0, 6.0, -4.0, 1.0], [-2, -1, 0, 1, 2], shape=(N, N)).toarray()
    # ghost node u_{-1} = u_{1} from u'(0) = 0
    d4[0, 0] = d4[-1, -1] = 7.0
    d4 /= h**4
    identity = np.eye(N)
    a = nu * (d4 - 2 * k * k * d2 + k**4 * identity)
    b = k * k * identity - d2
    return a, b, h


def fd_stokes_oracle(k: int, p: ChannelParams, N: int, count: int) -> list[float]:
    """Largest `count` eigenvalues of the clamped finite-difference Stokes pencil."""
    require_mode(k)
    if N < ORACLE_MIN_N:
        raise ConfigError(f"oracle grid N={N} below the minimum {ORACLE_MIN_N}")
    a, b, _ = stokes_pencil(k, p.nu, p.L, N)
    try:
        sigma = eigh(a, b, eigvals_only=True, subset_by_index=[0, count - 1])
    except LinAlgError as e:
        raise EigenSolverError(f"finite-difference oracle failed for k={k}, N={N}: {e}") from e
    return [float(-s) for s in sigma]


def merge_spectrum(k: int, p: ChannelParams, count_s: int, count_l: int,
                   policy: TolerancePolicy, search: RootSearch | None = None) -> MergedSpectrum:
    if search is None:
        search = find_dispersion_roots(k, p.L, count_s, policy)
    stokes = stokes_eigenvalues(k, p, count_s, policy, search=search)
    dirichlet = dirichlet_eigenvalues(k, p, count_l)

    coincidences = []
    kept = []
    for point in dirichlet:
        twin = next((s for s in stokes if math.isclose(s.lam, point.lam, rel_tol=policy.residual_rel_tol)), None)
        if twin is None:
            kept.append(point)
            continue
        logger.warning(f"Resonance: {twin.label} and {point.label} share lambda={point.lam:.12g}")
        coincidences.append(Coincidence(k=k, stokes_j=twin.j, dirichlet_j=point.j, lam=point.lam))

    order = {"stokes": 0, "dirichlet": 1}
    points = sorted(stokes + kept, key=lambda s: (-s.lam, order[s.branch.value], s.j))
    return MergedSpectrum(k=k, points=points, coincidences=coincidences, search=search)
