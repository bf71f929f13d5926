"""Boundary-controlled linearized Boussinesq model for one Fourier mode.

The Stokes block is evolved in stream/vorticity form, (k^2 - D2) u2' = -A u2 + k^2 theta,
with A the clamped finite-difference operator shared with the spectral oracle. The heat
block carries the boundary control through the lifting theta = theta0 + w h: with h
piecewise constant, theta' = H theta - H w h inside each segment.
"""
import logging
import math
from dataclasses import replace

import numpy as np
from scipy import sparse
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal, solve, svd

from core.errors import ConfigError, EigenSolverError
from core.params import ChannelParams, require_mode
from models.galerkin import ControlExperiment, ControlSignal, ModeSystem, Trajectory, ZeroModeReport
from services.spectra import stokes_pencil

logger = logging.getLogger(__name__)

MIN_GRID = 64
DEFAULT_STEPS = 512


def lifting_profile(k: int, p: ChannelParams, N: int) -> np.ndarray:
    """w = sinh(|k| x)/sinh(|k| L) on the N + 2 grid points of [0, L], boundaries included."""
    x = np.linspace(0.0, p.L, N + 2)
    if k == 0:
        return x / p.L
    a = abs(k)
    return np.exp(a * (x - p.L)) * np.expm1(-2 * a * x) / math.expm1(-2 * a * p.L)


def lifting_residual(k: int, p: ChannelParams, N: int) -> float:
    """Max of the discrete residual alpha (w'' - k^2 w) relative to alpha k^2 max|w|."""
    w = lifting_profile(k, p, N)
    hx = p.L / (N + 1)
    second = (w[:-2] - 2 * w[1:-1] + w[2:]) / hx**2
    residual = p.alpha * (second - k * k * w[1:-1])
    return float(np.max(np.abs(residual)) / (p.alpha * k * k * np.max(np.abs(w))))


def _second_difference(N: int, hx: float) -> np.ndarray:
    return sparse.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(N, N)).toarray() / hx**2


def _top_flux(N: int, hx: float, w: np.ndarray) -> tuple[np.ndarray, float]:
    """One-sided second-order derivative at x2 = L on theta0 + w h, with theta0 = 0 and w = 1 on the wall."""
    row = np.zeros(N)
    row[N - 1], row[N - 2] = -2.0 / hx, 0.5 / hx
    return row, float((3.0 - 4.0 * w[N - 1] + w[N - 2]) / (2 * hx))


def _resolve_dt(T: float, dt: float | None) -> float:
    if T <= 0:
        raise ConfigError(f"horizon T={T} must be positive")
    dt = T / DEFAULT_STEPS if dt is None else dt
    if dt <= 0:
        raise ConfigError(f"time step dt={dt} must be positive")
    steps = round(T / dt)
    if steps < 1 or not math.isclose(steps * dt, T, rel_tol=1e-9):
        raise ConfigError(f"T={T} is not an integer multiple of dt={dt}")
    return dt


def assemble_mode_system(k: int, p: ChannelParams, N: int, dt: float | None = None, T: float = 1.0) -> ModeSystem:
    require_mode(k)
    if N < MIN_GRID:
        raise ConfigError(f"grid N={N} below the minimum {MIN_GRID}")
    dt = _resolve_dt(T, dt)
    a, b, hx = stokes_pencil(k, p.nu, p.L, N)
    heat = p.alpha * (_second_difference(N, hx) - k * k * np.eye(N))
    w = lifting_profile(k, p, N)[1:-1]

    try:
        velocity = solve(b, np.hstack([-a, k * k * np.eye(N)]), assume_a="pos")
    except LinAlgError as e:
        raise EigenSolverError(f"Stokes mass matrix not positive definite for k={k}, N={N}: {e}") from e
    generator = np.block([[velocity], [np.zeros((N, N)), heat]])
    drive = np.concatenate([np.zeros(N), -heat @ w])
    flux_row, flux_lift = _top_flux(N, hx, w)
    logger.debug(f"Assembled mode system k={k}, N={N}, dt={dt:g}, T={T:g}")
    return ModeSystem(k=k, params=p, N=N, dt=dt, T=T, generator=generator, input_vector=drive, velocity_size=N,
                      hx=hx, lifting=w, stokes_a=a, stokes_b=b, heat=heat, flux_row=flux_row, flux_lift=flux_lift)


def assemble_zero_mode(p: ChannelParams, N: int, dt: float | None = None, T: float = 1.0) -> ModeSystem:
    """k = 0: u1 under nu D2 with no-slip walls and theta under alpha D2, uncoupled."""
    if N < MIN_GRID:
        raise ConfigError(f"grid N={N} below the minimum {MIN_GRID}")
    dt = _resolve_dt(T, dt)
    hx = p.L / (N + 1)
    d2 = _second_difference(N, hx)
    zero = np.zeros((N, N))
    generator = np.block([[p.nu * d2, zero], [zero, p.alpha * d2]])
    w = lifting_profile(0, p, N)[1:-1]
    drive = np.concatenate([np.zeros(N), -p.alpha * d2 @ w])
    flux_row, flux_lift = _top_flux(N, hx, w)
    return ModeSystem(k=0, params=p, N=N, dt=dt, T=T, generator=generator, input_vector=drive, velocity_size=N,
                      hx=hx, lifting=w, heat=p.alpha * d2, flux_row=flux_row, flux_lift=flux_lift)


def stokes_block_eigenvalues(system: ModeSystem, count: int) -> list[float]:
    """Largest `count` eigenvalues lambda = -sigma of the assembled Stokes pencil."""
    if system.modal:
        return sorted((float(-s) for s in system.stokes_rates[:count]), reverse=True)
    sigma = eigh(system.stokes_a, system.stokes_b, eigvals_only=True, subset_by_index=[0, count - 1])
    return [float(-s) for s in sigma]


def truncate(system: ModeSystem, n_u: int, n_theta: int) -> ModeSystem:
    """Galerkin projection on the slowest n_u Stokes-pencil and n_theta heat eigenvectors."""
    if system.modal or system.stokes_a is None:
        raise ConfigError(f"mode k={system.k} has no full-grid Stokes pencil to truncate")
    if not (1 <= n_u <= system.N and 1 <= n_theta <= system.N):
        raise ConfigError(f"truncation ({n_u}, {n_theta}) outside 1..{system.N}")
    k, N = system.k, system.N
    try:
        sigma, V = eigh(system.stokes_a, system.stokes_b, subset_by_index=[0, n_u - 1])
        diagonal, off = np.diag(system.heat), np.diag(system.heat, 1)
        eta, Q = eigh_tridiagonal(diagonal, off, select="i", select_range=(N - n_theta, N - 1))
    except LinAlgError as e:
        raise EigenSolverError(f"modal truncation failed for k={k}: {e}") from e
    order = np.argsort(-eta)
    eta, Q = eta[order], Q[:, order]

    coupling = k * k * (V.T @ Q)
    generator = np.block([[np.diag(-sigma), coupling], [np.zeros((n_theta, n_u)), np.diag(eta)]])
    drive = np.concatenate([np.zeros(n_u), -eta * (Q.T @ system.lifting)])
    logger.info(f"Truncated k={k} to {n_u}+{n_theta} modes, slowest rates {-sigma[0]:.6g} / {eta[0]:.6g}")
    return replace(system, generator=generator, input_vector=drive, velocity_size=n_u,
                   stokes_a=None, stokes_b=None, heat=None, stokes_rates=sigma, heat_rates=eta,
                   flux_row=system.flux_row @ Q)


def silence_input_mode(system: ModeSystem, index: int) -> ModeSystem:
    """Copy of a truncated system in which heat mode `index` receives no boundary input."""
    if not system.modal:
        raise ConfigError("input silencing needs a truncated system")
    drive = system.input_vector.copy()
    drive[system.velocity_size + index] = 0.0
    return replace(system, input_vector=drive)


def recover_u1(system: ModeSystem, u2: np.ndarray) -> np.ndarray:
    """u1 = i u2' / k by central differences, walls at u2 = 0."""
    padded = np.concatenate([[0.0], u2, [0.0]])
    return 1j * (padded[2:] - padded[:-2]) / (2 * system.hx * system.k)


def _steps_per_segment(system: ModeSystem, segments: int) -> int:
    if segments < 1 or system.steps % segments:
        raise ConfigError(f"{system.steps} time steps cannot be split into {segments} equal segments")
    return system.steps // segments


def simulate(system: ModeSystem, x0, control: ControlSignal | None = None) -> Trajectory:
    state = np.asarray(x0, dtype=complex)
    if state.shape != (system.size,):
        raise ConfigError(f"initial state has shape {state.shape}, expected ({system.size},)")
    if control is None:
        control = ControlSignal.zero(system.k, 1, system.T)
    per_segment = _steps_per_segment(system, control.segments)

    steps = system.steps
    states = np.empty((steps + 1, system.size), dtype=complex)
    controls = np.empty(steps + 1, dtype=complex)
    states[0] = state
    for n in range(steps):
        h = control.values[n // per_segment]
        controls[n] = h
        state = system.step(state, h)
        states[n + 1] = state
    controls[steps] = controls[steps - 1]
    return Trajectory(times=system.dt * np.arange(steps + 1), states=states, controls=controls)


def input_state_map(system: ModeSystem, segments: int) -> tuple[np.ndarray, np.ndarray]:
    """Terminal states from unit control on each segment, and their singular values."""
    per_segment = _steps_per_segment(system, segments)
    column = np.zeros(system.size, dtype=complex)
    for _ in range(per_segment):
        column = system.step(column, 1.0)

    columns = [column]
    for _ in range(segments - 1):
        for _ in range(per_segment):
            column = system.step(column)
        columns.append(column)
    phi = np.column_stack(columns[::-1])
    return phi, svd(phi, compute_uv=False)


def _ridge_solve(phi: np.ndarray, rhs: np.ndarray, ridge: float) -> tuple[np.ndarray, np.ndarray]:
    u, s, vh = svd(phi, full_matrices=False)
    projected = u.conj().T @ rhs
    if ridge > 0:
        gain = s / (s * s + ridge)
    else:
        cutoff = s[0] * max(phi.shape) * np.finfo(float).eps if s.size else 0.0
        gain = np.divide(1.0, s, out=np.zeros_like(s), where=s > cutoff)
    return vh.conj().T @ (gain * projected), s


def synthesize_control(system: ModeSystem, x0, x_target, segments: int, ridge: float = 0.0) -> ControlExperiment:
    """Least-squares control steering x0 to x_target at time T, min |Phi h - r|^2 + ridge |h|^2."""
    if ridge < 0:
        raise ConfigError(f"ridge={ridge} must be non-negative")
    x0 = np.asarray(x0, dtype=complex)
    x_target = np.asarray(x_target, dtype=complex)
    phi, _ = input_state_map(system, segments)
    free = simulate(system, x0).terminal
    values, sv = _ridge_solve(phi, x_target - free, ridge)

    control = ControlSignal(k=system.k, segments=segments, T=system.T, values=values)
    terminal = simulate(system, x0, control).terminal
    target_norm = np.linalg.norm(x_target)
    miss = np.linalg.norm(terminal - x_target)
    eps = float(miss / target_norm) if target_norm > 0 else float(miss)
    logger.info(f"k={system.k}, M={segments}: achieved_eps={eps:.3e}, |h|={control.norm:.3e}, sigma_min={sv[-1]:.3e}")
    return ControlExperiment(system=system, x0=x0, x_target=x_target, terminal=terminal, control=control,
                             gramian_sv=sv, achieved_eps=eps, control_norm=control.norm, ridge=ridge)


def random_unit_state(system: ModeSystem, rng: np.random.Generator) -> np.ndarray:
    state = rng.standard_normal(system.size) + 1j * rng.standard_normal(system.size)
    return state / np.linalg.norm(state)


def zero_mode_obstruction(p: ChannelParams, N: int, segments: int, rng: np.random.Generator,
                          dt: float | None = None, T: float = 1.0) -> ZeroModeReport:
    system = assemble_zero_mode(p, N, dt, T)
    x0 = random_unit_state(system, rng)
    control = ControlSignal(k=0, segments=segments, T=T,
                            values=rng.standard_normal(segments) + 1j * rng.standard_normal(segments))
    free = simulate(system, x0)
    driven = simulate(system, x0, control)
    identical = bool(np.array_equal(system.velocity(free.states), system.velocity(driven.states)))

    phi, _ = input_state_map(system, segments)
    u1_input_norm = float(np.linalg.norm(phi[:N]))
    d2 = system.heat / p.alpha
    rate = eigh_tridiagonal(np.diag(d2), np.diag(d2, 1), eigvals_only=True, select="i",
                            select_range=(N - 1, N - 1))[0]
    report = ZeroModeReport(N=N, steps=system.steps, u1_identical=identical, u1_input_norm=u1_input_norm,
                            discrete_rate=float(p.nu * rate), exact_rate=-p.nu * math.pi**2 / p.L**2)
    if not identical:
        logger.warning("0-mode velocity trajectory changed under control")
    return report
