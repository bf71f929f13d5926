from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, computed_field
from scipy.linalg import lu_factor, lu_solve

from core.params import ChannelParams


@dataclass(frozen=True)
class ModeSystem:
    """Semidiscrete evolution z' = K z + b h(t) for one Fourier mode.

    The state is the velocity block (u2 on the grid, or Stokes-mode coordinates) followed by
    the temperature block (theta on the grid, or heat-mode coordinates). Crank-Nicolson
    factors are built on first use.
    """

    k: int
    params: ChannelParams
    N: int
    dt: float
    T: float
    generator: np.ndarray
    input_vector: np.ndarray
    velocity_size: int
    hx: float
    lifting: np.ndarray
    stokes_a: Optional[np.ndarray] = None
    stokes_b: Optional[np.ndarray] = None
    heat: Optional[np.ndarray] = None
    stokes_rates: Optional[np.ndarray] = None
    heat_rates: Optional[np.ndarray] = None
    flux_row: Optional[np.ndarray] = None
    flux_lift: float = 0.0

    @property
    def size(self) -> int:
        return self.generator.shape[0]

    @property
    def modal(self) -> bool:
        return self.stokes_rates is not None

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @cached_property
    def _implicit(self):
        return lu_factor(np.eye(self.size) - 0.5 * self.dt * self.generator)

    @cached_property
    def _explicit(self) -> np.ndarray:
        return np.eye(self.size) + 0.5 * self.dt * self.generator

    @cached_property
    def _drive(self) -> np.ndarray:
        return lu_solve(self._implicit, self.dt * self.input_vector)

    def step(self, state: np.ndarray, h: complex = 0.0) -> np.ndarray:
        return lu_solve(self._implicit, self._explicit @ state) + self._drive * h

    def velocity(self, state: np.ndarray) -> np.ndarray:
        return state[..., :self.velocity_size]

    def temperature(self, state: np.ndarray) -> np.ndarray:
        return state[..., self.velocity_size:]

    def stokes_energy(self, state: np.ndarray) -> float:
        """Discrete integral of |u2'|^2 + k^2 |u2|^2."""
        u = self.velocity(state)
        if self.stokes_b is None:
            return float(self.hx * np.vdot(u, u).real)
        return float(self.hx * np.vdot(u, self.stokes_b @ u).real)

    def heat_norm(self, state: np.ndarray) -> float:
        return float(np.sqrt(self.hx) * np.linalg.norm(self.temperature(state)))

    def heat_flux(self, state: np.ndarray, h: complex) -> complex:
        """d theta / dx2 at the controlled wall, lifting included."""
        return complex(self.flux_row @ self.temperature(state) + self.flux_lift * h)


class ControlSignal(BaseModel):
    """Piecewise-constant boundary temperature h_k(t) on `segments` equal segments of [0, T]."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    segments: int = Field(ge=1)
    T: float = Field(gt=0)
    values: np.ndarray

    @classmethod
    def zero(cls, k: int, segments: int, T: float) -> "ControlSignal":
        return cls(k=k, segments=segments, T=T, values=np.zeros(segments, dtype=complex))

    @computed_field
    @property
    def norm(self) -> float:
        return float(np.sqrt(self.T / self.segments) * np.linalg.norm(self.values))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]


class ControlExperiment(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    system: InstanceOf[ModeSystem] = Field(exclude=True)
    x0: np.ndarray
    x_target: np.ndarray
    terminal: np.ndarray
    control: ControlSignal
    gramian_sv: np.ndarray
    achieved_eps: float = Field(ge=0)
    control_norm: float
    ridge: float = 0.0

    @property
    def sigma_min(self) -> float:
        return float(self.gramian_sv[-1])


class ZeroModeReport(BaseModel):
    """Averaged (k = 0) mode: the mean horizontal velocity ignores the boundary control."""

    model_config = ConfigDict(frozen=True)

    N: int
    steps: int
    u1_identical: bool
    u1_input_norm: float
    discrete_rate: float
    exact_rate: float
