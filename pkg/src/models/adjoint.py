from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, InstanceOf

from core.numerics import ExponentialProfile
from core.params import ChannelParams
from models.spectral import SpectralPoint


class BoundaryMatrix(BaseModel):
    """Six boundary functionals applied to (e^{kx}, e^{-kx}, e^{mu1 x}, e^{-mu1 x}, e^{mu2 x}, e^{-mu2 x}).

    Column c is stored multiplied by exp(-max(Re r_c, 0) L); `scale` holds the inverse
    factors so that the true determinant is det(entries) * prod(scale).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    mu1: complex
    mu2: complex
    L: float
    exponents: np.ndarray
    entries: np.ndarray
    log_scale: np.ndarray

    @property
    def scale(self) -> np.ndarray:
        return np.exp(self.log_scale)

    def det(self) -> complex:
        return complex(np.linalg.det(self.entries))

    def unscaled_det(self) -> complex:
        return self.det() * np.exp(self.log_scale.sum())

    def hadamard_bound(self) -> float:
        return float(np.prod(np.linalg.norm(self.entries, axis=1)))


class AdjointEigenfunction(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    point: SpectralPoint
    params: ChannelParams
    coeffs: np.ndarray
    x2: np.ndarray
    xi: np.ndarray
    dxi: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    q: np.ndarray
    obs: complex
    obs_pressure: complex
    null_ratio: float
    null_dim: int = 1
    residuals: dict[str, float] = Field(default_factory=dict)
    tolerance: float
    profile: InstanceOf[ExponentialProfile] = Field(exclude=True)

    @property
    def accepted(self) -> bool:
        return all(value <= self.tolerance for value in self.residuals.values())

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


class ResonanceDiagnostic(BaseModel):
    model_config = ConfigDict(frozen=True)

    flagged: bool
    sin_value: Optional[float] = None
    tag: Optional[str] = None
    psi2_peak: Optional[float] = None


class DeterminantSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    mu1: complex
    mu2: complex
    L: float
    direct: complex
    factored: complex
    rel_err: float


class DeterminantReport(BaseModel):
    """Direct det M against the closed form over seeded random parameters."""

    model_config = ConfigDict(frozen=True)

    samples: int
    seed: int
    max_rel_err: float
    threshold: float
    floor_rel: float
    worst: DeterminantSample
    degenerate: Optional[DeterminantSample] = None

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.threshold
