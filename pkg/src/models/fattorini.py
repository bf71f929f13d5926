from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.numerics import scaled_cosh, scaled_sinh
from models.adjoint import ResonanceDiagnostic
from models.spectral import Branch


class VerdictStatus(Enum):
    OBSERVABLE = "observable"
    NOT_OBSERVABLE = "not_observable"
    INCONCLUSIVE = "inconclusive"


class MultiplierMatrix(BaseModel):
    """Rows f'(0), f(L), f'(L); columns sinh(kx), sinh(mu1 x), sinh(mu2 x)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    mu1: complex
    mu2: complex
    L: float
    entries: np.ndarray

    def apply(self, coeffs) -> np.ndarray:
        return self.entries @ np.asarray(coeffs, dtype=complex)

    def det(self) -> complex:
        return complex(np.linalg.det(self.entries))

    def scaled_entries(self) -> np.ndarray:
        """Entries with column r scaled by exp(-|Re r| L), finite for any |k| L."""
        r = np.array([self.k, self.mu1, self.mu2], dtype=complex)
        rl = r * self.L
        return np.vstack([r * np.exp(-np.abs(rl.real)), scaled_sinh(rl), r * scaled_cosh(rl)])

    def normalized_det(self) -> float:
        """|det| of the column-scaled R divided by the product of its row 2-norms, in [0, 1]."""
        entries = self.scaled_entries()
        norms = np.linalg.norm(entries, axis=1)
        if np.any(norms == 0):
            return 0.0
        return float(abs(np.linalg.det(entries / norms[:, None])))


class AlphaZero(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    j: int
    alpha: float
    residual: float
    bracket: tuple[float, float]
    confirmed: bool = True
    sin_value: Optional[float] = None
    tag: Optional[str] = None


class AlphaScanReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    j: int
    nu: float
    L: float
    lam: float
    interval: tuple[float, float]
    grid_step: float
    grid_points: int
    refined_points: Optional[int] = None
    zeros: list[AlphaZero] = Field(default_factory=list)
    verdict_margin: Optional[float] = None


class Verdict(BaseModel):
    model_config = ConfigDict(frozen=True, use_enum_values=True)

    branch: Branch
    k: int
    j: int
    lam: float
    status: VerdictStatus
    det_r_normalized: Optional[float] = None
    obs_abs: Optional[float] = None
    leading_factor: Optional[float] = None
    regime: str = "proof_regime"
    resonance: Optional[ResonanceDiagnostic] = None
    notes: list[str] = Field(default_factory=list)


class TwoControlVerdict(BaseModel):
    model_config = ConfigDict(frozen=True, use_enum_values=True)

    k: int
    j: int
    status: VerdictStatus
    f_prime_0: float
    f_prime_L: float
    normalized: float
    q_at_L: Optional[float] = None


class IdentityCheck(BaseModel):
    """Boundary form of the multiplier identity against quadrature of the bilinear form."""

    model_config = ConfigDict(frozen=True)

    coeffs: tuple[float, float, float]
    reduced_boundary: complex
    observation_terms: complex
    identity_defect: float
    concomitant: complex
    quadrature: complex
    quadrature_defect: float
    f_even_derivatives_at_0: tuple[float, float, float]

    @property
    def defect(self) -> float:
        return max(self.identity_defect, self.quadrature_defect)
