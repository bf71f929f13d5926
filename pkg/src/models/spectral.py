import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.numerics import principal_root
from core.params import ChannelParams


class Branch(Enum):
    STOKES = "stokes"
    DIRICHLET = "dirichlet"


class SpectralPoint(BaseModel):
    """One eigenvalue of the adjoint operator restricted to Fourier mode k."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    branch: Branch
    k: int
    j: int = Field(ge=1)
    lam: float
    mu1: complex
    mu2: complex
    mu1_tilde: Optional[float] = None
    mu2_tilde: Optional[float] = None

    @field_validator("k")
    @classmethod
    def _nonzero(cls, value: int) -> int:
        if value == 0:
            raise ValueError("0-mode excluded")
        return value

    @classmethod
    def stokes(cls, k: int, j: int, mu_tilde: float, params: ChannelParams) -> "SpectralPoint":
        lam = -params.nu * (k * k + mu_tilde * mu_tilde)
        if not lam < -params.nu * k * k:
            raise ValueError(f"Stokes eigenvalue {lam!r} is not below -nu*k^2")
        mu2, mu2_tilde = principal_root(k * k + lam / params.alpha)
        return cls(branch=Branch.STOKES, k=k, j=j, lam=lam, mu1=complex(0.0, mu_tilde), mu2=mu2,
                   mu1_tilde=mu_tilde, mu2_tilde=mu2_tilde)

    @classmethod
    def dirichlet(cls, k: int, j: int, params: ChannelParams) -> "SpectralPoint":
        beta = j * math.pi / params.L
        lam = -params.alpha * (k * k + beta * beta)
        mu1, mu1_tilde = principal_root(k * k + lam / params.nu)
        return cls(branch=Branch.DIRICHLET, k=k, j=j, lam=lam, mu1=mu1, mu2=complex(0.0, beta),
                   mu1_tilde=mu1_tilde, mu2_tilde=beta)

    def at_alpha(self, params: ChannelParams) -> "SpectralPoint":
        """Stokes point with mu2 recomputed for the diffusivity of `params` (lambda does not depend on alpha)."""
        mu2, mu2_tilde = principal_root(self.k * self.k + self.lam / params.alpha)
        return self.model_copy(update={"mu2": mu2, "mu2_tilde": mu2_tilde})

    @property
    def label(self) -> str:
        return f"{self.branch.value}(k={self.k}, j={self.j})"


class DispersionSample(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    k: int
    mu_tilde: float = Field(ge=0)
    value: float


class RootSearch(BaseModel):
    """Outcome of the bracketed search for positive roots of the dispersion relation."""

    model_config = ConfigDict(frozen=True)

    k: int
    L: float
    roots: list[float]
    ceiling: float
    grid_step: float
    suspected_double_roots: list[float] = Field(default_factory=list)
    count_check_passed: bool = True


class Coincidence(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    stokes_j: int
    dirichlet_j: int
    lam: float


class MergedSpectrum(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int
    points: list[SpectralPoint]
    coincidences: list[Coincidence] = Field(default_factory=list)
    search: Optional[RootSearch] = None
