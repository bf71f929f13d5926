from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.errors import ConfigError


class ChannelParams(BaseModel):
    """Physical parameters of the channel (0, L) x T, T the torus of length 2*pi."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    nu: float = Field(gt=0, description="viscosity")
    alpha: float = Field(gt=0, description="thermal diffusivity")
    L: float = Field(gt=0, description="channel height")
    sep_tol: float = Field(default=1e-8, gt=0)

    @model_validator(mode="after")
    def _alpha_differs_from_nu(self):
        if abs(self.alpha - self.nu) <= self.sep_tol:
            raise ValueError(f"alpha equals nu within sep_tol={self.sep_tol:g}")
        return self

    def with_alpha(self, alpha: float) -> "ChannelParams":
        return ChannelParams(nu=self.nu, alpha=alpha, L=self.L, sep_tol=self.sep_tol)

    @property
    def proof_regime(self) -> bool:
        """True when alpha < nu, where both characteristic roots are imaginary on the Stokes branch."""
        return self.alpha < self.nu


class ModeIndex(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    k: int

    @field_validator("k")
    @classmethod
    def _nonzero(cls, value: int) -> int:
        if value == 0:
            raise ValueError("0-mode excluded")
        return value


def require_mode(k: int) -> int:
    if k == 0:
        raise ConfigError("0-mode excluded: the mean flow is not reachable from the boundary control")
    return ModeIndex(k=k).k


class TolerancePolicy(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    root_abs_tol: float = Field(default=1e-12, gt=0)
    root_value_tol: float = Field(default=1e-8, gt=0)
    residual_rel_tol: float = Field(default=1e-7, gt=0)
    svd_null_ratio: float = Field(default=1e-8, gt=0, lt=1)
    bracket_grid_step: float = Field(default=1e-2, gt=0)
    det_threshold: float = Field(default=1e-8, gt=0)
