from datetime import datetime
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = 1


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


def _nonzero_modes(values: list[int]) -> list[int]:
    if any(k == 0 for k in values):
        raise ValueError("0-mode excluded")
    return values


class SpectraOptions(_Section):
    k_list: list[int] = Field(default_factory=lambda: [1], min_length=1)
    count_stokes: int = Field(default=5, ge=1)
    count_dirichlet: int = Field(default=5, ge=1)
    oracle_N: int = Field(default=0, ge=0)
    mu_ceiling: Optional[float] = Field(default=None, gt=0)

    @field_validator("k_list")
    @classmethod
    def _modes(cls, value: list[int]) -> list[int]:
        return _nonzero_modes(value)

    @field_validator("oracle_N")
    @classmethod
    def _oracle_size(cls, value: int) -> int:
        if 0 < value < 200:
            raise ValueError("oracle grid must be 0 (off) or at least 200")
        return value


class ScanOptions(_Section):
    alpha_lo: Optional[float] = None
    alpha_hi: Optional[float] = None
    grid_step: float = Field(default=1e-3, gt=0)
    j_list: list[int] = Field(default_factory=lambda: [1, 2, 3], min_length=1)

    @field_validator("j_list")
    @classmethod
    def _positive(cls, value: list[int]) -> list[int]:
        if any(j < 1 for j in value):
            raise ValueError("branch indices start at 1")
        return value


class VerdictOptions(_Section):
    two_control: bool = True
    eigenfunctions: bool = False
    grid: int = Field(default=1025, ge=3)


class ControlOptions(_Section):
    k: int = 1
    N: int = Field(default=64, ge=64)
    n_u: int = Field(default=8, ge=0)
    n_theta: int = Field(default=8, ge=0)
    segments: int = Field(default=32, ge=1)
    T: float = Field(default=1.0, gt=0)
    dt: Optional[float] = Field(default=None, gt=0)
    seed: Optional[int] = None
    eps_bound: float = Field(default=0.1, gt=0)
    ridge: float = Field(default=0.0, ge=0)
    target: Literal["random", "free"] = "random"
    x0: Literal["zero", "random"] = "zero"
    zero_mode: bool = True

    @field_validator("k")
    @classmethod
    def _mode(cls, value: int) -> int:
        return _nonzero_modes([value])[0]

    @model_validator(mode="after")
    def _truncation(self):
        if (self.n_u == 0) != (self.n_theta == 0):
            raise ValueError("n_u and n_theta must both be positive, or both 0 for the full grid")
        if self.n_u == 0 and self.ridge == 0:
            raise ValueError("full-grid control experiments need ridge > 0")
        return self

    @property
    def full_grid(self) -> bool:
        return self.n_u == 0


class DetcheckOptions(_Section):
    samples: int = Field(default=1000, ge=1)
    seed: Optional[int] = None
    max_rel_err: float = Field(default=1e-9, gt=0)
    floor_rel: float = Field(default=1e-4, gt=0)
    inject_degenerate: bool = False


class RunOptions(_Section):
    spectra: SpectraOptions = Field(default_factory=SpectraOptions)
    scan: ScanOptions = Field(default_factory=ScanOptions)
    verdict: VerdictOptions = Field(default_factory=VerdictOptions)
    control: ControlOptions = Field(default_factory=ControlOptions)
    detcheck: DetcheckOptions = Field(default_factory=DetcheckOptions)


class RunManifest(BaseModel):
    schema_version: int = SCHEMA_VERSION
    subcommand: str
    parameters: dict[str, Any]
    config_sha256: str
    outputs: list[str] = Field(default_factory=list)
    started_at: datetime = Field(default_factory=datetime.now)
    wall_time_s: float = 0.0
