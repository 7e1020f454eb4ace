"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..families import BernsteinSpec, ProcessParams


class FamilyRequest(BaseModel):
    """Common process parameters; unknown keys are rejected."""

    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    family: Literal["stable", "tempered", "gamma", "dirac", "linear"]
    alpha: Optional[float] = None
    theta: Optional[float] = None
    rate2: Optional[float] = None
    lam: float = Field(1.0, alias="lambda", gt=0.0)

    def to_params(self) -> ProcessParams:
        spec = BernsteinSpec(
            family=self.family, alpha=self.alpha, theta=self.theta, rate2=self.rate2
        )
        return ProcessParams(spec, self.lam)


class PmfRequest(FamilyRequest):
    t: float = Field(1.0, gt=0.0)
    kmax: int = Field(20, ge=0, le=500)


class PgfRequest(FamilyRequest):
    t: float = Field(1.0, ge=0.0)
    u: list[float] = Field(default_factory=lambda: [i / 10.0 for i in range(11)])


class HittingRequest(FamilyRequest):
    k: int = Field(1, ge=1)
    s_min: float = Field(0.05, gt=0.0)
    s_max: float = Field(5.0, gt=0.0)
    points: int = Field(50, ge=2, le=100000)


class MomentsRequest(FamilyRequest):
    t: float = Field(1.0, gt=0.0)
    s: Optional[float] = None
    r_max: int = Field(4, ge=1, le=4)


class SimulateRequest(FamilyRequest):
    t: float = Field(1.0, gt=0.0)
    samples: int = Field(1000, ge=1)
    seed: int = 0
    method: Literal["path", "timechange", "ctrw"] = "path"
    ctrw_n: int = Field(1, ge=1)
    workers: int = Field(1, ge=1)
    paths: bool = False  # emit full trajectories (method "path" only)


class ValidateRequest(FamilyRequest):
    suite: Literal["all", "pmf", "hitting", "moments", "conditional", "ctrw", "skellam"] = "all"
    t: float = Field(1.0, gt=0.0)
    samples: int = Field(10**6, ge=100)
    seed: int = 0
    workers: int = Field(1, ge=1)
    thresholds: dict[str, float] = Field(default_factory=dict)


class ConditionalRequest(FamilyRequest):
    s: float = Field(..., gt=0.0)
    t: float = Field(..., gt=0.0)
    k: int = Field(..., ge=0)


class JumpTimesRequest(FamilyRequest):
    t: float = Field(..., gt=0.0)
    sizes: list[int] = Field(..., min_length=1)


class TableResponse(BaseModel):
    """Generic table payload; the CLI renders it as CSV or JSON."""

    columns: list[str]
    rows: list[dict]
    meta: dict = Field(default_factory=dict)


class PathsResponse(BaseModel):
    paths: list[dict]
    meta: dict = Field(default_factory=dict)


class ValidateResponse(BaseModel):
    reports: list[dict]
    all_pass: bool


class HealthResponse(BaseModel):
    status: str
    version: str
