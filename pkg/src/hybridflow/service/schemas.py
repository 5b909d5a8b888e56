"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field, model_validator


class CheckOptionsModel(BaseModel):
    loop_bound: int = Field(default=3, ge=1)
    grid_points: int = Field(default=9, ge=1)
    duration_samples: int = Field(default=8, ge=1)
    step: float = Field(default=1e-3, gt=0)
    horizon: float = Field(default=1.0, gt=0)
    init_samples: int = Field(default=3, ge=1)
    event_tol: float = Field(default=1e-9, gt=0)
    seed: Optional[int] = None


class ModelRef(BaseModel):
    """A builtin model by name, or inline .hpm source (exactly one)."""

    model: Optional[str] = None
    source: Optional[str] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.model is None) == (self.source is None):
            raise ValueError("provide exactly one of 'model' (builtin name) or 'source' (.hpm text)")
        return self


class DeclInfo(BaseModel):
    name: str
    interval: str


class ParseRequest(ModelRef):
    pass


class ParseResponse(BaseModel):
    name: str
    constants: list[DeclInfo]
    variables: list[DeclInfo]
    program: str
    safety: str


class CheckRequest(ModelRef):
    options: CheckOptionsModel = CheckOptionsModel()


class DiamondRequest(CheckRequest):
    target: str


class CheckResponse(BaseModel):
    """The canonical report; `report` is the byte-stable JSON document."""

    verdict: str
    holds_at_bound: bool
    report: dict[str, Any]


class SimulateRequest(ModelRef):
    pins: dict[str, float] = Field(default_factory=dict)
    initial: dict[str, float] = Field(default_factory=dict)
    loop_bound: int = Field(default=1, ge=1)
    horizon: float = Field(default=1.0, gt=0)
    step: float = Field(default=1e-3, gt=0)
    duration_samples: int = Field(default=8, ge=1)


class SimulateResponse(BaseModel):
    trace: dict[str, Any]
    csv: str


class ReplayRequest(ModelRef):
    report: dict[str, Any]


class ReplayResponse(BaseModel):
    certified: bool
    verdict: str


class ModelInfo(BaseModel):
    name: str
    source: str


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorDetail(BaseModel):
    error: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None
