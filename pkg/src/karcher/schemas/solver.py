"""Solver configuration and iteration report schemas."""

from pydantic import BaseModel, Field

from karcher.config import DEFAULT_TOL
from karcher.schemas.matrix import MatrixSchema


class SolverConfig(BaseModel):
    """Schema for iterative solver settings. Every field is optional in JSON."""

    tol: float = Field(default=DEFAULT_TOL, gt=0)
    max_iter: int = Field(default=10_000, gt=0)
    power_t_start: float = Field(default=0.5, gt=0, le=1)
    power_t_shrink: float = Field(default=0.5, gt=0, lt=1)
    damping: float = Field(default=1.0, gt=0, le=1)

    model_config = {"frozen": True, "extra": "forbid"}


class SolveReport(BaseModel):
    """Schema for the outcome of an iterative solve."""

    iterations: int = Field(..., ge=0)
    residual: float = Field(..., ge=0)
    certified_bound: float | None = Field(default=None, ge=0)


class MeanResponse(BaseModel):
    """Schema for a mean, power mean or resolvent result."""

    matrix: MatrixSchema
    report: SolveReport | None = None


class FailureResponse(BaseModel):
    """Schema printed when a solver gives up."""

    error: str
    report: SolveReport | dict | None = None
