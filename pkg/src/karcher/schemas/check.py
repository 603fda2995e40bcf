"""Invariant-suite report schemas."""

from pydantic import BaseModel


class CheckResult(BaseModel):
    """Schema for one invariant check."""

    anchor: str
    module: str
    passed: bool
    instances: int
    dims: list[int]
    worst_margin: float | None = None
    worst_dim: int | None = None
    detail: str | None = None


class CheckSummaryResponse(BaseModel):
    """Schema for the full invariant suite summary."""

    passed: int
    failed: int
    checks: list[CheckResult]
