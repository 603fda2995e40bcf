"""Pydantic schemas for JSON input and output."""

from karcher.schemas.check import CheckResult, CheckSummaryResponse
from karcher.schemas.flow import FlowResultSchema
from karcher.schemas.matrix import MatrixSchema
from karcher.schemas.measure import MeasureSchema, WassersteinResponse
from karcher.schemas.solver import FailureResponse, MeanResponse, SolveReport, SolverConfig

__all__ = [
    "CheckResult",
    "CheckSummaryResponse",
    "FlowResultSchema",
    "MatrixSchema",
    "MeasureSchema",
    "WassersteinResponse",
    "FailureResponse",
    "MeanResponse",
    "SolveReport",
    "SolverConfig",
]
