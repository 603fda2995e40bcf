"""Flow result schema."""

from pydantic import BaseModel, Field

from karcher.models.flow import FlowResult
from karcher.schemas.matrix import MatrixSchema


class FlowResultSchema(BaseModel):
    """Schema for an exponential-formula result."""

    state: MatrixSchema
    n_used: int = Field(..., ge=1)
    error_bound: float = Field(..., ge=0)
    cauchy_gap: float | None = None
    extrapolated: bool = False

    @classmethod
    def from_model(cls, result: FlowResult) -> "FlowResultSchema":
        return cls(
            state=MatrixSchema.from_model(result.state),
            n_used=result.n_used,
            error_bound=result.error_bound,
            cauchy_gap=result.cauchy_gap,
            extrapolated=result.extrapolated,
        )
