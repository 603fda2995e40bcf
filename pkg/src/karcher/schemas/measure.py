"""Measure and transport payload schemas."""

from pydantic import BaseModel, Field, model_validator

from karcher.models.measure import DiscreteMeasure
from karcher.schemas.matrix import MatrixSchema


class MeasureSchema(BaseModel):
    """Schema for a discrete measure; uniform weights when ``weights`` is absent."""

    atoms: list[MatrixSchema] = Field(..., min_length=1)
    weights: list[float] | None = None

    @model_validator(mode="after")
    def check_weights(self) -> "MeasureSchema":
        if self.weights is not None:
            if len(self.weights) != len(self.atoms):
                raise ValueError(f"{len(self.atoms)} atoms but {len(self.weights)} weights")
            if any(w < 0 for w in self.weights):
                raise ValueError("weights must be nonnegative")
        return self

    @classmethod
    def from_model(cls, mu: DiscreteMeasure) -> "MeasureSchema":
        return cls(
            atoms=[MatrixSchema.from_model(a) for a in mu.atoms],
            weights=[float(w) for w in mu.weights],
        )

    def to_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure([a.to_spd() for a in self.atoms], self.weights)


class WassersteinResponse(BaseModel):
    """Schema for a W₁ distance and its optimal coupling."""

    value: float = Field(..., ge=0)
    plan: list[list[float]]
