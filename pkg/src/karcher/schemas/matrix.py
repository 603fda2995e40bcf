"""Matrix payload schema."""

from pydantic import BaseModel, Field, model_validator

from karcher.models.matrix import SpdMatrix, SymMatrix


class MatrixSchema(BaseModel):
    """Schema for a dense matrix: dimension and n·n row-major entries."""

    n: int = Field(..., ge=1)
    data: list[float]

    @model_validator(mode="after")
    def check_size(self) -> "MatrixSchema":
        if len(self.data) != self.n * self.n:
            raise ValueError(
                f"expected {self.n * self.n} entries for n={self.n}, got {len(self.data)}"
            )
        return self

    @classmethod
    def from_model(cls, m: SymMatrix) -> "MatrixSchema":
        return cls(n=m.n, data=m.to_rows())

    def to_sym(self) -> SymMatrix:
        return SymMatrix.from_rows(self.n, self.data)

    def to_spd(self) -> SpdMatrix:
        return SpdMatrix.from_rows(self.n, self.data)
