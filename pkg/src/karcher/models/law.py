"""Sampling laws on the cone and law-of-large-numbers table rows."""

from dataclasses import dataclass
from typing import Literal

from karcher.exceptions import ConstructionError
from karcher.models.matrix import SpdMatrix
from karcher.models.measure import DiscreteMeasure


@dataclass(frozen=True, eq=False)
class SpdLaw:
    """Either a finite law (a DiscreteMeasure) or a log-Gaussian ensemble around ``base``."""

    kind: Literal["finite", "log_gaussian"]
    measure: DiscreteMeasure | None = None
    base: SpdMatrix | None = None
    scale: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "finite":
            if self.measure is None:
                raise ConstructionError("finite law needs a measure")
        elif self.kind == "log_gaussian":
            if self.base is None or self.scale is None or not self.scale > 0.0:
                raise ConstructionError("log-Gaussian law needs a base point and a positive scale")
        else:
            raise ConstructionError(f"unknown law kind {self.kind!r}")

    @classmethod
    def finite(cls, measure: DiscreteMeasure) -> "SpdLaw":
        return cls(kind="finite", measure=measure)

    @classmethod
    def log_gaussian(cls, base: SpdMatrix, scale: float) -> "SpdLaw":
        return cls(kind="log_gaussian", base=base, scale=float(scale))

    @property
    def dim(self) -> int:
        if self.measure is not None:
            return self.measure.dim
        assert self.base is not None
        return self.base.n


@dataclass(frozen=True)
class LlnRow:
    """One row of a law-of-large-numbers table."""

    n: int
    w1_to_law: float | None
    d_mean: float
    d_flow: float
    seed: int
