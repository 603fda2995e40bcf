"""Base class for nonexpansive self-maps of the cone."""

import copy
from abc import ABC, abstractmethod

from karcher.models.matrix import SpdMatrix
from karcher.services.geometry_service import thompson_distance


class NonexpansiveMap(ABC):
    """
    Map F: ℙ → ℙ with d_∞(F(X), F(Y)) ≤ d_∞(X, Y) and a declared step ρ.

    The declared step is what approximating resolvents and semigroups divide by; it is
    metadata and re-declaring it with :meth:`with_step` leaves the map itself unchanged.
    """

    name: str = "unknown"

    def __init__(self, rho: float = 1.0):
        if not rho > 0.0:
            raise ValueError(f"declared step must be positive, got {rho}")
        self.rho = float(rho)

    def __call__(self, x: SpdMatrix) -> SpdMatrix:
        return self.apply(x)

    @abstractmethod
    def apply(self, x: SpdMatrix) -> SpdMatrix:
        """Evaluate the map at X."""

    def with_step(self, rho: float) -> "NonexpansiveMap":
        """Same map, declared step ``rho``."""
        if not rho > 0.0:
            raise ValueError(f"declared step must be positive, got {rho}")
        clone = copy.copy(self)
        clone.rho = float(rho)
        return clone

    def displacement(self, x: SpdMatrix) -> float:
        """d_∞(X, F(X))."""
        return thompson_distance(x, self.apply(x))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, rho={self.rho})"
