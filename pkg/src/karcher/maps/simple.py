"""Identity, single-atom geodesic step, and wrapped callables."""

from collections.abc import Callable

from karcher.maps.base import NonexpansiveMap
from karcher.models.matrix import SpdMatrix
from karcher.services.geometry_service import check_same_dim, geodesic


class IdentityMap(NonexpansiveMap):
    """F(X) = X."""

    name = "identity"

    def apply(self, x: SpdMatrix) -> SpdMatrix:
        return x


class GeodesicStepMap(NonexpansiveMap):
    """Single-atom resolvent X ↦ X#_{ρ/(ρ+1)}A."""

    name = "geodesic_step"

    def __init__(self, atom: SpdMatrix, rho: float = 1.0):
        super().__init__(rho)
        self.atom = atom
        self.weight = rho / (rho + 1.0)

    def apply(self, x: SpdMatrix) -> SpdMatrix:
        check_same_dim(self.atom, x)
        return geodesic(x, self.atom, self.weight)


class FunctionMap(NonexpansiveMap):
    """Wraps a callable the caller vouches is nonexpansive."""

    def __init__(
        self, fn: Callable[[SpdMatrix], SpdMatrix], rho: float = 1.0, name: str = "function"
    ):
        super().__init__(rho)
        self.fn = fn
        self.name = name

    def apply(self, x: SpdMatrix) -> SpdMatrix:
        return self.fn(x)
