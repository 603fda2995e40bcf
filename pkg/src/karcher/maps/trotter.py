"""Trotter sweep of two-point geodesic steps."""

from collections.abc import Sequence
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from karcher.exceptions import ConstructionError, DimensionMismatchError
from karcher.maps.base import NonexpansiveMap
from karcher.models.matrix import SpdMatrix
from karcher.services.geometry_service import geodesic

Order = Literal["forward", "reverse"]


class TrotterMap(NonexpansiveMap):
    """
    F_ρ = J^{δ_{A_n}}_{ρw_n} ∘ ⋯ ∘ J^{δ_{A_1}}_{ρw_1}, each factor X ↦ X#_{ρw_i/(ρw_i+1)}A_i.

    Uniform weights give the step ρ/(ρ+n) for every atom. ``order="forward"`` applies A₁
    first; ``"reverse"`` applies A_n first.
    """

    name = "trotter"

    def __init__(
        self,
        atoms: Sequence[SpdMatrix],
        rho: float,
        weights: ArrayLike | None = None,
        order: Order = "forward",
    ):
        super().__init__(rho)
        atoms = tuple(atoms)
        if not atoms:
            raise ConstructionError("Trotter map needs at least one atom")
        for atom in atoms[1:]:
            if atom.n != atoms[0].n:
                raise DimensionMismatchError(atoms[0].n, atom.n)
        if order not in ("forward", "reverse"):
            raise ValueError(f"unknown composition order {order!r}")
        if weights is None:
            w = np.full(len(atoms), 1.0 / len(atoms))
        else:
            w = np.asarray(weights, dtype=np.float64)
            if w.shape != (len(atoms),) or np.any(w <= 0.0):
                raise ConstructionError("Trotter weights must be positive, one per atom")
            w = w / w.sum()
        steps = [rho * wi / (rho * wi + 1.0) for wi in w]
        sweep = list(zip(atoms, steps))
        self.atoms = atoms
        self.order = order
        self._sweep = sweep if order == "forward" else sweep[::-1]

    def apply(self, x: SpdMatrix) -> SpdMatrix:
        if x.n != self.atoms[0].n:
            raise DimensionMismatchError(self.atoms[0].n, x.n)
        for atom, s in self._sweep:
            x = geodesic(x, atom, s)
        return x
