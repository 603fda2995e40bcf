"""Finitely supported probability measures on the cone and their couplings."""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from karcher.exceptions import ConstructionError, DimensionMismatchError
from karcher.models.matrix import SpdMatrix


class DiscreteMeasure:
    """
    Probability measure with finitely many atoms.

    Weights are renormalized to sum to one and zero-weight atoms are dropped on
    construction. Missing weights mean the uniform measure.
    """

    def __init__(self, atoms: Sequence[SpdMatrix], weights: ArrayLike | None = None):
        atoms = tuple(atoms)
        if not atoms:
            raise ConstructionError("a measure needs at least one atom")
        dim = atoms[0].n
        for atom in atoms[1:]:
            if atom.n != dim:
                raise DimensionMismatchError(dim, atom.n)

        if weights is None:
            w = np.full(len(atoms), 1.0 / len(atoms))
        else:
            w = np.array(weights, dtype=np.float64).ravel()
            if w.shape[0] != len(atoms):
                raise ConstructionError(f"{len(atoms)} atoms but {w.shape[0]} weights")
            if not np.all(np.isfinite(w)) or np.any(w < 0.0):
                raise ConstructionError("weights must be finite and nonnegative")

        keep = w > 0.0
        if not np.any(keep):
            raise ConstructionError("weights sum to zero")
        self._atoms = tuple(a for a, k in zip(atoms, keep) if k)
        w = w[keep]
        w = w / w.sum()
        w.flags.writeable = False
        self._weights = w

    @classmethod
    def dirac(cls, atom: SpdMatrix) -> "DiscreteMeasure":
        return cls((atom,), (1.0,))

    @classmethod
    def uniform(cls, atoms: Sequence[SpdMatrix]) -> "DiscreteMeasure":
        return cls(atoms)

    @property
    def atoms(self) -> tuple[SpdMatrix, ...]:
        return self._atoms

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def dim(self) -> int:
        return self._atoms[0].n

    @property
    def size(self) -> int:
        return len(self._atoms)

    def is_uniform(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self._weights - 1.0 / self.size) <= tol))

    def __iter__(self):
        return iter(zip(self._atoms, self._weights))

    def __repr__(self) -> str:
        return f"DiscreteMeasure(dim={self.dim}, size={self.size})"


@dataclass(frozen=True, eq=False)
class Coupling:
    """Transport plan between two discrete measures, rows indexed by the first."""

    plan: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.plan.shape  # type: ignore[return-value]

    def row_sums(self) -> np.ndarray:
        return self.plan.sum(axis=1)

    def column_sums(self) -> np.ndarray:
        return self.plan.sum(axis=0)
