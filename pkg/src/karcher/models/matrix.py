"""Dense symmetric and symmetric positive-definite matrix values."""

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike

from karcher.core.jacobi import jacobi_eigh
from karcher.exceptions import ConstructionError


def _symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) * 0.5


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenvalues ``d`` (ascending) and orthogonal eigenvector columns ``q``."""

    q: np.ndarray
    d: np.ndarray
    sweeps: int = 0

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Return q·diag(values)·qᵀ, symmetrized."""
        return _symmetrize((self.q * values) @ self.q.T)


class SymMatrix:
    """Dense real symmetric matrix, the tangent space of the cone."""

    def __init__(self, data: ArrayLike):
        arr = np.array(data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise ConstructionError(f"expected a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ConstructionError("matrix has non-finite entries")
        self._data = _frozen(_symmetrize(arr))

    @classmethod
    def zeros(cls, n: int) -> "SymMatrix":
        return cls(np.zeros((n, n)))

    @classmethod
    def from_rows(cls, n: int, values: list[float]) -> "SymMatrix":
        """Build from ``n·n`` row-major values."""
        if len(values) != n * n:
            raise ConstructionError(f"expected {n * n} entries for n={n}, got {len(values)}")
        return cls(np.asarray(values, dtype=np.float64).reshape(n, n))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def n(self) -> int:
        return self._data.shape[0]

    @cached_property
    def eigen(self) -> EigenDecomposition:
        d, q, sweeps = jacobi_eigh(self._data)
        return EigenDecomposition(q=_frozen(q), d=_frozen(d), sweeps=sweeps)

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self._data, 2))

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self._data))

    def to_rows(self) -> list[float]:
        return [float(x) for x in self._data.ravel()]

    def same_values(self, other: "SymMatrix") -> bool:
        return self._data.shape == other._data.shape and np.array_equal(self._data, other._data)

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self._data + other._data)

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        return SymMatrix(self._data - other._data)

    def __mul__(self, scalar: float) -> "SymMatrix":
        return SymMatrix(self._data * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SymMatrix":
        return SymMatrix(-self._data)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, data={self._data.tolist()!r})"


class SpdMatrix(SymMatrix):
    """
    Dense symmetric positive-definite matrix, a point of the cone.

    The eigendecomposition is computed on construction (positivity is checked with
    tolerance 0) and the square root and inverse square root are cached on first use.
    """

    def __init__(self, data: ArrayLike, _eigen: EigenDecomposition | None = None):
        super().__init__(data)
        if _eigen is not None:
            self.__dict__["eigen"] = _eigen
        if not self.eigen.d[0] > 0.0:
            raise ConstructionError(
                f"matrix is not positive definite (smallest eigenvalue {self.eigen.d[0]!r})"
            )

    @classmethod
    def identity(cls, n: int) -> "SpdMatrix":
        return cls(np.eye(n))

    @classmethod
    def from_eigen(cls, q: np.ndarray, d: np.ndarray) -> "SpdMatrix":
        """Build q·diag(d)·qᵀ reusing the known spectrum instead of re-diagonalizing."""
        d = np.asarray(d, dtype=np.float64)
        if not np.all(np.isfinite(d)):
            raise ConstructionError("spectrum has non-finite values")
        order = np.argsort(d, kind="stable")
        q_sorted = np.array(q[:, order])
        d_sorted = np.array(d[order])
        data = _symmetrize((q_sorted * d_sorted) @ q_sorted.T)
        eigen = EigenDecomposition(q=_frozen(q_sorted), d=_frozen(d_sorted))
        return cls(data, _eigen=eigen)

    @property
    def min_eig(self) -> float:
        return float(self.eigen.d[0])

    @property
    def max_eig(self) -> float:
        return float(self.eigen.d[-1])

    @cached_property
    def sqrt(self) -> np.ndarray:
        return _frozen(self.eigen.apply(np.sqrt(self.eigen.d)))

    @cached_property
    def inv_sqrt(self) -> np.ndarray:
        return _frozen(self.eigen.apply(1.0 / np.sqrt(self.eigen.d)))

    def inverse(self) -> "SpdMatrix":
        return SpdMatrix.from_eigen(self.eigen.q, 1.0 / self.eigen.d)

    def congruence(self, c: ArrayLike) -> "SpdMatrix":
        """Return C·A·Cᵀ."""
        c = np.asarray(c, dtype=np.float64)
        return SpdMatrix(c @ self.data @ c.T)


@dataclass(frozen=True, eq=False)
class NormingState:
    """Rank-one state M ↦ vᵀMv attaining the Thompson distance along a geodesic."""

    v: np.ndarray
    side: Literal["upper", "lower"]

    def value(self, m: SymMatrix) -> float:
        return float(self.v @ m.data @ self.v)
