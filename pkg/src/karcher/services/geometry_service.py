"""
Matrix calculus and Thompson-metric geometry of the SPD cone.

Every congruence A^{-1/2}·B·A^{-1/2} goes through the cached eigendecomposition of A and
is symmetrized before it is diagonalized.
"""

import numpy as np

from karcher.config import DLOG_SWITCH
from karcher.exceptions import ConstructionError, DimensionMismatchError
from karcher.models.matrix import EigenDecomposition, NormingState, SpdMatrix, SymMatrix


def check_same_dim(a: SymMatrix, b: SymMatrix) -> None:
    if a.n != b.n:
        raise DimensionMismatchError(a.n, b.n)


def relative(a: SpdMatrix, b: SpdMatrix) -> SpdMatrix:
    """Return A^{-1/2}·B·A^{-1/2}."""
    check_same_dim(a, b)
    return SpdMatrix(a.inv_sqrt @ b.data @ a.inv_sqrt)


def sym_eigen(s: SymMatrix) -> EigenDecomposition:
    """Eigendecomposition by cyclic Jacobi, eigenvalues ascending."""
    return s.eigen


def mat_log(p: SpdMatrix) -> SymMatrix:
    return SymMatrix(p.eigen.apply(np.log(p.eigen.d)))


def mat_exp(s: SymMatrix) -> SpdMatrix:
    with np.errstate(over="ignore"):
        values = np.exp(s.eigen.d)
    if not np.all(np.isfinite(values)):
        raise ConstructionError("matrix exponential overflowed")
    return SpdMatrix.from_eigen(s.eigen.q, values)


def mat_pow(p: SpdMatrix, t: float) -> SpdMatrix:
    if t == 1.0:
        return p
    if t == 0.0:
        return SpdMatrix.identity(p.n)
    with np.errstate(over="ignore"):
        values = p.eigen.d**t
    if not np.all(np.isfinite(values)) or not np.all(values > 0.0):
        raise ConstructionError(f"matrix power {t} is not representable")
    return SpdMatrix.from_eigen(p.eigen.q, values)


def thompson_distance(a: SpdMatrix, b: SpdMatrix) -> float:
    """d_∞(A, B) = max(|log λ_min|, |log λ_max|) of A^{-1/2}·B·A^{-1/2}."""
    check_same_dim(a, b)
    if a is b or a.same_values(b):
        return 0.0
    d = relative(a, b).eigen.d
    return float(max(abs(np.log(d[0])), abs(np.log(d[-1]))))


def loewner_leq(a: SpdMatrix, b: SpdMatrix, tol: float = 0.0) -> bool:
    """True iff B − A has no eigenvalue below −tol."""
    check_same_dim(a, b)
    return bool((b - a).eigen.d[0] >= -tol)


def geodesic(a: SpdMatrix, b: SpdMatrix, t: float) -> SpdMatrix:
    """
    Weighted geometric mean A#_tB = A^{1/2}(A^{-1/2}BA^{-1/2})^t A^{1/2}.

    t in [0, 1] traces the segment from A to B; other real t extend the same geodesic line.
    """
    check_same_dim(a, b)
    if t == 0.0 or a is b or a.same_values(b):
        return a
    if t == 1.0:
        return b
    c = relative(a, b)
    ct = c.eigen.apply(c.eigen.d**t)
    return SpdMatrix(a.sqrt @ ct @ a.sqrt)


def log_point(x: SpdMatrix, a: SpdMatrix) -> SymMatrix:
    """Relative operator entropy log_X A = X^{1/2}·log(X^{-1/2}AX^{-1/2})·X^{1/2}."""
    check_same_dim(x, a)
    if x is a or x.same_values(a):
        return SymMatrix.zeros(x.n)
    c = relative(x, a)
    return SymMatrix(x.sqrt @ c.eigen.apply(np.log(c.eigen.d)) @ x.sqrt)


def exp_point(x: SpdMatrix, v: SymMatrix) -> SpdMatrix:
    """Inverse of log_point at X: X^{1/2}·exp(X^{-1/2}VX^{-1/2})·X^{1/2}."""
    check_same_dim(x, v)
    if not np.any(v.data):
        return x
    e = mat_exp(SymMatrix(x.inv_sqrt @ v.data @ x.inv_sqrt))
    return SpdMatrix(x.sqrt @ e.data @ x.sqrt)


def log_divided_differences(d: np.ndarray) -> np.ndarray:
    """Matrix of (log d_i − log d_j)/(d_i − d_j), with 1/d_i on near-coalescing pairs."""
    di = d[:, None]
    dj = d[None, :]
    gap = di - dj
    close = np.abs(gap) <= DLOG_SWITCH * np.maximum(di, dj)
    safe_gap = np.where(close, 1.0, gap)
    k = (np.log(di) - np.log(dj)) / safe_gap
    return np.where(close, np.broadcast_to(1.0 / di, k.shape), k)


def dlog(p: SpdMatrix, v: SymMatrix) -> SymMatrix:
    """Fréchet derivative of mat_log at P in direction V (Daleckii–Krein form)."""
    check_same_dim(p, v)
    q = p.eigen.q
    vt = q.T @ v.data @ q
    return SymMatrix(q @ (log_divided_differences(p.eigen.d) * vt) @ q.T)


def norming_state(a: SpdMatrix, b: SpdMatrix) -> NormingState:
    """
    Extremal-eigenvector state for the pair (A, B).

    With C = B^{-1/2}AB^{-1/2} = U·diag(λ)·Uᵀ and u the eigenvector of the extremal
    eigenvalue whose |log| equals d_∞(A, B), the state is v = B^{-1/2}u/|B^{-1/2}u|, so that
    vᵀ(B#_tA)v = e^{±t·d_∞(A,B)}·vᵀBv. Ties go to the lowest eigenvector index and to the
    "upper" side.
    """
    check_same_dim(a, b)
    e1 = np.zeros(a.n)
    e1[0] = 1.0
    if a.same_values(b):
        return NormingState(v=e1, side="upper")
    c = relative(b, a)
    d = c.eigen.d
    upper = np.log(d[-1])
    lower = -np.log(d[0])
    if max(upper, lower) <= 0.0:
        return NormingState(v=e1, side="upper")
    if upper >= lower:
        idx = int(np.flatnonzero(d == d[-1])[0])
        side = "upper"
    else:
        idx = 0
        side = "lower"
    w = b.inv_sqrt @ c.eigen.q[:, idx]
    return NormingState(v=w / np.linalg.norm(w), side=side)


def state_value(state: NormingState, m: SymMatrix) -> float:
    """ω(M) = vᵀMv."""
    return state.value(m)


def lambda_min(p: SymMatrix) -> float:
    return float(p.eigen.d[0])
