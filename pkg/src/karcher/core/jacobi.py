"""Cyclic Jacobi eigensolver for dense real symmetric matrices."""

import math

import numpy as np

from karcher.config import JACOBI_MAX_SWEEPS
from karcher.exceptions import EigenConvergenceError

_EPS = float(np.finfo(np.float64).eps)


def jacobi_eigh(
    a: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> tuple[np.ndarray, np.ndarray, int]:
    """
    Diagonalize a symmetric matrix by cyclic Jacobi rotations.

    Each sweep visits every pair (p, q) above the diagonal and annihilates a[p, q] when it
    is not negligible against the geometric mean of the two diagonal entries. The
    iteration stops after the first sweep that performs no rotation.

    Args:
        a: Symmetric (n, n) array. It is copied, never modified.
        max_sweeps: Cap on the number of full sweeps.

    Returns:
        (d, q, sweeps): eigenvalues ascending, orthogonal matrix whose columns are the
        matching eigenvectors, and the number of sweeps used.

    Raises:
        EigenConvergenceError: if a rotation is still needed after ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if n == 1 or scale == 0.0:
        return a.diagonal().copy(), v, 0

    floor = _EPS * _EPS * scale
    for sweep in range(max_sweeps + 1):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(a[p, q])
                app = float(a[p, p])
                aqq = float(a[q, q])
                if abs(apq) <= floor or abs(apq) <= _EPS * math.sqrt(abs(app * aqq)):
                    continue
                if sweep == max_sweeps:
                    raise EigenConvergenceError(
                        f"cyclic Jacobi did not converge in {max_sweeps} sweeps"
                    )
                rotated = True
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q
        if not rotated:
            break

    d = a.diagonal().copy()
    order = np.argsort(d, kind="stable")
    return d[order], v[:, order], sweep
