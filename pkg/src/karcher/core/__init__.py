"""Raw numerical kernels operating on numpy arrays."""

from karcher.core.jacobi import jacobi_eigh

__all__ = ["jacobi_eigh"]
