"""Immutable domain values."""

from karcher.models.flow import FlowResult
from karcher.models.law import LlnRow, SpdLaw
from karcher.models.matrix import EigenDecomposition, NormingState, SpdMatrix, SymMatrix
from karcher.models.measure import Coupling, DiscreteMeasure

__all__ = [
    "EigenDecomposition",
    "NormingState",
    "SpdMatrix",
    "SymMatrix",
    "Coupling",
    "DiscreteMeasure",
    "FlowResult",
    "LlnRow",
    "SpdLaw",
]
