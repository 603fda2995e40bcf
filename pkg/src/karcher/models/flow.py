"""Results of exponential-formula evaluations."""

from dataclasses import dataclass

from karcher.models.matrix import SpdMatrix


@dataclass(frozen=True, eq=False)
class FlowResult:
    """
    State reached by a doubling exponential formula.

    ``error_bound`` is the a-priori Crandall–Liggett bound at the finest level ``n_used``;
    ``cauchy_gap`` is the observed distance between the last two level estimates
    (``None`` when the a-priori bound alone stopped the doubling at the first level).
    """

    state: SpdMatrix
    n_used: int
    error_bound: float
    cauchy_gap: float | None = None
    extrapolated: bool = False
