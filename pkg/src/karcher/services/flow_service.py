"""
Nonlinear semigroups by the exponential formula, approximating resolvents and
semigroups of nonexpansive maps, and Trotter products of geodesic steps.

Exponential formulas double the number of backward-Euler steps n = 1, 2, 4, … and stop
when successive level estimates are within ``tol`` or the a-priori bound drops below it.
By default each level is Richardson-extrapolated against the coarser ones (the flow is an
ODE on the open set ℙ ⊂ 𝕊, so the extrapolation is plain matrix arithmetic).
"""

import math
import sys
from collections.abc import Callable, Sequence

import numpy as np
import structlog
from numpy.typing import ArrayLike

from karcher.config import DEFAULT_FLOW_TOL, DEFAULT_TOL, INNER_TOL_FLOOR, MAX_FLOW_LEVEL
from karcher.exceptions import ConstructionError, ConvergenceError
from karcher.maps.base import NonexpansiveMap
from karcher.maps.trotter import Order, TrotterMap
from karcher.models.flow import FlowResult
from karcher.models.matrix import SpdMatrix
from karcher.models.measure import DiscreteMeasure
from karcher.schemas.solver import SolverConfig
from karcher.services.geometry_service import check_same_dim, geodesic, thompson_distance
from karcher.services.mean_service import karcher_residual, resolvent
from karcher.services.measure_service import first_moment

logger = structlog.get_logger()

Step = Callable[[float, SpdMatrix], SpdMatrix]

# Unit-time steps allowed to flow_to_mean.
MAX_UNIT_STEPS = 500
STEP_ROUNDOFF = 64 * sys.float_info.epsilon


def _iterate(step: Step, t: float, n: int, x: SpdMatrix) -> SpdMatrix:
    lam = t / n
    for _ in range(n):
        x = step(lam, x)
    return x


def _doubling(
    step: Step,
    t: float,
    x: SpdMatrix,
    tol: float,
    bound: Callable[[int], float],
    extrapolate: bool,
    max_level: int,
    label: str,
) -> FlowResult:
    previous_row: list[np.ndarray] = []
    previous: SpdMatrix | None = None
    best: FlowResult | None = None
    for level in range(max_level + 1):
        n = 2**level
        plain = _iterate(step, t, n, x)
        row = [plain.data]
        if extrapolate:
            for j in range(1, level + 1):
                row.append(row[j - 1] + (row[j - 1] - previous_row[j - 1]) / (2.0**j - 1.0))

        estimate, extrapolated = plain, False
        if len(row) > 1:
            try:
                estimate, extrapolated = SpdMatrix(row[-1]), True
            except ConstructionError:
                pass
        gap = None if previous is None else thompson_distance(previous, estimate)
        result = FlowResult(
            state=estimate,
            n_used=n,
            error_bound=bound(n),
            cauchy_gap=gap,
            extrapolated=extrapolated,
        )
        logger.debug(
            "exponential_formula_level", kind=label, n=n, gap=gap, error_bound=result.error_bound
        )
        if result.error_bound <= tol or (gap is not None and gap <= tol):
            return result
        best, previous, previous_row = result, estimate, row

    logger.warning("exponential_formula_level_cap", kind=label, max_level=max_level)
    raise ConvergenceError(
        f"{label} did not reach tol={tol} within 2^{max_level} steps",
        best,
        best.state if best is not None else None,
    )


def _inner_tol(tol: float) -> float:
    return max(tol * 1e-2, INNER_TOL_FLOOR)


def _inner_config(cfg: SolverConfig | None, tol: float) -> SolverConfig:
    cfg = cfg or SolverConfig()
    return cfg.model_copy(update={"tol": max(min(cfg.tol, tol * 1e-2), INNER_TOL_FLOOR)})


def euler_iterate(
    mu: DiscreteMeasure, t: float, n: int, x: SpdMatrix, cfg: SolverConfig | None = None
) -> SpdMatrix:
    """One level of the exponential formula, (J_{t/n})ⁿX."""
    if not t > 0.0 or n < 1:
        raise ValueError(f"need t > 0 and n ≥ 1, got t={t}, n={n}")
    cfg = cfg or SolverConfig()
    return _iterate(lambda lam, y: resolvent(mu, lam, y, cfg), t, n, x)


def semigroup(
    mu: DiscreteMeasure,
    t: float,
    x: SpdMatrix,
    tol: float = DEFAULT_FLOW_TOL,
    cfg: SolverConfig | None = None,
    *,
    extrapolate: bool = True,
    max_level: int = MAX_FLOW_LEVEL,
) -> FlowResult:
    """
    S(t)X = lim (J_{t/n})ⁿX for the flow Ẋ = φ_μ(X).

    The recorded error bound is the a-priori 2t·n^{-1/2}·first_moment(μ, X) at the finest
    level. Inner resolvents are solved to min(cfg.tol, tol/100), floored at INNER_TOL_FLOOR.
    """
    if not t > 0.0:
        raise ValueError(f"flow time must be positive, got {t}")
    check_same_dim(mu.atoms[0], x)
    inner = _inner_config(cfg, tol)
    moment = first_moment(mu, x)
    result = _doubling(
        lambda lam, y: resolvent(mu, lam, y, inner),
        t,
        x,
        tol,
        lambda n: 2.0 * t * moment / math.sqrt(n),
        extrapolate,
        max_level,
        "semigroup",
    )
    logger.debug("semigroup_done", t=t, n_used=result.n_used, gap=result.cauchy_gap)
    return result


def flow_to_mean(
    mu: DiscreteMeasure,
    x: SpdMatrix,
    tol: float = DEFAULT_FLOW_TOL,
    cfg: SolverConfig | None = None,
) -> SpdMatrix:
    """Advance S in unit time steps until a step moves less than ``tol``."""
    for k in range(1, MAX_UNIT_STEPS + 1):
        nxt = semigroup(mu, 1.0, x, tol=0.1 * tol, cfg=cfg).state
        moved = thompson_distance(x, nxt)
        x = nxt
        if moved <= tol:
            logger.debug("flow_to_mean_done", steps=k, last_step=moved)
            return x
    raise ConvergenceError(f"flow did not settle within {MAX_UNIT_STEPS} unit steps", None, x)


def approx_resolvent(
    f: NonexpansiveMap,
    lam: float,
    rho: float,
    y: SpdMatrix,
    tol: float = DEFAULT_TOL,
    max_iter: int = 1_000_000,
) -> SpdMatrix:
    """
    J_{λ,ρ}(Y), the fixed point of G(X) = Y#_q F(X) with q = (λ/ρ)/(1+λ/ρ).

    G is a q-contraction, so stopping once a step is below tol·(1−q)/q certifies distance
    at most ``tol`` to the fixed point. The step threshold never drops below
    STEP_ROUNDOFF, the resolution of a computed distance.
    """
    if not lam > 0.0 or not rho > 0.0:
        raise ValueError(f"need λ > 0 and ρ > 0, got λ={lam}, ρ={rho}")
    ratio = lam / rho
    q = ratio / (1.0 + ratio)
    threshold = max(tol * (1.0 - q) / q, STEP_ROUNDOFF)
    x = y
    for _ in range(max_iter):
        nxt = geodesic(y, f(x), q)
        moved = thompson_distance(x, nxt)
        x = nxt
        if moved <= threshold:
            return x
    raise ConvergenceError(f"approximating resolvent stalled after {max_iter} steps", None, x)


def approx_semigroup(
    f: NonexpansiveMap,
    t: float,
    x: SpdMatrix,
    tol: float = DEFAULT_FLOW_TOL,
    *,
    extrapolate: bool = True,
    max_level: int = MAX_FLOW_LEVEL,
) -> FlowResult:
    """S_ρ(t)X = lim (J_{t/n,ρ})ⁿX with ρ the declared step of F; bound (2t/√n)·d_∞(X,F(X))/ρ."""
    if not t > 0.0:
        raise ValueError(f"flow time must be positive, got {t}")
    rho = f.rho
    displacement = f.displacement(x)
    inner_tol = _inner_tol(tol)
    return _doubling(
        lambda lam, y: approx_resolvent(f, lam, rho, y, inner_tol),
        t,
        x,
        tol,
        lambda n: 2.0 * t / math.sqrt(n) * displacement / rho,
        extrapolate,
        max_level,
        "approx_semigroup",
    )


def trotter_map(
    atoms: Sequence[SpdMatrix],
    rho: float,
    weights: ArrayLike | None = None,
    order: Order = "forward",
) -> TrotterMap:
    """F_ρ sweeping X ↦ X#_{ρ/(ρ+n)}A_i over the atoms, A₁ first by default."""
    return TrotterMap(atoms, rho, weights=weights, order=order)


def trotter_product(
    atoms: Sequence[SpdMatrix],
    t: float,
    m: int,
    x: SpdMatrix,
    order: Order = "forward",
    weights: ArrayLike | None = None,
) -> SpdMatrix:
    """(F_{t/m})^m X: m sweeps of geodesic steps, no inner solves."""
    if not t > 0.0 or m < 1:
        raise ValueError(f"need t > 0 and m ≥ 1, got t={t}, m={m}")
    f = trotter_map(atoms, t / m, weights=weights, order=order)
    for _ in range(m):
        x = f(x)
    return x


def cauchy_residual(
    mu: DiscreteMeasure,
    x: SpdMatrix,
    h: float,
    tol: float = 1e-9,
    cfg: SolverConfig | None = None,
) -> float:
    """‖(S(h)X − X)/h − φ_μ(X)‖ in the spectral norm."""
    if not h > 0.0:
        raise ValueError(f"step must be positive, got {h}")
    moved = semigroup(mu, h, x, tol=tol, cfg=cfg).state
    diff = (moved.data - x.data) / h - karcher_residual(mu, x).data
    return float(np.linalg.norm(diff, 2))


def chernoff_gap(
    f: NonexpansiveMap, t: float, m: int, x: SpdMatrix, tol: float = 1e-9
) -> tuple[float, float]:
    """
    Both sides of d_∞(F^m(X), S_ρ(t)X) ≤ [t/ρ − m + 2√((t/ρ − m)² + t/ρ)]·d_∞(X, F(X)).
    """
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    y = x
    for _ in range(m):
        y = f(y)
    flowed = approx_semigroup(f, t, x, tol).state
    ratio = t / f.rho
    gap = ratio - m
    rhs = (gap + 2.0 * math.sqrt(gap * gap + ratio)) * f.displacement(x)
    return thompson_distance(y, flowed), rhs
