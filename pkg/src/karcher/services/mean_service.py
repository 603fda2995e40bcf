"""Power means, the Karcher mean, the Karcher vector field φ_μ, resolvents and Dφ_μ."""

from dataclasses import dataclass

import numpy as np
import structlog

from karcher.exceptions import ConvergenceError
from karcher.models.matrix import SpdMatrix, SymMatrix
from karcher.models.measure import DiscreteMeasure
from karcher.schemas.solver import SolveReport, SolverConfig
from karcher.services.geometry_service import (
    check_same_dim,
    dlog,
    mat_exp,
    relative,
    thompson_distance,
)
from karcher.services.measure_service import inverse_pushforward, mix

logger = structlog.get_logger()

# Iterations granted to one residual polish attempt before continuation moves on in t.
POLISH_TRIAL = 200
MIN_DAMPING = 2.0**-30


@dataclass
class _PolishOutcome:
    state: SpdMatrix
    residual: float
    iterations: int
    converged: bool


def arithmetic_mean(mu: DiscreteMeasure) -> SpdMatrix:
    return SpdMatrix(sum(w * a.data for a, w in mu))


def _whitened_field(mu: DiscreteMeasure, x: SpdMatrix) -> np.ndarray:
    """Σ w_i·log(X^{-1/2}A_iX^{-1/2}), the Karcher field seen from X."""
    total = np.zeros((x.n, x.n))
    for a, w in mu:
        if a is x or a.same_values(x):
            continue
        c = relative(x, a)
        total += w * c.eigen.apply(np.log(c.eigen.d))
    return total


def _relative_residual(x: SpdMatrix, field: np.ndarray) -> float:
    return float(np.linalg.norm(x.sqrt @ field @ x.sqrt, 2)) / x.max_eig


def karcher_residual(mu: DiscreteMeasure, x: SpdMatrix) -> SymMatrix:
    """φ_μ(X) = Σ w_i·log_X A_i."""
    check_same_dim(mu.atoms[0], x)
    return SymMatrix(x.sqrt @ _whitened_field(mu, x) @ x.sqrt)


def _power_step(mu: DiscreteMeasure, x: SpdMatrix, t: float) -> SpdMatrix:
    total = np.zeros((x.n, x.n))
    for a, w in mu:
        if a is x or a.same_values(x):
            total += w * np.eye(x.n)
            continue
        c = relative(x, a)
        total += w * c.eigen.apply(c.eigen.d**t)
    return SpdMatrix(x.sqrt @ total @ x.sqrt)


def power_mean(
    mu: DiscreteMeasure,
    t: float,
    cfg: SolverConfig | None = None,
    start: SpdMatrix | None = None,
) -> tuple[SpdMatrix, SolveReport]:
    """
    Power mean P_t(μ), the fixed point of X ↦ Σ w_i·X#_tA_i.

    For t in (0, 1] the map is a (1−t)-contraction and is iterated from the arithmetic mean
    (or ``start``) until d_∞(X, f(X)) ≤ tol; the returned report certifies
    d_∞(result, P_t) ≤ residual/t. Orders t in [−1, 0) use P_t(μ) = P_{−t}(μ^{-1})^{-1}.
    """
    cfg = cfg or SolverConfig()
    if not -1.0 <= t <= 1.0 or t == 0.0:
        raise ValueError(f"power mean order must lie in [-1, 0) or (0, 1], got {t}")
    if start is not None:
        check_same_dim(mu.atoms[0], start)
    if t < 0.0:
        inv_start = None if start is None else start.inverse()
        x, report = power_mean(inverse_pushforward(mu), -t, cfg, inv_start)
        return x.inverse(), report
    if mu.size == 1:
        return mu.atoms[0], SolveReport(iterations=0, residual=0.0, certified_bound=0.0)
    if t == 1.0:
        return arithmetic_mean(mu), SolveReport(iterations=1, residual=0.0, certified_bound=0.0)

    x = start if start is not None else arithmetic_mean(mu)
    residual = float("inf")
    for k in range(1, cfg.max_iter + 1):
        y = _power_step(mu, x, t)
        residual = thompson_distance(x, y)
        x = y
        if residual <= cfg.tol:
            logger.debug("power_mean_converged", t=t, iterations=k, residual=residual)
            return x, SolveReport(iterations=k, residual=residual, certified_bound=residual / t)

    report = SolveReport(iterations=cfg.max_iter, residual=residual, certified_bound=residual / t)
    logger.warning("power_mean_max_iter", t=t, residual=residual)
    raise ConvergenceError(f"power mean P_{t} did not reach tol={cfg.tol}", report, x)


def _polish(
    mu: DiscreteMeasure, start: SpdMatrix, cfg: SolverConfig, budget: int
) -> _PolishOutcome:
    """
    Damped residual iteration X ← exp_X(damping·φ_μ(X)).

    A step that does not strictly lower the residual halves the damping, so a residual
    stuck at roundoff ends the polish after at most log2(1/MIN_DAMPING) rejections.
    """
    x = start
    field = _whitened_field(mu, x)
    residual = _relative_residual(x, field)
    damping = cfg.damping
    iterations = 0
    while residual > cfg.tol and iterations < budget:
        iterations += 1
        step = mat_exp(SymMatrix(damping * field))
        candidate = SpdMatrix(x.sqrt @ step.data @ x.sqrt)
        candidate_field = _whitened_field(mu, candidate)
        candidate_residual = _relative_residual(candidate, candidate_field)
        if candidate_residual >= residual:
            damping *= 0.5
            if damping < MIN_DAMPING:
                break
            continue
        x, field, residual = candidate, candidate_field, candidate_residual
    return _PolishOutcome(x, residual, iterations, residual <= cfg.tol)


def karcher_mean(
    mu: DiscreteMeasure,
    cfg: SolverConfig | None = None,
    start: SpdMatrix | None = None,
) -> tuple[SpdMatrix, SolveReport]:
    """
    Karcher mean Λ(μ), the zero of φ_μ, with ‖φ_μ(X)‖ ≤ tol·‖X‖ on success.

    Cold solves run power-mean continuation P_{t_start}, P_{t_start·shrink}, … (each warm
    started from the previous one) and try the damped residual polish after every stage;
    shrinking stops once consecutive power means are within 10·tol, after which the polish
    gets the whole remaining budget. A warm ``start`` is polished directly first.
    """
    cfg = cfg or SolverConfig()
    if mu.size == 1:
        return mu.atoms[0], SolveReport(iterations=0, residual=0.0)
    if start is not None:
        check_same_dim(mu.atoms[0], start)

    used = 0
    best: _PolishOutcome | None = None
    if start is not None:
        best = _polish(mu, start, cfg, min(cfg.max_iter, POLISH_TRIAL))
        used += best.iterations
        if best.converged:
            return best.state, SolveReport(iterations=used, residual=best.residual)

    x = start if start is not None else arithmetic_mean(mu)
    t = cfg.power_t_start
    previous: SpdMatrix | None = None
    while used < cfg.max_iter:
        stage_cfg = cfg.model_copy(update={"max_iter": cfg.max_iter - used})
        try:
            p, power_report = power_mean(mu, t, stage_cfg, start=x)
        except ConvergenceError:
            used = cfg.max_iter
            break
        used += power_report.iterations
        stalled = previous is not None and thompson_distance(previous, p) <= 10.0 * cfg.tol
        remaining = cfg.max_iter - used
        attempt = _polish(mu, p, cfg, remaining if stalled else min(remaining, POLISH_TRIAL))
        used += attempt.iterations
        if attempt.converged:
            logger.debug("karcher_mean_converged", iterations=used, t=t, residual=attempt.residual)
            return attempt.state, SolveReport(iterations=used, residual=attempt.residual)
        if best is None or attempt.residual < best.residual:
            best = attempt
        if stalled:
            break
        previous, x, t = p, p, t * cfg.power_t_shrink

    residual = best.residual if best is not None else float("inf")
    logger.warning("karcher_mean_max_iter", iterations=used, residual=residual)
    raise ConvergenceError(
        f"Karcher mean did not reach tol={cfg.tol}",
        SolveReport(iterations=used, residual=residual),
        best.state if best is not None else None,
    )


def resolvent_measure(mu: DiscreteMeasure, lam: float, x: SpdMatrix) -> DiscreteMeasure:
    """The mixture (λ/(λ+1))·μ + (1/(λ+1))·δ_X whose Karcher mean is J_λ(X)."""
    if not lam > 0.0:
        raise ValueError(f"resolvent parameter must be positive, got {lam}")
    check_same_dim(mu.atoms[0], x)
    return mix(mu, DiscreteMeasure.dirac(x), 1.0 / (lam + 1.0))


def resolvent(
    mu: DiscreteMeasure, lam: float, x: SpdMatrix, cfg: SolverConfig | None = None
) -> SpdMatrix:
    """Nonlinear resolvent J_λ^μ(X), warm started from X."""
    state, _ = karcher_mean(resolvent_measure(mu, lam, x), cfg, start=x)
    return state


def dphi(mu: DiscreteMeasure, x: SpdMatrix, v: SymMatrix) -> SymMatrix:
    """
    Fréchet derivative of φ_μ at X in direction V.

    log_X A = R·log(R^{-1}AR^{-1})·R with R = X^{1/2}; the derivative of R solves the
    Sylvester equation R·dR + dR·R = V, which is diagonal in the eigenbasis of X.
    """
    check_same_dim(mu.atoms[0], x)
    check_same_dim(x, v)
    q = x.eigen.q
    root = np.sqrt(x.eigen.d)
    d_root = q @ ((q.T @ v.data @ q) / (root[:, None] + root[None, :])) @ q.T
    r = x.sqrt
    ri = x.inv_sqrt
    d_ri = -ri @ d_root @ ri

    total = np.zeros((x.n, x.n))
    for a, w in mu:
        c = relative(x, a)
        log_c = c.eigen.apply(np.log(c.eigen.d))
        dc = d_ri @ a.data @ ri + ri @ a.data @ d_ri
        d_log_c = dlog(c, SymMatrix(dc)).data
        total += w * (d_root @ log_c @ r + r @ d_log_c @ r + r @ log_c @ d_root)
    return SymMatrix(total)
