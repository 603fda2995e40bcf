"""Seeded SPD laws, empirical measures and law-of-large-numbers tables."""

import csv
import io
from collections.abc import Mapping, Sequence

import numpy as np
import structlog

from karcher.exceptions import DimensionMismatchError, JobFailedError, RowFailedError
from karcher.models.law import LlnRow, SpdLaw
from karcher.models.matrix import SpdMatrix, SymMatrix
from karcher.models.measure import DiscreteMeasure
from karcher.schemas.solver import SolverConfig
from karcher.services.flow_service import semigroup
from karcher.services.geometry_service import mat_exp, thompson_distance
from karcher.services.mean_service import karcher_mean
from karcher.services.measure_service import merge_duplicates, w1
from karcher.workers.executor import ordered_map

logger = structlog.get_logger()

EMPIRICAL_STREAM = 0
REFERENCE_STREAM = 1
REFERENCE_FACTOR = 16
CSV_COLUMNS = ("n", "w1_to_law", "d_mean", "d_flow", "seed")


def stream(seed: int, index: int, domain: int = EMPIRICAL_STREAM) -> np.random.Generator:
    """Counter-based generator owned by draw ``index`` of stream ``domain`` under ``seed``."""
    key = np.array([seed % 2**64, (domain << 48) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def random_spd(rng: np.random.Generator, n: int, spread: float = 1.0) -> SpdMatrix:
    """Random SPD matrix: Haar-like eigenbasis, log-eigenvalues uniform in [−spread, spread]."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    logs = rng.uniform(-spread, spread, size=n)
    return SpdMatrix.from_eigen(q * signs, np.exp(logs))


def random_measure(
    rng: np.random.Generator, n: int, k: int, spread: float = 1.0, uniform: bool = False
) -> DiscreteMeasure:
    """k random atoms of dimension n, uniform or random positive weights."""
    atoms = [random_spd(rng, n, spread) for _ in range(k)]
    weights = None if uniform else rng.uniform(0.2, 1.0, size=k)
    return DiscreteMeasure(atoms, weights)


def _draw(
    law: SpdLaw, index: int, n: int, seed: int, stratified: bool, domain: int, cdf: np.ndarray
) -> SpdMatrix:
    if law.kind == "finite":
        assert law.measure is not None
        u = (index + 0.5) / n if stratified else stream(seed, index, domain).random()
        pick = min(int(np.searchsorted(cdf, u, side="right")), law.measure.size - 1)
        return law.measure.atoms[pick]

    assert law.base is not None and law.scale is not None
    z = stream(seed, index, domain).standard_normal((law.dim, law.dim))
    g = (z + z.T) * 0.5
    return mat_exp(SymMatrix(law.base.sqrt @ g @ law.base.sqrt * law.scale))


def sample(
    law: SpdLaw,
    n: int,
    seed: int,
    *,
    stratified: bool = False,
    domain: int = EMPIRICAL_STREAM,
) -> DiscreteMeasure:
    """
    Empirical measure μ_n with uniform weights.

    Draw i has its own counter-based stream, so μ_n is a prefix of μ_{n'} for n < n'.
    ``stratified`` replaces uniform draws of a finite law by the midpoints (i+½)/n.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    cdf = np.cumsum(law.measure.weights) if law.measure is not None else np.empty(0)
    atoms = [_draw(law, i, n, seed, stratified, domain, cdf) for i in range(n)]
    return DiscreteMeasure.uniform(atoms)


def reference_size(law: SpdLaw, sizes: Sequence[int]) -> int:
    if law.kind == "finite":
        assert law.measure is not None
        return law.measure.size
    return REFERENCE_FACTOR * max(sizes)


def reference_measure(law: SpdLaw, sizes: Sequence[int], seed: int) -> DiscreteMeasure:
    """The law itself when finite, else one large sample from a separate stream."""
    if law.kind == "finite":
        assert law.measure is not None
        return law.measure
    return sample(law, reference_size(law, sizes), seed, domain=REFERENCE_STREAM)


def _check_sizes(sizes: Sequence[int]) -> None:
    if not sizes:
        raise ValueError("sizes must be nonempty")
    if any(n < 1 for n in sizes) or any(a >= b for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"sizes must be positive and strictly ascending, got {list(sizes)}")


def lln_run(
    law: SpdLaw,
    sizes: Sequence[int],
    t: float,
    x: SpdMatrix,
    seed: int,
    cfg: SolverConfig | None = None,
    *,
    flow_tol: float = 1e-6,
    threads: int = 1,
    stratified: bool = False,
) -> list[LlnRow]:
    """
    One row per sample size comparing μ_n against the reference measure.

    d_mean compares Karcher means, d_flow compares S(t)X under both measures (zero when
    t = 0), and w1_to_law is the exact W₁ distance for finite laws.
    """
    _check_sizes(sizes)
    if t < 0.0:
        raise ValueError(f"flow time must be nonnegative, got {t}")
    if law.dim != x.n:
        raise DimensionMismatchError(law.dim, x.n)
    cfg = cfg or SolverConfig()

    reference = merge_duplicates(reference_measure(law, sizes, seed))
    ref_mean, _ = karcher_mean(reference, cfg)
    ref_flow = semigroup(reference, t, x, flow_tol, cfg).state if t > 0.0 else x
    logger.info("lln_reference_ready", kind=law.kind, reference_size=reference.size)

    def row(n: int) -> LlnRow:
        mu_n = merge_duplicates(sample(law, n, seed, stratified=stratified))
        w1_value = w1(mu_n, reference)[0] if law.kind == "finite" else None
        mean_n, _ = karcher_mean(mu_n, cfg)
        flow_n = semigroup(mu_n, t, x, flow_tol, cfg).state if t > 0.0 else x
        result = LlnRow(
            n=n,
            w1_to_law=w1_value,
            d_mean=thompson_distance(mean_n, ref_mean),
            d_flow=thompson_distance(flow_n, ref_flow),
            seed=seed,
        )
        logger.info("lln_row_done", n=n, d_mean=result.d_mean, d_flow=result.d_flow)
        return result

    try:
        return ordered_map(row, list(sizes), threads)
    except JobFailedError as exc:
        logger.error("lln_row_failed", row_index=exc.index, error=str(exc.cause))
        raise RowFailedError(exc.index, exc.cause) from exc.cause


def _real(value: float | None) -> str:
    return "" if value is None else format(value, ".17g")


def format_csv(rows: Sequence[LlnRow], header: Mapping[str, object] | None = None) -> str:
    """CSV table with optional ``# key=value`` header lines before the column row."""
    buf = io.StringIO()
    for key, value in (header or {}).items():
        rendered = _real(value) if isinstance(value, float) else value
        buf.write(f"# {key}={rendered}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.n, _real(r.w1_to_law), _real(r.d_mean), _real(r.d_flow), r.seed])
    return buf.getvalue()
