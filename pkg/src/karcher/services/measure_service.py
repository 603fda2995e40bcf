"""Mixing, pushforwards, moments and exact W₁ transport for discrete measures."""

import itertools
from collections.abc import Callable

import numpy as np
import ot
import structlog

from karcher.config import DEDUP_DISTANCE
from karcher.exceptions import ConstructionError, DimensionMismatchError
from karcher.models.matrix import SpdMatrix
from karcher.models.measure import Coupling, DiscreteMeasure
from karcher.services.geometry_service import check_same_dim, geodesic, thompson_distance

logger = structlog.get_logger()

ORACLE_MAX_ATOMS = 8


def _is_duplicate(a: SpdMatrix, b: SpdMatrix) -> bool:
    if a is b or a.same_values(b):
        return True
    # Frobenius prescreen before the eigen-based distance
    if np.linalg.norm(a.data - b.data) > 1e-10 * np.linalg.norm(a.data):
        return False
    return thompson_distance(a, b) <= DEDUP_DISTANCE


def merge_duplicates(mu: DiscreteMeasure) -> DiscreteMeasure:
    """Collapse atoms within Thompson distance 1e-14 of an earlier atom, summing weights."""
    atoms: list[SpdMatrix] = []
    weights: list[float] = []
    for atom, w in mu:
        for i, kept in enumerate(atoms):
            if _is_duplicate(kept, atom):
                weights[i] += float(w)
                break
        else:
            atoms.append(atom)
            weights.append(float(w))
    if len(atoms) == mu.size:
        return mu
    return DiscreteMeasure(atoms, weights)


def mix(mu: DiscreteMeasure, nu: DiscreteMeasure, s: float) -> DiscreteMeasure:
    """(1−s)·μ + s·ν with duplicate atoms merged."""
    if not 0.0 <= s <= 1.0:
        raise ConstructionError(f"mixing parameter must lie in [0, 1], got {s}")
    if mu.dim != nu.dim:
        raise DimensionMismatchError(mu.dim, nu.dim)
    atoms = mu.atoms + nu.atoms
    weights = np.concatenate([(1.0 - s) * mu.weights, s * nu.weights])
    return merge_duplicates(DiscreteMeasure(atoms, weights))


def first_moment(mu: DiscreteMeasure, x: SpdMatrix) -> float:
    """Σ w_i·d_∞(X, A_i)."""
    check_same_dim(mu.atoms[0], x)
    return float(sum(w * thompson_distance(x, a) for a, w in mu))


def cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure) -> np.ndarray:
    """Pairwise Thompson distances, rows indexed by μ's atoms."""
    if mu.dim != nu.dim:
        raise DimensionMismatchError(mu.dim, nu.dim)
    cost = np.empty((mu.size, nu.size))
    for i, a in enumerate(mu.atoms):
        for j, b in enumerate(nu.atoms):
            cost[i, j] = thompson_distance(a, b)
    return cost


def w1(mu: DiscreteMeasure, nu: DiscreteMeasure) -> tuple[float, Coupling]:
    """Exact L¹-Wasserstein distance by network simplex, with an optimal coupling."""
    cost = cost_matrix(mu, nu)
    a = np.ascontiguousarray(mu.weights, dtype=np.float64)
    b = np.ascontiguousarray(nu.weights, dtype=np.float64)
    plan = ot.emd(a, b, np.ascontiguousarray(cost), numItermax=1_000_000)
    plan = np.maximum(plan, 0.0)
    value = float(np.sum(plan * cost))
    logger.debug("w1_solved", rows=mu.size, cols=nu.size, value=value)
    return value, Coupling(plan=plan)


def w1_uniform_oracle(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Exhaustive minimum over assignments for uniform equal-size measures (≤ 8 atoms)."""
    if mu.size != nu.size:
        raise ConstructionError("oracle needs measures with the same number of atoms")
    if mu.size > ORACLE_MAX_ATOMS:
        raise ConstructionError(f"oracle is limited to {ORACLE_MAX_ATOMS} atoms, got {mu.size}")
    if not (mu.is_uniform() and nu.is_uniform()):
        raise ConstructionError("oracle needs uniform measures")
    cost = cost_matrix(mu, nu)
    rows = np.arange(mu.size)
    best = min(
        float(cost[rows, list(perm)].sum()) for perm in itertools.permutations(range(mu.size))
    )
    return best / mu.size


def pushforward(
    mu: DiscreteMeasure, f: Callable[[SpdMatrix], SpdMatrix]
) -> DiscreteMeasure:
    """Image measure: atoms mapped by ``f``, weights kept."""
    return DiscreteMeasure([f(a) for a in mu.atoms], mu.weights)


def geodesic_pushforward(mu: DiscreteMeasure, x: SpdMatrix, t: float) -> DiscreteMeasure:
    """X#_tμ, the image of μ under A ↦ X#_tA."""
    return pushforward(mu, lambda a: geodesic(x, a, t))


def inverse_pushforward(mu: DiscreteMeasure) -> DiscreteMeasure:
    """Image of μ under matrix inversion."""
    return pushforward(mu, lambda a: a.inverse())
