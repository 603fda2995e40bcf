"""Tests for power means, Karcher means, resolvents and the residual derivative."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from karcher.exceptions import ConvergenceError
from karcher.models.matrix import SpdMatrix, SymMatrix
from karcher.models.measure import DiscreteMeasure
from karcher.schemas.solver import SolverConfig
from karcher.services.geometry_service import (
    geodesic,
    log_point,
    loewner_leq,
    thompson_distance,
)
from karcher.services.lln_service import random_spd
from karcher.services.mean_service import (
    MIN_DAMPING,
    _polish,
    arithmetic_mean,
    dphi,
    karcher_mean,
    karcher_residual,
    power_mean,
    resolvent,
    resolvent_measure,
)
from karcher.services.measure_service import first_moment, geodesic_pushforward, w1


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_two_point_closed_form(two_atoms, precise_config, t):
    """Test Λ((1−t)δ_A + tδ_B) = A#_tB."""
    a, b = two_atoms
    mean, _ = karcher_mean(DiscreteMeasure([a, b], [1.0 - t, t]), precise_config)
    assert thompson_distance(mean, geodesic(a, b, t)) <= 1e-9


def test_commutative_oracle(rng, precise_config):
    """Test diagonal atoms give exp(Σ w_i log A_i)."""
    for _ in range(5):
        logs = rng.uniform(-1.0, 1.0, size=(4, 3))
        weights = rng.uniform(0.2, 1.0, size=4)
        mu = DiscreteMeasure([SpdMatrix(np.diag(np.exp(row))) for row in logs], weights)
        expected = SpdMatrix(np.diag(np.exp(mu.weights @ logs)))
        mean, report = karcher_mean(mu, precise_config)
        assert thompson_distance(mean, expected) <= 1e-8
        assert report.residual <= precise_config.tol


def test_karcher_mean_zeroes_residual(make_measure):
    """Test the returned mean satisfies the residual tolerance."""
    mu = make_measure(n=4, k=5, spread=1.0)
    mean, report = karcher_mean(mu)
    assert report.residual <= 1e-10
    assert karcher_residual(mu, mean).spectral_norm() <= 1e-9 * mean.spectral_norm()


def test_single_atom_mean(two_atoms):
    """Test a Dirac measure is its own mean without iterating."""
    a, _ = two_atoms
    mean, report = karcher_mean(DiscreteMeasure.dirac(a))
    assert mean is a
    assert report.iterations == 0


def test_w1_contraction(make_measure):
    """Test d_∞(Λ(μ), Λ(ν)) ≤ W₁(μ, ν)."""
    for _ in range(10):
        mu, nu = make_measure(k=3), make_measure(k=2)
        lhs = thompson_distance(karcher_mean(mu)[0], karcher_mean(nu)[0])
        assert lhs <= w1(mu, nu)[0] + 1e-8


def test_uniform_support_contraction(make_measure):
    """Test d_∞(Λ(μ), Λ(ν)) ≤ (1/n)Σ d_∞(A_i, B_i) for uniform measures."""
    for _ in range(10):
        mu, nu = make_measure(k=3, uniform=True), make_measure(k=3, uniform=True)
        lhs = thompson_distance(karcher_mean(mu)[0], karcher_mean(nu)[0])
        rhs = np.mean([thompson_distance(a, b) for a, b in zip(mu.atoms, nu.atoms)])
        assert lhs <= rhs + 1e-8


def test_multistart_uniqueness(make_measure, make_spd, precise_config):
    """Test warm starts from anywhere reach the same mean."""
    mu = make_measure()
    reference, _ = karcher_mean(mu, precise_config)
    for _ in range(10):
        other, _ = karcher_mean(mu, precise_config, start=make_spd(3, 1.5))
        assert thompson_distance(reference, other) <= 1e-8


def test_karcher_mean_cap_raises_with_best_state(make_measure):
    """Test an exhausted budget raises ConvergenceError carrying the best iterate."""
    mu = make_measure(spread=1.0)
    with pytest.raises(ConvergenceError) as info:
        karcher_mean(mu, SolverConfig(tol=1e-14, max_iter=2))
    assert info.value.report.iterations <= 2


def test_polish_stops_when_residual_stagnates(make_measure, precise_config):
    """Test an unreachable tolerance ends the polish at roundoff instead of the budget."""
    mu = make_measure()
    mean, _ = karcher_mean(mu, precise_config)
    outcome = _polish(mu, mean, SolverConfig(tol=1e-30), budget=100_000)
    assert not outcome.converged
    assert outcome.iterations < 1_000
    assert math.log2(1.0 / MIN_DAMPING) <= outcome.iterations
    assert thompson_distance(outcome.state, mean) <= 1e-9


def test_power_mean_endpoints(make_measure):
    """Test P_1 is the arithmetic mean and P_{−1} the harmonic mean."""
    mu = make_measure()
    p1, _ = power_mean(mu, 1.0)
    assert_allclose(p1.data, arithmetic_mean(mu).data)
    harmonic = np.linalg.inv(sum(w * np.linalg.inv(a.data) for a, w in mu))
    assert_allclose(power_mean(mu, -1.0)[0].data, harmonic, atol=1e-12)


def test_power_mean_rejects_bad_order(make_measure):
    """Test t outside [−1, 0) ∪ (0, 1] is refused."""
    mu = make_measure()
    for t in (0.0, 1.5, -2.0):
        with pytest.raises(ValueError):
            power_mean(mu, t)


def test_power_mean_certified_bound(make_measure, precise_config):
    """Test the certified bound covers the distance to a tighter solve."""
    mu = make_measure()
    loose, report = power_mean(mu, 0.5, SolverConfig(tol=1e-6))
    tight, _ = power_mean(mu, 0.5, precise_config)
    assert thompson_distance(loose, tight) <= report.certified_bound + 1e-12


def test_power_mean_monotone_in_order(make_measure):
    """Test P_t ≤ P_s for t ≤ s and the sandwich P_{−t} ≤ Λ ≤ P_t."""
    mu = make_measure()
    mean, _ = karcher_mean(mu)
    orders = [0.1, 0.3, 0.6, 1.0]
    means = [power_mean(mu, t)[0] for t in orders]
    for low, high in zip(means, means[1:]):
        assert loewner_leq(low, high, tol=1e-8)
    for t in orders:
        assert loewner_leq(power_mean(mu, -t)[0], mean, tol=1e-8)
        assert loewner_leq(mean, power_mean(mu, t)[0], tol=1e-8)


def test_power_mean_operator_monotone(make_measure, make_spd):
    """Test A_i ≤ B_i implies P_t(μ) ≤ P_t(ν)."""
    mu = make_measure(uniform=True)
    nu = DiscreteMeasure([SpdMatrix(a.data + make_spd().data) for a in mu.atoms])
    for t in (0.2, 0.5, 0.9):
        assert loewner_leq(power_mean(mu, t)[0], power_mean(nu, t)[0], tol=1e-8)


@pytest.mark.slow
def test_power_mean_approaches_karcher_mean(rng, precise_config):
    """Test d_∞(P_{2^-k}(μ), Λ(μ)) decreases over k = 1..10 and ends below 1e-4."""
    atoms = [random_spd(rng, 2, 0.25) for _ in range(3)]
    mu = DiscreteMeasure(atoms, rng.uniform(0.2, 1.0, size=3))
    mean, _ = karcher_mean(mu, precise_config)
    cfg = SolverConfig(tol=1e-10, max_iter=400_000)
    gaps = [thompson_distance(power_mean(mu, 2.0**-k, cfg)[0], mean) for k in range(1, 11)]
    assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 1e-4


def test_resolvent_is_mean_of_mixture(make_measure, make_spd):
    """Test the resolvent mixture weights and small-λ limit."""
    mu, x = make_measure(), make_spd()
    mixture = resolvent_measure(mu, 1.0, x)
    assert mixture.size == mu.size + 1
    assert mixture.weights[-1] == pytest.approx(0.5)
    assert thompson_distance(resolvent(mu, 1e-8, x), x) <= 1e-7
    with pytest.raises(ValueError):
        resolvent_measure(mu, 0.0, x)


def test_resolvent_contraction(make_measure, make_spd, precise_config):
    """Test d_∞(J_λX, J_λY) ≤ d_∞(X, Y)/(1+λ)."""
    mu = make_measure()
    for lam in (0.1, 1.0, 3.0):
        x, y = make_spd(), make_spd()
        lhs = thompson_distance(
            resolvent(mu, lam, x, precise_config), resolvent(mu, lam, y, precise_config)
        )
        assert lhs <= thompson_distance(x, y) / (1.0 + lam) + 1e-8


def test_resolvent_identity(make_measure, make_spd, precise_config):
    """Test J_τX = J_λ(J_τX #_{λ/τ} X) for λ < τ."""
    mu, x = make_measure(), make_spd()
    lam, tau = 0.4, 1.3
    j_tau = resolvent(mu, tau, x, precise_config)
    again = resolvent(mu, lam, geodesic(j_tau, x, lam / tau), precise_config)
    assert thompson_distance(j_tau, again) <= 1e-8


def test_iterated_resolvent_bound(make_measure, make_spd):
    """Test d_∞(J_λⁿX, X) ≤ n·λ/(1+λ)·first_moment(μ, X)."""
    mu, x = make_measure(), make_spd()
    lam = 0.7
    y = x
    for n in range(1, 4):
        y = resolvent(mu, lam, y)
        assert thompson_distance(y, x) <= n * lam / (1.0 + lam) * first_moment(mu, x) + 1e-8


def test_resolvent_asymptotics(make_measure, make_spd, precise_config):
    """Test log_J(X) − (X − J) shrinks quadratically in λ."""
    mu, x = make_measure(), make_spd()
    gaps = []
    for lam in (0.1, 0.05, 0.025):
        j = resolvent(mu, lam, x, precise_config)
        gaps.append((log_point(j, x) - (x - j)).spectral_norm())
    for coarse, fine in zip(gaps, gaps[1:]):
        assert 3.0 <= coarse / fine <= 5.0


def test_geodesic_pushforward_mean_bound(make_measure, make_spd):
    """Test d_∞(Λ(X#_tμ), X) ≤ t·first_moment(μ, X)."""
    mu, x = make_measure(), make_spd()
    for t in (0.1, 0.5, 0.9):
        mean, _ = karcher_mean(geodesic_pushforward(mu, x, t))
        assert thompson_distance(mean, x) <= t * first_moment(mu, x) + 1e-8


def test_dphi_matches_finite_differences(make_measure, make_spd, rng):
    """Test the residual derivative against central differences."""
    for _ in range(5):
        mu, x = make_measure(), make_spd()
        z = rng.standard_normal((3, 3))
        v = SymMatrix(z + z.T)
        h = 1e-5 * x.spectral_norm() / v.spectral_norm()
        fd = (
            karcher_residual(mu, SpdMatrix(x.data + h * v.data)).data
            - karcher_residual(mu, SpdMatrix(x.data - h * v.data)).data
        ) / (2.0 * h)
        exact = dphi(mu, x, v).data
        assert np.linalg.norm(fd - exact, 2) <= 1e-6 * np.linalg.norm(exact, 2)


def test_dphi_lower_bound_at_mean(make_measure, make_spd, precise_config):
    """Test ‖Dφ(Λ)[log_Λ Z]‖ ≥ λ_min(Λ)·d_∞(Λ, Z)."""
    mu = make_measure()
    mean, _ = karcher_mean(mu, precise_config)
    for _ in range(20):
        z = make_spd()
        image = dphi(mu, mean, log_point(mean, z)).spectral_norm()
        assert image >= mean.min_eig * thompson_distance(mean, z) - 1e-8
