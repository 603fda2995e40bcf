"""Tests for the executable invariant suite."""

import pytest

from karcher.services import check_service
from karcher.services.check_service import DEFAULT_DIMS, REGISTRY, Check, run_checks

CHEAP_CORE = ["metric_axioms", "emi", "geodesic_contraction"]


def test_registry_anchors_unique_and_grouped():
    """Test every anchor is unique and every module has checks."""
    anchors = [c.anchor for c in REGISTRY]
    assert len(anchors) == len(set(anchors))
    assert {c.module for c in REGISTRY} == {"pd_core", "measures", "means", "flow", "lln"}
    for name in (
        "geodesic_contraction",
        "two_point_closed_form",
        "w1_contraction",
        "resolvent_contraction",
        "power_norm_continuity",
        "resolvent_convergence",
        "trotter_convergence",
        "lln_trend",
        "chernoff_bound",
    ):
        assert name in anchors


def test_run_selected_checks():
    """Test a subset of cheap checks passes and reports margins."""
    summary = run_checks(instances=2, seed=0, only=["metric_axioms", "w1_dirac_moment"])
    assert summary.passed == 2
    assert summary.failed == 0
    assert [c.anchor for c in summary.checks] == ["metric_axioms", "w1_dirac_moment"]
    assert all(c.worst_margin is not None and c.worst_margin >= 0 for c in summary.checks)


def test_checks_report_dimensions():
    """Test each result lists the dimensions it ran in and the worst one."""
    summary = run_checks(instances=2, seed=1, only=["metric_axioms"], dims=(2, 3))
    result = summary.checks[0]
    assert result.dims == [2, 3]
    assert result.worst_dim in (2, 3)
    assert run_checks(instances=1, only=["emi"]).checks[0].dims == list(DEFAULT_DIMS)


def test_core_checks_hold_across_many_instances():
    """Test the cheap geometry checks at fifty instances in dimensions 2 and 4."""
    summary = run_checks(instances=50, seed=3, only=CHEAP_CORE, dims=(2, 4))
    assert summary.failed == 0


@pytest.mark.slow
def test_core_checks_hold_in_high_dimension():
    """Test the cheap geometry checks in dimensions 8 and 16."""
    summary = run_checks(instances=50, seed=3, only=CHEAP_CORE, dims=(8, 16))
    assert summary.failed == 0


def test_run_checks_is_reproducible():
    """Test the same seed gives the same margins with or without threads."""
    only = ["geodesic_contraction", "emi", "w1_permutation_oracle"]
    serial = run_checks(instances=2, seed=4, only=only)
    pooled = run_checks(instances=2, seed=4, only=only, threads=3)
    assert serial == pooled


def test_unknown_anchor():
    """Test unknown anchors are refused."""
    with pytest.raises(ValueError):
        run_checks(only=["no_such_check"])


@pytest.mark.parametrize("dims", [(), (0,), (2, -1)])
def test_invalid_dimensions(dims):
    """Test empty or non-positive dimensions are refused."""
    with pytest.raises(ValueError):
        run_checks(instances=1, only=["emi"], dims=dims)


def test_invalid_instances():
    """Test a non-positive instance count is refused."""
    with pytest.raises(ValueError):
        run_checks(instances=0, only=["emi"])


def test_crashing_and_failing_checks(monkeypatch):
    """Test exceptions and negative margins are reported as failures."""

    def crash(draw, instances):
        raise RuntimeError("kaput")

    def negative(draw, instances):
        return -1.0

    monkeypatch.setattr(
        check_service,
        "REGISTRY",
        [Check("crash", "pd_core", crash), Check("negative", "pd_core", negative)],
    )
    summary = run_checks(instances=1, dims=(2, 4))
    assert summary.failed == 2
    assert summary.checks[0].detail == "n=2: RuntimeError: kaput"
    assert summary.checks[0].worst_dim == 2
    assert summary.checks[1].worst_margin == -1.0


def test_worst_margin_is_taken_over_dimensions(monkeypatch):
    """Test the reported margin is the smallest over all dimensions."""

    def by_dim(draw, instances):
        return 1.0 / draw.n

    monkeypatch.setattr(check_service, "REGISTRY", [Check("by_dim", "pd_core", by_dim)])
    result = run_checks(instances=1, dims=(2, 5, 3)).checks[0]
    assert result.worst_margin == pytest.approx(0.2)
    assert result.worst_dim == 5


@pytest.mark.slow
def test_full_suite_passes():
    """Test every registered invariant holds in dimensions 2 and 4."""
    summary = run_checks(instances=3, seed=0, dims=(2, 4))
    failed = [c.anchor for c in summary.checks if not c.passed]
    assert failed == []
