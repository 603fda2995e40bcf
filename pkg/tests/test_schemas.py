"""Tests for JSON payload schemas."""

import json

import pytest
from pydantic import ValidationError

from karcher.exceptions import ConstructionError
from karcher.models.flow import FlowResult
from karcher.models.matrix import SpdMatrix
from karcher.schemas import (
    FailureResponse,
    FlowResultSchema,
    MatrixSchema,
    MeasureSchema,
    SolveReport,
    SolverConfig,
)


def test_matrix_schema_size_check():
    """Test n·n entries are required."""
    with pytest.raises(ValidationError):
        MatrixSchema(n=2, data=[1.0, 0.0, 0.0])
    with pytest.raises(ValidationError):
        MatrixSchema(n=0, data=[])


def test_matrix_schema_to_spd_rejects_indefinite():
    """Test a well-formed but indefinite matrix fails on conversion."""
    schema = MatrixSchema(n=2, data=[1.0, 2.0, 2.0, 1.0])
    with pytest.raises(ConstructionError):
        schema.to_spd()


def test_matrix_round_trip_is_exact(make_spd):
    """Test matrices written as JSON re-parse to identical floats."""
    a = make_spd(4, 1.0)
    text = MatrixSchema.from_model(a).model_dump_json()
    back = MatrixSchema.model_validate(json.loads(text)).to_spd()
    assert back.to_rows() == a.to_rows()


def test_measure_schema(make_measure):
    """Test measure payloads validate weights and round-trip exactly."""
    mu = make_measure(n=2, k=3)
    text = MeasureSchema.from_model(mu).model_dump_json()
    back = MeasureSchema.model_validate_json(text).to_measure()
    assert back.weights.tolist() == mu.weights.tolist()
    assert [a.to_rows() for a in back.atoms] == [a.to_rows() for a in mu.atoms]

    atom = {"n": 1, "data": [1.0]}
    with pytest.raises(ValidationError):
        MeasureSchema.model_validate({"atoms": [atom, atom], "weights": [1.0]})
    with pytest.raises(ValidationError):
        MeasureSchema.model_validate({"atoms": [atom], "weights": [-1.0]})
    with pytest.raises(ValidationError):
        MeasureSchema.model_validate({"atoms": []})
    assert MeasureSchema.model_validate({"atoms": [atom, atom]}).to_measure().size == 2


def test_solver_config_defaults_and_validation():
    """Test defaults, bounds, frozenness and unknown fields."""
    cfg = SolverConfig.model_validate({})
    assert cfg.tol == 1e-10
    assert cfg.max_iter == 10_000
    assert cfg.power_t_start == 0.5
    with pytest.raises(ValidationError):
        SolverConfig(tol=0.0)
    with pytest.raises(ValidationError):
        SolverConfig(power_t_shrink=1.0)
    with pytest.raises(ValidationError):
        SolverConfig.model_validate({"tolerance": 1e-3})
    with pytest.raises(ValidationError):
        cfg.tol = 1e-3  # type: ignore[misc]


def test_flow_result_schema():
    """Test the flow payload carries state, level and bound."""
    result = FlowResult(state=SpdMatrix.identity(2), n_used=8, error_bound=0.25)
    payload = json.loads(FlowResultSchema.from_model(result).model_dump_json())
    assert payload["state"] == {"n": 2, "data": [1.0, 0.0, 0.0, 1.0]}
    assert payload["n_used"] == 8
    assert payload["error_bound"] == 0.25


def test_failure_response():
    """Test failures serialize their best report."""
    failure = FailureResponse(error="stalled", report=SolveReport(iterations=3, residual=0.5))
    payload = json.loads(failure.model_dump_json())
    assert payload["report"]["iterations"] == 3
