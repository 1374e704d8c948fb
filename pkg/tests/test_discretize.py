from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from affdim.config import ConfigError, load_config
from affdim.discretize import (
    ProjectiveMesh,
    assemble_operator,
    discrete_pressure,
    solve_dimension_discretized,
    spectral_radius_power,
)
from affdim.errors import BracketFailed, DimensionMismatch, PowerIterationStalled, SingularMatrix
from reference_values import EXAMPLE2_MESH_ESTIMATES, EXAMPLE2_ROWS


def _rotation(angle: float, scale: float = 1.0) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return scale * np.array([[c, -s], [s, c]])


def test_mesh_angles_and_nearest_point():
    mesh = ProjectiveMesh(4)
    assert np.allclose(mesh.angles, np.pi * np.array([0.5, 1.5, 2.5, 3.5]) / 4)
    assert list(mesh.nearest(mesh.angles)) == [0, 1, 2, 3]
    assert list(mesh.nearest(mesh.angles + np.pi)) == [0, 1, 2, 3]
    assert list(mesh.nearest(np.array([0.0, -0.01, np.pi - 0.01]))) == [0, 3, 3]
    with pytest.raises(ValueError):
        ProjectiveMesh(0)


def test_rows_sum_to_number_of_maps_at_zero(example2):
    op = assemble_operator(example2.matrices, 0.0, ProjectiveMesh(64))
    assert np.allclose(np.asarray(op.matrix.sum(axis=1)).ravel(), len(example2.matrices))
    assert discrete_pressure(example2.matrices, 0.0, ProjectiveMesh(64)) == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("s", [0.3, 1.0, 1.7])
def test_scaled_rotation_is_a_weighted_permutation(s):
    m, r = 32, 0.6
    rot = _rotation(3 * math.pi / m, r)
    op = assemble_operator([rot], s, ProjectiveMesh(m))
    dense = op.matrix.toarray()
    assert np.count_nonzero(dense) == m
    assert np.allclose(dense.sum(axis=0), r**s)
    assert spectral_radius_power(op) == pytest.approx(r**s, rel=1e-12)


def test_weights_match_singular_value_function_on_diagonal():
    a = np.diag([0.5, 0.25])
    mesh = ProjectiveMesh(2)  # angles pi/4 and 3pi/4
    op = assemble_operator([a], 1.5, mesh).matrix.toarray()
    norm = math.hypot(0.5, 0.25) / math.sqrt(2)
    assert op.sum() == pytest.approx(2 * norm**0.5 * (0.125) ** 0.5)


def test_input_validation(example3):
    with pytest.raises(DimensionMismatch):
        assemble_operator(example3.matrices, 1.0, ProjectiveMesh(8))
    with pytest.raises(SingularMatrix):
        assemble_operator([np.array([[1.0, 0.0], [0.0, 0.0]])], 1.0, ProjectiveMesh(8))
    with pytest.raises(ValueError):
        assemble_operator([np.eye(2) / 2], 2.5, ProjectiveMesh(8))
    with pytest.raises(DimensionMismatch):
        solve_dimension_discretized([], 8)


def test_power_iteration_cap():
    # a 2-cycle with unequal weights oscillates forever from the ones vector
    mat = np.array([[0.0, 1.0], [4.0, 0.0]])
    with pytest.raises(PowerIterationStalled):
        spectral_radius_power(mat, cap=50)


def test_expanding_tuple_has_no_bracket():
    with pytest.raises(BracketFailed):
        solve_dimension_discretized([2 * np.eye(2), np.diag([3.0, 2.0])], 16)


@pytest.mark.parametrize("mesh", sorted(EXAMPLE2_MESH_ESTIMATES))
def test_example2_mesh_estimates(example2, mesh):
    s = solve_dimension_discretized(example2.matrices, mesh)
    assert abs(s - float(EXAMPLE2_MESH_ESTIMATES[mesh])) <= 5e-9 + 1e-12
    assert f"{s:.8f}" == EXAMPLE2_MESH_ESTIMATES[mesh]


def test_rotation_equivariance(example2):
    mats = [np.array(a.to_float(), dtype=float) for a in example2.matrices]
    r = _rotation(0.37)
    conjugated = [r @ a @ r.T for a in mats]
    s0 = solve_dimension_discretized(mats, 2**12)
    s1 = solve_dimension_discretized(conjugated, 2**12)
    assert abs(s0 - s1) < 1e-3


def test_fine_mesh_agrees_with_rigorous_value(example2):
    s = solve_dimension_discretized(example2.matrices, 2**15)
    with mpmath.workdps(60):
        rigorous = float(mpmath.mpf(EXAMPLE2_ROWS[14]))
    assert abs(s - rigorous) < 1e-5


def test_planar_rotation_template(fixture_dir):
    try:
        cfg = load_config(fixture_dir / "planar_rotation_template.json")
    except ConfigError as exc:
        pytest.skip(f"template ships without matrices: {exc}")
    s = solve_dimension_discretized(cfg.matrices, 2**12)
    assert 0 < s < 2
