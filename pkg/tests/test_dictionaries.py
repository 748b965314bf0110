"""Steering columns, parameter grids and dictionary construction."""

import numpy as np
import pytest

from offkron import (
    CompressedColumns,
    ParamGrid,
    SteeringColumns,
    build_dictionary,
    init_uniform_grid,
    steering_column,
    uniform_grid,
)


class TestSteeringColumn:
    def test_broadside(self):
        np.testing.assert_allclose(
            steering_column(2, 0.5, 0.0), np.ones(2) / np.sqrt(2))

    def test_endfire(self):
        col = steering_column(2, 0.5, 1.0)
        np.testing.assert_allclose(col, np.array([1, -1]) / np.sqrt(2),
                                   atol=1e-15)

    def test_unit_norm(self):
        rng = np.random.default_rng(0)
        for u in rng.uniform(-1, 1, 10):
            np.testing.assert_allclose(
                np.linalg.norm(steering_column(4, 0.5, u)), 1.0)

    def test_batched_matches_scalar(self):
        us = np.array([-0.3, 0.0, 0.7])
        batch = steering_column(5, 0.5, us)
        for k, u in enumerate(us):
            np.testing.assert_allclose(batch[:, k], steering_column(5, 0.5, u))


class TestGrids:
    def test_two_points(self):
        np.testing.assert_allclose(init_uniform_grid(2).points, [-1.0, 0.0])

    def test_four_points(self):
        np.testing.assert_allclose(init_uniform_grid(4).points,
                                   [-1.0, -0.5, 0.0, 0.5])

    def test_180_points(self):
        grid = init_uniform_grid(180)
        assert grid.points[0] == -1.0
        np.testing.assert_allclose(grid.points[-1], 0.98889, atol=5e-6)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            init_uniform_grid(1)

    def test_custom_bounds(self):
        grid = uniform_grid(4, (0.0, 2.0))
        np.testing.assert_allclose(grid.points, [0.0, 0.5, 1.0, 1.5])

    def test_strictly_increasing_enforced(self):
        with pytest.raises(ValueError):
            ParamGrid(points=np.array([0.0, 0.0, 0.1]))
        with pytest.raises(ValueError):
            ParamGrid(points=np.array([-2.0, 0.0]))


class TestBuildDictionary:
    def test_steering_on_tiny_grid(self):
        H = build_dictionary(SteeringColumns(2),
                             ParamGrid(points=np.array([0.0, 1.0])))
        np.testing.assert_allclose(H[:, 0], np.ones(2) / np.sqrt(2))
        np.testing.assert_allclose(H[:, 1], np.array([1, -1]) / np.sqrt(2),
                                   atol=1e-15)

    def test_identity_compression(self):
        grid = init_uniform_grid(6)
        inner = SteeringColumns(4)
        plain = build_dictionary(inner, grid)
        wrapped = build_dictionary(CompressedColumns(np.eye(4), inner), grid)
        np.testing.assert_allclose(plain, wrapped)

    def test_random_compression_per_column(self):
        rng = np.random.default_rng(1)
        B = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(4, 8)))
        inner = SteeringColumns(8)
        col = CompressedColumns(B, inner)
        grid = init_uniform_grid(5)
        H = build_dictionary(col, grid)
        for k, u in enumerate(grid.points):
            np.testing.assert_allclose(H[:, k], B @ inner(u), atol=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            CompressedColumns(np.eye(3), SteeringColumns(8))

    def test_deterministic(self):
        grid = init_uniform_grid(16)
        col = SteeringColumns(6)
        a = build_dictionary(col, grid)
        b = build_dictionary(col, grid)
        assert np.array_equal(a, b)


class TestIdentifiability:
    def test_distinct_frequencies_give_distinct_columns(self):
        # half-wavelength spacing keeps u -> column injective on (-1, 1]
        rng = np.random.default_rng(2)
        col = SteeringColumns(8, spacing=0.5)
        us = rng.uniform(-1 + 1e-6, 1, size=30)
        for i in range(len(us)):
            for j in range(i + 1, len(us)):
                if abs(us[i] - us[j]) > 1e-9:
                    assert np.linalg.norm(col(us[i]) - col(us[j])) > 1e-8
