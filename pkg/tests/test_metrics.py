"""Metric definitions."""

import numpy as np
import pytest

from offkron import (
    angle_mse,
    channel_nmse,
    nmse,
    residual_energy,
    srr,
    success_probability,
    support_indices,
)


class TestNmse:
    def test_perfect(self):
        assert nmse([1, 2], [1, 2]) == 0.0

    def test_zero_estimate(self):
        assert nmse([1, 2], [0, 0]) == 1.0

    def test_unit_example(self):
        assert nmse([1, 0], [1, 1]) == pytest.approx(1.0)

    def test_zero_truth_rejected(self):
        with pytest.raises(ValueError):
            nmse([0, 0], [1, 1])


class TestSrr:
    def test_equal_supports(self):
        assert srr({1, 2}, {1, 2}) == 1.0

    def test_partial_overlap(self):
        assert srr({1, 2}, {2, 3}) == pytest.approx(1 / 3)

    def test_disjoint(self):
        assert srr({1}, {2}) == 0.0

    def test_both_empty_rejected(self):
        with pytest.raises(ValueError):
            srr(set(), set())

    def test_threshold_extraction(self):
        x = np.array([1.0, 0.01, 0.5, 0.0])
        assert support_indices(x, rel_threshold=0.05) == {0, 2}
        assert support_indices(x, count=3) == {0, 1, 2}


class TestAngleMse:
    def test_permutation_invariant(self):
        assert angle_mse([0.5, -0.5], [-0.5, 0.5]) == 0.0

    def test_small_shift(self):
        assert angle_mse([0.0, 0.2], [0.1, 0.2]) == pytest.approx(0.005)

    def test_count_mismatch(self):
        with pytest.raises(ValueError):
            angle_mse([0.1], [0.1, 0.2])


class TestSuccessProbability:
    def test_all_below(self):
        assert success_probability([0.0, 0.0]) == 1.0

    def test_all_above(self):
        assert success_probability([1.0, 2.0]) == 0.0

    def test_half(self):
        assert success_probability([1e-7, 1e-5]) == 0.5

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            success_probability([])


class TestChannelNmse:
    def test_perfect(self):
        H = [np.eye(2), np.ones((2, 2))]
        assert channel_nmse(H, [h.copy() for h in H]) == 0.0

    def test_zero_estimates(self):
        H = [np.eye(2)]
        assert channel_nmse(H, [np.zeros((2, 2))]) == 1.0

    def test_scaled_estimate(self):
        H = [np.eye(3)]
        assert channel_nmse(H, [2 * np.eye(3)]) == pytest.approx(1.0)

    def test_count_mismatch(self):
        with pytest.raises(ValueError):
            channel_nmse([np.eye(2)], [])


class TestResidualEnergy:
    def test_equal(self):
        assert residual_energy([1, 2], [1, 2]) == 0.0

    def test_zero_clean(self):
        assert residual_energy([0, 0], [3, 4]) == 25.0

    def test_unit_difference(self):
        assert residual_energy([1, 1], [1, 2]) == 1.0
