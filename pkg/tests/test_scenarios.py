"""Scenario generators: distributions, separations, structural identities."""

import numpy as np
import pytest

from offkron import (
    add_noise_at_snr,
    gen_irs_scene,
    gen_kron_sparse,
    gen_offgrid_scene,
    gen_worst_case,
    init_uniform_grid,
    kron_vectors,
)


class TestAddNoise:
    def test_noiseless_limit(self):
        rng = np.random.default_rng(0)
        sig = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        noisy, s2 = add_noise_at_snr(sig, np.inf, rng)
        np.testing.assert_array_equal(noisy, sig)
        assert s2 == 0.0

    def test_zero_db_energy_match(self):
        rng = np.random.default_rng(1)
        sig = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        energies = []
        for _ in range(1000):
            noisy, _ = add_noise_at_snr(sig, 0.0, rng)
            energies.append(np.linalg.norm(noisy - sig) ** 2)
        ratio = np.mean(energies) / np.linalg.norm(sig) ** 2
        assert abs(ratio - 1.0) < 0.05

    def test_twenty_db_definition(self):
        rng = np.random.default_rng(2)
        sig = np.ones(100, dtype=complex)
        _, s2 = add_noise_at_snr(sig, 20.0, rng)
        np.testing.assert_allclose(100 * s2, np.linalg.norm(sig) ** 2 / 100.0)

    def test_zero_signal_rejected(self):
        with pytest.raises(ValueError):
            add_noise_at_snr(np.zeros(4), 10.0, np.random.default_rng(0))


class TestKronSparse:
    def test_dimensions(self):
        rng = np.random.default_rng(3)
        truth, dicts = gen_kron_sparse(8, rng)
        assert truth.clean_signal.size == 512
        assert all(H.shape == (8, 12) for H in dicts)
        assert np.prod([len(c) for c in truth.coefs]) == 64

    def test_supports_and_amplitudes(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            truth, _ = gen_kron_sparse(10, rng)
            for support, coefs in zip(truth.supports, truth.coefs):
                assert len(set(support.tolist())) == 4
                assert all(0 <= s < 12 for s in support)
                assert np.all((np.abs(coefs) >= 0.5) & (np.abs(coefs) <= 1.5))
                assert np.all(np.isreal(coefs))

    def test_signal_equals_dictionary_product(self):
        rng = np.random.default_rng(5)
        truth, dicts = gen_kron_sparse(9, rng)
        parts = []
        for i in range(3):
            x = np.zeros(12, dtype=complex)
            x[truth.supports[i]] = truth.coefs[i]
            parts.append(dicts[i] @ x)
        np.testing.assert_allclose(truth.clean_signal, kron_vectors(parts),
                                   atol=1e-12)


class TestOffgridScene:
    def test_separation(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            truth, _ = gen_offgrid_scene(30, 4, rng)
            psi = truth.params[0]
            assert np.all(np.diff(psi) >= 0.1 - 1e-12)
            assert np.all((psi >= -0.9) & (psi <= 0.9))

    def test_column_function_shape(self):
        rng = np.random.default_rng(7)
        truth, col = gen_offgrid_scene(50, 2, rng)
        assert col.output_dim == 50
        assert col(0.3).shape == (50,)
        assert truth.clean_signal.shape == (50,)

    def test_coefficient_variance(self):
        rng = np.random.default_rng(8)
        coefs = []
        for _ in range(300):
            truth, _ = gen_offgrid_scene(20, 2, rng)
            coefs.extend(truth.coefs[0].tolist())
        var = np.mean(np.abs(np.asarray(coefs)) ** 2)
        assert abs(var - 2.0) < 0.3

    def test_mixing_entries_unit_modulus(self):
        rng = np.random.default_rng(9)
        _, col = gen_offgrid_scene(25, 2, rng)
        assert np.allclose(np.abs(col.B), 1.0)


class TestWorstCase:
    def test_fixed_truths(self):
        rng = np.random.default_rng(10)
        truth, _ = gen_worst_case(rng)
        np.testing.assert_allclose(truth.params[0],
                                   [-0.5050, -0.1050, 0.1050, 0.5050])
        np.testing.assert_allclose(truth.coefs[0], np.ones(4))

    def test_truths_near_grid_midpoints(self):
        grid = init_uniform_grid(180).points
        for t in (-0.5050, -0.1050, 0.1050, 0.5050):
            below = grid[grid <= t].max()
            above = grid[grid > t].min()
            midpoint = 0.5 * (below + above)
            assert abs(t - midpoint) < 1e-3

    def test_measurement_dimension(self):
        rng = np.random.default_rng(11)
        truth, col = gen_worst_case(rng)
        assert truth.clean_signal.size == 60
        assert col.output_dim == 60


class TestIrsScene:
    def test_measurement_length_and_structure(self):
        rng = np.random.default_rng(12)
        scenario, ybar = gen_irs_scene(rng)
        assert ybar.size == 40 * 20 * 16 == 12800
        np.testing.assert_allclose(
            ybar, kron_vectors(scenario.factor_vectors()), atol=1e-10)

    def test_config_entries(self):
        rng = np.random.default_rng(13)
        scenario, _ = gen_irs_scene(rng)
        np.testing.assert_allclose(np.abs(scenario.Omega),
                                   1 / np.sqrt(256), atol=1e-12)
        np.testing.assert_allclose(np.abs(scenario.G), 1 / np.sqrt(6),
                                   atol=1e-12)

    def test_angle_ranges_and_separation(self):
        rng = np.random.default_rng(14)
        for _ in range(10):
            scenario, _ = gen_irs_scene(rng)
            assert 0.3 <= scenario.alpha_ms <= 0.5
            assert 0.3 <= scenario.phi_bs <= 0.5
            assert 0.0 <= scenario.alpha_bs <= 0.5
            assert np.all(np.abs(scenario.phi_ms) <= 0.2)
            spread = np.sort(scenario.phi_ms - scenario.phi_bs)
            assert np.all(np.diff(spread) >= 0.07 - 1e-12)

    def test_block_stacking_matches_kron_form(self):
        # stacking the vectorized per-configuration received blocks
        # reproduces the Kronecker-structured measurement
        for seed in range(20):
            rng = np.random.default_rng(seed)
            scenario, ybar = gen_irs_scene(rng)
            blocks = []
            for k in range(scenario.K_I):
                Yk = (scenario.true_channel(scenario.Omega[:, k])
                      @ scenario.G)
                blocks.append(Yk.reshape(-1, order="F"))
            stacked = np.concatenate(blocks)
            assert np.abs(stacked - ybar).max() < 1e-10 * np.abs(ybar).max()

    def test_determinism(self):
        a_scen, a_y = gen_irs_scene(np.random.default_rng(99))
        b_scen, b_y = gen_irs_scene(np.random.default_rng(99))
        assert np.array_equal(a_y, b_y)
        assert np.array_equal(a_scen.Omega, b_scen.Omega)
        assert a_scen.alpha_ms == b_scen.alpha_ms

    def test_to_dict_roundtrippable(self):
        import json

        scenario, _ = gen_irs_scene(np.random.default_rng(5))
        payload = json.dumps(scenario.to_dict())
        data = json.loads(payload)
        assert data["R"] == 16 and data["L"] == 256
        assert len(data["dim_truths"][0]) == 3


class TestSeparationFailure:
    def test_impossible_separation_raises(self):
        rng = np.random.default_rng(15)
        with pytest.raises(RuntimeError):
            gen_offgrid_scene(10, 30, rng)  # 30 points, min gap 0.1 in 1.8
