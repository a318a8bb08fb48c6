#!/usr/bin/env python3
"""
Tests for the sparse coders: least-squares helpers, PDAS, OMP, LASSO and the
brute-force best-subset oracle.
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

sys.path.insert(0, str(Path(__file__).parent))

from src.coders import CoderFactory, encode_patches
from src.coders.algorithms import (
    objective,
    compute_dual,
    sacrifice,
    restricted_least_squares,
    pdas_encode,
    omp_encode,
    lasso_encode,
    lasso_encode_batch,
    lasso_objective,
    soft_threshold,
    solve_on_support,
    brute_force_best_subset,
)
from src.config.coder_configs import CoderType, PdasConfig, OmpConfig, LassoConfig
from src.data.models import Dictionary, SparseCode, GrayImage, NoiseSpec
from src.learning.initialization import overcomplete_dct
from src.pipeline.noise import add_gaussian_noise
from src.pipeline.patches import extract_patches
from src.utils.errors import InvalidArgumentError


def random_dictionary(rng: np.random.Generator, n: int, num_atoms: int) -> Dictionary:
    return Dictionary.from_matrix(rng.standard_normal((n, num_atoms)))


def orthonormal_dictionary(rng: np.random.Generator, n: int) -> Dictionary:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return Dictionary.from_matrix(q)


IDENTITY_3 = Dictionary(np.eye(3))
Y_531 = np.array([5.0, 1.0, 0.0])


class TestLeastSquaresHelpers:

    def test_objective_examples(self):
        d = Dictionary(np.eye(2))
        y = np.array([3.0, 4.0])
        assert objective(y, d, SparseCode([0], [3.0], 2)) == pytest.approx(16.0)
        assert objective(y, d, SparseCode.empty(2)) == pytest.approx(25.0)
        assert objective(y, d, SparseCode([0, 1], [3.0, 4.0], 2)) == 0.0

    def test_objective_rejects_wrong_length(self):
        with pytest.raises(InvalidArgumentError):
            objective(np.ones(4), IDENTITY_3, SparseCode.empty(3))

    def test_compute_dual_examples(self):
        g = compute_dual(Y_531, IDENTITY_3, SparseCode([0], [5.0], 3))
        assert_allclose(g, [0.0, 1.0, 0.0])
        assert_allclose(compute_dual(Y_531, IDENTITY_3, SparseCode.empty(3)), Y_531)

    def test_sacrifice_examples(self):
        assert_allclose(sacrifice(np.array([2.0, 0.0]), np.array([0.0, 1.0])), [2.0, 0.5])
        assert_allclose(sacrifice(np.zeros(2), np.zeros(2)), [0.0, 0.0])
        assert_allclose(sacrifice(np.array([0.0, -3.0]), np.zeros(2)), [0.0, 4.5])

    def test_restricted_least_squares_orthonormal_subset(self):
        values = restricted_least_squares(np.array([5.0, 1.0, 7.0]), IDENTITY_3, np.array([0, 2]))
        assert_allclose(values, [5.0, 7.0])

    def test_restricted_least_squares_matches_projection(self):
        rng = np.random.default_rng(3)
        d = random_dictionary(rng, 10, 6)
        y = rng.standard_normal(10)
        active = np.array([1, 3, 4])
        expected = np.linalg.lstsq(d.atoms[:, active], y, rcond=None)[0]
        assert_allclose(restricted_least_squares(y, d, active), expected, atol=1e-10)

    def test_duplicate_atoms_use_ridge(self):
        d = Dictionary(np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))
        y = np.array([3.0, 4.0])
        values = restricted_least_squares(y, d, np.array([0, 1]), ridge_epsilon=1e-8)
        assert np.all(np.isfinite(values))
        fitted = d.atoms[:, [0, 1]] @ values
        minimum_norm_fit = d.atoms[:, [0, 1]] @ (np.linalg.pinv(d.atoms[:, [0, 1]]) @ y)
        assert_allclose(fitted, minimum_norm_fit, atol=1e-4)

    @pytest.mark.parametrize("active", [np.array([], dtype=int), np.arange(4)])
    def test_restricted_least_squares_rejects_bad_sets(self, active):
        with pytest.raises(InvalidArgumentError):
            restricted_least_squares(Y_531, Dictionary(np.eye(3)), active)


class TestPdas:

    def test_identity_top_one(self):
        result = pdas_encode(Y_531, IDENTITY_3, PdasConfig(sparsity=1))
        assert result.converged
        assert_array_equal(result.code.support, [0])
        assert_allclose(result.code.values, [5.0])

    def test_full_support_on_orthonormal_basis(self):
        rng = np.random.default_rng(11)
        d = orthonormal_dictionary(rng, 6)
        y = rng.standard_normal(6)
        result = pdas_encode(y, d, PdasConfig(sparsity=6))
        assert result.converged
        assert result.iterations <= 2
        assert_allclose(result.code.to_dense(), d.atoms.T @ y, atol=1e-10)
        assert result.objective < 1e-20

    def test_sparsity_above_dimension_is_rejected(self):
        with pytest.raises(InvalidArgumentError):
            pdas_encode(Y_531, IDENTITY_3, PdasConfig(sparsity=4))

    def test_kkt_conditions_at_fixed_points(self):
        rng = np.random.default_rng(2024)
        checked = 0
        for instance in range(1000):
            d = random_dictionary(rng, 16, 32)
            y = rng.standard_normal(16)
            t0 = int(rng.integers(1, 5))
            result = pdas_encode(y, d, PdasConfig(sparsity=t0, seed=instance))
            if not result.converged:
                continue
            checked += 1

            active = result.code.support
            inactive = np.setdiff1d(np.arange(32), active)
            h = result.dual.h
            g = compute_dual(y, d, result.code)

            assert active.size == t0
            assert h[active].min() >= h[inactive].max()
            assert np.max(np.abs(g[active])) <= 1e-8
            assert np.all(result.code.to_dense()[inactive] == 0.0)
            assert_allclose(result.dual.g[inactive], g[inactive], atol=1e-10)
        assert checked >= 500

    def test_same_index_same_result(self):
        rng = np.random.default_rng(5)
        d = random_dictionary(rng, 16, 32)
        y = rng.standard_normal(16)
        config = PdasConfig(sparsity=3, seed=7)
        first = pdas_encode(y, d, config, index=42)
        second = pdas_encode(y, d, config, index=42)
        assert_array_equal(first.code.support, second.code.support)
        assert_array_equal(first.code.values, second.code.values)

    def test_iteration_cap_returns_best_iterate(self):
        rng = np.random.default_rng(9)
        d = random_dictionary(rng, 16, 32)
        y = rng.standard_normal(16)
        result = pdas_encode(y, d, PdasConfig(sparsity=4, max_iterations=1), initial_active=[0, 1, 2, 3])
        if not result.converged:
            assert result.iterations == 1
            assert result.objective == pytest.approx(min(result.residual_history))

    def test_debug_dump(self):
        result = pdas_encode(Y_531, IDENTITY_3, PdasConfig(sparsity=1))
        dump = json.loads(result.to_json())
        assert dump['support'] == [0]
        assert dump['converged'] is True
        assert len(dump['g']) == 3 and len(dump['h']) == 3


class TestOmp:

    def test_identity_top_one(self):
        result = omp_encode(Y_531, IDENTITY_3, OmpConfig(sparsity=1))
        assert_array_equal(result.code.support, [0])
        assert_allclose(result.code.values, [5.0])

    def test_orthonormal_picks_largest_correlations(self):
        rng = np.random.default_rng(13)
        d = orthonormal_dictionary(rng, 8)
        y = rng.standard_normal(8)
        correlations = d.atoms.T @ y
        expected = np.sort(np.argsort(-np.abs(correlations))[:3])
        result = omp_encode(y, d, OmpConfig(sparsity=3))
        assert_array_equal(result.code.support, expected)
        assert_allclose(result.code.values, correlations[expected], atol=1e-10)

    def test_residual_orthogonal_to_selected_atoms(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            d = random_dictionary(rng, 16, 32)
            y = rng.standard_normal(16)
            result = omp_encode(y, d, OmpConfig(sparsity=5))
            g = compute_dual(y, d, result.code)
            assert np.max(np.abs(g[result.code.support])) <= 1e-8

    def test_residual_history_is_non_increasing(self):
        rng = np.random.default_rng(19)
        d = random_dictionary(rng, 16, 32)
        y = rng.standard_normal(16)
        history = omp_encode(y, d, OmpConfig(sparsity=8)).residual_history
        assert history[0] == pytest.approx(float(y @ y))
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    def test_stops_at_residual_threshold(self):
        result = omp_encode(np.array([5.0, 1.0, 0.5]), IDENTITY_3,
                            OmpConfig(sparsity=3, residual_threshold=2.0))
        assert result.code.size == 1

    def test_zero_signal_gives_empty_code(self):
        result = omp_encode(np.zeros(3), IDENTITY_3, OmpConfig(sparsity=2))
        assert result.code.size == 0
        assert result.objective == 0.0


class TestLasso:

    def test_soft_threshold(self):
        assert soft_threshold(3.0, 1.0) == 2.0
        assert soft_threshold(-3.0, 1.0) == -2.0
        assert soft_threshold(0.5, 1.0) == 0.0

    def test_large_penalty_gives_zero(self):
        rng = np.random.default_rng(23)
        d = random_dictionary(rng, 12, 20)
        y = rng.standard_normal(12)
        lam = 2.0 * np.max(np.abs(d.atoms.T @ y))
        result = lasso_encode(y, d, LassoConfig(lam=lam))
        assert result.converged
        assert result.code.size == 0

    def test_zero_penalty_inverts_square_dictionary(self):
        rng = np.random.default_rng(29)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        d = Dictionary.from_matrix(q + 0.1 * rng.standard_normal((4, 4)))
        y = rng.standard_normal(4)
        result = lasso_encode(y, d, LassoConfig(lam=0.0, tolerance=1e-13, max_sweeps=20000))
        assert_allclose(result.code.to_dense(), np.linalg.solve(d.atoms, y), atol=1e-6)

    @pytest.mark.parametrize("lam", [0.0, 0.5, 3.0, 10.0])
    def test_single_atom_closed_form(self, lam):
        rng = np.random.default_rng(31)
        d = random_dictionary(rng, 5, 1)
        y = 2.0 * rng.standard_normal(5)
        c = float(d.atoms[:, 0] @ y)
        expected = np.sign(c) * max(abs(c) - lam / 2.0, 0.0)
        result = lasso_encode(y, d, LassoConfig(lam=lam))
        assert result.code.to_dense()[0] == pytest.approx(expected, abs=1e-10)

    def test_subgradient_conditions(self):
        rng = np.random.default_rng(37)
        converged = 0
        for _ in range(500):
            d = random_dictionary(rng, 12, 16)
            y = rng.standard_normal(12)
            lam = float(rng.uniform(0.2, 1.0) * np.max(np.abs(2.0 * d.atoms.T @ y)))
            result = lasso_encode(y, d, LassoConfig(lam=lam, tolerance=1e-11))
            if not result.converged:
                continue
            converged += 1
            x = result.code.to_dense()
            gradient = 2.0 * d.atoms.T @ (y - d.atoms @ x)
            nonzero = x != 0
            assert_allclose(gradient[nonzero], lam * np.sign(x[nonzero]), atol=1e-6)
            assert np.all(np.abs(gradient[~nonzero]) <= lam + 1e-6)
        assert converged >= 400

    def test_objective_history_is_non_increasing(self):
        rng = np.random.default_rng(41)
        d = random_dictionary(rng, 12, 16)
        y = rng.standard_normal(12)
        history = lasso_encode(y, d, LassoConfig(lam=0.3)).residual_history
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))

    def test_solution_is_a_local_minimum(self):
        rng = np.random.default_rng(43)
        d = random_dictionary(rng, 12, 16)
        y = rng.standard_normal(12)
        lam = 0.5
        result = lasso_encode(y, d, LassoConfig(lam=lam))
        assert result.converged
        x = result.code.to_dense()
        best = lasso_objective(y, d, x, lam)
        for _ in range(100):
            nudged = x + 1e-3 * rng.standard_normal(x.size)
            assert best <= lasso_objective(y, d, nudged, lam) + 1e-12

    def test_batch_matches_single_signal_coding(self):
        rng = np.random.default_rng(47)
        d = random_dictionary(rng, 16, 32)
        signals = rng.standard_normal((16, 40))
        config = LassoConfig(lam=0.8)
        codes, sweeps, converged = lasso_encode_batch(signals, d, config)
        assert codes.shape == (32, 40)
        assert np.all((sweeps >= 1) & (sweeps <= config.max_sweeps))
        for i in range(40):
            single = lasso_encode(signals[:, i], d, config)
            assert converged[i] == single.converged
            assert_allclose(codes[:, i], single.code.to_dense(), atol=1e-6)

    def test_batch_code_does_not_depend_on_block_members(self):
        rng = np.random.default_rng(53)
        d = random_dictionary(rng, 16, 32)
        signals = rng.standard_normal((16, 30))
        config = LassoConfig(lam=0.5)
        whole, _, _ = lasso_encode_batch(signals, d, config)
        part, _, _ = lasso_encode_batch(signals[:, 10:20], d, config)
        assert_allclose(whole[:, 10:20], part, atol=1e-6)

    def test_dct_patch_block_converges(self):
        rows, columns = np.mgrid[0:64, 0:64]
        clean = GrayImage(128 + 60 * np.sin(rows / 7.0) * np.cos(columns / 11.0) + (columns > 32) * 40)
        noisy = add_gaussian_noise(clean, NoiseSpec(20.0, seed=3))
        signals = np.array(extract_patches(noisy, 8, stride=4).patches)
        signals -= signals.mean(axis=0)
        d = overcomplete_dct(64, 256)
        lam = 20.0

        coder = CoderFactory.create_coder(CoderType.LASSO, LassoConfig(lam=lam))
        codes, stats = encode_patches(coder, signals, d)
        assert stats.signals == 225
        assert stats.converged_fraction >= 0.9
        assert stats.mean_iterations < 1000

        _, _, converged = lasso_encode_batch(signals, d, LassoConfig(lam=lam))
        for i in np.flatnonzero(converged):
            x = codes[:, i]
            gradient = 2.0 * d.atoms.T @ (signals[:, i] - d.atoms @ x)
            assert np.all(np.abs(gradient) <= lam + 1e-4)
            nonzero = x != 0
            assert_allclose(gradient[nonzero], lam * np.sign(x[nonzero]), atol=1e-4)

    def test_support_solve_checks_signs_and_off_support_conditions(self):
        d = IDENTITY_3
        correlations = d.atoms.T @ Y_531
        # True minimizer at λ = 2 is (4, 0, 0); a negative sign cannot satisfy the conditions
        assert solve_on_support(correlations, d.gram, np.array([-1.0, 0.0, 0.0]), 1.0, 3) is None
        assert_allclose(solve_on_support(correlations, d.gram, np.array([1.0, 0.0, 0.0]), 1.0, 3),
                        [4.0, 0.0, 0.0])
        # Atom 1 belongs off the support: |1| ≤ λ/2 only holds for λ ≥ 2
        assert solve_on_support(correlations, d.gram, np.array([1.0, 0.0, 0.0]), 0.25, 3) is None


class TestOracle:

    def test_identity_two_atoms(self):
        code = brute_force_best_subset(Y_531, IDENTITY_3, 2)
        assert_array_equal(code.support, [0, 1])
        assert_allclose(code.values, [5.0, 1.0])
        assert objective(Y_531, IDENTITY_3, code) == 0.0

    def test_full_support_is_least_squares(self):
        rng = np.random.default_rng(43)
        d = random_dictionary(rng, 6, 4)
        y = rng.standard_normal(6)
        code = brute_force_best_subset(y, d, 4)
        expected = np.linalg.lstsq(d.atoms, y, rcond=None)[0]
        assert_allclose(code.to_dense(), expected, atol=1e-8)

    def test_enumeration_limit(self):
        d = random_dictionary(np.random.default_rng(0), 30, 200)
        with pytest.raises(InvalidArgumentError):
            brute_force_best_subset(np.ones(30), d, 5)

    def test_oracle_dominates_greedy_and_active_set(self):
        rng = np.random.default_rng(47)
        matches = 0
        for instance in range(500):
            d = random_dictionary(rng, 6, 10)
            y = rng.standard_normal(6)
            t0 = int(rng.integers(1, 4))
            best = objective(y, d, brute_force_best_subset(y, d, t0))
            pdas = pdas_encode(y, d, PdasConfig(sparsity=t0, seed=instance))
            omp = omp_encode(y, d, OmpConfig(sparsity=t0))
            assert best <= pdas.objective + 1e-10
            assert best <= omp.objective + 1e-10
            matches += int(abs(pdas.objective - best) <= 1e-10)
        assert matches > 0

    def test_orthonormal_coders_agree(self):
        rng = np.random.default_rng(53)
        for instance in range(100):
            d = orthonormal_dictionary(rng, 6)
            y = rng.standard_normal(6)
            t0 = int(rng.integers(1, 5))
            oracle = brute_force_best_subset(y, d, t0)
            pdas = pdas_encode(y, d, PdasConfig(sparsity=t0, seed=instance))
            omp = omp_encode(y, d, OmpConfig(sparsity=t0))
            assert_array_equal(pdas.code.support, oracle.support)
            assert_array_equal(omp.code.support, oracle.support)
            assert pdas.objective == pytest.approx(objective(y, d, oracle), abs=1e-10)
            assert omp.objective == pytest.approx(objective(y, d, oracle), abs=1e-10)


class TestFactoryAndBatches:

    def test_default_configs_follow_noise_level(self):
        assert CoderFactory.create_coder(CoderType.PDAS, sigma=50).sparsity == 2
        assert CoderFactory.create_coder(CoderType.PDAS, sigma=15).sparsity == 20
        assert CoderFactory.create_by_name("omp", sigma=50).sparsity == 5
        assert CoderFactory.create_by_name("lasso", sigma=20).penalty == 20.0

    def test_overrides(self):
        coder = CoderFactory.create_coder(CoderType.PDAS, PdasConfig(sparsity=2), sparsity=3)
        assert coder.sparsity == 3

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            CoderFactory.create_by_name("matching-pursuit")

    def test_available_coders(self):
        assert set(CoderFactory.get_available_coders()) == {"pdas", "omp", "lasso"}

    @pytest.mark.parametrize("coder_type", list(CoderType))
    def test_threaded_coding_matches_serial(self, coder_type):
        rng = np.random.default_rng(59)
        d = random_dictionary(rng, 16, 32)
        signals = rng.standard_normal((16, 1200))
        coder = CoderFactory.create_coder(coder_type, sigma=50)
        serial, serial_stats = encode_patches(coder, signals, d, threads=1)
        threaded, threaded_stats = encode_patches(coder, signals, d, threads=4)
        assert_array_equal(serial, threaded)
        assert serial_stats.signals == threaded_stats.signals == 1200
        assert serial_stats.converged_fraction == threaded_stats.converged_fraction

    def test_batch_codes_match_single_calls(self):
        rng = np.random.default_rng(61)
        d = random_dictionary(rng, 16, 32)
        signals = rng.standard_normal((16, 20))
        coder = CoderFactory.create_coder(CoderType.PDAS, PdasConfig(sparsity=3, seed=4))
        codes, stats = encode_patches(coder, signals, d, offset=100)
        single = coder.encode(signals[:, 7], d, index=107)
        assert_array_equal(codes[:, 7], single.code.to_dense())
        assert stats.mean_support <= 3
