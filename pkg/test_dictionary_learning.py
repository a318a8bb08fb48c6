#!/usr/bin/env python3
"""
Tests for dictionary initialization, rank-1 atom updates, dead-atom
replacement and K-SVD training.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

sys.path.insert(0, str(Path(__file__).parent))

from src.config.coder_configs import CoderType, OmpConfig, PdasConfig
from src.config.settings import TrainConfig
from src.data.models import Dictionary
from src.learning import (
    init_dictionary,
    overcomplete_dct,
    update_atom,
    replace_dead_atom,
    KsvdTrainer,
    ksvd_train,
)
from src.learning.ksvd import representation_error
from src.utils.errors import InvalidArgumentError


def planted_problem(seed: int = 0, n: int = 16, num_atoms: int = 8, count: int = 200):
    """Signals that are exact 1-sparse combinations of a random dictionary."""
    rng = np.random.default_rng(seed)
    planted = Dictionary.from_matrix(rng.standard_normal((n, num_atoms)))
    codes = np.zeros((num_atoms, count))
    which = np.arange(count) % num_atoms
    codes[which, np.arange(count)] = rng.choice([-1.0, 1.0], count) * rng.uniform(1.0, 2.0, count)
    return planted, planted.atoms @ codes


class TestInitialization:

    def test_square_dct_is_orthonormal(self):
        d = overcomplete_dct(64, 64)
        assert_allclose(d.atoms.T @ d.atoms, np.eye(64), atol=1e-10)

    def test_overcomplete_dct_has_unit_atoms(self):
        d = init_dictionary(None, 256, mode="dct", n=64)
        assert d.atoms.shape == (64, 256)
        assert_allclose(np.linalg.norm(d.atoms, axis=0), 1.0, atol=1e-8)

    def test_first_dct_atom_is_flat(self):
        d = overcomplete_dct(64, 256)
        assert_allclose(d.atoms[:, 0], np.full(64, 1.0 / 8.0), atol=1e-12)

    def test_non_square_patches_rejected(self):
        with pytest.raises(InvalidArgumentError):
            overcomplete_dct(60, 100)

    def test_sampling_is_deterministic(self):
        signals = np.random.default_rng(1).standard_normal((16, 100))
        first = init_dictionary(signals, 20, seed=4, mode="sample")
        second = init_dictionary(signals, 20, seed=4, mode="sample")
        assert_array_equal(first.atoms, second.atoms)
        assert_allclose(np.linalg.norm(first.atoms, axis=0), 1.0, atol=1e-8)

    def test_sampling_needs_enough_patches(self):
        signals = np.ones((16, 5))
        with pytest.raises(InvalidArgumentError):
            init_dictionary(signals, 20, mode="sample")

    def test_unknown_mode(self):
        with pytest.raises(InvalidArgumentError):
            init_dictionary(None, 20, mode="random", n=16)


class TestAtomUpdate:

    def test_exact_rank_one_residual(self):
        rng = np.random.default_rng(2)
        u = rng.standard_normal(6)
        u /= np.linalg.norm(u)
        v = rng.uniform(0.5, 1.5, 10)
        v /= np.linalg.norm(v)
        signals = 3.0 * np.outer(u, v)
        atoms = Dictionary.from_matrix(rng.standard_normal((6, 1))).atoms
        codes = np.ones((1, 10))

        atom, row = update_atom(0, signals, atoms, codes)
        assert abs(float(atom @ u)) == pytest.approx(1.0, abs=1e-10)
        assert_allclose(np.abs(row), 3.0 * v, atol=1e-10)
        assert_allclose(np.outer(atom, row), signals, atol=1e-10)

    def test_single_user_takes_its_residual(self):
        rng = np.random.default_rng(3)
        atoms = Dictionary.from_matrix(rng.standard_normal((5, 3))).atoms
        signals = rng.standard_normal((5, 4))
        codes = np.zeros((3, 4))
        codes[1, 2] = 0.7
        codes[0, 2] = 0.2

        residual = signals[:, 2] - atoms[:, 0] * 0.2
        atom, row = update_atom(1, signals, atoms, codes)
        assert_allclose(atom * row[2], residual, atol=1e-10)
        assert abs(row[2]) == pytest.approx(np.linalg.norm(residual))
        assert_array_equal(row[[0, 1, 3]], 0.0)

    def test_matches_best_rank_one_approximation(self):
        rng = np.random.default_rng(4)
        atoms = Dictionary.from_matrix(rng.standard_normal((8, 6))).atoms
        codes = rng.standard_normal((6, 5))
        signals = rng.standard_normal((8, 5))
        error = signals - atoms @ codes + np.outer(atoms[:, 2], codes[2])

        atom, row = update_atom(2, signals, atoms, codes)
        singular_values = np.linalg.svd(error, compute_uv=False)
        achieved = np.linalg.norm(error - np.outer(atom, row))
        assert achieved == pytest.approx(np.sqrt(np.sum(singular_values[1:] ** 2)), abs=1e-8)

    def test_sign_convention(self):
        rng = np.random.default_rng(5)
        atoms = Dictionary.from_matrix(rng.standard_normal((8, 6))).atoms
        codes = rng.standard_normal((6, 5))
        signals = rng.standard_normal((8, 5))
        atom, _ = update_atom(0, signals, atoms, codes)
        first = atom[np.flatnonzero(np.abs(atom) > 1e-12)[0]]
        assert first > 0

    def test_unused_atom_returns_none(self):
        atoms = np.eye(3)
        codes = np.zeros((3, 4))
        codes[0] = 1.0
        assert update_atom(2, np.ones((3, 4)), atoms, codes) is None


class TestDeadAtoms:

    def test_worst_signal_becomes_the_atom(self):
        atoms = np.eye(3)[:, :2]
        signals = np.array([[2.0, 0.0], [0.0, 3.0], [0.0, 4.0]])
        codes = np.array([[2.0, 0.0], [0.0, 0.0]])
        atom = replace_dead_atom(1, signals, atoms, codes)
        assert_allclose(atom, [0.0, 0.6, 0.8])

    def test_duplicates_are_skipped(self):
        atoms = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        # The worst-represented signal is parallel to atom 0
        signals = np.array([[9.0, 0.0], [0.0, 0.0], [0.0, 2.0]])
        codes = np.zeros((2, 2))
        atom = replace_dead_atom(1, signals, atoms, codes)
        assert_allclose(atom, [0.0, 0.0, 1.0])

    def test_fallback_is_seeded_unit_vector(self):
        atoms = np.array([[1.0, 0.0], [0.0, 1.0]])
        signals = np.array([[5.0], [0.0]])
        codes = np.zeros((2, 1))
        first = replace_dead_atom(1, signals, atoms, codes, seed=3)
        second = replace_dead_atom(1, signals, atoms, codes, seed=3)
        assert_array_equal(first, second)
        assert np.linalg.norm(first) == pytest.approx(1.0)

    def test_no_replacement_when_every_atom_is_used(self):
        planted, signals = planted_problem(seed=6)
        config = TrainConfig(ksvd_iterations=2, num_atoms=8, coder=CoderType.OMP,
                             coder_config=OmpConfig(sparsity=1))
        _, report = KsvdTrainer(config).train(signals, initial=planted)
        assert report.atoms_replaced == [0, 0]


class TestKsvdTrainer:

    def test_planted_dictionary_is_recovered(self):
        planted, signals = planted_problem(seed=7)
        config = TrainConfig(ksvd_iterations=10, num_atoms=8, coder=CoderType.OMP,
                             coder_config=OmpConfig(sparsity=1))

        trained, report = ksvd_train(signals, config)
        first = report.iterations[0].objective_after_coding
        assert report.objectives[-1] <= 1e-6 * first
        assert report.init_mode == "dct"
        assert len(report.iterations) == 10
        # Every planted atom reappears up to sign
        coherence = np.abs(trained.atoms.T @ planted.atoms)
        assert_allclose(coherence.max(axis=0), 1.0, atol=1e-6)

    def test_update_never_increases_error(self):
        rng = np.random.default_rng(9)
        signals = rng.standard_normal((16, 300))
        config = TrainConfig(ksvd_iterations=5, num_atoms=24, coder=CoderType.PDAS,
                             coder_config=PdasConfig(sparsity=3))
        _, report = KsvdTrainer(config).train(signals)
        for iteration in report.iterations:
            assert iteration.objective_after_update <= iteration.objective_after_coding * (1 + 1e-12)

    def test_single_iteration_report(self):
        _, signals = planted_problem(seed=10)
        config = TrainConfig(ksvd_iterations=1, num_atoms=8, coder=CoderType.OMP,
                             coder_config=OmpConfig(sparsity=1))
        trained, report = KsvdTrainer(config).train(signals)
        assert len(report.iterations) == 1
        assert report.iterations[0].iteration == 1
        assert report.iterations[0].coding.signals == signals.shape[1]
        assert report.init_mode == "dct"
        assert_allclose(np.linalg.norm(trained.atoms, axis=0), 1.0, atol=1e-8)

    def test_reported_error_matches_codes(self):
        planted, signals = planted_problem(seed=11)
        config = TrainConfig(ksvd_iterations=1, num_atoms=8, coder=CoderType.OMP,
                             coder_config=OmpConfig(sparsity=1))
        _, report = KsvdTrainer(config).train(signals, initial=planted)
        codes = np.zeros((8, signals.shape[1]))
        codes_error = representation_error(signals, planted.atoms, codes)
        assert report.iterations[0].objective_after_coding <= codes_error
        assert report.iterations[0].objective_after_coding == pytest.approx(0.0, abs=1e-18)

    def test_zero_iterations_rejected(self):
        config = TrainConfig(ksvd_iterations=0, num_atoms=8, coder=CoderType.OMP,
                             coder_config=OmpConfig(sparsity=1))
        with pytest.raises(InvalidArgumentError):
            KsvdTrainer(config)

    def test_dimension_mismatch_rejected(self):
        config = TrainConfig(ksvd_iterations=1, num_atoms=8, coder=CoderType.OMP,
                             coder_config=OmpConfig(sparsity=1))
        with pytest.raises(InvalidArgumentError):
            KsvdTrainer(config).train(np.ones((9, 20)), initial=overcomplete_dct(16, 8))

    def test_report_serializes(self):
        _, signals = planted_problem(seed=12)
        config = TrainConfig(ksvd_iterations=2, num_atoms=8, coder=CoderType.OMP,
                             coder_config=OmpConfig(sparsity=1))
        _, report = KsvdTrainer(config).train(signals)
        data = report.to_dict()
        assert len(data['iterations']) == 2
        assert data['init_mode'] == "dct"
