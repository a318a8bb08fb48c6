import logging
import time
from typing import Optional, Tuple, Union

import numpy as np
from scipy import linalg

from .initialization import init_dictionary
from ..coders.base.coder_interface import SparseCoder
from ..coders.batch import encode_patches
from ..coders.factory.coder_factory import CoderFactory
from ..config.settings import TrainConfig
from ..data.models import Dictionary, PatchSet, TrainIteration, TrainReport
from ..utils.errors import require

# Candidates closer than this to an existing atom are rejected as duplicates
DUPLICATE_COHERENCE = 0.999

Matrix = Union[Dictionary, np.ndarray]


def _atoms(dictionary: Matrix) -> np.ndarray:
    return dictionary.atoms if isinstance(dictionary, Dictionary) else np.asarray(dictionary, dtype=np.float64)


def representation_error(signals: np.ndarray, atoms: np.ndarray, codes: np.ndarray) -> float:
    """‖Y − DX‖²_F."""
    residual = signals - atoms @ codes
    return float(np.sum(residual * residual))


def orient(atom: np.ndarray) -> float:
    """Sign that makes the first nonzero entry of ``atom`` positive."""
    nonzero = np.flatnonzero(np.abs(atom) > 1e-12)
    if nonzero.size and atom[nonzero[0]] < 0:
        return -1.0
    return 1.0


def update_atom(
    j: int,
    signals: np.ndarray,
    dictionary: Matrix,
    codes: np.ndarray
) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Rank-1 refit of atom j and its coefficient row.

    Restricts to the signals whose code uses atom j, forms the residual
    without atom j's contribution and replaces atom and row by the leading
    singular pair.

    Args:
        j: Atom index
        signals: n×p signal matrix Y
        dictionary: Current atoms (n×K)
        codes: K×p code matrix X

    Returns:
        (new atom, new full coefficient row), or None when no signal uses the atom
    """
    atoms = _atoms(dictionary)
    require(0 <= j < atoms.shape[1], f"Atom index {j} out of range [0, {atoms.shape[1]})")

    users = np.flatnonzero(codes[j])
    if users.size == 0:
        return None

    row = codes[j, users]
    error = signals[:, users] - atoms @ codes[:, users] + np.outer(atoms[:, j], row)

    u, s, vt = linalg.svd(error, full_matrices=False, check_finite=False)
    new_row = np.zeros(codes.shape[1])
    if s[0] == 0.0:
        return atoms[:, j].copy(), new_row

    sign = orient(u[:, 0])
    new_row[users] = sign * s[0] * vt[0]
    return sign * u[:, 0], new_row


def replace_dead_atom(
    j: int,
    signals: np.ndarray,
    dictionary: Matrix,
    codes: np.ndarray,
    seed: int = 0
) -> np.ndarray:
    """
    New atom for an unused slot j: the normalized training signal with the
    largest residual norm, skipping near-duplicates of the other atoms.

    Falls back to a seeded random unit vector when every candidate is rejected.

    Args:
        j: Atom index
        signals: n×p signal matrix Y
        dictionary: Current atoms (n×K)
        codes: K×p code matrix X
        seed: Seed for the fallback vector

    Returns:
        Unit-norm atom
    """
    atoms = _atoms(dictionary)
    others = np.delete(atoms, j, axis=1)

    residual_norms = np.linalg.norm(signals - atoms @ codes, axis=0)
    for candidate in np.argsort(-residual_norms, kind="stable"):
        norm = float(np.linalg.norm(signals[:, candidate]))
        if norm == 0.0:
            continue
        atom = signals[:, candidate] / norm
        if others.shape[1] == 0 or float(np.max(np.abs(others.T @ atom))) <= DUPLICATE_COHERENCE:
            return atom

    rng = np.random.default_rng([seed, j])
    atom = rng.standard_normal(atoms.shape[0])
    return atom / np.linalg.norm(atom)


class KsvdTrainer:
    """Alternates sparse coding of all training signals with a sweep of rank-1 atom updates."""

    def __init__(self, config: TrainConfig, coder: Optional[SparseCoder] = None):
        """
        Initialize the trainer.

        Args:
            config: Training configuration
            coder: Coder for the coding stage (built from config when omitted)
        """
        config.validate()
        self.config = config
        self.coder = coder or CoderFactory.create_coder(config.coder, config.coder_config)
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def _sweep(self, signals: np.ndarray, atoms: np.ndarray, codes: np.ndarray) -> int:
        replaced = 0
        for j in range(atoms.shape[1]):
            if np.count_nonzero(codes[j]) < self.config.min_usage:
                atoms[:, j] = replace_dead_atom(j, signals, atoms, codes, self.config.seed)
                codes[j] = 0.0
                replaced += 1
                continue
            atoms[:, j], codes[j] = update_atom(j, signals, atoms, codes)
        return replaced

    def train(
        self,
        training_patches: Union[PatchSet, np.ndarray],
        initial: Optional[Dictionary] = None,
        progress: bool = False
    ) -> Tuple[Dictionary, TrainReport]:
        """
        Run the configured number of K-SVD rounds.

        Args:
            training_patches: n×p training signals
            initial: Starting dictionary (built from config.init_mode when omitted)
            progress: Show a progress bar during coding

        Returns:
            Trained dictionary and per-iteration report
        """
        signals = training_patches.patches if isinstance(training_patches, PatchSet) \
            else np.asarray(training_patches, dtype=np.float64)
        require(signals.ndim == 2 and signals.shape[1] > 0, "Training patch set is empty")

        started = time.perf_counter()
        init_mode = "given" if initial is not None else self.config.init_mode
        if initial is None:
            initial = init_dictionary(
                signals, self.config.num_atoms, seed=self.config.seed, mode=self.config.init_mode
            )
        require(initial.n == signals.shape[0],
                f"Dictionary dimension {initial.n} does not match patch dimension {signals.shape[0]}")
        if initial.num_atoms < initial.n:
            self.logger.warning(
                f"Dictionary is undercomplete: K = {initial.num_atoms} < n = {initial.n}"
            )

        atoms = np.array(initial.atoms)
        report = TrainReport(init_mode=init_mode)

        for iteration in range(1, self.config.ksvd_iterations + 1):
            codes, stats = encode_patches(
                self.coder, signals, Dictionary(atoms), threads=self.config.threads, progress=progress
            )
            after_coding = representation_error(signals, atoms, codes)

            update_started = time.perf_counter()
            replaced = self._sweep(signals, atoms, codes)
            atoms /= np.linalg.norm(atoms, axis=0)
            after_update = representation_error(signals, atoms, codes)

            report.iterations.append(TrainIteration(
                iteration=iteration,
                objective_after_coding=after_coding,
                objective_after_update=after_update,
                atoms_replaced=replaced,
                coding=stats,
                update_seconds=time.perf_counter() - update_started,
            ))
            self.logger.info(
                f"K-SVD iteration {iteration}/{self.config.ksvd_iterations}: "
                f"error after coding {after_coding:.6g}, after update {after_update:.6g}, "
                f"atoms replaced {replaced}"
            )

        report.total_seconds = time.perf_counter() - started
        return Dictionary(atoms), report


def ksvd_train(
    training_patches: Union[PatchSet, np.ndarray],
    config: TrainConfig,
    initial: Optional[Dictionary] = None
) -> Tuple[Dictionary, TrainReport]:
    """Train a dictionary with K-SVD; see KsvdTrainer.train."""
    return KsvdTrainer(config).train(training_patches, initial=initial)
