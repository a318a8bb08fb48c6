import logging
import math
from typing import Optional, Union

import numpy as np

from ..data.models import Dictionary, PatchSet
from ..utils.errors import InvalidArgumentError, require

logger = logging.getLogger(__name__)

INIT_MODES = ("dct", "sample")


def dct_basis_1d(length: int, frequencies: int) -> np.ndarray:
    """
    length×frequencies matrix of unit-norm DCT-II cosines; every column
    after the first has its mean removed.
    """
    i = np.arange(length)[:, None]
    k = np.arange(frequencies)[None, :]
    basis = np.cos(np.pi * (2 * i + 1) * k / (2 * frequencies))
    basis[:, 1:] -= basis[:, 1:].mean(axis=0)
    return basis / np.linalg.norm(basis, axis=0)


def overcomplete_dct(n: int, num_atoms: int) -> Dictionary:
    """
    Separable overcomplete DCT dictionary for √n×√n patches.

    Builds the ⌈√K⌉×⌈√K⌉ grid of 2-D cosines (the Kronecker square of the
    1-D basis) and keeps the first K columns. With K = n the result is the
    orthonormal 2-D DCT.

    Args:
        n: Patch dimension (a perfect square)
        num_atoms: K

    Returns:
        Unit-norm dictionary
    """
    edge = math.isqrt(n)
    require(edge * edge == n, f"DCT initialization needs square patches, got n = {n}")
    frequencies = math.ceil(math.sqrt(num_atoms))
    basis = dct_basis_1d(edge, frequencies)
    atoms = np.kron(basis, basis)[:, :num_atoms]
    return Dictionary.from_matrix(atoms)


def sample_dictionary(signals: np.ndarray, num_atoms: int, seed: int = 0) -> Dictionary:
    """
    Dictionary of K distinct training signals drawn without replacement.

    Zero signals are swapped for seeded Gaussian vectors before normalizing.
    """
    count = signals.shape[1]
    if count < num_atoms:
        raise InvalidArgumentError(
            f"Sampling mode needs at least K = {num_atoms} patches, got {count}"
        )
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(count, size=num_atoms, replace=False))
    atoms = signals[:, chosen].copy()
    norms = np.linalg.norm(atoms, axis=0)
    for column in np.flatnonzero(norms == 0):
        atoms[:, column] = rng.standard_normal(atoms.shape[0])
    return Dictionary.from_matrix(atoms)


def init_dictionary(
    training_patches: Optional[Union[PatchSet, np.ndarray]],
    num_atoms: int,
    seed: int = 0,
    mode: str = "dct",
    n: Optional[int] = None
) -> Dictionary:
    """
    Build the starting dictionary for K-SVD.

    Args:
        training_patches: Training patches (required for sampling mode)
        num_atoms: K
        seed: Seed for sampling mode
        mode: 'dct' or 'sample'
        n: Patch dimension when no patches are given

    Returns:
        Unit-norm dictionary
    """
    require(num_atoms >= 1, f"K must be >= 1, got {num_atoms}")
    require(mode in INIT_MODES, f"Unknown initialization mode {mode!r}; expected one of {INIT_MODES}")

    signals = None
    if training_patches is not None:
        signals = training_patches.patches if isinstance(training_patches, PatchSet) \
            else np.asarray(training_patches, dtype=np.float64)
        n = signals.shape[0]

    if mode == "dct":
        require(n is not None, "DCT initialization needs the patch dimension")
        dictionary = overcomplete_dct(n, num_atoms)
    else:
        require(signals is not None and signals.shape[1] > 0,
                "Sampling mode needs a nonempty patch set")
        dictionary = sample_dictionary(signals, num_atoms, seed)

    logger.debug(f"Initialized {dictionary.n}x{dictionary.num_atoms} dictionary ({mode})")
    return dictionary
