import logging
from typing import Optional

import numpy as np

from .least_squares import check_signal, solve_gram
from ..base.coder_interface import SparseCoder, CodingResult
from ...config.coder_configs import OmpConfig
from ...data.models import Dictionary, SparseCode

# Correlations at or below this fraction of ‖y‖ count as zero
ZERO_CORRELATION = 1e-13


def omp_encode(y: np.ndarray, dictionary: Dictionary, config: OmpConfig) -> CodingResult:
    """
    Orthogonal matching pursuit.

    Adds the unselected atom most correlated with the residual, refits every
    selected coefficient by least squares and repeats until T₀ atoms are
    chosen, the residual drops to ``residual_threshold`` or no atom
    correlates with the residual.

    Args:
        y: Signal of length n
        dictionary: Unit-norm dictionary
        config: Coder configuration

    Returns:
        Coding result; ``residual_history`` holds ‖r‖² before each step and after the last
    """
    y = check_signal(y, dictionary)
    config.validate()
    num_atoms = dictionary.num_atoms
    max_steps = min(config.sparsity, dictionary.n, num_atoms)

    gram = dictionary.gram
    correlations = dictionary.atoms.T @ y
    floor = ZERO_CORRELATION * max(float(np.linalg.norm(y)), 1.0)

    selected = []
    values = np.empty(0)
    residual_norm = float(y @ y)
    history = [residual_norm]

    for _ in range(max_steps):
        if config.residual_threshold is not None and residual_norm <= config.residual_threshold:
            break

        scores = np.abs(correlations - gram[:, selected] @ values) if selected else np.abs(correlations)
        scores[selected] = -1.0
        j = int(np.argmax(scores))
        if scores[j] <= floor:
            break

        selected.append(j)
        values = solve_gram(gram[np.ix_(selected, selected)], correlations[selected], 1e-8)
        residual = y - dictionary.atoms[:, selected] @ values
        residual_norm = float(residual @ residual)
        history.append(residual_norm)

    return CodingResult(
        code=SparseCode(np.array(selected, dtype=np.int64), values, num_atoms),
        iterations=len(selected),
        converged=True,
        objective=residual_norm,
        residual_history=history,
    )


class OmpCoder(SparseCoder):
    """Orthogonal matching pursuit coder."""

    def __init__(self, config: OmpConfig):
        config.validate()
        self.config = config
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def encode(self, y: np.ndarray, dictionary: Dictionary, index: int = 0) -> CodingResult:
        return omp_encode(y, dictionary, self.config)

    @property
    def name(self) -> str:
        return "omp"

    @property
    def sparsity(self) -> Optional[int]:
        return self.config.sparsity
