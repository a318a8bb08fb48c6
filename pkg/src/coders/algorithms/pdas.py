import logging
from typing import Optional

import numpy as np

from .least_squares import check_signal, solve_gram
from ..base.coder_interface import SparseCoder, CodingResult
from ...config.coder_configs import PdasConfig
from ...data.models import Dictionary, SparseCode, DualState


def top_indices(h: np.ndarray, count: int) -> np.ndarray:
    """Sorted indices of the ``count`` largest entries of h; the lower index wins ties."""
    return np.sort(np.argsort(-h, kind="stable")[:count])


def pdas_encode(
    y: np.ndarray,
    dictionary: Dictionary,
    config: PdasConfig,
    index: int = 0,
    initial_active: Optional[np.ndarray] = None
) -> CodingResult:
    """
    Primal-dual active-set coding under the constraint ‖x‖₀ ≤ T₀.

    Each iteration fits x on the active set A by least squares, evaluates the
    dual g = Dᵀ(y − Dx) on the complement, scores every atom by its sacrifice
    h (½x² on A, ½g² off A) and moves A to the T₀ highest scores. The loop
    stops when A repeats; after ``max_iterations`` the lowest-objective
    iterate is returned with ``converged=False``.

    Args:
        y: Signal of length n
        dictionary: Unit-norm dictionary
        config: Coder configuration
        index: Signal position; the initial set is drawn from seed (config.seed, index)
        initial_active: Explicit starting set (overrides the random draw)

    Returns:
        Coding result carrying the final dual state
    """
    y = check_signal(y, dictionary)
    num_atoms = dictionary.num_atoms
    config.validate(dictionary.n, num_atoms)
    t0 = config.sparsity

    if initial_active is None:
        rng = np.random.default_rng([config.seed, index])
        active = np.sort(rng.choice(num_atoms, size=t0, replace=False))
    else:
        active = np.sort(np.asarray(initial_active, dtype=np.int64))

    gram = dictionary.gram
    correlations = dictionary.atoms.T @ y

    history = []
    best = None
    for iteration in range(1, config.max_iterations + 1):
        values = solve_gram(gram[np.ix_(active, active)], correlations[active], config.ridge_epsilon)
        residual = y - dictionary.atoms[:, active] @ values
        current = float(residual @ residual)
        history.append(current)

        g = correlations - gram[:, active] @ values
        h = 0.5 * g ** 2
        h[active] = 0.5 * values ** 2

        if best is None or current < best[0]:
            best = (current, active, values, g, h, iteration)

        next_active = top_indices(h, t0)
        if np.array_equal(next_active, active):
            return CodingResult(
                code=SparseCode(active, values, num_atoms),
                iterations=iteration,
                converged=True,
                objective=current,
                dual=DualState(g, h),
                residual_history=history,
            )
        active = next_active

    best_objective, active, values, g, h, _ = best
    return CodingResult(
        code=SparseCode(active, values, num_atoms),
        iterations=config.max_iterations,
        converged=False,
        objective=best_objective,
        dual=DualState(g, h),
        residual_history=history,
    )


class PdasCoder(SparseCoder):
    """Primal-dual active-set coder."""

    def __init__(self, config: PdasConfig):
        """
        Initialize the coder.

        Args:
            config: PDAS configuration
        """
        config.validate()
        self.config = config
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def encode(self, y: np.ndarray, dictionary: Dictionary, index: int = 0) -> CodingResult:
        return pdas_encode(y, dictionary, self.config, index=index)

    @property
    def name(self) -> str:
        return "pdas"

    @property
    def sparsity(self) -> Optional[int]:
        return self.config.sparsity
