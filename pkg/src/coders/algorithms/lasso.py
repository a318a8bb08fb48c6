import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from .least_squares import check_signal, SINGULAR_PIVOT_TOLERANCE
from ..base.coder_interface import SparseCoder, CodingResult
from ...config.coder_configs import LassoConfig
from ...data.models import Dictionary, SparseCode
from ...utils.errors import require

# Optimality conditions of an active-set solution are checked to this
# fraction of the largest signal correlation
KKT_RELATIVE_SLACK = 1e-10


def soft_threshold(value: float, threshold: float) -> float:
    """S(v, t) = sign(v)·max(|v| − t, 0)."""
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


def lasso_objective(y: np.ndarray, dictionary: Dictionary, x: np.ndarray, lam: float) -> float:
    """‖y − Dx‖₂² + λ‖x‖₁."""
    residual = y - dictionary.atoms @ x
    return float(residual @ residual + lam * np.sum(np.abs(x)))


def solve_on_support(
    correlations: np.ndarray,
    gram: np.ndarray,
    x: np.ndarray,
    half_lambda: float,
    n: int
) -> Optional[np.ndarray]:
    """
    Exact LASSO minimizer for the support and signs of ``x``.

    Solves G_SS z = (Dᵀy)_S − (λ/2)·sign(x_S) and accepts z only when it keeps
    the sign pattern and |d_jᵀ(y − Dz)| ≤ λ/2 holds off the support.

    Args:
        correlations: Dᵀy
        gram: DᵀD
        x: Current iterate; its nonzeros give the support
        half_lambda: λ/2
        n: Signal length

    Returns:
        Dense minimizer, or None when the support or signs are not yet right
    """
    support = np.flatnonzero(x)
    if support.size == 0 or support.size > n:
        return None
    signs = np.sign(x[support])
    block = gram[np.ix_(support, support)]
    try:
        factor, lower = linalg.cho_factor(block, lower=True, check_finite=False)
    except linalg.LinAlgError:
        return None
    if float(np.min(np.diag(factor) ** 2)) <= SINGULAR_PIVOT_TOLERANCE * float(np.max(np.diag(block))):
        return None
    values = linalg.cho_solve((factor, lower), correlations[support] - half_lambda * signs, check_finite=False)
    if not np.array_equal(np.sign(values), signs):
        return None

    # Dᵀ(y − Dz)
    remaining = correlations - gram[:, support] @ values
    slack = KKT_RELATIVE_SLACK * max(1.0, float(np.max(np.abs(correlations))))
    off_support = np.ones(x.size, dtype=bool)
    off_support[support] = False
    if np.any(np.abs(remaining[off_support]) > half_lambda + slack):
        return None
    if np.any(np.abs(remaining[support] - half_lambda * signs) > slack):
        return None

    solution = np.zeros(x.size)
    solution[support] = values
    return solution


def lasso_encode(y: np.ndarray, dictionary: Dictionary, config: LassoConfig) -> CodingResult:
    """
    Minimize ‖y − Dx‖₂² + λ‖x‖₁ by cyclic coordinate descent.

    Full sweeps over all atoms alternate with sweeps over the current
    nonzeros; the run has converged when a full sweep moves no coefficient
    by more than ``tolerance``. Once the sign pattern holds for a whole sweep
    the exact solution on that pattern is tried; it ends the run when it
    satisfies the optimality conditions.

    Args:
        y: Signal of length n
        dictionary: Dictionary (columns need not be unit norm here)
        config: Coder configuration

    Returns:
        Coding result; ``iterations`` counts sweeps
    """
    y = check_signal(y, dictionary)
    config.validate()
    num_atoms = dictionary.num_atoms
    gram = dictionary.gram
    diagonal = np.diag(gram)
    correlations = dictionary.atoms.T @ y
    half_lambda = 0.5 * config.lam

    x = np.zeros(num_atoms)
    fitted = np.zeros(num_atoms)  # Gram·x
    history = []
    sweeps = 0
    converged = False
    full_sweep = True
    previous_signs: Optional[np.ndarray] = None
    attempted = False

    while sweeps < config.max_sweeps:
        indices = range(num_atoms) if full_sweep else np.flatnonzero(x)
        largest_change = 0.0
        for j in indices:
            old = x[j]
            target = correlations[j] - fitted[j] + diagonal[j] * old
            new = soft_threshold(target, half_lambda) / diagonal[j]
            change = new - old
            if change != 0.0:
                x[j] = new
                fitted += gram[:, j] * change
                largest_change = max(largest_change, abs(change))
        sweeps += 1
        history.append(lasso_objective(y, dictionary, x, config.lam))

        if largest_change < config.tolerance:
            if full_sweep:
                converged = True
                break
            full_sweep = True
        else:
            full_sweep = False

        signs = np.sign(x)
        if previous_signs is None or not np.array_equal(signs, previous_signs):
            attempted = False
        elif not attempted:
            attempted = True
            solution = solve_on_support(correlations, gram, x, half_lambda, dictionary.n)
            if solution is not None:
                x = solution
                history[-1] = min(history[-1], lasso_objective(y, dictionary, x, config.lam))
                converged = True
                break
        previous_signs = signs

    return CodingResult(
        code=SparseCode.from_dense(x),
        iterations=sweeps,
        converged=converged,
        objective=history[-1] if history else lasso_objective(y, dictionary, x, config.lam),
        residual_history=history,
    )


def lasso_encode_batch(
    signals: np.ndarray,
    dictionary: Dictionary,
    config: LassoConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Code every column of ``signals`` with the coordinate descent of
    :func:`lasso_encode`, one coordinate at a time across the whole block.

    Each column keeps its own sweep state: full or active sweep, sweep
    count, convergence and the active-set solve. A column leaves the block
    as soon as it has converged, so its code does not depend on the other
    columns.

    Args:
        signals: n×p signal matrix
        dictionary: Dictionary
        config: Coder configuration

    Returns:
        K×p codes, sweeps per column and convergence flags
    """
    signals = np.asarray(signals, dtype=np.float64)
    require(signals.ndim == 2 and signals.shape[0] == dictionary.n,
            f"Signals must be an n×p matrix with n = {dictionary.n}, got {signals.shape}")
    require(bool(np.all(np.isfinite(signals))), "Signals must be finite")
    config.validate()

    num_atoms = dictionary.num_atoms
    count = signals.shape[1]
    gram = dictionary.gram
    diagonal = np.diag(gram)
    correlations = dictionary.atoms.T @ signals
    half_lambda = 0.5 * config.lam

    codes = np.zeros((num_atoms, count))
    fitted = np.zeros((num_atoms, count))  # Gram·codes
    sweeps = np.zeros(count, dtype=np.int64)
    converged = np.zeros(count, dtype=bool)
    running = np.ones(count, dtype=bool)
    full_sweep = np.ones(count, dtype=bool)
    attempted = np.zeros(count, dtype=bool)
    previous_signs: Optional[np.ndarray] = None

    for _ in range(config.max_sweeps):
        if not running.any():
            break
        if np.any(full_sweep & running):
            rows = range(num_atoms)
        else:
            rows = np.flatnonzero(np.any(codes[:, running] != 0.0, axis=1))

        largest_change = np.zeros(count)
        for j in rows:
            columns = np.flatnonzero(running & (full_sweep | (codes[j] != 0.0)))
            if columns.size == 0:
                continue
            old = codes[j, columns]
            target = correlations[j, columns] - fitted[j, columns] + diagonal[j] * old
            new = np.sign(target) * np.maximum(np.abs(target) - half_lambda, 0.0) / diagonal[j]
            change = new - old
            moved = change != 0.0
            if not moved.any():
                continue
            columns, change = columns[moved], change[moved]
            codes[j, columns] = new[moved]
            fitted[:, columns] += np.outer(gram[:, j], change)
            largest_change[columns] = np.maximum(largest_change[columns], np.abs(change))

        sweeps[running] += 1
        settled = running & (largest_change < config.tolerance)
        finished = settled & full_sweep
        converged[finished] = True
        running[finished] = False
        full_sweep[running] = settled[running]

        signs = np.sign(codes)
        if previous_signs is not None:
            changed = np.any(signs != previous_signs, axis=0)
            attempted[changed] = False
            for column in np.flatnonzero(running & ~changed & ~attempted):
                attempted[column] = True
                solution = solve_on_support(
                    correlations[:, column], gram, codes[:, column], half_lambda, dictionary.n
                )
                if solution is not None:
                    codes[:, column] = solution
                    converged[column] = True
                    running[column] = False
        previous_signs = signs

    return codes, sweeps, converged


class LassoCoder(SparseCoder):
    """ℓ₁-penalized coder."""

    batched = True

    def __init__(self, config: LassoConfig):
        config.validate()
        self.config = config
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")

    def encode(self, y: np.ndarray, dictionary: Dictionary, index: int = 0) -> CodingResult:
        return lasso_encode(y, dictionary, self.config)

    def encode_batch(
        self,
        signals: np.ndarray,
        dictionary: Dictionary,
        offset: int = 0
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return lasso_encode_batch(signals, dictionary, self.config)

    @property
    def name(self) -> str:
        return "lasso"

    @property
    def sparsity(self) -> Optional[int]:
        return None

    @property
    def penalty(self) -> Optional[float]:
        return self.config.lam
