from itertools import combinations
from math import comb

import numpy as np

from .least_squares import check_signal, solve_gram
from ...data.models import Dictionary, SparseCode
from ...utils.errors import require

MAX_ENUMERATED_SUPPORTS = 10 ** 6


def brute_force_best_subset(y: np.ndarray, dictionary: Dictionary, sparsity: int) -> SparseCode:
    """
    Global minimizer of ‖y − Dx‖₂² over ‖x‖₀ ≤ T₀ by enumerating every support.

    Supports are visited by size, then lexicographically; a later support
    only replaces the incumbent with a strictly smaller error.

    Args:
        y: Signal of length n
        dictionary: Unit-norm dictionary
        sparsity: T₀

    Returns:
        Best code found
    """
    y = check_signal(y, dictionary)
    require(sparsity >= 1, f"Sparsity must be >= 1, got {sparsity}")
    num_atoms = dictionary.num_atoms
    largest = min(sparsity, dictionary.n, num_atoms)
    total = sum(comb(num_atoms, size) for size in range(1, largest + 1))
    require(total <= MAX_ENUMERATED_SUPPORTS,
            f"Enumerating {total} supports exceeds the limit of {MAX_ENUMERATED_SUPPORTS}")

    gram = dictionary.gram
    correlations = dictionary.atoms.T @ y

    best_code = SparseCode.empty(num_atoms)
    best_error = float(y @ y)
    for size in range(1, largest + 1):
        for support in combinations(range(num_atoms), size):
            active = np.array(support, dtype=np.int64)
            values = solve_gram(gram[np.ix_(active, active)], correlations[active], 1e-8)
            residual = y - dictionary.atoms[:, active] @ values
            error = float(residual @ residual)
            if error < best_error:
                best_error = error
                best_code = SparseCode(active, values, num_atoms)
    return best_code
