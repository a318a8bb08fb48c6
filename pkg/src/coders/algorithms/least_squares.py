from typing import Optional, Union

import numpy as np
from scipy import linalg

from ...data.models import Dictionary, SparseCode
from ...utils.errors import InvalidArgumentError, require

# Gram pivots below this fraction of the largest diagonal entry count as singular
SINGULAR_PIVOT_TOLERANCE = 1e-10

CodeLike = Union[SparseCode, np.ndarray]


def check_signal(y: np.ndarray, dictionary: Dictionary) -> np.ndarray:
    """Return y as a finite float vector of length n."""
    y = np.asarray(y, dtype=np.float64)
    require(y.ndim == 1, f"Signal must be a vector, got shape {y.shape}")
    require(y.size == dictionary.n,
            f"Signal length {y.size} does not match dictionary dimension {dictionary.n}")
    require(bool(np.all(np.isfinite(y))), "Signal entries must be finite")
    return y


def _dense(x: CodeLike, dictionary: Dictionary) -> np.ndarray:
    if isinstance(x, SparseCode):
        require(x.length == dictionary.num_atoms,
                f"Code length {x.length} does not match atom count {dictionary.num_atoms}")
        return x.to_dense()
    x = np.asarray(x, dtype=np.float64)
    require(x.ndim == 1 and x.size == dictionary.num_atoms,
            f"Code must have length {dictionary.num_atoms}, got shape {x.shape}")
    return x


def objective(y: np.ndarray, dictionary: Dictionary, x: CodeLike) -> float:
    """Squared representation error ‖y − Dx‖₂²."""
    y = check_signal(y, dictionary)
    residual = y - dictionary.atoms @ _dense(x, dictionary)
    return float(residual @ residual)


def compute_dual(y: np.ndarray, dictionary: Dictionary, x: CodeLike) -> np.ndarray:
    """Dual variable g = Dᵀ(y − Dx)."""
    y = check_signal(y, dictionary)
    return dictionary.atoms.T @ (y - dictionary.atoms @ _dense(x, dictionary))


def sacrifice(x: CodeLike, g: np.ndarray) -> np.ndarray:
    """Sacrifice h_j = ½(x_j + g_j)²."""
    x = x.to_dense() if isinstance(x, SparseCode) else np.asarray(x, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    require(x.shape == g.shape, f"x has shape {x.shape} but g has shape {g.shape}")
    return 0.5 * (x + g) ** 2


def solve_gram(gram_a: np.ndarray, rhs: np.ndarray, ridge_epsilon: float) -> np.ndarray:
    """
    Solve (D_AᵀD_A) z = D_Aᵀy through a Cholesky factor, falling back to the
    ridge system (D_AᵀD_A + εI) z = D_Aᵀy when the Gram block is singular.

    Args:
        gram_a: |A|×|A| Gram block
        rhs: D_Aᵀy
        ridge_epsilon: Ridge ε for the singular case

    Returns:
        Coefficients on A
    """
    scale = float(np.max(np.diag(gram_a)))
    try:
        factor, lower = linalg.cho_factor(gram_a, lower=True, check_finite=False)
        pivots = np.diag(factor) ** 2
        if float(np.min(pivots)) > SINGULAR_PIVOT_TOLERANCE * scale:
            return linalg.cho_solve((factor, lower), rhs, check_finite=False)
    except linalg.LinAlgError:
        pass

    ridged = gram_a + ridge_epsilon * np.eye(gram_a.shape[0])
    try:
        return linalg.solve(ridged, rhs, assume_a='sym', check_finite=False)
    except linalg.LinAlgError:
        # ε = 0 on an exactly singular block
        return linalg.lstsq(gram_a, rhs, check_finite=False)[0]


def restricted_least_squares(
    y: np.ndarray,
    dictionary: Dictionary,
    active: np.ndarray,
    ridge_epsilon: float = 1e-8,
    correlations: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Least-squares coefficients of y on the atoms in ``active``.

    Args:
        y: Signal of length n
        dictionary: Unit-norm dictionary
        active: Nonempty index set with |A| ≤ n
        ridge_epsilon: Ridge ε used when D_AᵀD_A is singular
        correlations: Precomputed Dᵀy (skips one product when coding in a loop)

    Returns:
        Coefficients in the order of ``active``
    """
    y = check_signal(y, dictionary)
    active = np.asarray(active, dtype=np.int64).ravel()
    if active.size == 0:
        raise InvalidArgumentError("Active set must be nonempty")
    require(active.size <= dictionary.n,
            f"Active set size {active.size} exceeds signal dimension {dictionary.n}")
    require(bool(np.all((active >= 0) & (active < dictionary.num_atoms))),
            f"Active indices must lie in [0, {dictionary.num_atoms})")
    require(np.unique(active).size == active.size, "Active indices must be distinct")

    if correlations is None:
        rhs = dictionary.atoms[:, active].T @ y
    else:
        rhs = correlations[active]
    gram_a = dictionary.gram[np.ix_(active, active)]
    return solve_gram(gram_a, rhs, ridge_epsilon)
