"""
Sparse coding algorithms and the least-squares primitives they share.
"""

from .least_squares import (
    objective,
    compute_dual,
    sacrifice,
    restricted_least_squares,
)
from .pdas import pdas_encode, PdasCoder
from .omp import omp_encode, OmpCoder
from .lasso import lasso_encode, lasso_encode_batch, solve_on_support, lasso_objective, soft_threshold, LassoCoder
from .oracle import brute_force_best_subset

__all__ = [
    'objective',
    'compute_dual',
    'sacrifice',
    'restricted_least_squares',
    'pdas_encode',
    'PdasCoder',
    'omp_encode',
    'OmpCoder',
    'lasso_encode',
    'lasso_encode_batch',
    'solve_on_support',
    'lasso_objective',
    'soft_threshold',
    'LassoCoder',
    'brute_force_best_subset',
]
