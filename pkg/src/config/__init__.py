"""
Configuration management for the denoising system.
"""

from .coder_configs import (
    CoderType,
    PdasConfig,
    OmpConfig,
    LassoConfig,
    SPARSITY_SCHEDULE,
    OMP_DEFAULT_SPARSITY,
    LAMBDA_GRID_EXPONENTS,
    default_sparsity,
    default_coder_config,
    lambda_grid,
)
from .settings import TrainConfig, DenoiseConfig, RunSettings, GlobalSettings, SettingsManager

__all__ = [
    'CoderType',
    'PdasConfig',
    'OmpConfig',
    'LassoConfig',
    'SPARSITY_SCHEDULE',
    'OMP_DEFAULT_SPARSITY',
    'LAMBDA_GRID_EXPONENTS',
    'default_sparsity',
    'default_coder_config',
    'lambda_grid',
    'TrainConfig',
    'DenoiseConfig',
    'RunSettings',
    'GlobalSettings',
    'SettingsManager',
]
