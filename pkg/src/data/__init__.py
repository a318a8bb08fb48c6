"""
Data models for dictionaries, codes, images, patches and run reports.
"""

from .models import (
    Dictionary,
    SparseCode,
    DualState,
    GrayImage,
    NoiseSpec,
    PatchSet,
    CoderStats,
    TrainIteration,
    TrainReport,
    DenoiseReport,
    BenchmarkRecord,
    CSV_COLUMNS,
)

__all__ = [
    'Dictionary',
    'SparseCode',
    'DualState',
    'GrayImage',
    'NoiseSpec',
    'PatchSet',
    'CoderStats',
    'TrainIteration',
    'TrainReport',
    'DenoiseReport',
    'BenchmarkRecord',
    'CSV_COLUMNS',
]
