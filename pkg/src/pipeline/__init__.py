"""
Denoising pipeline: noise synthesis, patch handling, per-image denoising and benchmark runs.
"""

from .noise import add_gaussian_noise
from .patches import extract_patches, sample_training_patches, reconstruct_from_patches, patch_count
from .denoiser import DenoisePipeline, denoise, calibrate_lambda
from .benchmark_manager import BenchmarkManager, BenchmarkJob

__all__ = [
    'add_gaussian_noise',
    'extract_patches',
    'sample_training_patches',
    'reconstruct_from_patches',
    'patch_count',
    'DenoisePipeline',
    'denoise',
    'calibrate_lambda',
    'BenchmarkManager',
    'BenchmarkJob',
]
