"""
Sparse Denoise
K-SVD image denoising with interchangeable sparse coders (PDAS, OMP, LASSO).
"""

__version__ = "1.0.0"
__author__ = "Sparse Denoise Team"
