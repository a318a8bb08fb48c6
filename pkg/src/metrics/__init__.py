"""
Image quality metrics.
"""

from .quality import psnr, ssim, SsimConfig

__all__ = ['psnr', 'ssim', 'SsimConfig']
