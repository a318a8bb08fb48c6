import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.signal import convolve2d

from ..data.models import GrayImage
from ..utils.errors import require

PEAK = 255.0

ImageLike = Union[GrayImage, np.ndarray]


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """size×size Gaussian weights summing to 1."""
    offsets = np.arange(size) - (size - 1) / 2.0
    profile = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    window = np.outer(profile, profile)
    return window / window.sum()


@dataclass(frozen=True)
class SsimConfig:
    """Window and stabilizing constants for SSIM."""
    window_size: int = 11
    window_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = PEAK
    target_size: int = 256
    window: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        require(self.window_size >= 1, f"window_size must be >= 1, got {self.window_size}")
        require(self.window_sigma > 0, f"window_sigma must be > 0, got {self.window_sigma}")
        require(self.k1 > 0 and self.k2 > 0, "SSIM constants must be positive")
        object.__setattr__(self, 'window', gaussian_window(self.window_size, self.window_sigma))

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    def downsample_factor(self, height: int, width: int) -> int:
        """f = max(1, round(min(H, W) / 256))."""
        return max(1, int(round(min(height, width) / self.target_size)))


def _pixels(image: ImageLike) -> np.ndarray:
    if isinstance(image, GrayImage):
        return image.pixels
    pixels = np.asarray(image, dtype=np.float64)
    require(pixels.ndim == 2, f"Grayscale image must be 2-D, got shape {pixels.shape}")
    return pixels


def _pair(x: ImageLike, y: ImageLike):
    a, b = _pixels(x), _pixels(y)
    require(a.shape == b.shape, f"Image dimensions differ: {a.shape} vs {b.shape}")
    return a, b


def psnr(x: ImageLike, y: ImageLike) -> float:
    """
    Peak signal-to-noise ratio 10·log₁₀(255² / MSE) in dB.

    Identical images give +inf.
    """
    a, b = _pair(x, y)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK ** 2 / mse)


def downsample(pixels: np.ndarray, factor: int) -> np.ndarray:
    """Average f×f blocks (box filter then subsample); trailing rows and columns are dropped."""
    if factor == 1:
        return pixels
    height = pixels.shape[0] // factor * factor
    width = pixels.shape[1] // factor * factor
    blocks = pixels[:height, :width].reshape(height // factor, factor, width // factor, factor)
    return blocks.mean(axis=(1, 3))


def ssim(x: ImageLike, y: ImageLike, config: SsimConfig = None) -> float:
    """
    Mean structural similarity over all fully contained Gaussian windows.

    Args:
        x: First image
        y: Second image
        config: Window and constants (defaults: 11×11, σ = 1.5, K₁ = 0.01, K₂ = 0.03)

    Returns:
        SSIM in [−1, 1]
    """
    config = config or SsimConfig()
    a, b = _pair(x, y)
    factor = config.downsample_factor(*a.shape)
    a, b = downsample(a, factor), downsample(b, factor)
    require(min(a.shape) >= config.window_size,
            f"Image of shape {a.shape} after downsampling is smaller than the "
            f"{config.window_size}x{config.window_size} window")

    window = config.window

    def filtered(values: np.ndarray) -> np.ndarray:
        return convolve2d(values, window, mode='valid')

    mu_a, mu_b = filtered(a), filtered(b)
    mu_aa, mu_bb, mu_ab = mu_a * mu_a, mu_b * mu_b, mu_a * mu_b
    var_a = filtered(a * a) - mu_aa
    var_b = filtered(b * b) - mu_bb
    covariance = filtered(a * b) - mu_ab

    c1, c2 = config.c1, config.c2
    numerator = (2.0 * mu_ab + c1) * (2.0 * covariance + c2)
    denominator = (mu_aa + mu_bb + c1) * (var_a + var_b + c2)
    return float(np.mean(numerator / denominator))
