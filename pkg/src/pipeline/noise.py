import numpy as np

from ..data.models import GrayImage, NoiseSpec


def add_gaussian_noise(image: GrayImage, spec: NoiseSpec) -> GrayImage:
    """
    Add i.i.d. N(0, σ²) noise drawn from a generator seeded with spec.seed.

    The result is not clipped.
    """
    if spec.sigma == 0:
        return GrayImage(image.pixels)
    rng = np.random.default_rng(spec.seed)
    return GrayImage(image.pixels + rng.normal(0.0, spec.sigma, size=image.shape))
