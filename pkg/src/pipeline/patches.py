from typing import Union, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..data.models import GrayImage, PatchSet
from ..utils.errors import require

ImageLike = Union[GrayImage, np.ndarray]


def _pixels(image: ImageLike) -> np.ndarray:
    return image.pixels if isinstance(image, GrayImage) else np.asarray(image, dtype=np.float64)


def patch_count(shape: Tuple[int, int], patch_edge: int, stride: int = 1) -> int:
    """((H − e) // s + 1)·((W − e) // s + 1)."""
    height, width = shape
    return ((height - patch_edge) // stride + 1) * ((width - patch_edge) // stride + 1)


def extract_patches(image: ImageLike, patch_edge: int = 8, stride: int = 1) -> PatchSet:
    """
    All patch_edge×patch_edge patches at stride offsets.

    Args:
        image: Source image
        patch_edge: Patch side length
        stride: Step between neighbouring origins

    Returns:
        Patch set; column k is the row-major vectorization of the k-th patch in row-major origin order
    """
    pixels = _pixels(image)
    require(patch_edge >= 1 and stride >= 1,
            f"patch_edge and stride must be positive, got {patch_edge} and {stride}")
    require(patch_edge <= min(pixels.shape),
            f"Patch edge {patch_edge} exceeds image size {pixels.shape[0]}x{pixels.shape[1]}")

    windows = sliding_window_view(pixels, (patch_edge, patch_edge))[::stride, ::stride]
    rows, columns = windows.shape[:2]
    patches = windows.reshape(rows * columns, patch_edge * patch_edge).T

    origin_rows, origin_columns = np.meshgrid(
        np.arange(rows) * stride, np.arange(columns) * stride, indexing='ij'
    )
    origins = np.stack([origin_rows.ravel(), origin_columns.ravel()], axis=1)
    return PatchSet(patch_edge, stride, patches, origins, image_shape=pixels.shape)


def sample_training_patches(patch_set: PatchSet, count: int, seed: int = 0) -> PatchSet:
    """
    Uniform random subset of ``count`` patches without replacement, kept in origin order.
    """
    require(1 <= count <= patch_set.count,
            f"Cannot sample {count} training patches from {patch_set.count}")
    if count == patch_set.count:
        return patch_set
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(patch_set.count, size=count, replace=False))
    return patch_set.subset(chosen)


def reconstruct_from_patches(
    noisy: ImageLike,
    coded_patches: PatchSet,
    blend: float,
    clip: bool = True
) -> GrayImage:
    """
    Blend overlapping patch estimates with the noisy image.

    Each output pixel is (λ·noisy + Σ patch values covering it) / (λ + cover count).
    Pixels no patch covers keep their noisy value.

    Args:
        noisy: Noisy image
        coded_patches: Patch estimates with their origins
        blend: Weight λ of the noisy image
        clip: Clip the result to [0, 255]

    Returns:
        Reconstructed image
    """
    pixels = _pixels(noisy)
    require(blend >= 0, f"Blend weight must be >= 0, got {blend}")
    edge = coded_patches.patch_edge
    origins = coded_patches.origins
    if origins.size:
        require(int(origins[:, 0].max()) + edge <= pixels.shape[0]
                and int(origins[:, 1].max()) + edge <= pixels.shape[1]
                and int(origins.min()) >= 0,
                "Patch origins fall outside the image")

    offset_rows, offset_columns = np.divmod(np.arange(edge * edge), edge)
    rows = origins[:, 0][:, None] + offset_rows[None, :]
    columns = origins[:, 1][:, None] + offset_columns[None, :]

    sums = np.zeros(pixels.shape)
    counts = np.zeros(pixels.shape)
    np.add.at(sums, (rows, columns), coded_patches.patches.T)
    np.add.at(counts, (rows, columns), 1.0)

    weights = blend + counts
    covered = weights > 0
    result = np.array(pixels, dtype=np.float64)
    result[covered] = (blend * pixels[covered] + sums[covered]) / weights[covered]
    if clip:
        result = np.clip(result, 0.0, 255.0)
    return GrayImage(result)
