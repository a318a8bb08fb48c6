import math

import numpy as np

from .errors import require
from ..data.models import Dictionary, GrayImage

SEPARATOR_VALUE = 0.0
FLAT_TILE_VALUE = 128.0


def atlas_size(n: int, num_atoms: int, border: int = 1) -> int:
    """Side length of the atlas image: c·e + (c − 1) separators + 2·border."""
    edge = math.isqrt(n)
    columns = math.ceil(math.sqrt(num_atoms))
    return columns * edge + (columns - 1) + 2 * border


def normalize_tile(tile: np.ndarray) -> np.ndarray:
    """Min-max stretch to [0, 255]; a constant tile becomes mid-gray."""
    low, high = float(tile.min()), float(tile.max())
    if high - low <= 0.0:
        return np.full_like(tile, FLAT_TILE_VALUE)
    return (tile - low) * (255.0 / (high - low))


def render_atlas(dictionary: Dictionary, border: int = 1) -> GrayImage:
    """
    Tile every atom as a √n×√n square in a ⌈√K⌉-wide grid.

    Tiles are separated by 1-pixel black lines and the grid is framed by
    ``border`` black pixels. Atom j sits at grid row j // c, column j % c.

    Args:
        dictionary: Dictionary whose n is a perfect square
        border: Frame width in pixels

    Returns:
        Atlas image
    """
    n = dictionary.n
    edge = math.isqrt(n)
    require(edge * edge == n, f"Atlas needs square atoms, got n = {n}")
    require(border >= 0, f"border must be >= 0, got {border}")

    columns = math.ceil(math.sqrt(dictionary.num_atoms))
    rows = math.ceil(dictionary.num_atoms / columns)
    height = rows * edge + (rows - 1) + 2 * border
    width = columns * edge + (columns - 1) + 2 * border

    canvas = np.full((height, width), SEPARATOR_VALUE)
    for j in range(dictionary.num_atoms):
        top = border + (j // columns) * (edge + 1)
        left = border + (j % columns) * (edge + 1)
        tile = dictionary.atom(j).reshape(edge, edge)
        canvas[top:top + edge, left:left + edge] = normalize_tile(tile)
    return GrayImage(canvas)
