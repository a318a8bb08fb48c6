import logging
import re
from pathlib import Path
from typing import Union

import numpy as np
import png

from .errors import ImageFormatError
from ..data.models import GrayImage

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_PNM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*([^\s#]+)")


def _pnm_header(data: bytes):
    """Return the magic, width, height, maxval and the offset of the raster."""
    tokens = []
    position = 0
    while len(tokens) < 4:
        match = _PNM_TOKEN.match(data, position)
        if match is None:
            raise ImageFormatError("Truncated PNM header")
        tokens.append(match.group(1))
        position = match.end()
    # exactly one whitespace byte separates the header from the raster
    return tokens[0], tokens[1], tokens[2], tokens[3], position + 1


def read_pgm(path: PathLike) -> GrayImage:
    """
    Read a binary (P5) or ASCII (P2) grayscale PGM.

    Args:
        path: File path

    Returns:
        Image with intensities rescaled to [0, 255] when maxval ≠ 255
    """
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic in (b"P3", b"P6"):
        raise ImageFormatError(f"{path}: colour PPM images are not supported; convert to grayscale")
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"{path}: not a PGM file (magic {magic!r})")

    try:
        _, width, height, maxval, offset = _pnm_header(data)
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError as e:
        raise ImageFormatError(f"{path}: malformed PGM header: {e}")
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise ImageFormatError(f"{path}: invalid PGM dimensions {width}x{height} or maxval {maxval}")

    count = width * height
    if magic == b"P5":
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset) \
            if len(data) - offset >= count * dtype.itemsize else None
        if raster is None:
            raise ImageFormatError(f"{path}: PGM raster is truncated")
    else:
        raster = np.array(data[offset - 1:].split(), dtype=np.int64)
        if raster.size < count:
            raise ImageFormatError(f"{path}: PGM raster is truncated")
        raster = raster[:count]

    pixels = raster.reshape(height, width).astype(np.float64)
    if maxval != 255:
        pixels *= 255.0 / maxval
    return GrayImage(pixels)


def write_pgm(image: GrayImage, path: PathLike) -> Path:
    """Write an 8-bit binary PGM (values rounded and clipped to [0, 255])."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raster = image.to_uint8()
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    path.write_bytes(header + raster.tobytes())
    return path


def read_png(path: PathLike) -> GrayImage:
    """Read a grayscale PNG; an alpha channel is dropped, colour images are rejected."""
    try:
        width, height, rows, info = png.Reader(filename=str(path)).asDirect()
        raster = np.vstack([np.asarray(row, dtype=np.float64) for row in rows])
    except png.Error as e:
        raise ImageFormatError(f"{path}: unreadable PNG: {e}")

    if not info.get('greyscale', False):
        raise ImageFormatError(f"{path}: colour PNG images are not supported; convert to grayscale")
    planes = info.get('planes', 1)
    raster = raster.reshape(height, width, planes)[:, :, 0]

    maxval = 2 ** info.get('bitdepth', 8) - 1
    if maxval != 255:
        raster = raster * (255.0 / maxval)
    return GrayImage(raster)


def write_png(image: GrayImage, path: PathLike) -> Path:
    """Write an 8-bit grayscale PNG (values rounded and clipped to [0, 255])."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raster = image.to_uint8()
    writer = png.Writer(width=image.width, height=image.height, greyscale=True, bitdepth=8)
    with open(path, 'wb') as f:
        writer.write(f, raster.tolist())
    return path


def read_image(path: PathLike) -> GrayImage:
    """Read a PGM or PNG by extension (falling back to the file signature)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Image not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".png":
        return read_png(path)
    if suffix in (".pgm", ".pnm"):
        return read_pgm(path)

    with open(path, 'rb') as f:
        signature = f.read(8)
    if signature.startswith(b"\x89PNG"):
        return read_png(path)
    return read_pgm(path)


def write_image(image: GrayImage, path: PathLike) -> Path:
    """Write a PNG when the suffix is .png, otherwise a binary PGM."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        written = write_png(image, path)
    else:
        written = write_pgm(image, path)
    logger.debug(f"Wrote {image.width}x{image.height} image to {written}")
    return written


def read_noisy(path: PathLike) -> GrayImage:
    """
    Read a saved noisy image: the unclipped ``.npy`` array when the suffix
    says so, otherwise a PGM or PNG.
    """
    path = Path(path)
    if path.suffix.lower() != ".npy":
        return read_image(path)
    if not path.exists():
        raise FileNotFoundError(f"Noisy image not found: {path}")
    try:
        pixels = np.load(path, allow_pickle=False)
    except ValueError as e:
        raise ImageFormatError(f"{path}: unreadable array file: {e}")
    if pixels.ndim != 2:
        raise ImageFormatError(f"{path}: expected a 2-D array, got shape {pixels.shape}")
    return GrayImage(pixels)
