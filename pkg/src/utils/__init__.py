"""
Utility functions and classes for the denoising system.

Only the dependency-free helpers are re-exported here; the file helpers
(image_io, dictionary_io, atlas, results_writer) build on src.data and are
imported from their modules.
"""

from .errors import SparseDenoiseError, InvalidArgumentError, ImageFormatError, DictionaryFormatError
from .logger import setup_logging, get_logger, StageLogger

__all__ = [
    'SparseDenoiseError',
    'InvalidArgumentError',
    'ImageFormatError',
    'DictionaryFormatError',
    'setup_logging',
    'get_logger',
    'StageLogger',
]
