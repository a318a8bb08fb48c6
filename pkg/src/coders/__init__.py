"""
Sparse coders: the coder interface, the algorithms and the coder factory.
"""

from .base import SparseCoder, CodingResult
from .factory import CoderFactory
from .batch import encode_patches

__all__ = ['SparseCoder', 'CodingResult', 'CoderFactory', 'encode_patches']
