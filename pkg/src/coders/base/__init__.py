"""
Base classes and interfaces for all sparse coders.
"""

from .coder_interface import SparseCoder, CodingResult

__all__ = ['SparseCoder', 'CodingResult']
