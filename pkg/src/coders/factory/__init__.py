"""
Factory pattern implementation for creating coders.
"""

from .coder_factory import CoderFactory

__all__ = ['CoderFactory']
