"""
Dictionary learning: initialization and the K-SVD trainer.
"""

from .initialization import init_dictionary, overcomplete_dct
from .ksvd import update_atom, replace_dead_atom, ksvd_train, KsvdTrainer

__all__ = [
    'init_dictionary',
    'overcomplete_dct',
    'update_atom',
    'replace_dead_atom',
    'ksvd_train',
    'KsvdTrainer',
]
