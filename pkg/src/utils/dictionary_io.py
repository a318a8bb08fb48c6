import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from .errors import DictionaryFormatError, InvalidArgumentError
from ..data.models import Dictionary

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def save_dictionary(dictionary: Dictionary, path: PathLike) -> Path:
    """
    Save a dictionary as CSV or as a binary .npy matrix.

    The CSV layout is a first line "n,K" followed by the n rows of the
    matrix, each with K comma-separated values.

    Args:
        dictionary: Dictionary to save
        path: Output path; the suffix picks the format

    Returns:
        Written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    if path.suffix.lower() == ".npy":
        np.save(path, dictionary.atoms)
    else:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(f"{dictionary.n},{dictionary.num_atoms}\n")
            pd.DataFrame(dictionary.atoms).to_csv(f, header=False, index=False, float_format="%.17g")

    logger.info(f"Saved {dictionary.n}x{dictionary.num_atoms} dictionary to {path}")
    return path


def load_dictionary(path: PathLike) -> Dictionary:
    """
    Load a dictionary written by save_dictionary.

    Raises:
        DictionaryFormatError: If the file is malformed or its atoms are not unit norm
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Dictionary not found: {path}")

    try:
        if path.suffix.lower() == ".npy":
            atoms = np.load(path, allow_pickle=False)
        else:
            with open(path, 'r', encoding='utf-8') as f:
                header = f.readline().strip().split(',')
                n, num_atoms = int(header[0]), int(header[1])
                atoms = pd.read_csv(
                    f, header=None, dtype=np.float64, float_precision="round_trip"
                ).to_numpy()
            if atoms.shape != (n, num_atoms):
                raise DictionaryFormatError(
                    f"{path}: header declares {n}x{num_atoms} but the body is {atoms.shape[0]}x{atoms.shape[1]}"
                )
    except DictionaryFormatError:
        raise
    except (ValueError, IndexError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DictionaryFormatError(f"{path}: malformed dictionary file: {e}")

    try:
        return Dictionary(atoms)
    except InvalidArgumentError as e:
        raise DictionaryFormatError(f"{path}: {e}")
