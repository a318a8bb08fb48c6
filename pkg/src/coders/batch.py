import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Tuple, Optional, List

import numpy as np
from tqdm import tqdm

from .base.coder_interface import SparseCoder
from ..data.models import Dictionary, CoderStats
from ..utils.errors import require

logger = logging.getLogger(__name__)

CHUNK_SIZE = 512


def _encode_chunk(
    coder: SparseCoder,
    signals: np.ndarray,
    dictionary: Dictionary,
    indices: range,
    codes: np.ndarray,
    offset: int
) -> Tuple[int, int, int]:
    if coder.batched:
        block = slice(indices.start, indices.stop)
        block_codes, block_iterations, block_converged = coder.encode_batch(
            signals[:, block], dictionary, offset=offset + indices.start
        )
        codes[:, block] = block_codes
        return (int(np.sum(block_iterations)), int(np.count_nonzero(block_converged)),
                int(np.count_nonzero(block_codes)))

    iterations = converged = support = 0
    for i in indices:
        result = coder.encode(signals[:, i], dictionary, index=offset + i)
        codes[result.code.support, i] = result.code.values
        iterations += result.iterations
        converged += int(result.converged)
        support += result.code.size
    return iterations, converged, support


def encode_patches(
    coder: SparseCoder,
    signals: np.ndarray,
    dictionary: Dictionary,
    threads: int = 1,
    progress: bool = False,
    offset: int = 0
) -> Tuple[np.ndarray, CoderStats]:
    """
    Code every column of ``signals`` independently.

    Signal i is coded with index ``offset + i`` whatever the thread count, so
    serial and threaded runs give identical codes. Batched coders get one
    chunk of ``CHUNK_SIZE`` columns per call.

    Args:
        coder: Sparse coder
        signals: n×p signal matrix
        dictionary: Dictionary shared by all calls
        threads: Worker threads (1 codes in the calling thread)
        progress: Show a progress bar
        offset: Index of the first signal

    Returns:
        Dense K×p code matrix and coding statistics
    """
    signals = np.asarray(signals, dtype=np.float64)
    require(signals.ndim == 2 and signals.shape[0] == dictionary.n,
            f"Signals must be an n×p matrix with n = {dictionary.n}, got {signals.shape}")
    require(threads >= 1, f"threads must be >= 1, got {threads}")

    count = signals.shape[1]
    codes = np.zeros((dictionary.num_atoms, count))
    chunks: List[range] = [
        range(start, min(start + CHUNK_SIZE, count)) for start in range(0, count, CHUNK_SIZE)
    ]
    # Warm the cached Gram matrix before threads share it
    _ = dictionary.gram

    started = time.perf_counter()
    totals = np.zeros(3, dtype=np.int64)
    bar: Optional[tqdm] = tqdm(total=count, desc=f"{coder.name} coding", unit="patch") if progress else None

    if threads == 1:
        for chunk in chunks:
            totals += _encode_chunk(coder, signals, dictionary, chunk, codes, offset)
            if bar is not None:
                bar.update(len(chunk))
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = [
                executor.submit(_encode_chunk, coder, signals, dictionary, chunk, codes, offset)
                for chunk in chunks
            ]
            for chunk, future in zip(chunks, futures):
                totals += future.result()
                if bar is not None:
                    bar.update(len(chunk))

    if bar is not None:
        bar.close()

    seconds = time.perf_counter() - started
    iterations, converged, support = (int(v) for v in totals)
    stats = CoderStats(
        signals=count,
        mean_iterations=iterations / count if count else 0.0,
        converged_fraction=converged / count if count else 1.0,
        mean_support=support / count if count else 0.0,
        seconds=seconds,
    )
    if count and converged < count:
        logger.warning(
            f"{coder.name}: {count - converged}/{count} signals hit the iteration cap "
            f"(converged fraction {stats.converged_fraction:.4f})"
        )
    return codes, stats
