"""
Counter-based random streams.

Every chunk of work draws from its own Philox stream keyed by (seed, chunk index), so the numbers
a chunk sees never depend on how chunks are spread over workers.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, Tuple, TypeVar

import numpy as np

from degenspec.constants import DEFAULTS

LOGGER = logging.getLogger(__name__)

T = TypeVar("T")


def substream(seed: int, chunk: int) -> np.random.Generator:
    bit_generator = np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,)))
    return np.random.Generator(bit_generator)


def chunks(total: int, size: int) -> Iterator[Tuple[int, int]]:
    """(chunk index, chunk length) pairs covering `total` items"""
    if size < 1:
        raise ValueError(f"chunk size must be positive, got {size}")
    index = 0
    for start in range(0, total, size):
        yield index, min(size, total - start)
        index += 1


def standard_normal(generator: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    """Box-Muller on the stream's uniforms"""
    count = int(np.prod(shape))
    half = (count + 1) // 2
    u1 = 1.0 - generator.random(half)
    u2 = generator.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    normals = np.concatenate((radius * np.cos(angle), radius * np.sin(angle)))
    return normals[:count].reshape(shape)


def map_chunks(
    work: Callable[[int, int], T],
    total: int,
    size: int,
    workers: int = DEFAULTS.WORKERS,
) -> List[T]:
    """
    Run `work(chunk, length)` over all chunks and return the results in chunk order.
    """
    jobs = list(chunks(total, size))
    if workers < 1:
        raise ValueError(f"workers must be positive, got {workers}")
    LOGGER.debug("running %d chunks on %d workers", len(jobs), workers)
    if workers == 1 or len(jobs) < 2:
        return [work(chunk, length) for chunk, length in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: work(*job), jobs))
