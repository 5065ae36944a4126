"""
Seeded resampling engine

Resample k always draws from its own substream derived from (seed, k), so
results do not depend on how resamples are spread over threads.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

logger = logging.getLogger(__name__)


def substream(seed: int, k: int) -> np.random.Generator:
    """Independent generator for resample k"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(k)]))


def run_resamples(draw: Callable[[np.random.Generator], float],
                  n_resamples: int,
                  seed: int,
                  max_workers: int = 1) -> np.ndarray:
    """
    Evaluate `draw` once per resample

    Args:
        draw: Computes one resample statistic from a generator
        n_resamples: Number of resamples
        seed: Base seed
        max_workers: Threads to spread the resamples over

    Returns:
        Array of length n_resamples; slot k holds draw(substream(seed, k))
    """
    results = np.empty(n_resamples, dtype=float)

    def work(start: int, stop: int) -> None:
        for k in range(start, stop):
            results[k] = draw(substream(seed, k))

    if max_workers <= 1:
        work(0, n_resamples)
        return results

    chunk = -(-n_resamples // max_workers)
    bounds = [(start, min(start + chunk, n_resamples)) for start in range(0, n_resamples, chunk)]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(work, start, stop) for start, stop in bounds]
        for future in futures:
            future.result()

    logger.debug(f"Ran {n_resamples} resamples on {len(bounds)} chunks")
    return results
