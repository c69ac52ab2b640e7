"""Seeded, block-parallel Monte Carlo.

Each block gets its own counter-based Philox stream spawned from one
``SeedSequence``, so a result depends only on ``(seed, samples, block)``
and never on thread scheduling. ``GB_THREADS`` caps the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

DEFAULT_BLOCK = 1 << 18


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("GB_THREADS", "1")))
    except ValueError:
        return 1


def seed_sequence(seed, *path: int) -> np.random.SeedSequence:
    """Seed sequence for ``seed`` refined by an integer ``path`` (face id, check id...)."""
    entropy = [int(seed) & ((1 << 64) - 1)] + [int(p) for p in path]
    return np.random.SeedSequence(entropy)


def block_generators(seq: np.random.SeedSequence, samples: int, block: int = DEFAULT_BLOCK):
    sizes = [block] * (samples // block)
    if samples % block:
        sizes.append(samples % block)
    children = seq.spawn(len(sizes))
    return [(np.random.Generator(np.random.Philox(c)), n) for c, n in zip(children, sizes)]


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    samples: int

    @property
    def three_sigma(self) -> float:
        return 3.0 * self.std_error


def run_blocks(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    seq: np.random.SeedSequence,
    samples: int,
    block: int = DEFAULT_BLOCK,
) -> Estimate:
    """Mean and standard error of per-sample values produced by ``draw(rng, n)``."""
    if samples <= 1:
        raise ValueError("need at least two samples")
    jobs = block_generators(seq, samples, block)

    def moments(job):
        rng, n = job
        values = np.asarray(draw(rng, n), dtype=float)
        return values.sum(), np.square(values).sum()

    workers = min(thread_count(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts: Sequence = list(pool.map(moments, jobs))
    else:
        parts = [moments(j) for j in jobs]
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return Estimate(float(mean), float(np.sqrt(var / samples)), samples)
