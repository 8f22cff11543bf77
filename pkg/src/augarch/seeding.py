"""Deterministic, scheduling-independent random streams.

Every stream is addressed by ``(master_seed, replicate, purpose)``.  The
replicate index is the *block* index used by the replicate engine; the block
size is fixed by each experiment, never by the worker count, so results are
bit-identical for any number of workers.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

__all__ = ["SeedSpec", "as_seed", "resolve_workers", "run_blocks", "WORKERS_ENV"]

WORKERS_ENV = "AUGARCH_WORKERS"
_MASK64 = (1 << 64) - 1


def _tag(purpose: str) -> int:
    return int.from_bytes(hashlib.blake2b(purpose.encode("utf-8"), digest_size=8).digest(), "little")


@dataclass(frozen=True)
class SeedSpec:
    """Address of one independent random stream."""

    master_seed: int
    replicate: int = 0
    purpose: str = "path"

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= _MASK64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.replicate < 0:
            raise ValueError("replicate id must be non-negative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(_tag(self.purpose), int(self.replicate)))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, purpose: str | None = None, replicate: int | None = None) -> SeedSpec:
        """Stream with a derived purpose tag (``parent/child``) or replicate id."""
        new_purpose = self.purpose if purpose is None else f"{self.purpose}/{purpose}"
        return replace(self, purpose=new_purpose, replicate=self.replicate if replicate is None else replicate)


def as_seed(seed, purpose: str = "path") -> SeedSpec:
    if isinstance(seed, SeedSpec):
        return seed
    if seed is None:
        seed = 0
    return SeedSpec(int(seed), 0, purpose)


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, int(workers))


def _call_block(task, seed: SeedSpec, index: int, size: int):
    return task(replace(seed, replicate=index).generator(), size)


def run_blocks(
    task: Callable[[np.random.Generator, int], object],
    reps: int,
    seed: SeedSpec,
    block_size: int,
    workers: int | None = None,
) -> list:
    """Run ``task(generator, size)`` on consecutive replicate blocks.

    Block ``i`` covers replicates ``[i*block_size, (i+1)*block_size)`` and
    draws from ``seed`` with replicate id ``i``.  Results come back in block
    order regardless of how many worker processes are used.
    """
    if reps <= 0:
        return []
    sizes = [min(block_size, reps - start) for start in range(0, reps, block_size)]
    workers = resolve_workers(workers)
    if workers == 1 or len(sizes) == 1:
        return [_call_block(task, seed, i, s) for i, s in enumerate(sizes)]
    with ProcessPoolExecutor(max_workers=min(workers, len(sizes))) as pool:
        futures = [pool.submit(_call_block, task, seed, i, s) for i, s in enumerate(sizes)]
        return [f.result() for f in futures]
