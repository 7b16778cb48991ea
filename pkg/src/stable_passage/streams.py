"""Deterministic random streams and block-parallel execution.

Replicas are grouped in fixed-size blocks.  Block ``i`` always draws from
``resolve_streams(seed, i)``, a Philox generator keyed by ``(seed, i)``, and
block results are merged in block order.  Outputs therefore depend on the
seed only, never on how blocks are spread over workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 14
WORKERS_ENV = "STABLE_PASSAGE_WORKERS"

T = TypeVar("T")


def resolve_streams(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for block ``index`` under ``master_seed``."""
    if master_seed < 0 or index < 0:
        raise ValueError("seed and stream index must be non-negative")
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(workers, 1)


def block_sizes(total: int, block: int = BLOCK_SIZE) -> list[int]:
    full, rest = divmod(int(total), block)
    return [block] * full + ([rest] if rest else [])


def map_blocks(
    func: Callable[[np.random.Generator, int, int], T],
    total: int,
    seed: int,
    workers: int | None = None,
    block: int = BLOCK_SIZE,
    first: int = 0,
) -> list[T]:
    """Run ``func(rng, block_index, size)`` over all blocks, results in block order.

    ``first`` offsets the block indices, so a long run can be processed in
    consecutive chunks that reproduce the single-call result.
    """
    sizes = block_sizes(total, block)
    workers = default_workers() if workers is None else max(int(workers), 1)

    def run(i: int) -> T:
        return func(resolve_streams(seed, first + i), first + i, sizes[i])

    if workers == 1 or len(sizes) <= 1:
        return [run(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(sizes))))


def as_seed(seed_or_rng) -> int:
    """Master seed from an int or, for convenience, a numpy Generator."""
    if isinstance(seed_or_rng, np.random.Generator):
        return int(seed_or_rng.integers(0, 2**63 - 1))
    seed = int(seed_or_rng)
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return seed


def child_seed(seed: int, k: int) -> int:
    """Independent master seed number ``k`` derived from ``seed``.

    Children live in a spawn-key range disjoint from the block streams."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(2**32 + int(k),))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))
