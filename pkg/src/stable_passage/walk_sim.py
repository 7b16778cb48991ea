"""Monte Carlo engine: first-passage times, survival, ladder chains and
conditioned path functionals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .boundaries import BoundarySpec
from .models import IncrementModel, Lattice, ScalingSequence, scaling_sequence
from .streams import BLOCK_SIZE, as_seed, default_workers, map_blocks

__all__ = [
    "FirstPassageRecord",
    "SurvivalEstimate",
    "SurvivalSweep",
    "ConditionedSample",
    "RareEventAbort",
    "first_passage",
    "simulate_survival",
    "survival_sweep",
    "sample_endpoints",
    "ladder_chain",
    "conditioned_functionals",
    "LADDER_KINDS",
]

LADDER_KINDS = ("weak_descending", "strict_ascending")
MIN_ACCEPTANCE = 1e-4


class RareEventAbort(RuntimeError):
    """Rejection sampling would need an unreasonable number of paths."""


@dataclass(frozen=True)
class FirstPassageRecord:
    t: int
    censored: bool
    position_at_t: float
    survived_to: int


@dataclass(frozen=True)
class SurvivalEstimate:
    n: int
    p_hat: float
    replicas: int
    ci_half_width: float
    censored_fraction: float = math.nan
    seed: Optional[int] = None

    @classmethod
    def from_count(cls, n, alive, replicas, **kw) -> "SurvivalEstimate":
        p = alive / replicas
        return cls(int(n), p, int(replicas), 1.96 * math.sqrt(p * (1 - p) / replicas), **kw)

    @property
    def ci_low(self) -> float:
        return max(self.p_hat - self.ci_half_width, 0.0)

    @property
    def ci_high(self) -> float:
        return min(self.p_hat + self.ci_half_width, 1.0)

    def row(self) -> dict:
        return {
            "n": self.n,
            "p_hat": self.p_hat,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "replicas": self.replicas,
            "censored_fraction": self.censored_fraction,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SurvivalSweep:
    """Survival along a grid of horizons from a single set of replicas.

    ``positions[i, j]`` is ``S_{n_j}`` for replica ``i`` if it is still alive
    at ``n_j`` and NaN otherwise (only kept when requested).
    """

    estimates: tuple[SurvivalEstimate, ...]
    seed: int
    replicas: int
    censored_fraction: float
    positions: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> np.ndarray:
        return np.array([e.n for e in self.estimates])

    @property
    def p_hat(self) -> np.ndarray:
        return np.array([e.p_hat for e in self.estimates])

    @property
    def ci_half_width(self) -> np.ndarray:
        return np.array([e.ci_half_width for e in self.estimates])

    def rows(self) -> list[dict]:
        return [e.row() for e in self.estimates]


@dataclass(frozen=True)
class ConditionedSample:
    """Functionals of ``S_{[nt]} / c_n`` over paths that survived to ``n``."""

    n: int
    c_n: float
    endpoint: np.ndarray = field(repr=False)
    supremum: np.ndarray = field(repr=False)
    average: np.ndarray = field(repr=False)
    rejections: int
    simulated: int

    @property
    def count(self) -> int:
        return len(self.endpoint)

    @property
    def acceptance(self) -> float:
        return self.count / self.simulated


# -- passage runs ------------------------------------------------------------------


def _boundary_array(b: BoundarySpec, n: int, c_seq: Optional[ScalingSequence], model):
    if b.needs_scaling and c_seq is None:
        c_seq = scaling_sequence(model, range(1, n + 1))
    return b.values(n, c_seq)


def _passage_run(model, g, strict, start, rec, replicas, seed, workers, first_block=0,
                 block=BLOCK_SIZE):
    code, par, offs, cum = model.kernel_spec()
    rec = np.asarray(rec, dtype=np.int64)

    def job(rng, _i, size):
        t = np.empty(size, dtype=np.int64)
        x = np.empty(size)
        r = np.empty((size, len(rec)))
        sup = np.empty(size)
        avg = np.empty(size)
        _kernels.passage_block(rng, code, par, offs, cum, g, strict, float(start), rec,
                               t, x, r, sup, avg)
        return t, x, r, sup, avg

    parts = map_blocks(job, replicas, seed, workers, block=block, first=first_block)
    return [np.concatenate([p[k] for p in parts]) for k in range(5)]


def first_passage(
    model: IncrementModel,
    b: BoundarySpec,
    n_max: int,
    rng: np.random.Generator,
    c_seq: Optional[ScalingSequence] = None,
    start: float = 0.0,
) -> FirstPassageRecord:
    """One path, stopped at its first crossing of ``b`` or censored at ``n_max``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    g = _boundary_array(b, n_max, c_seq, model)
    code, par, offs, cum = model.kernel_spec()
    t = np.empty(1, dtype=np.int64)
    x = np.empty(1)
    r = np.empty((1, 0))
    sup = np.empty(1)
    avg = np.empty(1)
    _kernels.passage_block(rng, code, par, offs, cum, g, b.strict, float(start),
                           np.zeros(0, np.int64), t, x, r, sup, avg)
    censored = bool(t[0] > n_max)
    return FirstPassageRecord(int(min(t[0], n_max)), censored, float(x[0]),
                              int(n_max if censored else t[0] - 1))


def survival_sweep(
    model: IncrementModel,
    b: BoundarySpec,
    n_grid: Sequence[int],
    replicas: int,
    seed=0,
    workers: Optional[int] = None,
    c_seq: Optional[ScalingSequence] = None,
    start: float = 0.0,
    keep_positions: bool = False,
) -> SurvivalSweep:
    """Estimate ``P(T_g > n)`` for every ``n`` in ``n_grid`` from one replica set.

    ``start`` shifts the initial position, so a constant boundary ``-x`` and
    a zero boundary started at ``x`` consume identical random streams.
    """
    n_grid = np.unique(np.asarray(n_grid, dtype=np.int64))
    if n_grid.size == 0 or n_grid[0] < 1:
        raise ValueError("horizons must be >= 1")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    seed = as_seed(seed)
    horizon = int(n_grid[-1])
    g = _boundary_array(b, horizon, c_seq, model)
    rec = n_grid if keep_positions else np.zeros(0, np.int64)
    t, _, r, _, _ = _passage_run(model, g, b.strict, start, rec, replicas, seed, workers)
    censored = float(np.mean(t > horizon))
    est = tuple(
        SurvivalEstimate.from_count(n, int(np.count_nonzero(t > n)), replicas,
                                    censored_fraction=censored, seed=seed)
        for n in n_grid
    )
    return SurvivalSweep(est, seed, int(replicas), censored, r if keep_positions else None)


def simulate_survival(
    model: IncrementModel,
    b: BoundarySpec,
    n: int,
    replicas: int,
    seed=0,
    workers: Optional[int] = None,
    c_seq: Optional[ScalingSequence] = None,
    start: float = 0.0,
) -> SurvivalEstimate:
    if n < 1:
        raise ValueError("n must be >= 1")
    return survival_sweep(model, b, [n], replicas, seed, workers, c_seq, start).estimates[0]


def sample_endpoints(
    model: IncrementModel,
    n: int,
    size: int,
    seed=0,
    workers: Optional[int] = None,
) -> np.ndarray:
    """Independent draws of the unconstrained ``S_n``."""
    seed = as_seed(seed)
    if isinstance(model, Lattice):
        offs = np.array(model.offsets, dtype=float)
        probs = np.array(model.probs)

        def job(rng, _i, m):
            out = np.empty(m)
            _kernels.lattice_endpoint_block(rng, offs, probs, int(n), out)
            return out
    else:
        code, par, offs, cum = model.kernel_spec()

        def job(rng, _i, m):
            out = np.empty(m)
            _kernels.endpoint_block(rng, code, par, offs, cum, int(n), out)
            return out

    return np.concatenate(map_blocks(job, size, seed, workers))


# -- ladder chains -----------------------------------------------------------------


def ladder_args(model: IncrementModel, kind: str):
    """Kernel arguments for a ladder search of the given kind."""
    if kind not in LADDER_KINDS:
        raise ValueError(f"kind must be one of {LADDER_KINDS}")
    code, par, offs, cum = model.kernel_spec()
    weak = kind == "weak_descending"
    sign = 1.0 if weak else -1.0
    if isinstance(model, Lattice):
        probs = np.array(model.probs)
        max_drop = float(model.max_down if weak else model.max_up)
        skip = True
    else:
        probs = np.zeros(1)
        max_drop = 1.0
        skip = False
    return code, par, offs, cum, probs, sign, weak, skip, max_drop


def ladder_chain(
    model: IncrementModel,
    kind: str,
    x_max: float,
    step_cap: int,
    rng: np.random.Generator,
) -> tuple[list[float], bool]:
    """Successive ladder heights until their sum exceeds ``x_max``.

    Returns the individual heights and whether a search hit ``step_cap``
    (in which case the list stops before the censored search).
    """
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    args = ladder_args(model, kind)
    heights: list[float] = []
    total = 0.0
    while total <= x_max:
        h, cens = _kernels.ladder_search(rng, *args, int(step_cap))
        if cens:
            return heights, True
        heights.append(float(h))
        total += h
    return heights, False


# -- conditioned paths -------------------------------------------------------------


def conditioned_functionals(
    model: IncrementModel,
    b: BoundarySpec,
    n: int,
    count: int,
    seed=0,
    workers: Optional[int] = None,
    c_seq: Optional[ScalingSequence] = None,
    pilot: int = 1 << 17,
    max_paths: Optional[int] = None,
) -> ConditionedSample:
    """Rejection sampler for paths with ``T_g > n``.

    Paths are generated in fixed blocks and the first ``count`` survivors in
    replica order are kept, so the result depends only on the seed.  After
    ``pilot`` paths the run aborts if the acceptance rate is below 1e-4.
    """
    if count < 1 or n < 1:
        raise ValueError("count and n must be >= 1")
    seed = as_seed(seed)
    if c_seq is None or n not in c_seq:
        c_seq = scaling_sequence(model, range(1, n + 1) if b.needs_scaling else [n])
    c_n = c_seq[n]
    g = b.values(n, c_seq) if not b.needs_scaling else _boundary_array(b, n, c_seq, model)
    workers = default_workers() if workers is None else max(int(workers), 1)

    ends, sups, avgs = [], [], []
    accepted = simulated = 0
    block = 0
    rejections = None
    while accepted < count:
        chunk = workers * BLOCK_SIZE
        t, x, _, sup, avg = _passage_run(model, g, b.strict, 0.0, [], chunk, seed, workers,
                                         first_block=block)
        block += workers
        alive = t > n
        hits = np.flatnonzero(alive)
        need = count - accepted
        if len(hits) >= need:
            last = hits[need - 1]
            keep = hits[:need]
            simulated += last + 1
        else:
            keep = hits
            simulated += chunk
        ends.append(x[keep])
        sups.append(sup[keep])
        avgs.append(avg[keep])
        accepted += len(keep)
        if simulated >= pilot and accepted < MIN_ACCEPTANCE * simulated:
            raise RareEventAbort(
                f"acceptance {accepted}/{simulated} below {MIN_ACCEPTANCE:g} at n={n}; "
                "reduce n or the boundary height"
            )
        if max_paths is not None and simulated >= max_paths and accepted < count:
            raise RareEventAbort(f"only {accepted} of {count} paths accepted in {simulated}")
    rejections = simulated - accepted
    return ConditionedSample(
        int(n),
        float(c_n),
        np.concatenate(ends) / c_n,
        np.concatenate(sups) / c_n,
        np.concatenate(avgs) / c_n,
        int(rejections),
        int(simulated),
    )
