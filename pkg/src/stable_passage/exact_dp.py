"""Exact survival probabilities for lattice walks by convolve-and-truncate.

The state after step ``n`` is the sub-probability vector
``P(S_n = x, T_g > n)`` on the integers above the kill level.  Each step
convolves with the increment law using compensated (Neumaier) accumulation
and zeroes the states at or below the boundary.  Cost is O(n^2 * support)
so horizons are capped at ``DP_MAX_STEPS``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .boundaries import BoundarySpec
from .models import IncrementModel, Lattice, ScalingSequence, scaling_sequence

__all__ = [
    "DP_MAX_STEPS",
    "DpState",
    "DpSweep",
    "kill_levels",
    "dp_survival",
    "dp_survival_curve",
    "dp_state_distribution",
    "dp_expectation_V",
    "dp_positive_prob",
    "dp_positive_curve",
    "dp_sweep",
]

DP_MAX_STEPS = 1 << 14


@dataclass(frozen=True)
class DpState:
    """``probs[i] = P(S_n = support_offset + i, T_g > n)``."""

    n: int
    support_offset: int
    probs: np.ndarray = field(repr=False)

    @property
    def support(self) -> np.ndarray:
        return self.support_offset + np.arange(len(self.probs))

    @property
    def total(self) -> float:
        return math.fsum(self.probs)


@dataclass(frozen=True)
class DpSweep:
    """Survival (and optionally ``E[V(S_n - g_n); T_g > n]``) on a grid of n."""

    n: np.ndarray
    survival: np.ndarray
    expectation: Optional[np.ndarray]
    kill: np.ndarray = field(repr=False)
    crossing: np.ndarray = field(repr=False)


def _require_lattice(model):
    if not isinstance(model, Lattice):
        raise TypeError("exact DP needs a lattice increment model")


def _check_horizon(n):
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > DP_MAX_STEPS:
        raise ValueError(f"exact DP is capped at n <= {DP_MAX_STEPS}")


def kill_levels(
    b: BoundarySpec,
    n_max: int,
    c_seq: Optional[ScalingSequence] = None,
    model: Optional[IncrementModel] = None,
) -> np.ndarray:
    """Largest integer ``k_n`` whose occupation at step ``n`` ends the walk.

    Weak crossing kills ``x <= g_n``, i.e. ``x <= floor(g_n)``; strict crossing
    kills ``x < g_n``, i.e. ``x <= ceil(g_n) - 1``.  Index 0 is unused.
    """
    if b.needs_scaling and c_seq is None:
        if model is None:
            raise ValueError("scaled_log boundary requires a scaling sequence")
        c_seq = scaling_sequence(model, range(1, n_max + 1))
    g = b.values(n_max, c_seq)
    k = np.ceil(g) - 1 if b.strict else np.floor(g)
    out = k.astype(np.int64)
    out[0] = np.iinfo(np.int64).min // 4
    return out


def _step(p, lo, offs, probs):
    """One convolution with the increment law, Neumaier-compensated."""
    dmin = offs[0]
    width = len(p) + offs[-1] - dmin
    s = np.zeros(width)
    c = np.zeros(width)
    for o, q in zip(offs, probs):
        if q == 0.0:
            continue
        t = q * p
        sl = slice(o - dmin, o - dmin + len(p))
        cur = s[sl]
        tot = cur + t
        c[sl] += np.where(np.abs(cur) >= np.abs(t), (cur - tot) + t, (t - tot) + cur)
        s[sl] = tot
    return s + c, lo + dmin


def _run(model: Lattice, kill: np.ndarray, n_max: int, start: int = 0) -> Iterator:
    """Yield ``(n, lo, p, killed_mass)`` for ``n = 1..n_max``."""
    offs = list(model.offsets)
    probs = list(model.probs)
    p = np.ones(1)
    lo = int(start)
    for n in range(1, n_max + 1):
        p, lo = _step(p, lo, offs, probs)
        cut = kill[n] - lo + 1
        killed = 0.0
        if cut > 0:
            killed = math.fsum(p[:cut])
            p = p[cut:]
            lo += cut
        if len(p) == 0:
            p = np.zeros(1)
        yield n, lo, p, killed


def dp_state_distribution(
    model: Lattice,
    b: BoundarySpec,
    n: int,
    c_seq: Optional[ScalingSequence] = None,
    start: int = 0,
) -> DpState:
    _require_lattice(model)
    _check_horizon(n)
    if n == 0:
        return DpState(0, int(start), np.ones(1))
    kill = kill_levels(b, n, c_seq, model)
    for k, lo, p, _ in _run(model, kill, n, start):
        pass
    return DpState(int(n), int(lo), p)


def dp_survival(
    model: Lattice,
    b: BoundarySpec,
    n: int,
    c_seq: Optional[ScalingSequence] = None,
    start: int = 0,
) -> float:
    """Exact ``P(T_g > n)`` for a lattice walk started at ``start``."""
    return dp_state_distribution(model, b, n, c_seq, start).total


def dp_sweep(
    model: Lattice,
    b: BoundarySpec,
    n_grid: Sequence[int],
    V: Optional[Callable] = None,
    c_seq: Optional[ScalingSequence] = None,
    start: int = 0,
) -> DpSweep:
    """Single recursion reporting survival (and the V-functional) on ``n_grid``.

    ``crossing[k - 1]`` is ``P(T_g = k)`` for every ``k`` up to the largest n.
    """
    _require_lattice(model)
    n_grid = np.unique(np.asarray(n_grid, dtype=np.int64))
    if n_grid.size == 0 or n_grid[0] < 1:
        raise ValueError("horizons must be >= 1")
    n_max = int(n_grid[-1])
    _check_horizon(n_max)
    kill = kill_levels(b, n_max, c_seq, model)
    g = None
    if V is not None:
        g = b.values(n_max, c_seq if not b.needs_scaling or c_seq is not None
                     else scaling_sequence(model, range(1, n_max + 1)))
    wanted = set(n_grid.tolist())
    surv, expe, crossing = [], [], []
    for n, lo, p, killed in _run(model, kill, n_max, start):
        crossing.append(killed)
        if n in wanted:
            surv.append(math.fsum(p))
            if V is not None:
                x = lo + np.arange(len(p)) - g[n]
                expe.append(math.fsum(np.asarray(V(x), dtype=float) * p))
    return DpSweep(
        n_grid,
        np.array(surv),
        np.array(expe) if V is not None else None,
        kill,
        np.array(crossing),
    )


def dp_survival_curve(
    model: Lattice,
    b: BoundarySpec,
    n_max: int,
    c_seq: Optional[ScalingSequence] = None,
    start: int = 0,
) -> np.ndarray:
    """``out[n] = P(T_g > n)`` for ``n = 0..n_max``."""
    sw = dp_sweep(model, b, range(1, n_max + 1), None, c_seq, start)
    return np.concatenate([[1.0], sw.survival])


def dp_expectation_V(
    model: Lattice,
    b: BoundarySpec,
    n: int,
    V: Callable,
    c_seq: Optional[ScalingSequence] = None,
    start: int = 0,
) -> float:
    """Exact ``E[V(S_n - g_n); T_g > n]``."""
    return float(dp_sweep(model, b, [n], V, c_seq, start).expectation[0])


def dp_positive_curve(
    model: Lattice,
    b: BoundarySpec,
    n_max: int,
    c_seq: Optional[ScalingSequence] = None,
) -> np.ndarray:
    """``out[n]`` = probability that the free ``S_n`` is on the surviving side
    of ``g_n`` (``S_n > g_n``, or ``S_n >= g_n`` under strict crossing);
    ``out[0]`` is NaN."""
    _require_lattice(model)
    _check_horizon(n_max)
    kill = kill_levels(b, n_max, c_seq, model)
    free = np.full(n_max + 1, np.iinfo(np.int64).min // 4, dtype=np.int64)
    out = np.full(n_max + 1, np.nan)
    for n, lo, p, _ in _run(model, free, n_max):
        cut = max(int(kill[n]) - lo + 1, 0)
        out[n] = math.fsum(p[cut:])
    return out


def dp_positive_prob(
    model: Lattice,
    b: BoundarySpec,
    n: int,
    c_seq: Optional[ScalingSequence] = None,
) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(dp_positive_curve(model, b, n, c_seq)[n])
