"""Generating-function algebra: series exponentials, the Sparre-Andersen
identity and the upper bound ``q_n`` for moving-boundary survival.

All recursions accumulate with ``math.fsum`` so order-4096 truncations stay
at rounding level for probability-scale coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .boundaries import BoundarySpec
from .exact_dp import dp_positive_curve
from .models import IncrementModel, Lattice, ScalingSequence, scaling_sequence
from .streams import as_seed, map_blocks

__all__ = [
    "SeriesCoefficients",
    "SeriesError",
    "DeltaSequence",
    "exp_series",
    "log_series",
    "cauchy_product",
    "sparre_andersen_survival",
    "delta_sequence",
    "wh_upper_bound",
    "MAX_ORDER",
]

MAX_ORDER = 4096
_TOL = 1e-12


class SeriesError(ArithmeticError):
    """A series identity produced coefficients outside their admissible range."""


@dataclass(frozen=True)
class SeriesCoefficients:
    """Truncated power series ``a_0 + a_1 z + ... + a_N z^N``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("a series needs at least the constant coefficient")
        if not np.all(np.isfinite(c)):
            raise ValueError("series coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k):
        return self.coeffs[k]

    def __len__(self):
        return len(self.coeffs)

    def truncate(self, order: int) -> "SeriesCoefficients":
        return SeriesCoefficients(self.coeffs[: order + 1])


def _as_series(p) -> np.ndarray:
    return p.coeffs if isinstance(p, SeriesCoefficients) else np.asarray(p, dtype=float)


def exp_series(p) -> SeriesCoefficients:
    """Coefficients of ``exp(P(z))`` to the order of ``P``.

    Uses ``E_0 = exp(p_0)`` and ``n E_n = sum_{k=1..n} k p_k E_{n-k}``.
    """
    a = _as_series(p)
    n_max = len(a) - 1
    kp = np.arange(len(a)) * a
    e = np.empty(len(a))
    e[0] = math.exp(a[0])
    for n in range(1, n_max + 1):
        e[n] = math.fsum(kp[1 : n + 1] * e[n - 1 :: -1][:n]) / n
    return SeriesCoefficients(e)


def log_series(a) -> SeriesCoefficients:
    """Coefficients of ``log(A(z))``; needs ``a_0 > 0``."""
    a = _as_series(a)
    if a[0] <= 0:
        raise ValueError("log of a series needs a positive constant term")
    n_max = len(a) - 1
    out = np.empty(len(a))
    out[0] = math.log(a[0])
    kl = np.zeros(len(a))
    for n in range(1, n_max + 1):
        # n a_n = sum_{k=1..n} k L_k a_{n-k}
        s = math.fsum(kl[1:n] * a[n - 1 : 0 : -1]) if n > 1 else 0.0
        out[n] = (n * a[n] - s) / (n * a[0])
        kl[n] = n * out[n]
    return SeriesCoefficients(out)


def cauchy_product(a, b, order: Optional[int] = None) -> SeriesCoefficients:
    a, b = _as_series(a), _as_series(b)
    n_max = min(len(a), len(b)) - 1 if order is None else int(order)
    if n_max > min(len(a), len(b)) - 1:
        raise ValueError("order exceeds the available coefficients")
    out = np.empty(n_max + 1)
    for n in range(n_max + 1):
        out[n] = math.fsum(a[: n + 1] * b[n::-1])
    return SeriesCoefficients(out)


def sparre_andersen_survival(positive_probs: Sequence[float]) -> SeriesCoefficients:
    """``P(tau_0 > n)``, n = 0..N, from ``P(S_k > 0)``, k = 1..N.

    The generating function of the survival tail is
    ``exp(sum_k z^k P(S_k > 0) / k)``.
    """
    p = np.asarray(positive_probs, dtype=float).ravel()
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise ValueError("positive probabilities must lie in [0, 1]")
    if len(p) > MAX_ORDER:
        raise ValueError(f"truncation order is capped at {MAX_ORDER}")
    k = np.arange(1, len(p) + 1)
    out = exp_series(np.concatenate([[0.0], p / k]))
    c = out.coeffs
    if np.any(c < -_TOL) or np.any(c > 1 + _TOL):
        raise SeriesError("survival coefficients left [0, 1]")
    if np.any(np.diff(c) > _TOL):
        raise SeriesError("survival coefficients are not non-increasing")
    return out


@dataclass(frozen=True)
class DeltaSequence:
    """``delta[i] = Delta_{i+1}``; ``ci`` holds 95% half-widths (zeros when exact)."""

    delta: np.ndarray
    ci: np.ndarray = field(repr=False)
    method: str

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, len(self.delta) + 1)


def delta_sequence(
    model: IncrementModel,
    b: BoundarySpec,
    N: int,
    method: str = "dp_exact",
    replicas: int = 100_000,
    seed=0,
    workers: Optional[int] = None,
    c_seq: Optional[ScalingSequence] = None,
) -> DeltaSequence:
    """``Delta_n = P(S_n > g_n) - P(S_n > 0)`` for n = 1..N.

    Under strict crossing both events use ``>=``, matching the survival
    event of that convention.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if method == "dp_exact":
        if not isinstance(model, Lattice):
            raise ValueError("dp_exact needs a lattice model; use monte_carlo")
        pg = dp_positive_curve(model, b, N, c_seq)
        p0 = dp_positive_curve(model, b.zero_like(), N)
        d = pg[1:] - p0[1:]
        return DeltaSequence(d, np.zeros(N), method)
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    if b.needs_scaling and c_seq is None:
        c_seq = scaling_sequence(model, range(1, N + 1))
    g = b.values(N, c_seq)
    code, par, offs, cum = model.kernel_spec()

    def job(rng, _i, size):
        ag = np.zeros(N + 1, np.int64)
        a0 = np.zeros(N + 1, np.int64)
        dif = np.zeros(N + 1, np.int64)
        _kernels.side_counts_block(rng, code, par, offs, cum, g, b.strict, size, ag, a0, dif)
        return ag, a0, dif

    parts = map_blocks(job, replicas, as_seed(seed), workers)
    ag, a0, dif = (np.sum([p[k] for p in parts], axis=0)[1:] for k in range(3))
    d = (ag - a0) / replicas
    var = np.maximum(dif / replicas - d**2, 0.0)
    return DeltaSequence(d, 1.96 * np.sqrt(var / replicas), method)


def wh_upper_bound(tau0_survival, delta, N: Optional[int] = None) -> SeriesCoefficients:
    """``q_n``: coefficients of ``sum_n z^n P(tau_0 > n) * exp(sum_n z^n Delta_n / n)``."""
    s = _as_series(tau0_survival)
    d = np.asarray(delta.delta if isinstance(delta, DeltaSequence) else delta, dtype=float)
    N = min(len(s) - 1, len(d)) if N is None else int(N)
    if len(s) < N + 1 or len(d) < N:
        raise ValueError("inputs are shorter than the requested order")
    if N > MAX_ORDER:
        raise ValueError(f"truncation order is capped at {MAX_ORDER}")
    k = np.arange(1, N + 1)
    e = exp_series(np.concatenate([[0.0], d[:N] / k]))
    return cauchy_product(s[: N + 1], e, N)
