"""Estimators behind the survival asymptotics: the harmonic functional
``U_g(n) = E[V(S_n - g_n); T_g > n]``, survival ratios, tail exponents,
the limit trichotomy and two-sample meander comparisons."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .boundaries import BoundarySpec, SummabilityResult, check_summability_T21
from .exact_dp import dp_sweep
from .models import IncrementModel, Lattice, ScalingSequence, scaling_sequence
from .renewal import RenewalEstimate
from .streams import as_seed, child_seed
from .walk_sim import SurvivalEstimate, conditioned_functionals, survival_sweep

__all__ = [
    "UgCurve",
    "RatioCurve",
    "TailFit",
    "LimitClassification",
    "UniformityReport",
    "MeanderComparison",
    "estimate_ug",
    "ratio_curve",
    "tail_exponent",
    "classify_limit",
    "constant_boundary_uniformity",
    "two_sample_ks",
    "ks_null_band",
    "meander_compare",
    "FUNCTIONALS",
]

FUNCTIONALS = ("endpoint", "supremum", "average")
_EPS_GUARD = 10 * np.finfo(float).eps


def _v_source(V) -> str:
    if isinstance(V, RenewalEstimate):
        return f"{V.kind}[chains={V.chains}]"
    return getattr(V, "__name__", type(V).__name__)


@dataclass(frozen=True)
class UgCurve:
    """``U_g(n)`` on a grid with the survival probabilities from the same run.

    ``ci`` / ``survival_ci`` are 95% half-widths, zero when ``exact``."""

    n: np.ndarray
    u: np.ndarray
    ci: np.ndarray
    survival: np.ndarray
    survival_ci: np.ndarray
    exact: bool
    model_key: str
    boundary_key: str
    v_source: str

    def rows(self) -> list[dict]:
        return [
            {"n": int(n), "u_g": float(u), "u_ci": float(c), "survival": float(p),
             "survival_ci": float(pc), "exact": self.exact}
            for n, u, c, p, pc in zip(self.n, self.u, self.ci, self.survival, self.survival_ci)
        ]


def estimate_ug(
    model: IncrementModel,
    b: BoundarySpec,
    n_grid: Sequence[int],
    V: Callable,
    method: str = "dp_exact",
    replicas: int = 100_000,
    seed=0,
    workers: Optional[int] = None,
    c_seq: Optional[ScalingSequence] = None,
) -> UgCurve:
    """``U_g(n)`` by exact DP (lattice laws) or as a Monte Carlo mean of
    ``V(S_n - g_n) 1{T_g > n}``."""
    n_grid = np.unique(np.asarray(n_grid, dtype=np.int64))
    if b.needs_scaling and c_seq is None:
        c_seq = scaling_sequence(model, range(1, int(n_grid[-1]) + 1))
    if method == "dp_exact":
        if not isinstance(model, Lattice):
            raise ValueError("dp_exact needs a lattice model; use monte_carlo")
        sw = dp_sweep(model, b, n_grid, V, c_seq)
        zeros = np.zeros(len(n_grid))
        return UgCurve(n_grid, sw.expectation, zeros, sw.survival, zeros, True, model.key,
                       b.key, _v_source(V))
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    sw = survival_sweep(model, b, n_grid, replicas, seed, workers, c_seq, keep_positions=True)
    g = b.values(int(n_grid[-1]), c_seq)[n_grid]
    pos = sw.positions
    alive = ~np.isnan(pos)
    vals = np.zeros(pos.shape)
    vals[alive] = np.asarray(V(np.maximum((pos - g)[alive], 0.0)), dtype=float)
    u = vals.mean(axis=0)
    ci = 1.96 * vals.std(axis=0) / math.sqrt(replicas)
    return UgCurve(n_grid, u, ci, sw.p_hat, sw.ci_half_width, False, model.key, b.key,
                   _v_source(V))


@dataclass(frozen=True)
class RatioCurve:
    """Survival ratio diagnostics per horizon.

    ``r = P(T_g > n) U_0(n) / (P(tau_0 > n) U_g(n))`` where ``U_0`` is the
    same functional for the zero boundary; it equals 1 identically for
    ``g = 0`` whatever the normalisation of ``V``.  ``r_raw`` omits the
    ``U_0`` factor.  Entries with a degenerate denominator are NaN and flagged.
    """

    n: np.ndarray
    p_g: np.ndarray
    p_0: np.ndarray
    u_g: np.ndarray
    u_0: np.ndarray
    r: np.ndarray
    r_raw: np.ndarray
    flagged: np.ndarray
    ug: Optional[UgCurve] = field(default=None, repr=False)

    def rows(self) -> list[dict]:
        keys = ("n", "p_g", "p_0", "u_g", "u_0", "r", "r_raw", "flagged")
        return [dict(zip(keys, vals)) for vals in zip(*(getattr(self, k).tolist() for k in keys))]


def ratio_curve(
    model: IncrementModel,
    b: BoundarySpec,
    n_grid: Sequence[int],
    V: Callable,
    method: str = "dp_exact",
    replicas: int = 100_000,
    seed=0,
    workers: Optional[int] = None,
    c_seq: Optional[ScalingSequence] = None,
) -> RatioCurve:
    seed = as_seed(seed)
    kw = dict(method=method, replicas=replicas, workers=workers, c_seq=c_seq)
    ug = estimate_ug(model, b, n_grid, V, seed=child_seed(seed, 0), **kw)
    u0 = estimate_ug(model, b.zero_like(), n_grid, V, seed=child_seed(seed, 1), **kw)
    den = u0.survival * ug.u
    bad = (den < _EPS_GUARD) | (ug.u <= 0) | (u0.u <= 0)
    if not ug.exact:
        bad |= (u0.survival - u0.survival_ci <= 0) | (ug.u - ug.ci <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_raw = np.where(bad, np.nan, ug.survival / den)
        r = np.where(bad, np.nan, r_raw * u0.u)
    return RatioCurve(ug.n, ug.survival, u0.survival, ug.u, u0.u, r, r_raw, bad, ug)


@dataclass(frozen=True)
class TailFit:
    exponent: float
    stderr: float
    n_range: tuple[int, int]
    points: int


def tail_exponent(survival, p=None) -> TailFit:
    """Least-squares slope of ``log p`` against ``log n``.

    Accepts a list of ``SurvivalEstimate`` or two arrays ``(n, p)``."""
    if p is None:
        n = np.array([e.n for e in survival], dtype=float)
        p = np.array([e.p_hat for e in survival], dtype=float)
    else:
        n = np.asarray(survival, dtype=float)
        p = np.asarray(p, dtype=float)
    if len(n) < 4:
        raise ValueError("a tail fit needs at least 4 points")
    if np.any(p <= 0):
        raise ValueError("survival probabilities must be positive")
    x, y = np.log(n), np.log(p)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = len(n) - 2
    s2 = float(resid @ resid) / dof
    se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    return TailFit(float(coef[0]), se, (int(n.min()), int(n.max())), len(n))


@dataclass(frozen=True)
class LimitClassification:
    label: str
    monotonicity: str
    summability: SummabilityResult
    u_trend: float
    u_min: float
    u_max: float


def classify_limit(b: BoundarySpec, c_seq: ScalingSequence, ug: UgCurve,
                   n_max: Optional[int] = None) -> LimitClassification:
    """Limit behaviour of ``U_g(n)`` from summability and monotonicity.

    The empirical trend ``U_g(n_last) / U_g(n_first)`` is reported alongside
    and never changes the label."""
    n_max = int(n_max or max(int(ug.n.max()), 2**8))
    summ = check_summability_T21(b, c_seq, n_max)
    mono = b.monotonicity(n_max, c_seq)
    if summ.label == "summable" and mono != "none":
        label = "converges_positive"
    elif summ.label == "not_summable" and mono == "increasing":
        label = "tends_to_zero"
    elif summ.label == "not_summable" and mono == "decreasing":
        label = "tends_to_infinity"
    else:
        label = "inconclusive"
    u = ug.u
    trend = float(u[-1] / u[0]) if u[0] > 0 else math.nan
    return LimitClassification(label, mono, summ, trend, float(u.min()), float(u.max()))


@dataclass(frozen=True)
class UniformityReport:
    """Per starting level ``x``: ``ratio = P(tau_x > n) V(0) / (V(x) P(tau_0 > n))``
    and ``bound_ratio`` against ``C0 V(min(x, c_n)) / V(0) * P(tau_0 > n)``."""

    x: np.ndarray
    n: int
    p_x: np.ndarray
    p_0: float
    ratio: np.ndarray
    bound_ratio: np.ndarray
    within_zone: np.ndarray


def constant_boundary_uniformity(
    model: IncrementModel,
    x_list: Sequence[float],
    n: int,
    V: Callable,
    method: str = "dp_exact",
    replicas: int = 100_000,
    seed=0,
    workers: Optional[int] = None,
    C0: float = 1.0,
    strict: bool = True,
) -> UniformityReport:
    """Compare ``P(tau_x > n)`` with ``V(x) P(tau_0 > n) / V(0)``.

    ``tau_x`` is the exit time below ``-x``.  Strict crossing is the default
    because the weak descending renewal function is exactly harmonic for the
    walk killed strictly below its level; the two conventions agree for
    continuous laws.  ``within_zone`` marks ``x <= c_n / log(n)``.
    """
    x = np.asarray(x_list, dtype=float)
    if np.any(x < 0):
        raise ValueError("levels must be >= 0")
    seed = as_seed(seed)
    p0 = _survival_at(model, BoundarySpec.constant(0.0, strict=strict), n, method, replicas,
                      seed, workers)
    px = np.array([
        _survival_at(model, BoundarySpec.constant(-xi, strict=strict), n, method, replicas,
                     seed, workers)
        for xi in x
    ])
    v0 = float(V(0.0))
    vx = np.asarray(V(x), dtype=float)
    c_n = scaling_sequence(model, [n])[n]
    vmin = np.asarray(V(np.minimum(x, c_n)), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = px * v0 / (vx * p0)
        bound = px * v0 / (C0 * vmin * p0)
    return UniformityReport(x, int(n), px, float(p0), ratio, bound, x <= c_n / math.log(n))


def _survival_at(model, b, n, method, replicas, seed, workers) -> float:
    if method == "dp_exact":
        if not isinstance(model, Lattice):
            raise ValueError("dp_exact needs a lattice model; use monte_carlo")
        return float(dp_sweep(model, b, [n]).survival[0])
    if method != "monte_carlo":
        raise ValueError(f"unknown method {method!r}")
    # common random numbers: every level reuses the same replica streams
    return survival_sweep(model, b, [n], replicas, seed, workers).p_hat[0]


# -- two-sample diagnostics --------------------------------------------------------


def two_sample_ks(sample_a, sample_b) -> float:
    """Sup distance between the two empirical distribution functions."""
    a = np.sort(np.asarray(sample_a, dtype=float).ravel())
    b = np.sort(np.asarray(sample_b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_null_band(sample_a, sample_b, level: float = 0.99, permutations: int = 200,
                 seed: int = 0) -> float:
    """``level`` quantile of the KS statistic under random relabelling of the pooled sample."""
    a = np.asarray(sample_a, dtype=float).ravel()
    pooled = np.concatenate([a, np.asarray(sample_b, dtype=float).ravel()])
    rng = np.random.default_rng(seed)
    stats = np.empty(permutations)
    for i in range(permutations):
        perm = rng.permutation(pooled)
        stats[i] = two_sample_ks(perm[: a.size], perm[a.size :])
    return float(np.quantile(stats, level))


@dataclass(frozen=True)
class MeanderComparison:
    functional: str
    n: int
    ks: float
    null_band: float
    acceptance_g: float
    acceptance_0: float
    sample_g: np.ndarray = field(repr=False)
    sample_0: np.ndarray = field(repr=False)

    @property
    def inside_band(self) -> bool:
        return self.ks <= self.null_band


def meander_compare(
    model: IncrementModel,
    b: BoundarySpec,
    n: int,
    count: int,
    functional: str = "endpoint",
    seed=0,
    workers: Optional[int] = None,
    c_seq: Optional[ScalingSequence] = None,
    permutations: int = 200,
) -> MeanderComparison:
    """KS distance between a rescaled path functional conditioned on
    ``T_g > n`` and the same functional conditioned on ``tau_0 > n``.

    The two conditioned samples use independent seeds derived from ``seed``.
    """
    if functional not in FUNCTIONALS:
        raise ValueError(f"functional must be one of {FUNCTIONALS}")
    seed = as_seed(seed)
    if c_seq is None or n not in c_seq:
        c_seq = scaling_sequence(model, range(1, n + 1) if b.needs_scaling else [n])
    run_g = conditioned_functionals(model, b, n, count, child_seed(seed, 10), workers, c_seq)
    run_0 = conditioned_functionals(model, b.zero_like(), n, count, child_seed(seed, 11),
                                    workers, c_seq)
    sg = getattr(run_g, functional)
    s0 = getattr(run_0, functional)
    ks = two_sample_ks(sg, s0)
    band = ks_null_band(sg, s0, 0.99, permutations, seed=child_seed(seed, 12))
    return MeanderComparison(functional, int(n), ks, band, run_g.acceptance, run_0.acceptance,
                             sg, s0)
