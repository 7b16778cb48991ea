"""Renewal functions of ladder heights.

``V`` counts weak descending ladder heights, ``H`` strict ascending ones:
``V(x) = sum_k P(H_k <= x)`` including the ``k = 0`` term, estimated by
running independent ladder chains.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .models import IncrementModel, Lattice, ScalingSequence
from .streams import as_seed, map_blocks
from .walk_sim import SurvivalEstimate, ladder_args

__all__ = [
    "RenewalEstimate",
    "LimitConstants",
    "SubadditivityReport",
    "KIND_LABEL",
    "estimate_renewal",
    "renewal_eval",
    "lrt_diagnostic",
    "limit_constants",
    "subadditivity_check",
    "srw_V",
    "srw_H",
    "srw_renewal_table",
    "renewal_grid",
    "default_step_cap",
]

KIND_LABEL = {"weak_descending": "weak_descending_V", "strict_ascending": "strict_ascending_H"}
CHAIN_BLOCK = 1 << 12
DEFAULT_STEP_CAP = 10**9
# without block skipping a search costs about sqrt(step_cap) steps on average
CONTINUOUS_STEP_CAP = 10**6


def default_step_cap(model: IncrementModel) -> int:
    return DEFAULT_STEP_CAP if isinstance(model, Lattice) else CONTINUOUS_STEP_CAP


@dataclass(frozen=True)
class RenewalEstimate:
    """Renewal function sampled on ``grid``; linear in between.

    Calling the estimate evaluates it at any ``x >= 0``, extrapolating
    linearly from the last two grid points beyond the grid.
    """

    grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    kind: str
    chains: int
    censored_fraction: float
    model_key: str = ""

    def __post_init__(self):
        for name in ("grid", "values", "stderr"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.grid.ndim != 1 or len(self.grid) != len(self.values) or not len(self.grid):
            raise ValueError("grid and values must be equal-length non-empty vectors")
        if self.grid[0] != 0 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be increasing and start at 0")

    @classmethod
    def from_table(cls, grid, values, kind="weak_descending_V", model_key=""):
        values = np.asarray(values, dtype=float)
        return cls(np.asarray(grid, float), values, np.zeros_like(values), kind, 0, 0.0,
                   model_key)

    @property
    def x_max(self) -> float:
        return float(self.grid[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < 0):
            raise ValueError("renewal functions are evaluated at x >= 0")
        out = np.interp(x, self.grid, self.values)
        beyond = x > self.grid[-1]
        if np.any(beyond):
            if len(self.grid) > 1:
                slope = (self.values[-1] - self.values[-2]) / (self.grid[-1] - self.grid[-2])
            else:
                slope = 0.0
            out = np.where(beyond, self.values[-1] + slope * (x - self.grid[-1]), out)
        return out if out.ndim else float(out)

    def rows(self) -> list[dict]:
        return [
            {"x": float(x), "value": float(v), "stderr": float(s), "kind": self.kind,
             "chains": self.chains, "censored_fraction": self.censored_fraction}
            for x, v, s in zip(self.grid, self.values, self.stderr)
        ]


def renewal_eval(est: RenewalEstimate, x: float) -> tuple[float, bool]:
    """Value at ``x`` and whether it was extrapolated past the grid."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return float(est(x)), bool(x > est.x_max)


def renewal_grid(model: IncrementModel, x_max: float, points: int = 200) -> np.ndarray:
    """Unit grid for lattice laws, ``0`` plus ``points`` geometric points otherwise."""
    if x_max < 0:
        raise ValueError("x_max must be >= 0")
    if isinstance(model, Lattice):
        return np.arange(0, math.floor(x_max) + 1, dtype=float)
    if x_max == 0:
        return np.zeros(1)
    return np.concatenate([[0.0], np.geomspace(x_max * 1e-4, x_max, points)])


def estimate_renewal(
    model: IncrementModel,
    kind: str,
    x_max: float,
    chains: int,
    step_cap: Optional[int] = None,
    seed=0,
    workers: Optional[int] = None,
    grid: Optional[Sequence[float]] = None,
) -> RenewalEstimate:
    """Monte Carlo renewal function from ``chains`` independent ladder chains.

    Chains whose ladder search exceeds ``step_cap`` steps are dropped from the
    average and reported through ``censored_fraction``.  The default cap is
    ``10^9`` for lattice laws (long stretches are skipped exactly) and
    ``10^6`` otherwise.
    """
    if step_cap is None:
        step_cap = default_step_cap(model)
    if chains < 1:
        raise ValueError("chains must be >= 1")
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    seed = as_seed(seed)
    args = ladder_args(model, kind)
    grid = renewal_grid(model, x_max) if grid is None else np.asarray(grid, dtype=float)

    def job(rng, _i, size):
        sums = np.zeros(len(grid))
        sumsq = np.zeros(len(grid))
        cens = _kernels.renewal_block(rng, *args, int(step_cap), grid, size, sums, sumsq)
        return sums, sumsq, cens

    parts = map_blocks(job, chains, seed, workers, block=CHAIN_BLOCK)
    sums = np.sum([p[0] for p in parts], axis=0)
    sumsq = np.sum([p[1] for p in parts], axis=0)
    censored = int(sum(p[2] for p in parts))
    valid = chains - censored
    if valid == 0:
        raise RuntimeError("every ladder chain hit step_cap; raise step_cap")
    mean = sums / valid
    var = np.maximum(sumsq / valid - mean**2, 0.0)
    return RenewalEstimate(grid, mean, np.sqrt(var / valid), KIND_LABEL[kind], int(chains),
                           censored / chains, model.key)


# -- simple random walk closed forms -------------------------------------------------


def srw_V(x):
    """Weak descending renewal function of the simple walk, ``2(x + 1)``.

    Exact at integers; between them it is the linear interpolation used by
    every tabulated estimate."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0, 2.0 * (x + 1.0), 0.0)
    return out if out.ndim else float(out)


def srw_H(x):
    """Strict ascending renewal function of the simple walk, ``floor(x) + 1``."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0, np.floor(x) + 1.0, 0.0)
    return out if out.ndim else float(out)


def srw_renewal_table(kind: str, x_max: int, model_key: str = "") -> RenewalEstimate:
    grid = np.arange(0, int(x_max) + 1, dtype=float)
    f = srw_V if kind in ("weak_descending", "weak_descending_V") else srw_H
    label = KIND_LABEL.get(kind, kind)
    return RenewalEstimate.from_table(grid, f(grid), label, model_key)


# -- diagnostics ---------------------------------------------------------------------


def lrt_diagnostic(est: RenewalEstimate, x_min: float, x_max: float) -> float:
    """``sup x (V(x+1) - V(x)) / V(x)`` over grid points in ``[x_min, x_max]``."""
    if x_min < 1:
        raise ValueError("x_min must be >= 1")
    x = est.grid[(est.grid >= x_min) & (est.grid <= x_max)]
    if x.size == 0:
        return math.nan
    v = est(x)
    ratio = x * (est(x + 1) - v) / v
    return float(np.max(ratio))


@dataclass(frozen=True)
class SubadditivityReport:
    pairs: int
    max_excess: float
    ok: bool


def subadditivity_check(est: RenewalEstimate, max_pairs: int = 5000, seed: int = 0) -> SubadditivityReport:
    """Check ``V(x+y) <= V(x) + V(y) + 3 se(x+y)`` on grid pairs."""
    g = est.grid
    idx = [(i, j) for i in range(len(g)) for j in range(i, len(g)) if g[i] + g[j] <= g[-1]]
    if len(idx) > max_pairs:
        rng = np.random.default_rng(seed)
        idx = [idx[k] for k in rng.choice(len(idx), max_pairs, replace=False)]
    if not idx:
        return SubadditivityReport(0, -math.inf, True)
    i, j = np.array(idx).T
    s = g[i] + g[j]
    se = np.interp(s, g, est.stderr)
    excess = est(s) - est.values[i] - est.values[j] - 3 * se
    worst = float(np.max(excess))
    return SubadditivityReport(len(idx), worst, worst <= 1e-12)


# -- limit constants -----------------------------------------------------------------


@dataclass(frozen=True)
class LimitConstants:
    """``A(n) = V(c_n) P(tau_0 > n)``, ``A+(n) = H(c_n) P(tau+ > n)`` and
    ``VH(n) = V(c_n) H(c_n) / n`` with 95% half-widths."""

    n: np.ndarray
    A: np.ndarray
    A_ci: np.ndarray
    A_plus: np.ndarray
    A_plus_ci: np.ndarray
    VH: np.ndarray
    VH_ci: np.ndarray = field(repr=False)

    def doubling_ratios(self, name: str) -> dict[int, float]:
        """``X(2n) / X(n)`` for every n on the grid whose double is also present."""
        vals = dict(zip(self.n.tolist(), getattr(self, name).tolist()))
        return {n: vals[2 * n] / vals[n] for n in vals if 2 * n in vals}


def _surv(entry):
    if isinstance(entry, SurvivalEstimate):
        return entry.n, entry.p_hat, entry.ci_half_width
    n, p = entry
    return int(n), float(p), 0.0


def _rel(v, se):
    return np.where(v > 0, 1.96 * se / np.where(v > 0, v, 1.0), 0.0)


def limit_constants(
    model: IncrementModel,
    tau0_survival: Sequence,
    V_est: RenewalEstimate,
    H_est: RenewalEstimate,
    c_seq: ScalingSequence,
    tau_plus_survival: Optional[Sequence] = None,
) -> LimitConstants:
    """Sequences whose convergence expresses the tail asymptotics of the
    ladder epochs.  Survival entries are ``SurvivalEstimate`` objects or
    exact ``(n, p)`` pairs; every input must come from ``model``."""
    for name, obj in (("V", V_est), ("H", H_est), ("c_n", c_seq)):
        if obj.model_key and obj.model_key != model.key:
            raise ValueError(f"{name} was built for a different model ({obj.model_key})")
    rows0 = [_surv(e) for e in tau0_survival]
    n = np.array([r[0] for r in rows0])
    p0 = np.array([r[1] for r in rows0])
    ci0 = np.array([r[2] for r in rows0])
    c = np.array([c_seq[k] for k in n])
    v, vse = np.atleast_1d(V_est(c)), np.interp(c, V_est.grid, V_est.stderr)
    h, hse = np.atleast_1d(H_est(c)), np.interp(c, H_est.grid, H_est.stderr)
    rv, rh = _rel(v, vse), _rel(h, hse)
    A = v * p0
    A_ci = A * np.hypot(rv, np.where(p0 > 0, ci0 / np.where(p0 > 0, p0, 1), 0))
    if tau_plus_survival is not None:
        rows = {r[0]: r for r in map(_surv, tau_plus_survival)}
        if set(rows) != set(n.tolist()):
            raise ValueError("tau0 and tau+ survivals must share the n grid")
        pp = np.array([rows[k][1] for k in n])
        cip = np.array([rows[k][2] for k in n])
        Ap = h * pp
        Ap_ci = Ap * np.hypot(rh, np.where(pp > 0, cip / np.where(pp > 0, pp, 1), 0))
    else:
        Ap = np.full(len(n), np.nan)
        Ap_ci = np.full(len(n), np.nan)
    VH = v * h / n
    return LimitConstants(n, A, A_ci, Ap, Ap_ci, VH, VH * np.hypot(rv, rh))
