"""Moving boundaries ``g_n`` and the summability tests on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .models import IncrementModel, Lattice, ScalingSequence, SkewedPareto

__all__ = [
    "BoundarySpec",
    "SummabilityResult",
    "boundary_value",
    "running_max_abs",
    "check_summability_T21",
    "check_int_test",
    "classify_summand",
    "boundary_from_config",
    "upper_support",
]

VARIANTS = ("constant", "power", "scaled_log", "table")


@dataclass(frozen=True)
class BoundarySpec:
    """A boundary sequence ``g_n = sign * base_n`` for ``n >= 1``.

    ``base_n`` is ``level`` (constant), ``coef * n**gamma`` (power),
    ``c_n / log(n + 1)**a`` (scaled_log) or ``table[n - 1]`` (table, repeated
    past its end).  With ``floor=True`` the base is replaced by its integer
    part before the sign is applied, so ``floor`` + ``sign=-1`` gives
    ``-floor(base_n)``.

    ``strict`` selects the crossing event: ``S_n <= g_n`` by default,
    ``S_n < g_n`` when set.  The two coincide for continuous laws; on a lattice
    they differ by one lattice unit.
    """

    variant: str
    level: float = 0.0
    coef: float = 1.0
    gamma: float = 0.0
    a: float = 1.0
    table: tuple[float, ...] = ()
    sign: int = 1
    floor: bool = False
    strict: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown boundary variant {self.variant!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.variant == "table":
            if not self.table:
                raise ValueError("table boundary needs at least one value")
            object.__setattr__(self, "table", tuple(float(v) for v in self.table))

    # constructors
    @classmethod
    def constant(cls, level: float, **kw) -> "BoundarySpec":
        return cls("constant", level=float(level), **kw)

    @classmethod
    def power(cls, coef: float, gamma: float, **kw) -> "BoundarySpec":
        return cls("power", coef=float(coef), gamma=float(gamma), **kw)

    @classmethod
    def scaled_log(cls, a: float, sign: int = 1, **kw) -> "BoundarySpec":
        return cls("scaled_log", a=float(a), sign=sign, **kw)

    @classmethod
    def from_table(cls, values, **kw) -> "BoundarySpec":
        return cls("table", table=tuple(values), **kw)

    def with_strict(self, strict: bool = True) -> "BoundarySpec":
        return replace(self, strict=strict)

    def zero_like(self) -> "BoundarySpec":
        """The zero boundary with the same crossing convention."""
        return BoundarySpec.constant(0.0, strict=self.strict)

    @property
    def needs_scaling(self) -> bool:
        return self.variant == "scaled_log"

    @property
    def key(self) -> str:
        return repr(self.to_config())

    def values(self, n_max: int, c_seq: Optional[ScalingSequence] = None) -> np.ndarray:
        """Array ``g`` of length ``n_max + 1`` with ``g[n] = g_n``; ``g[0] = 0``."""
        n = np.arange(1, int(n_max) + 1, dtype=float)
        if self.variant == "constant":
            base = np.full(n.shape, self.level)
        elif self.variant == "power":
            base = self.coef * n**self.gamma
        elif self.variant == "table":
            tab = np.array(self.table)
            base = tab[np.minimum(np.arange(len(n)), len(tab) - 1)]
        else:
            if c_seq is None:
                raise ValueError("scaled_log boundary requires a scaling sequence")
            missing = [k for k in (1, int(n_max)) if k not in c_seq]
            if missing or len(c_seq.n) < n_max:
                c = np.array([c_seq[k] for k in range(1, int(n_max) + 1)])
            else:
                idx = np.searchsorted(c_seq.n, np.arange(1, int(n_max) + 1))
                c = c_seq.values[idx]
            base = c / np.log(n + 1) ** self.a
        if self.floor:
            base = np.floor(base)
        out = np.empty(len(n) + 1)
        out[0] = 0.0
        out[1:] = self.sign * base
        return out

    def monotonicity(self, n_max: int, c_seq: Optional[ScalingSequence] = None) -> str:
        """'increasing' / 'decreasing' (non-strict) or 'none', from a scan of g_1..g_N."""
        d = np.diff(self.values(n_max, c_seq)[1:])
        if np.all(d >= 0):
            return "increasing"
        if np.all(d <= 0):
            return "decreasing"
        return "none"

    def is_admissible(self, model: IncrementModel, c_seq: Optional[ScalingSequence] = None) -> bool:
        """Sufficient first-step check that ``P(T_g > 1) > 0``."""
        g1 = self.values(1, c_seq)[1]
        top, attained = upper_support(model)
        if self.strict and attained:
            return g1 <= top
        return g1 < top

    def to_config(self) -> dict:
        cfg: dict = {"variant": self.variant, "sign": self.sign}
        if self.variant == "constant":
            cfg["level"] = self.level
        elif self.variant == "power":
            cfg.update(coef=self.coef, gamma=self.gamma)
        elif self.variant == "scaled_log":
            cfg["a"] = self.a
        else:
            cfg["values"] = list(self.table)
        if self.floor:
            cfg["floor"] = True
        if self.strict:
            cfg["strict"] = True
        return cfg


def upper_support(model: IncrementModel) -> tuple[float, bool]:
    """Supremum of one increment's support and whether it is an atom."""
    if isinstance(model, Lattice):
        return float(model.max_up), True
    if isinstance(model, SkewedPareto) and model.p_right == 0:
        return -1.0 - model.mean_shift, True
    return math.inf, False


def boundary_from_config(cfg: dict) -> BoundarySpec:
    variant = cfg.get("variant")
    common = dict(
        sign=int(cfg.get("sign", 1)),
        floor=bool(cfg.get("floor", False)),
        strict=bool(cfg.get("strict", False)),
    )
    if variant == "constant":
        return BoundarySpec.constant(cfg["level"], **common)
    if variant == "power":
        return BoundarySpec.power(cfg.get("coef", 1.0), cfg["gamma"], **common)
    if variant == "scaled_log":
        return BoundarySpec.scaled_log(cfg.get("a", 1.0), **common)
    if variant == "table":
        return BoundarySpec.from_table(cfg["values"], **common)
    raise ValueError(f"unknown boundary variant {variant!r}")


def boundary_value(b: BoundarySpec, n: int, c_seq: Optional[ScalingSequence] = None) -> float:
    if n < 1:
        raise ValueError("boundary is defined for n >= 1")
    if b.needs_scaling:
        if c_seq is None:
            raise ValueError("scaled_log boundary requires a scaling sequence")
        base = c_seq[n] / math.log(n + 1) ** b.a
        if b.floor:
            base = math.floor(base)
        return b.sign * base
    return float(b.values(n)[n])


def running_max_abs(b: BoundarySpec, n: int, c_seq: Optional[ScalingSequence] = None) -> float:
    """``G_n = max_{k <= n} |g_k|``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(np.max(np.abs(b.values(n, c_seq)[1:])))


# -- summability -----------------------------------------------------------------


@dataclass(frozen=True)
class SummabilityResult:
    """Outcome of a numerical summability test.

    ``exponent`` is the fitted power exponent of the summand; ``log_exponent``
    the exponent of the dyadic block sums in the block index, used when the
    decay is logarithmic rather than geometric.
    """

    label: str
    exponent: float
    log_exponent: float
    dyadic_n: np.ndarray = field(repr=False)
    partial_sums: np.ndarray = field(repr=False)


def _fit(x, y):
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return coef[0], float(resid @ resid)


def classify_summand(a: np.ndarray, first_n: int = 1) -> SummabilityResult:
    """Classify ``sum_n a_n`` given ``a[i] = a_{first_n + i}``.

    Block sums over ``[2**j, 2**(j+1))`` decay like ``2**(j (theta + 1))`` for a
    summand ``n**theta``.  ``theta`` outside ``[-1.1, -0.9]`` decides directly
    when the blocks decay geometrically.  Otherwise the blocks are compared
    with ``j**kappa`` (Bertrand scale): ``kappa < -1.25`` is summable,
    ``kappa > -1.05`` is not (a Bertrand exponent of exactly -1 diverges), and
    the gap between is inconclusive.
    """
    a = np.asarray(a, dtype=float)
    n = np.arange(first_n, first_n + len(a))
    n_max = int(n[-1])
    top = int(math.floor(math.log2(n_max + 1))) - 1
    dyadic = 2 ** np.arange(0, top + 2)
    dyadic = dyadic[dyadic <= n_max]
    csum = np.cumsum(a)
    partial = csum[dyadic - first_n] if dyadic.size else csum[-1:]
    if not np.any(a != 0):
        return SummabilityResult("summable", -math.inf, -math.inf, dyadic, partial)

    j_lo = max(4, (top + 1) // 2)
    js, blocks = [], []
    for j in range(j_lo, top + 1):
        lo, hi = 2**j, 2 ** (j + 1)
        if lo < first_n or hi - 1 > n_max:
            continue
        s = math.fsum(a[lo - first_n : hi - first_n])
        if s > 0:
            js.append(j)
            blocks.append(s)
    if len(js) < 3:
        return SummabilityResult("inconclusive", math.nan, math.nan, dyadic, partial)
    js = np.array(js, dtype=float)
    logb = np.log(np.array(blocks))
    slope_j, rss_geo = _fit(js, logb)
    kappa, rss_log = _fit(np.log(js), logb)
    theta = slope_j / math.log(2) - 1

    if theta > -0.9:
        label = "not_summable"
    elif theta < -1.1 and rss_geo <= rss_log:
        label = "summable"
    elif kappa < -1.25:
        label = "summable"
    elif kappa > -1.05:
        label = "not_summable"
    else:
        label = "inconclusive"
    return SummabilityResult(label, float(theta), float(kappa), dyadic, partial)


def check_summability_T21(b: BoundarySpec, c_seq: ScalingSequence, n_max: int) -> SummabilityResult:
    """Summability of ``max_{k<=n}|g_k| / (n c_n)``."""
    if n_max < 2**8:
        raise ValueError("n_max must be at least 2**8")
    g = np.abs(b.values(n_max, c_seq)[1:])
    big_g = np.maximum.accumulate(g)
    n = np.arange(1, n_max + 1)
    c = _c_values(c_seq, n_max)
    return classify_summand(big_g / (n * c))


def check_int_test(
    b: BoundarySpec,
    V: Callable[[np.ndarray], np.ndarray],
    c_seq: ScalingSequence,
    n_max: int,
) -> SummabilityResult:
    """Summability of ``V(|g_n|) / (n V(c_n / log n))``, ``n >= 2``."""
    if n_max < 2**8:
        raise ValueError("n_max must be at least 2**8")
    g = np.abs(b.values(n_max, c_seq)[2:])
    n = np.arange(2, n_max + 1)
    c = _c_values(c_seq, n_max)[1:]
    summand = np.asarray(V(g), dtype=float) / (n * np.asarray(V(c / np.log(n)), dtype=float))
    return classify_summand(summand, first_n=2)


def _c_values(c_seq: ScalingSequence, n_max: int) -> np.ndarray:
    n = np.arange(1, n_max + 1)
    idx = np.searchsorted(c_seq.n, n)
    if np.any(idx >= len(c_seq.n)) or np.any(c_seq.n[np.minimum(idx, len(c_seq.n) - 1)] != n):
        raise ValueError(f"scaling sequence must cover 1..{n_max}")
    return c_seq.values[idx]
