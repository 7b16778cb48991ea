"""Stable-law parameters and increment distributions.

Increment families are small frozen dataclasses.  Each exposes the law it is
attracted to (``alpha``, ``beta``), a vectorised sampler and the truncated
second moment ``mu(u) = u**-2 * E[X**2; |X| <= u]`` that defines the scaling
sequence ``c_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, special, stats

__all__ = [
    "InadmissibleParams",
    "StableParams",
    "IncrementModel",
    "Lattice",
    "SymmetricPareto",
    "SkewedPareto",
    "ExactStable",
    "ScalingSequence",
    "validate_admissible",
    "positivity_index",
    "char_function",
    "density_at_zero",
    "sample_increment",
    "truncated_second_moment",
    "scaling_sequence",
    "model_from_config",
    "simple_random_walk",
]


class InadmissibleParams(ValueError):
    """Raised when (alpha, beta) lies outside the admissible set."""


ADMISSIBLE_SET = (
    "{0<alpha<1, |beta|<1} U {1<alpha<2, |beta|<=1} U {alpha=1, beta=0} U {alpha=2, beta=0}"
)


def validate_admissible(alpha: float, beta: float) -> bool:
    if 0 < alpha < 1:
        return abs(beta) < 1
    if 1 < alpha < 2:
        return abs(beta) <= 1
    if alpha == 1 or alpha == 2:
        return beta == 0
    return False


@dataclass(frozen=True)
class StableParams:
    alpha: float
    beta: float
    scale_c: float = 1.0

    def __post_init__(self):
        if not validate_admissible(self.alpha, self.beta):
            raise InadmissibleParams(
                f"(alpha={self.alpha}, beta={self.beta}) is not admissible; "
                f"admissible set is {ADMISSIBLE_SET}"
            )
        if not self.scale_c > 0:
            raise InadmissibleParams(f"scale_c must be positive, got {self.scale_c}")

    @property
    def zeta(self) -> float:
        if self.alpha == 1:
            return 0.0
        return self.beta * math.tan(math.pi * self.alpha / 2)

    @property
    def sigma(self) -> float:
        """Scale in the ``exp(-|sigma t|**alpha ...)`` convention."""
        return self.scale_c ** (1 / self.alpha)


def _as_params(params) -> StableParams:
    if isinstance(params, StableParams):
        return params
    alpha, beta, *rest = params
    return StableParams(alpha, beta, *rest)


def positivity_index(params) -> float:
    """Limit of ``P(S_n > 0)`` for a walk attracted to ``params``."""
    p = _as_params(params)
    if p.alpha == 1:
        return 0.5
    return 0.5 + math.atan(p.zeta) / (math.pi * p.alpha)


def char_function(params, t):
    p = _as_params(params)
    t = np.asarray(t, dtype=float)
    at = np.abs(t)
    out = np.exp(-p.scale_c * at**p.alpha * (1 - 1j * p.zeta * np.sign(t)))
    return out if out.ndim else complex(out)


def density_at_zero(params) -> float:
    """Density of the stable law at the origin.

    Closed form obtained by integrating the real part of the characteristic
    function: ``Gamma(1 + 1/alpha) / pi * |1 - i zeta|**(-1/alpha)
    * cos(arctan(zeta) / alpha) * c**(-1/alpha)``.
    """
    p = _as_params(params)
    a, z = p.alpha, p.zeta
    return (
        special.gamma(1 + 1 / a)
        / math.pi
        * (1 + z * z) ** (-1 / (2 * a))
        * math.cos(math.atan(z) / a)
        * p.scale_c ** (-1 / a)
    )


# -- increment families ------------------------------------------------------

# numba kernel family codes (see _kernels.draw)
LATTICE, PARETO, STABLE = 0, 1, 2


class IncrementModel:
    """Base class for increment laws in a domain of attraction."""

    centered: bool = True

    @property
    def alpha(self) -> float:
        raise NotImplementedError

    @property
    def beta(self) -> float:
        raise NotImplementedError

    @property
    def attracting_law(self) -> StableParams:
        """Attracting stable law.  Its scale is not determined by the model,
        so ``scale_c`` is left at 1."""
        return StableParams(self.alpha, self.beta)

    @property
    def is_lattice(self) -> bool:
        return False

    @property
    def key(self) -> str:
        """Stable identifier used to reject mixing estimates across models."""
        return repr(self.to_config())

    @property
    def support_edge(self) -> float:
        """``inf{|x| > 0 : x in support}``; fallback value of ``c_n``."""
        raise NotImplementedError

    def kernel_spec(self):
        """(family code, float params, offsets, cumulative probs) for numba."""
        raise NotImplementedError

    def truncated_second_moment(self, u):
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        from . import _kernels

        code, par, offs, cum = self.kernel_spec()
        n = int(np.prod(size))
        out = np.empty(n)
        _kernels.fill_draws(rng, code, par, offs, cum, out)
        return out.reshape(size)


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("truncation level u must be positive")
    return u


@dataclass(frozen=True)
class Lattice(IncrementModel):
    offsets: tuple[int, ...]
    probs: tuple[float, ...]
    centered: bool = field(default=True, init=False)

    def __post_init__(self):
        offs = tuple(int(o) for o in self.offsets)
        probs = tuple(float(p) for p in self.probs)
        if len(offs) != len(probs) or not offs:
            raise ValueError("offsets and probs must be non-empty and of equal length")
        if any(p < 0 for p in probs) or abs(math.fsum(probs) - 1) > 1e-12:
            raise ValueError("probs must be non-negative and sum to 1")
        if len(set(offs)) != len(offs):
            raise ValueError("offsets must be distinct")
        live = [(o, p) for o, p in zip(offs, probs) if p > 0]
        if not (any(o < 0 for o, _ in live) and any(o > 0 for o, _ in live)):
            raise ValueError("lattice walk must have negative and positive steps")
        mean = math.fsum(o * p for o, p in live)
        if abs(mean) > 1e-12:
            # an integer lattice cannot be re-centred without leaving the lattice
            raise ValueError(f"lattice law must have zero mean, got {mean}")
        order = sorted(range(len(offs)), key=offs.__getitem__)
        object.__setattr__(self, "offsets", tuple(offs[i] for i in order))
        object.__setattr__(self, "probs", tuple(probs[i] for i in order))

    alpha = property(lambda self: 2.0)
    beta = property(lambda self: 0.0)
    is_lattice = property(lambda self: True)

    @property
    def variance(self) -> float:
        return math.fsum(o * o * p for o, p in zip(self.offsets, self.probs))

    @property
    def max_down(self) -> int:
        return -min(self.offsets)

    @property
    def max_up(self) -> int:
        return max(self.offsets)

    @property
    def support_edge(self) -> float:
        return float(min(abs(o) for o, p in zip(self.offsets, self.probs) if o != 0 and p > 0))

    def negated(self) -> "Lattice":
        return Lattice(tuple(-o for o in self.offsets), self.probs)

    def kernel_spec(self):
        offs = np.array(self.offsets, dtype=np.float64)
        cum = np.cumsum(self.probs)
        cum[-1] = 2.0  # guard: u < 1 always lands in the table
        return LATTICE, np.zeros(1), offs, cum

    def truncated_second_moment(self, u):
        u = _check_u(u)
        offs = np.array(self.offsets, dtype=float)
        w = np.array(self.probs) * offs**2
        inside = np.abs(offs)[None, :] <= u.reshape(-1, 1)
        out = (inside * w).sum(axis=1).reshape(u.shape) / u**2
        return out if out.ndim else float(out)

    def to_config(self) -> dict:
        return {"family": "lattice", "offsets": list(self.offsets), "probs": list(self.probs)}


def _pareto_piece(alpha, shift, lo, hi):
    """``E[(Y + shift)**2; lo <= Y <= hi]`` for ``P(Y > y) = y**-alpha, y >= 1``."""
    lo = np.maximum(lo, 1.0)
    hi = np.maximum(hi, lo)

    def prim(y, k):
        # antiderivative of alpha * y**(k - alpha - 1)
        if k == alpha:
            return alpha * np.log(y)
        return alpha * y ** (k - alpha) / (k - alpha)

    def total(y):
        return prim(y, 2) + 2 * shift * prim(y, 1) + shift * shift * prim(y, 0)

    return np.where(hi > lo, total(hi) - total(lo), 0.0)


@dataclass(frozen=True)
class SkewedPareto(IncrementModel):
    """Two-sided Pareto law.

    With probability ``p_right`` the increment is ``Y``, otherwise ``-Y``,
    where ``P(Y > y) = y**-alpha`` for ``y >= 1``.  For ``alpha > 1`` the
    mean ``(2 p_right - 1) alpha / (alpha - 1)`` is subtracted.
    """

    alpha_tail: float
    p_right: float
    centered: bool = field(default=False, init=False)

    def __post_init__(self):
        a, p = self.alpha_tail, self.p_right
        if not a > 0:
            raise ValueError("tail index must be positive")
        if not 0 <= p <= 1:
            raise ValueError("p_right must be a probability")
        if a < 2 and not validate_admissible(a, 2 * p - 1):
            raise InadmissibleParams(
                f"tail index {a} with p_right={p} gives beta={2 * p - 1}, "
                f"outside the admissible set {ADMISSIBLE_SET}"
            )
        object.__setattr__(self, "centered", a > 1)

    @property
    def alpha(self) -> float:
        return min(float(self.alpha_tail), 2.0)

    @property
    def beta(self) -> float:
        return 0.0 if self.alpha_tail >= 2 else 2 * self.p_right - 1

    @property
    def mean_shift(self) -> float:
        a = self.alpha_tail
        return (2 * self.p_right - 1) * a / (a - 1) if a > 1 else 0.0

    @property
    def support_edge(self) -> float:
        m = self.mean_shift
        if m == 0:
            return 1.0
        # right atoms start at 1 - m, left atoms at -1 - m
        edges = []
        if self.p_right > 0:
            edges.append(0.0 if 1 - m <= 0 else 1 - m)
        if self.p_right < 1:
            edges.append(0.0 if -1 - m >= 0 else 1 + m)
        return float(min(edges))

    def kernel_spec(self):
        par = np.array([self.alpha_tail, self.p_right, self.mean_shift])
        return PARETO, par, np.zeros(1), np.zeros(1)

    def truncated_second_moment(self, u):
        u = _check_u(u)
        a, p, m = self.alpha_tail, self.p_right, self.mean_shift
        # right branch X = Y - m, left branch X = -(Y + m)
        right = p * _pareto_piece(a, -m, m - u, m + u) if p > 0 else 0.0
        left = (1 - p) * _pareto_piece(a, m, -m - u, u - m) if p < 1 else 0.0
        out = (right + left) / u**2
        return out if np.ndim(out) else float(out)

    def to_config(self) -> dict:
        return {"family": "skew_pareto", "alpha": self.alpha_tail, "p_right": self.p_right}


class SymmetricPareto(SkewedPareto):
    """Symmetric two-sided Pareto law, ``P(|X| > x) = x**-alpha`` for ``x >= 1``."""

    def __init__(self, alpha: float):
        super().__init__(alpha, 0.5)

    def __repr__(self):
        return f"SymmetricPareto(alpha={self.alpha_tail})"

    def to_config(self) -> dict:
        return {"family": "sym_pareto", "alpha": self.alpha_tail}


@dataclass(frozen=True)
class ExactStable(IncrementModel):
    params: StableParams
    centered: bool = field(default=True, init=False)

    alpha = property(lambda self: float(self.params.alpha))
    beta = property(lambda self: float(self.params.beta))
    attracting_law = property(lambda self: self.params)
    support_edge = property(lambda self: 0.0)

    def kernel_spec(self):
        p = self.params
        a = p.alpha
        if a == 1:
            b_shift, s_fac = 0.0, 1.0
        else:
            b_shift = math.atan(p.zeta) / a
            s_fac = (1 + p.zeta**2) ** (1 / (2 * a))
        par = np.array([a, p.beta, p.sigma, b_shift, s_fac])
        return STABLE, par, np.zeros(1), np.zeros(1)

    def truncated_second_moment(self, u):
        u = _check_u(u)
        p = self.params
        s = p.sigma
        if p.alpha == 1:
            num = 2 * s / math.pi * (u - s * np.arctan(u / s))
        elif p.alpha == 2:
            sd = math.sqrt(2.0) * s  # N(0, 2 sigma**2)
            t = u / sd
            num = sd**2 * (2 * special.ndtr(t) - 1 - 2 * t * stats.norm.pdf(t))
        else:
            num = np.vectorize(self._second_moment_quad)(u)
        out = num / u**2
        return out if np.ndim(out) else float(out)

    def _second_moment_quad(self, u: float) -> float:
        p = self.params
        dist = stats.levy_stable(p.alpha, p.beta, scale=p.sigma)
        f = lambda x: x * x * (dist.pdf(x) + dist.pdf(-x))  # noqa: E731
        pts = [b for b in (p.sigma, 10 * p.sigma) if b < u]
        val, _ = integrate.quad(f, 0.0, u, points=pts or None, epsrel=1e-9, limit=200)
        return val

    def to_config(self) -> dict:
        p = self.params
        return {"family": "exact_stable", "alpha": p.alpha, "beta": p.beta, "scale_c": p.scale_c}


def simple_random_walk() -> Lattice:
    return Lattice((-1, 1), (0.5, 0.5))


def sample_increment(model: IncrementModel, rng: np.random.Generator) -> float:
    return float(model.sample(rng, 1)[0])


def truncated_second_moment(model: IncrementModel, u):
    return model.truncated_second_moment(u)


# -- scaling sequence ----------------------------------------------------------


@dataclass(frozen=True)
class ScalingSequence:
    n: np.ndarray
    values: np.ndarray
    model_key: str

    def __post_init__(self):
        object.__setattr__(self, "n", np.asarray(self.n, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __getitem__(self, n: int) -> float:
        idx = np.searchsorted(self.n, n)
        if idx >= len(self.n) or self.n[idx] != n:
            raise KeyError(f"c_n not computed for n={n}")
        return float(self.values[idx])

    def __contains__(self, n) -> bool:
        idx = np.searchsorted(self.n, n)
        return idx < len(self.n) and self.n[idx] == n

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.n.tolist(), self.values.tolist()))


def _lattice_scaling(model: Lattice, t: np.ndarray) -> np.ndarray:
    # mu(u) = M_k / u**2 on [a_k, a_{k+1}): the last crossing of level t is
    # sqrt(M_k / t) for the last piece whose left end still exceeds t
    atoms = np.unique(np.abs(np.array(model.offsets)[np.array(model.probs) > 0]))
    atoms = atoms[atoms > 0].astype(float)
    m = np.array([model.truncated_second_moment(a) * a * a for a in atoms])
    out = np.full(t.shape, atoms[0])
    done = np.zeros(t.shape, dtype=bool)
    for a, mk in zip(atoms[::-1], m[::-1]):
        hit = ~done & (mk / (a * a) > t)
        out[hit] = np.sqrt(mk / t[hit])
        done |= hit
    return out


def _bisect_scaling(model: IncrementModel, t: np.ndarray) -> np.ndarray:
    hint = max(model.support_edge, 1.0)
    if isinstance(model, ExactStable):
        hint = max(model.params.sigma, 1e-300)
    lo_u = 1e-6 * hint
    grid = [lo_u]
    vals = [float(model.truncated_second_moment(lo_u))]
    step = 2 ** (1 / 8)
    tmin = t.min()
    # walk out until mu is well below the smallest threshold and the grid has
    # passed the region where the law's atoms/shifts live
    while not (vals[-1] < tmin / 2 and grid[-1] > 1e3 * hint):
        grid.append(grid[-1] * step)
        vals.append(float(model.truncated_second_moment(grid[-1])))
        if len(grid) > 20000:
            raise ValueError("truncated second moment does not decay; degenerate model?")
    grid = np.array(grid)
    vals = np.array(vals)
    if not np.any(vals > 0):
        raise ValueError("truncated second moment is identically zero")
    suffix_max = np.maximum.accumulate(vals[::-1])[::-1]
    # last grid index whose value exceeds t
    k = np.searchsorted(-suffix_max, -t, side="left") - 1
    out = np.full(t.shape, model.support_edge, dtype=float)
    ok = k >= 0
    lo = grid[k[ok]]
    hi = grid[np.minimum(k[ok] + 1, len(grid) - 1)]
    tt = t[ok]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        above = np.asarray(model.truncated_second_moment(mid)) > tt
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= 1e-13 * hi):
            break
    out[ok] = 0.5 * (lo + hi)
    return out


def scaling_sequence(model: IncrementModel, n_list: Sequence[int]) -> ScalingSequence:
    """Scaling constants ``c_n = sup{u : mu(u) > 1/n}``.

    The last crossing coincides with ``inf{u : mu(u) <= 1/n}`` whenever mu is
    eventually continuous and decreasing, and stays meaningful for lattice
    laws where mu vanishes below the first atom.  Returns the support edge
    when mu never exceeds ``1/n``.
    """
    n = np.unique(np.asarray(n_list, dtype=np.int64))
    if n.size == 0 or n.min() < 1:
        raise ValueError("n must be >= 1")
    t = 1.0 / n.astype(float)
    if isinstance(model, Lattice):
        vals = _lattice_scaling(model, t)
    else:
        vals = _bisect_scaling(model, t)
    return ScalingSequence(n, vals, model.key)


# -- config --------------------------------------------------------------------


def model_from_config(cfg: dict) -> IncrementModel:
    family = cfg.get("family")
    if family == "lattice":
        return Lattice(tuple(cfg["offsets"]), tuple(cfg["probs"]))
    if family == "sym_pareto":
        return SymmetricPareto(float(cfg["alpha"]))
    if family == "skew_pareto":
        return SkewedPareto(float(cfg["alpha"]), float(cfg["p_right"]))
    if family == "exact_stable":
        return ExactStable(
            StableParams(float(cfg["alpha"]), float(cfg["beta"]), float(cfg.get("scale_c", 1.0)))
        )
    raise ValueError(f"unknown model family {family!r}")
