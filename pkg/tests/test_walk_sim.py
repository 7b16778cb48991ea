import itertools
import math

import numpy as np
import pytest
from scipy import stats

from stable_passage.boundaries import BoundarySpec
from stable_passage.exact_dp import dp_survival
from stable_passage.models import ExactStable, StableParams, SymmetricPareto
from stable_passage.walk_sim import (
    RareEventAbort,
    SurvivalEstimate,
    conditioned_functionals,
    first_passage,
    ladder_chain,
    sample_endpoints,
    simulate_survival,
    survival_sweep,
)


def brute_force_survival(offsets, probs, g, n, strict=False):
    """P(T_g > n) by enumerating all paths."""
    total = 0.0
    for steps in itertools.product(range(len(offsets)), repeat=n):
        s, p, alive = 0, 1.0, True
        for k, j in enumerate(steps, 1):
            s += offsets[j]
            p *= probs[j]
            if (s < g(k)) if strict else (s <= g(k)):
                alive = False
                break
        if alive:
            total += p
    return total


def test_survival_fixtures(srw):
    sw = survival_sweep(srw, BoundarySpec.constant(0), [1, 4], 10**6, seed=11)
    p1, p4 = sw.estimates
    assert abs((1 - p1.p_hat) - 0.5) < 3 * math.sqrt(0.25 / 1e6)
    assert abs(p4.p_hat - 3 / 16) < 3 * math.sqrt(3 / 16 * 13 / 16 / 1e6)


@pytest.mark.parametrize("strict", [False, True])
def test_survival_matches_enumeration(three_point, strict):
    g = lambda k: math.floor(k**0.5) - 1
    exact = brute_force_survival(three_point.offsets, three_point.probs, g, 7, strict)
    b = BoundarySpec.power(1, 0.5, floor=True)
    b = BoundarySpec.from_table([g(k) for k in range(1, 8)], strict=strict)
    est = simulate_survival(three_point, b, 7, 400_000, seed=3)
    assert abs(est.p_hat - exact) < 3 * max(est.ci_half_width / 1.96, 1e-4)


def test_first_passage_record_invariants(srw, rng):
    b = BoundarySpec.constant(-2)
    for _ in range(200):
        rec = first_passage(srw, b, 50, rng)
        if rec.censored:
            assert rec.t == 50 and rec.survived_to == 50
        else:
            assert rec.position_at_t <= -2
            assert rec.survived_to == rec.t - 1


def test_unreachable_boundary_censors(srw, rng):
    b = BoundarySpec.constant(-1000)
    assert all(first_passage(srw, b, 100, rng).censored for _ in range(50))
    est = simulate_survival(srw, b, 100, 1000, seed=1)
    assert est.p_hat == 1.0 and est.censored_fraction == 1.0


def test_survival_estimate_contract(srw):
    one = simulate_survival(srw, BoundarySpec.constant(0), 3, 1, seed=5)
    assert one.p_hat in (0.0, 1.0) and one.ci_half_width == 0.0
    with pytest.raises(ValueError):
        simulate_survival(srw, BoundarySpec.constant(0), 0, 10)
    e = SurvivalEstimate.from_count(10, 30, 100)
    assert e.ci_half_width == pytest.approx(1.96 * math.sqrt(0.3 * 0.7 / 100))
    assert e.ci_low == pytest.approx(0.3 - e.ci_half_width)


def test_survival_against_dp(srw):
    exact = dp_survival(srw, BoundarySpec.constant(0), 500)
    est = simulate_survival(srw, BoundarySpec.constant(0), 500, 10**6, seed=8)
    assert abs(est.p_hat - exact) <= 3 * est.ci_half_width


def test_determinism_across_workers(srw):
    b = BoundarySpec.power(1, 0.3, floor=True, strict=True)
    a = survival_sweep(srw, b, [10, 100], 50_000, seed=9, workers=1)
    c = survival_sweep(srw, b, [10, 100], 50_000, seed=9, workers=4)
    assert a == c


def test_constant_boundary_equals_shifted_start(srw):
    b = BoundarySpec.constant(-4)
    shifted = survival_sweep(srw, BoundarySpec.constant(0), [20, 200], 30_000, seed=4, start=4.0)
    direct = survival_sweep(srw, b, [20, 200], 30_000, seed=4)
    assert np.array_equal(shifted.p_hat, direct.p_hat)


def test_censoring_consistency(srw):
    sw = survival_sweep(srw, BoundarySpec.constant(-3), [64], 20_000, seed=2)
    assert sw.censored_fraction == sw.p_hat[-1]


def test_monotone_coupling(srw):
    lo = survival_sweep(srw, BoundarySpec.constant(-2), [50, 400], 40_000, seed=6)
    hi = survival_sweep(srw, BoundarySpec.constant(1, strict=True), [50, 400], 40_000, seed=6)
    # same streams: lower boundary kills a subset of the paths killed by the higher one
    assert np.all(lo.p_hat >= hi.p_hat)


def test_sample_endpoints(srw, three_point):
    for model in (srw, three_point):
        x = sample_endpoints(model, 100, 200_000, seed=1)
        assert abs(x.mean()) < 4 * math.sqrt(100 * model.variance / 2e5)
        assert x.var() == pytest.approx(100 * model.variance, rel=0.02)
    # multinomial fast path agrees in law with step-by-step sums
    s = srw.sample(np.random.default_rng(0), (20_000, 25)).sum(axis=1)
    assert stats.ks_2samp(sample_endpoints(srw, 25, 20_000, seed=2), s).pvalue > 0.001
    y = sample_endpoints(ExactStable(StableParams(1.0, 0.0)), 10, 20_000, seed=3) / 10
    assert stats.kstest(y, stats.cauchy.cdf).pvalue > 0.001


def test_ladder_chain_fixtures(srw, rng):
    chains = [ladder_chain(srw, "weak_descending", 0.5, 10**9, rng) for _ in range(100_000)]
    # a search is censored with probability of order cap^(-1/2)
    first = np.array([h[0] for h, cens in chains if not cens])
    assert len(first) > 99_900
    frac = np.mean(first == 1.0)
    assert abs(frac - 0.5) < 3 * math.sqrt(0.25 / len(first))
    assert set(np.unique(first)) <= {0.0, 1.0}
    for _ in range(200):
        h, cens = ladder_chain(srw, "strict_ascending", 20, 10**9, rng)
        assert cens or (h == [1.0] * 21)
    h, cens = ladder_chain(srw, "weak_descending", 0, 10**9, rng)
    assert not cens and h[-1] > 0 and all(x == 0 for x in h[:-1])
    hits = [ladder_chain(srw, "weak_descending", 10, 1, rng)[1] for _ in range(200)]
    assert any(hits)
    with pytest.raises(ValueError):
        ladder_chain(srw, "sideways", 1, 10, rng)


def test_ladder_skip_is_exact_in_law(three_point, rng):
    # block skipping vs plain stepping: compare height distributions
    from stable_passage import _kernels
    from stable_passage.walk_sim import ladder_args

    args = list(ladder_args(three_point, "weak_descending"))
    plain = list(args)
    plain[7] = False
    a = [_kernels.ladder_search(rng, *args, 10**6) for _ in range(40_000)]
    b = [_kernels.ladder_search(rng, *plain, 10**6) for _ in range(40_000)]
    ha = np.array([h for h, c in a if not c])
    hb = np.array([h for h, c in b if not c])
    tab = np.array([[np.sum(ha == v), np.sum(hb == v)] for v in (0.0, 1.0)])
    assert set(np.unique(ha)) <= {0.0, 1.0}
    assert stats.chi2_contingency(tab).pvalue > 0.001


def test_conditioned_functionals(srw):
    res = conditioned_functionals(srw, BoundarySpec.constant(0), 200, 2000, seed=1)
    assert res.count == 2000
    assert np.all(res.endpoint > 0)
    assert np.all(res.supremum >= res.endpoint)
    p = dp_survival(srw, BoundarySpec.constant(0), 200)
    expected = 2000 / p
    assert expected / 1.5 <= res.simulated <= expected * 1.5
    assert res.rejections == res.simulated - 2000
    again = conditioned_functionals(srw, BoundarySpec.constant(0), 200, 2000, seed=1, workers=3)
    assert np.array_equal(res.endpoint, again.endpoint) and res.simulated == again.simulated


def test_conditioned_endpoint_self_consistency(srw):
    # meander endpoint mean is sqrt(pi/2) in the limit; compare n=1000 with n=4000
    a = conditioned_functionals(srw, BoundarySpec.constant(0), 1000, 4000, seed=2)
    b = conditioned_functionals(srw, BoundarySpec.constant(0), 4000, 4000, seed=3)
    assert a.endpoint.mean() == pytest.approx(b.endpoint.mean(), rel=0.05)


def test_conditioned_abort(srw):
    with pytest.raises(RareEventAbort):
        conditioned_functionals(srw, BoundarySpec.constant(50), 100, 10, seed=1)


def test_heavy_tailed_walks_run(rng):
    est = simulate_survival(SymmetricPareto(0.8), BoundarySpec.power(1, 0.3), 200, 20_000, seed=4)
    assert 0 < est.p_hat < 1
