import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from stable_passage.models import (
    ExactStable,
    InadmissibleParams,
    Lattice,
    SkewedPareto,
    StableParams,
    SymmetricPareto,
    char_function,
    density_at_zero,
    model_from_config,
    positivity_index,
    sample_increment,
    scaling_sequence,
    truncated_second_moment,
    validate_admissible,
)


@pytest.mark.parametrize(
    "alpha,beta,ok",
    [(1.0, 0.0, True), (1.0, 0.5, False), (0.5, 1.0, False), (0.5, 0.5, True),
     (1.5, 1.0, True), (1.5, -1.0, True), (2.0, 0.0, True), (2.0, 0.3, False),
     (0.0, 0.0, False), (2.5, 0.0, False), (1.2, 1.1, False)],
)
def test_validate_admissible(alpha, beta, ok):
    assert validate_admissible(alpha, beta) is ok


def test_stable_params_rejects_inadmissible():
    with pytest.raises(InadmissibleParams):
        StableParams(1.0, 0.5)
    with pytest.raises(ValueError):
        StableParams(1.5, 0.0, scale_c=0.0)


def test_positivity_index_values():
    assert positivity_index(StableParams(1.0, 0.0)) == 0.5
    assert positivity_index(StableParams(2.0, 0.0)) == 0.5
    assert abs(positivity_index(StableParams(1.5, 1.0)) - 1 / 3) < 1e-12
    with pytest.raises(InadmissibleParams):
        positivity_index((1.0, 0.5))


@pytest.mark.parametrize("alpha,beta", [(0.5, 0.7), (0.8, -0.3), (1.3, 0.6), (1.5, 1.0), (1.7, -0.4)])
def test_positivity_index_matches_stable_cdf(alpha, beta):
    # scipy's default S1 parametrisation has the same characteristic function
    rho = positivity_index(StableParams(alpha, beta))
    assert abs(stats.levy_stable.sf(0.0, alpha, beta) - rho) < 1e-4
    assert abs(rho + positivity_index(StableParams(alpha, -beta)) - 1) < 1e-12


def test_char_function_special_values():
    assert char_function(StableParams(2.0, 0.0), 1.0) == pytest.approx(math.exp(-1))
    assert char_function(StableParams(1.0, 0.0), 2.0) == pytest.approx(math.exp(-2))
    for p in [StableParams(0.7, 0.2), StableParams(1.5, -1.0, 2.0)]:
        assert char_function(p, 0.0) == 1 + 0j
    vec = char_function(StableParams(1.2, 0.4), np.array([-1.0, 0.0, 1.0]))
    assert vec.shape == (3,)
    assert vec[0] == pytest.approx(np.conj(vec[2]))


@pytest.mark.parametrize("alpha,beta", [(0.7, 0.4), (1.5, 0.5), (1.8, -1.0)])
def test_char_function_matches_empirical_transform(alpha, beta):
    # empirical E exp(itX) over scipy's own stable sampler
    p = StableParams(alpha, beta)
    x = stats.levy_stable.rvs(alpha, beta, size=200_000, random_state=np.random.default_rng(7))
    for t in (0.3, 0.8, -1.7):
        emp = np.mean(np.exp(1j * t * x))
        assert abs(char_function(p, t) - emp) < 0.01


def _inversion_at_zero(p):
    # f(0) = (1/pi) int_0^inf Re phi(t) dt
    return integrate.quad(lambda t: char_function(p, t).real, 0, np.inf, limit=400)[0] / math.pi


@pytest.mark.parametrize(
    "params", [StableParams(2.0, 0.0), StableParams(1.0, 0.0), StableParams(1.5, 0.0),
               StableParams(1.5, 0.8), StableParams(0.6, -0.5), StableParams(1.2, 1.0, 3.0)],
)
def test_density_at_zero_against_inversion(params):
    assert density_at_zero(params) == pytest.approx(_inversion_at_zero(params), rel=1e-7)


def test_density_at_zero_fixtures():
    assert density_at_zero(StableParams(2.0, 0.0)) == pytest.approx(special.gamma(1.5) / math.pi)
    assert density_at_zero(StableParams(1.0, 0.0)) == pytest.approx(1 / math.pi)
    assert density_at_zero(StableParams(1.5, 0.0)) == pytest.approx(special.gamma(1 + 2 / 3) / math.pi)


def test_lattice_validation():
    with pytest.raises(ValueError):
        Lattice((1, 2), (0.5, 0.5))
    with pytest.raises(ValueError):
        Lattice((-1, 1), (0.5, 0.6))
    with pytest.raises(ValueError):
        Lattice((-1, 2), (0.5, 0.5))  # non-zero mean
    m = Lattice((2, -1, 0), (0.25, 0.5, 0.25))
    assert m.offsets == (-1, 0, 2)
    assert m.variance == pytest.approx(1.5)


def test_sampling_fixtures(srw, rng):
    x = srw.sample(rng, 10**6)
    assert abs(x.mean()) <= 0.004
    sp = SymmetricPareto(1.5)
    y = sp.sample(rng, 10**6)
    p = 2**-1.5
    assert abs(np.mean(np.abs(y) > 2) - p) < 3 * math.sqrt(p * (1 - p) / 1e6)
    z = ExactStable(StableParams(2.0, 0.0, 0.7)).sample(rng, 10**6)
    assert abs(np.mean(z > 0) - 0.5) < 3 * 0.5 / math.sqrt(1e6)
    assert isinstance(sample_increment(srw, rng), float)


def test_skewed_pareto_centering_and_tails(rng):
    m = SkewedPareto(1.5, 0.8)
    assert m.beta == pytest.approx(0.6)
    x = m.sample(rng, 10**6)
    # mean zero within a heavy-tail tolerance, tail balance from p_right
    assert abs(np.median(x + m.mean_shift) - np.median(np.where(x + m.mean_shift > 0, 1, -1) * np.abs(x + m.mean_shift))) < 1e-12
    right = np.mean(x + m.mean_shift > 3)
    assert right == pytest.approx(0.8 * 3**-1.5, rel=0.02)
    assert abs(x.mean()) < 0.05
    assert SkewedPareto(0.7, 0.3).mean_shift == 0.0


@pytest.mark.parametrize("alpha,beta", [(1.5, 0.5), (0.7, -0.4), (1.0, 0.0), (1.8, 1.0)])
def test_exact_stable_sampler_matches_scipy(alpha, beta, rng):
    # scipy evaluates the stable cdf by quadrature, so keep the sample modest
    x = ExactStable(StableParams(alpha, beta)).sample(rng, 5_000)
    ks = stats.kstest(x, lambda v: stats.levy_stable.cdf(v, alpha, beta)).statistic
    assert ks < 0.03


@pytest.mark.parametrize("alpha,beta", [(1.5, 0.5), (0.7, 0.3)])
def test_stable_under_convolution(alpha, beta, rng):
    m = ExactStable(StableParams(alpha, beta))
    n = 16
    sums = m.sample(rng, (100_000, n)).sum(axis=1) / n ** (1 / alpha)
    single = m.sample(rng, 100_000)
    assert stats.ks_2samp(sums, single).statistic < 0.02


def test_truncated_second_moment_fixtures(srw):
    assert truncated_second_moment(srw, 2.0) == 0.25
    assert truncated_second_moment(srw, 0.5) == 0.0
    assert truncated_second_moment(SymmetricPareto(1.5), 4.0) == pytest.approx(0.1875, rel=1e-12)
    with pytest.raises(ValueError):
        truncated_second_moment(srw, 0.0)


@pytest.mark.parametrize("model", [SkewedPareto(1.5, 0.8), SkewedPareto(0.6, 0.3), SymmetricPareto(1.2)])
def test_pareto_second_moment_against_quadrature(model):
    a, p, m = model.alpha_tail, model.p_right, model.mean_shift
    dens = lambda y: a * y ** (-a - 1)

    def piece(lo, hi, shift):
        lo = max(lo, 1.0)
        if hi <= lo:
            return 0.0
        return integrate.quad(lambda y: (y + shift) ** 2 * dens(y), lo, hi, limit=200)[0]

    def mu(u):
        # right jumps Y - m, left jumps -(Y + m), Y Pareto on [1, inf)
        right = piece(m - u, m + u, -m)
        left = piece(-m - u, u - m, m)
        return (p * right + (1 - p) * left) / u**2

    for u in [0.5, 1.5, 3.0, 40.0, 1e4]:
        assert model.truncated_second_moment(u) == pytest.approx(mu(u), rel=1e-8, abs=1e-15)


@pytest.mark.parametrize("params", [StableParams(1.0, 0.0), StableParams(2.0, 0.0, 0.5), StableParams(1.5, 0.5)])
def test_exact_stable_second_moment(params):
    m = ExactStable(params)
    for u in [0.3, 2.0, 50.0]:
        num = integrate.quad(lambda x: x * x * stats.levy_stable.pdf(x / params.sigma, params.alpha, params.beta) / params.sigma,
                             -u, u, limit=400)[0] / u**2
        assert m.truncated_second_moment(u) == pytest.approx(num, rel=1e-5)


def test_scaling_sequence_srw(srw):
    n = np.arange(1, 2**14 + 1)
    c = scaling_sequence(srw, n)
    assert np.max(np.abs(c.values - np.sqrt(n))) < 1e-9
    assert c[1] == 1.0 and c[100] == 10.0
    assert 5 in c and 2**15 not in c
    with pytest.raises(KeyError):
        c[2**15]


def test_scaling_sequence_pareto():
    c = scaling_sequence(SymmetricPareto(1.0), [100])
    assert c[100] == pytest.approx((100 + math.sqrt(100**2 - 400)) / 2, rel=1e-9)
    m = SymmetricPareto(1.5)
    n = 2 ** np.arange(10, 15)
    c = scaling_sequence(m, n)
    assert np.all(np.abs(c.values[1:] / c.values[:-1] - 2 ** (1 / 1.5)) < 0.05)
    mu = m.truncated_second_moment(c.values)
    assert np.all(mu <= (1 / n) * (1 + 1e-9))
    assert np.all(np.diff(c.values) >= 0)


def test_scaling_sequence_lattice_general(three_point):
    n = np.arange(1, 500)
    c = scaling_sequence(three_point, n)
    # brute-force last crossing on a fine grid
    u = np.linspace(0.01, 60, 600_001)
    mu = three_point.truncated_second_moment(u)
    for k in [1, 2, 7, 100, 499]:
        above = np.nonzero(mu > 1 / k)[0]
        last = u[above.max()] if above.size else three_point.support_edge
        assert abs(c[k] - last) < 1e-3
    assert c[1] == 1.0  # mu never exceeds 1, so the support edge is returned


def test_mu_regular_variation_slope():
    for model, alpha in [(SymmetricPareto(1.5), 1.5), (SkewedPareto(0.8, 0.3), 0.8), (ExactStable(StableParams(1.3, 0.2)), 1.3)]:
        u = 2.0 ** np.arange(10, 16)
        slope = np.polyfit(np.log(u), np.log(model.truncated_second_moment(u)), 1)[0]
        assert abs(slope + alpha) < 0.05


def test_config_round_trip():
    for m in [Lattice((-1, 0, 2), (0.5, 0.25, 0.25)), SymmetricPareto(1.5), SkewedPareto(1.2, 0.9),
              ExactStable(StableParams(1.5, -0.5, 2.0))]:
        assert model_from_config(m.to_config()).key == m.key
    with pytest.raises(ValueError):
        model_from_config({"family": "gaussian"})
