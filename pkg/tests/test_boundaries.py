import math

import numpy as np
import pytest

from stable_passage.boundaries import (
    BoundarySpec,
    boundary_from_config,
    boundary_value,
    check_int_test,
    check_summability_T21,
    classify_summand,
    running_max_abs,
)
from stable_passage.models import ScalingSequence, SkewedPareto, SymmetricPareto, scaling_sequence
from stable_passage.renewal import RenewalEstimate, srw_V


def sqrt_seq(n_max):
    n = np.arange(1, n_max + 1)
    return ScalingSequence(n, np.sqrt(n), "sqrt")


def test_boundary_values():
    assert boundary_value(BoundarySpec.constant(-3), 7) == -3
    assert boundary_value(BoundarySpec.power(1, 0.3), 32) == pytest.approx(32**0.3)
    assert 32**0.3 == pytest.approx(2.8284, abs=1e-4)
    c = sqrt_seq(200)
    assert boundary_value(BoundarySpec.scaled_log(1), 100, c) == pytest.approx(10 / math.log(101))
    assert boundary_value(BoundarySpec.scaled_log(1, sign=-1), 100, c) == pytest.approx(-10 / math.log(101))
    with pytest.raises(ValueError):
        boundary_value(BoundarySpec.scaled_log(1), 5)
    with pytest.raises(ValueError):
        boundary_value(BoundarySpec.constant(0), 0)


def test_floor_applies_before_sign():
    b = BoundarySpec.scaled_log(1, sign=-1, floor=True)
    c = sqrt_seq(100)
    assert boundary_value(b, 100, c) == -math.floor(10 / math.log(101))
    g = b.values(100, c)
    assert np.all(g[1:] == -np.floor(np.sqrt(np.arange(1, 101)) / np.log(np.arange(2, 102))))


def test_table_extends_by_last_value():
    b = BoundarySpec.from_table([2, -5, 1])
    assert [boundary_value(b, n) for n in (1, 2, 3, 4, 50)] == [2, -5, 1, 1, 1]
    assert running_max_abs(b, 3) == 5


def test_running_max_abs():
    assert running_max_abs(BoundarySpec.constant(-3), 5) == 3
    assert running_max_abs(BoundarySpec.power(1, 0.3), 32) == pytest.approx(32**0.3)


def test_monotonicity_scan():
    c = sqrt_seq(4096)
    assert BoundarySpec.power(1, 0.3, floor=True).monotonicity(4096) == "increasing"
    assert BoundarySpec.scaled_log(1, sign=-1, floor=True).monotonicity(4096, c) == "decreasing"
    assert BoundarySpec.from_table([1, 3, 2]).monotonicity(3) == "none"


def test_admissibility_first_step(srw):
    assert BoundarySpec.constant(0).is_admissible(srw)
    assert not BoundarySpec.constant(1).is_admissible(srw)
    assert BoundarySpec.constant(1, strict=True).is_admissible(srw)
    assert BoundarySpec.constant(100).is_admissible(SymmetricPareto(1.5))
    one_sided = SkewedPareto(1.5, 0.0)
    top = -1 - one_sided.mean_shift
    assert BoundarySpec.constant(top - 0.1).is_admissible(one_sided)
    assert not BoundarySpec.constant(top + 0.1).is_admissible(one_sided)


def test_config_round_trip():
    for b in [BoundarySpec.constant(-2.5, strict=True), BoundarySpec.power(2, 0.4, floor=True),
              BoundarySpec.scaled_log(1.5, sign=-1), BoundarySpec.from_table([1, 2])]:
        assert boundary_from_config(b.to_config()) == b
    with pytest.raises(ValueError):
        boundary_from_config({"variant": "spline"})


# -- summability ---------------------------------------------------------------


def test_summability_fixtures():
    c = sqrt_seq(2**14)
    r = check_summability_T21(BoundarySpec.power(1, 0.3), c, 2**14)
    assert r.label == "summable"
    assert r.exponent == pytest.approx(-1.2, abs=0.05)
    sqrt_over_log = BoundarySpec.from_table(np.sqrt(np.arange(1, 2**14 + 1)) / np.log(np.arange(1, 2**14 + 1) + 1))
    assert check_summability_T21(sqrt_over_log, c, 2**14).label == "not_summable"
    zero = check_summability_T21(BoundarySpec.constant(0), c, 2**14)
    assert zero.label == "summable"
    assert len(zero.partial_sums) == len(zero.dyadic_n)
    with pytest.raises(ValueError):
        check_summability_T21(BoundarySpec.constant(0), c, 100)


@pytest.mark.parametrize(
    "theta_fn,label",
    [
        (lambda n: n**-1.3, "summable"),
        (lambda n: n**-0.7, "not_summable"),
        (lambda n: 1 / n, "not_summable"),  # harmonic: diverges
        (lambda n: 1 / (n * np.log(n + 1)), "not_summable"),
        (lambda n: 1 / (n * np.log(n + 1) ** 2), "summable"),
        (lambda n: 1 / (n * np.log(n + 1) ** 1.15), "inconclusive"),
    ],
)
def test_classify_summand_reference_series(theta_fn, label):
    n = np.arange(1, 2**16 + 1, dtype=float)
    assert classify_summand(theta_fn(n)).label == label


def test_int_test_fixtures(srw):
    c = scaling_sequence(srw, range(1, 2**14 + 1))
    assert check_int_test(BoundarySpec.constant(0), srw_V, c, 2**14).label == "summable"
    # g_n = c_n / log^(1 + a) n with a = 2 > 1 / (alpha (1 - rho)) = 1
    b = BoundarySpec.scaled_log(3.0)
    assert check_int_test(b, srw_V, c, 2**14).label == "summable"
    flat = RenewalEstimate.from_table([0.0, 1.0], [1.0, 1.0])
    res = check_int_test(BoundarySpec.constant(0), lambda x: np.ones_like(np.asarray(x, float)), c, 2**14)
    assert res.exponent == pytest.approx(-1.0, abs=0.01)
    assert res.label == "not_summable"
    assert flat(10.0) == 1.0
