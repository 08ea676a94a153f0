import math

import numpy as np
import pytest

from bisurv import CustomHazard, DomainError, Exponential, ModelError, Pareto, Weibull
from oracles import trapezoid_cumulative_hazard

FAMILIES = {
    "exponential": Exponential(),
    "weibull_half": Weibull(0.5),
    "weibull_two": Weibull(2.0),
    "pareto": Pareto(),
}


def test_survival_examples():
    assert Exponential().survival(0.0) == 1.0
    assert Weibull(2.0).survival(2.0) == pytest.approx(math.exp(-4), rel=1e-12)
    assert Pareto().survival(4.0) == pytest.approx(0.25, rel=1e-12)


def test_survival_below_left_endpoint_is_one():
    assert Exponential().survival(-3.0) == 1.0
    assert Pareto().survival(0.5) == 1.0


def test_inverse_survival_examples():
    assert Exponential().inverse_survival(math.exp(-3)) == pytest.approx(3.0, rel=1e-12)
    assert Pareto().inverse_survival(0.2) == pytest.approx(5.0, rel=1e-12)
    assert Weibull(2.0).inverse_survival(math.exp(-9)) == pytest.approx(3.0, rel=1e-12)
    for base in FAMILIES.values():
        assert base.inverse_survival(1.0) == base.x_L


def test_combine_examples():
    assert Exponential().combine(2.0, 3.0) == 5.0  # exact closed-form path
    assert Weibull(2.0).combine(3.0, 4.0) == pytest.approx(5.0, rel=1e-12)
    assert Pareto().combine(2.0, 3.0) == pytest.approx(6.0, rel=1e-12)


def test_difference_examples():
    assert Exponential().difference(5.0, 3.0) == 2.0
    assert Pareto().difference(6.0, 2.0) == pytest.approx(3.0, rel=1e-12)
    assert Weibull(2.0).difference(5.0, 4.0) == pytest.approx(3.0, rel=1e-12)


def test_hazard_examples():
    assert Exponential().hazard(7.0) == 1.0
    assert Weibull(2.0).hazard(3.0) == pytest.approx(6.0, rel=1e-12)
    assert Pareto().cumulative_hazard(math.e) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_round_trip_on_log_grid(name):
    base = FAMILIES[name]
    # float64 cannot carry the round trip where survival is within eps of 1
    # (R0 < ~1e-5) or underflows to 0 (R0 > ~745); restrict to the
    # representable band
    xs = base.x_L + np.geomspace(1e-6, 50.0, 60)
    r0 = np.asarray(base.cumulative_hazard(xs))
    xs = xs[(r0 > 1e-5) & (r0 < 600.0)]
    assert len(xs) >= 30
    for x in xs:
        s = base.survival(float(x))
        assert base.inverse_survival(s) == pytest.approx(float(x), rel=1e-10)


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_semigroup_laws_randomized(name):
    base = FAMILIES[name]
    rng = np.random.default_rng(901)
    r = rng.uniform(1e-3, 5.0, size=(200, 3))
    for ra, rb, rc in r:
        a = float(base.inverse_cumulative_hazard(ra))
        b = float(base.inverse_cumulative_hazard(rb))
        c = float(base.inverse_cumulative_hazard(rc))
        left = base.combine(base.combine(a, b), c)
        right = base.combine(a, base.combine(b, c))
        assert left == pytest.approx(right, rel=1e-10)
        assert base.combine(a, b) == pytest.approx(base.combine(b, a), rel=1e-10)
        assert base.combine(a, base.x_L) == a
        assert base.difference(base.combine(a, b), b) == pytest.approx(a, rel=1e-10)
        assert base.difference(a, a) == base.x_L


def test_exponential_reduction_is_exact():
    e = Exponential()
    rng = np.random.default_rng(17)
    for x, t in rng.uniform(0.0, 40.0, size=(100, 2)):
        assert e.combine(float(x), float(t)) == float(x) + float(t)
        hi, lo = max(x, t), min(x, t)
        assert e.difference(float(hi), float(lo)) == float(hi) - float(lo)


def test_density_matches_hazard_times_survival():
    for base in FAMILIES.values():
        for x in base.x_L + np.geomspace(0.05, 10.0, 9):
            x = float(x)
            expected = base.hazard(x) * base.survival(x)
            assert base.density(x) == pytest.approx(expected, rel=1e-12)
    assert Exponential().density(-1.0) == 0.0


def test_custom_hazard_matches_closed_form():
    # hazard 1 + 2x integrates to x + x^2 exactly
    custom = CustomHazard(lambda x: 1.0 + 2.0 * x)
    for x in (0.1, 0.7, 1.3, 4.0, 9.5):
        assert custom.cumulative_hazard(x) == pytest.approx(x + x * x, abs=1e-8)
        assert custom.inverse_cumulative_hazard(x + x * x) == pytest.approx(x, rel=1e-8)
    # combine in hazard space against the closed form
    for x, t in ((0.5, 1.5), (2.0, 3.0), (0.2, 4.0)):
        r = (x + x * x) + (t + t * t)
        expected = (-1.0 + math.sqrt(1.0 + 4.0 * r)) / 2.0
        assert custom.combine(x, t) == pytest.approx(expected, rel=1e-8)
        assert custom.difference(custom.combine(x, t), t) == pytest.approx(x, rel=1e-8)


def test_custom_quadrature_against_trapezoid_oracle():
    def hz(x):
        return 0.5 + math.sin(x) ** 2

    custom = CustomHazard(hz)
    for x in (0.5, 2.0, 6.0):
        oracle = trapezoid_cumulative_hazard(hz, 0.0, x)
        assert custom.cumulative_hazard(x) == pytest.approx(oracle, abs=1e-7)
        assert -math.log(custom.survival(x)) == pytest.approx(oracle, abs=1e-7)


def test_custom_table_replicates_exponential():
    custom = CustomHazard.from_table([0.0, 10.0], [1.0, 1.0])
    assert custom.combine(2.0, 3.0) == pytest.approx(5.0, abs=1e-8)
    assert custom.survival(2.0) == pytest.approx(math.exp(-2), rel=1e-8)


def test_domain_errors():
    e = Exponential()
    with pytest.raises(DomainError):
        e.survival(math.nan)
    with pytest.raises(DomainError):
        e.survival(math.inf)
    for bad in (0.0, -0.5, 1.0 + 1e-12):
        with pytest.raises(DomainError):
            e.inverse_survival(bad)
    with pytest.raises(DomainError):
        e.combine(-1.0, 2.0)
    with pytest.raises(DomainError):
        Pareto().combine(0.5, 2.0)
    with pytest.raises(DomainError):
        e.difference(1.0, 2.0)


def test_model_errors():
    with pytest.raises(ModelError):
        Weibull(-1.0)
    with pytest.raises(ModelError):
        Weibull(0.0)
    bad = CustomHazard(lambda x: -1.0)
    with pytest.raises(ModelError):
        bad.hazard(1.0)
    with pytest.raises(ModelError):
        CustomHazard.from_table([0.0, 1.0], [1.0, -0.5])
    with pytest.raises(ModelError):
        CustomHazard.from_table([0.0, 0.0], [1.0, 1.0])


def test_array_evaluation_matches_scalars():
    for base in (Exponential(), Weibull(2.0), Pareto()):
        xs = base.x_L + np.array([0.1, 0.5, 2.0])
        arr = base.survival(xs)
        assert isinstance(arr, np.ndarray)
        for x, v in zip(xs, arr):
            assert v == base.survival(float(x))


def test_custom_hazard_cache_is_thread_safe():
    import concurrent.futures

    custom = CustomHazard(lambda x: 1.0 + 0.1 * x)
    xs = np.linspace(0.01, 20.0, 400)
    expected = [x + 0.05 * x * x for x in xs]
    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        futures = [pool.submit(custom.cumulative_hazard, float(x)) for x in xs]
        got = [f.result() for f in futures]
    for g, e in zip(got, expected):
        assert g == pytest.approx(e, abs=1e-8)


def test_custom_hazard_evaluation_is_pure():
    # values must not depend on what was queried before (cache layout)
    custom = CustomHazard(lambda x: 0.5 + x)
    first = custom.cumulative_hazard(7.123456)
    custom.cumulative_hazard(3.3)
    custom.inverse_cumulative_hazard(55.5)
    assert custom.cumulative_hazard(7.123456) == first
    inv = custom.inverse_cumulative_hazard(9.87)
    custom.cumulative_hazard(123.0)
    assert custom.inverse_cumulative_hazard(9.87) == inv
