import math

import numpy as np
import pytest

from bisurv import (
    DomainError,
    Exponential,
    FromHazard,
    LinearFailureRate,
    ModelError,
    NumericError,
    Pareto,
    ProportionalHazard,
    Weibull,
    limit_hazard_ratio,
)
from oracles import trapezoid_cumulative_hazard

BASELINES = [Exponential(), Weibull(0.5), Weibull(2.0), Pareto()]


def test_lfr_examples():
    lfr = LinearFailureRate(1.5)
    assert lfr.survival(2.0) == pytest.approx(math.exp(-8.0), rel=1e-12)
    assert lfr.hazard(2.0) == 7.0


def test_ph_example():
    ph = ProportionalHazard(Exponential(), 2.0)
    assert ph.survival(3.0) == pytest.approx(math.exp(-6.0), rel=1e-12)


@pytest.mark.parametrize("base", BASELINES, ids=lambda b: b.spec_string())
def test_ph_hazard_is_delta_times_baseline(base):
    ph = ProportionalHazard(base, 1.7)
    for x in base.x_L + np.geomspace(0.01, 20.0, 12):
        x = float(x)
        assert ph.hazard(x) == pytest.approx(1.7 * base.hazard(x), rel=1e-12)
        assert ph.survival(x) == pytest.approx(base.survival(x) ** 1.7, rel=1e-12)


def test_density_consistency():
    lfr = LinearFailureRate(0.8)
    for x in np.linspace(0.05, 4.0, 9):
        x = float(x)
        assert lfr.density(x) == pytest.approx(lfr.hazard(x) * lfr.survival(x),
                                               rel=1e-10)
    fh = FromHazard(lambda u: 1.0 + 0.3 * u)
    for x in (0.2, 1.0, 3.0):
        assert fh.density(x) == pytest.approx(fh.hazard(x) * fh.survival(x), rel=1e-8)


def test_from_hazard_survival_matches_quadrature_oracle():
    def hz(u):
        return 0.7 + u / (1.0 + u)

    fh = FromHazard(hz)
    for x in (0.3, 1.5, 5.0):
        oracle = math.exp(-trapezoid_cumulative_hazard(hz, 0.0, x))
        assert fh.survival(x) == pytest.approx(oracle, abs=1e-8)


@pytest.mark.parametrize("base", BASELINES, ids=lambda b: b.spec_string())
@pytest.mark.parametrize("delta", [0.4, 1.0, 2.0])
def test_limit_ratio_recovers_ph_exponent(base, delta):
    ph = ProportionalHazard(base, delta)
    assert limit_hazard_ratio(ph, base) == pytest.approx(delta, abs=1e-6)


def test_limit_ratio_lfr_over_exponential_is_one():
    assert limit_hazard_ratio(LinearFailureRate(1.5), Exponential()) == \
        pytest.approx(1.0, abs=1e-6)


def test_limit_ratio_lfr_over_weibull_diverges():
    assert math.isinf(limit_hazard_ratio(LinearFailureRate(1.5), Weibull(2.0)))


def test_limit_ratio_oscillation_raises_with_samples():
    base = Exponential()
    osc = FromHazard(lambda u: 1.0 + 0.5 * math.sin(12.0 * math.log(max(u, 1e-300))))
    with pytest.raises(NumericError) as excinfo:
        limit_hazard_ratio(osc, base)
    assert excinfo.value.samples is not None
    assert len(excinfo.value.samples) >= 4


def test_left_endpoint_mismatch_rejected():
    with pytest.raises(DomainError):
        limit_hazard_ratio(LinearFailureRate(1.0), Pareto())


def test_from_hazard_negative_value_is_model_error():
    fh = FromHazard(lambda u: math.cos(u))  # negative past pi/2
    with pytest.raises(ModelError):
        fh.cumulative_hazard(3.0)


def test_from_table_warns_when_density_does_not_decay():
    with pytest.warns(RuntimeWarning):
        FromHazard.from_table([0.0, 1.0, 2.0, 3.0], [0.01, 0.02, 0.05, 0.2])


def test_parameter_validation():
    with pytest.raises(ModelError):
        LinearFailureRate(0.0)
    with pytest.raises(ModelError):
        ProportionalHazard(Exponential(), -2.0)
