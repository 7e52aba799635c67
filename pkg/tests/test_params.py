import math

import pytest
from hypothesis import given, settings, strategies as st

from middev.errors import ConfigError, NonStationaryAtN
from middev.params import Case, ModelConfig, Scale, sample_schedule, validate_conditions

from conftest import kappa10_schedule


def test_case1_schedule_at_kappa_10():
    s = kappa10_schedule(Case.I)
    assert s.kappa == 10.0
    assert s.theta_n == pytest.approx(0.9, abs=1e-15)
    assert s.rho_n == pytest.approx(0.9, abs=1e-15)
    assert s.theta_star == pytest.approx(0.9944751381215470, rel=1e-14)
    assert s.rho_star == pytest.approx(0.8055248618784531, rel=1e-14)
    assert s.d_star == pytest.approx(0.3889502762430939, rel=1e-13)


def test_case2_schedule_at_kappa_10():
    s = kappa10_schedule(Case.II)
    assert s.theta_n == pytest.approx(0.9)
    assert s.rho_n == pytest.approx(-0.9)
    assert s.theta_star == 0.0
    assert s.rho_star == 0.0
    assert s.d_star == 2.0


def test_non_stationary_when_kappa_too_small():
    cfg = ModelConfig(Case.I, -4.0, -1.0, 0.1, n=100)  # theta = 1 - 4 / 1.58 < -1
    with pytest.raises(NonStationaryAtN) as info:
        sample_schedule(cfg)
    assert info.value.n == 100


@given(st.floats(-3, -0.05), st.integers(2, 10**7), st.floats(0.05, 0.95))
@settings(max_examples=200, deadline=None)
def test_case2_equal_gammas_centre_exactly(g, n, delta):
    cfg = ModelConfig(Case.II, g, g, delta, n=n)
    try:
        s = sample_schedule(cfg)
    except NonStationaryAtN:
        return
    assert (s.theta_star, s.rho_star, s.d_star) == (0.0, 0.0, 2.0)


def test_schedule_is_pure_and_monotone():
    cfg = ModelConfig(Case.II, -1.0, -0.5, 0.3, n=1000)
    assert sample_schedule(cfg) == sample_schedule(cfg)
    thetas = [sample_schedule(cfg, n).theta_n for n in (100, 1000, 10**4, 10**5)]
    rhos = [abs(sample_schedule(cfg, n).rho_n) for n in (100, 1000, 10**4, 10**5)]
    assert thetas == sorted(thetas) and rhos == sorted(rhos)


def test_one_minus_abs_is_cancellation_free():
    s = sample_schedule(ModelConfig(Case.I, -1.0, -3.0, 0.9, n=10**9))
    assert s.one_minus_abs_theta == 1.0 / s.kappa
    assert s.one_minus_abs_rho == 3.0 / s.kappa


@pytest.mark.parametrize(
    "case, delta, beta, exponents, verdicts",
    [
        (Case.I, 0.1, 0.05, (0.5, 0.4, 0.6), (True, True, True)),
        (Case.II, 0.05, 0.05, (0.4, 0.35, 0.75), (True, True, True)),
        (Case.I, 0.3, 0.05, (0.1, -0.6, -0.4), (True, False, False)),
    ],
)
def test_growth_condition_exponents(case, delta, beta, exponents, verdicts):
    cfg = ModelConfig(case, -1.0, -1.0, delta, scale=Scale.power_law(beta), n=1000)
    report = validate_conditions(cfg, [10**3, 10**4, 10**5])
    ratios = [r for r in report.records if r.name.startswith("H-")]
    assert [r.exponent for r in ratios] == pytest.approx(exponents)
    assert tuple(r.analytic_pass for r in ratios) == verdicts
    assert report.passed is all(verdicts)


def test_sqrtlog_scale_checked_numerically():
    cfg = ModelConfig(Case.I, -1.0, -1.0, 0.1, n=1000)
    report = validate_conditions(cfg, [10**3, 10**4, 10**5, 10**6])
    assert report.passed
    assert report.record("a_n->inf").numeric_increasing
    for r in report.records:
        if r.name.startswith("H-"):
            assert r.numeric_increasing
    assert report.record("C-L").analytic_pass and report.record("exp-moment").analytic_pass


def test_validate_rejects_bad_grid():
    cfg = ModelConfig(Case.I, -1.0, -1.0, 0.1)
    for grid in ([], [100, 10], [1, 10]):
        with pytest.raises(ConfigError):
            validate_conditions(cfg, grid)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(gamma1=0.0),
        dict(gamma2=0.5),
        dict(delta=1.0),
        dict(delta=0.0),
        dict(sigma=0.0),
        dict(n=1),
        dict(n=2.5),
    ],
)
def test_config_invariants(kwargs):
    base = dict(case=Case.I, gamma1=-1.0, gamma2=-1.0, delta=0.2, n=100)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        ModelConfig(**base)


def test_scale_validation_and_values():
    with pytest.raises(ConfigError):
        Scale("PowerLaw", None)
    with pytest.raises(ConfigError):
        Scale("Cubic")
    assert Scale.power_law(0.5)(100) == pytest.approx(10.0)
    assert Scale.sqrt_log()(math.e**4) == pytest.approx(2.0)


def test_config_json_round_trip():
    cfg = ModelConfig("CaseII", -0.7, -1.3, 0.15, scale=Scale.power_law(0.05), sigma=2.0, n=5000)
    again = ModelConfig.from_json(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def test_case_parse_aliases():
    assert Case.parse("Case I") is Case.I
    assert Case.parse("case_ii") is Case.II
    with pytest.raises(ConfigError):
        Case.parse("III")
