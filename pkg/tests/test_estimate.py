import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from middev.errors import ZeroDenominator
from middev.estimate import (
    CSV_HEADER,
    durbin_watson,
    estimate_rho,
    estimate_theta,
    full_estimate,
    residuals,
    scalings,
    sign_flip,
)
from middev.params import Case, ModelConfig, Scale
from middev.simulate import generate

from conftest import hand_path


def test_hand_path_case1(hand_case1):
    est = full_estimate(hand_case1)
    assert est.theta_hat == pytest.approx(0.8, abs=1e-15)
    np.testing.assert_allclose(est.residuals, [0.0, 1.0, 0.0], atol=1e-15)
    assert est.rho_hat == pytest.approx(0.0, abs=1e-15)
    assert est.d_hat == pytest.approx(2.0, abs=1e-15)
    # a_n = sqrt(log 100), kappa = 10, n = 2
    a = math.sqrt(math.log(100))
    assert est.z_theta == pytest.approx(math.sqrt(2 * 1000) * (0.8 - 1.8 / 1.81) / a, rel=1e-12)
    assert est.z_d == pytest.approx(math.sqrt(20) * (2.0 - 0.3889502762430939) / a, rel=1e-12)


def test_hand_path_case2(hand_case2):
    est = full_estimate(hand_case2)
    assert est.theta_hat == pytest.approx(-1.0, abs=1e-15)
    assert est.rho_hat == pytest.approx(0.0, abs=1e-15)
    assert est.d_hat == pytest.approx(2.0, abs=1e-15)
    assert est.z_d == pytest.approx(0.0, abs=1e-15)


def test_constant_residuals():
    for n in (2, 5, 40):
        res = np.r_[0.0, np.full(n, 3.0)]
        assert durbin_watson(res) == pytest.approx(1.0 / n)


def test_rho_of_unit_tail():
    assert estimate_rho(np.array([0.0, 1.0, 1.0, 1.0])) == 1.0


def test_zero_denominators():
    t = hand_path(V=np.zeros(4))
    with pytest.raises(ZeroDenominator) as info:
        full_estimate(t)
    assert info.value.stage == "theta"
    with pytest.raises(ZeroDenominator) as info:
        estimate_rho(np.zeros(5))
    assert info.value.stage == "rho"
    with pytest.raises(ZeroDenominator) as info:
        durbin_watson(np.zeros(5))
    assert info.value.stage == "d"


def test_scalings():
    assert scalings(Case.I, 100, 4.0) == (math.sqrt(6400), 20.0, 20.0)
    assert scalings(Case.II, 100, 4.0) == (5.0, 5.0, 5.0)


def test_estimates_against_numpy_lstsq():
    t = generate(ModelConfig(Case.I, -1.0, -0.5, 0.3, n=5000), 3)
    X = t.X
    th = np.linalg.lstsq(X[:-1, None], X[1:], rcond=None)[0][0]
    assert estimate_theta(t) == pytest.approx(th, rel=1e-12)
    e = residuals(t, th)
    rh = np.linalg.lstsq(e[:-1, None], e[1:], rcond=None)[0][0]
    assert estimate_rho(e) == pytest.approx(rh, rel=1e-10)
    assert durbin_watson(e) == pytest.approx(np.sum(np.diff(e) ** 2) / np.sum(e[1:] ** 2), rel=1e-12)


def test_row_matches_header():
    est = full_estimate(generate(ModelConfig(Case.II, -1.0, -1.0, 0.3, n=300), 1))
    assert len(est.row(7)) == len(CSV_HEADER)
    assert est.row(7)[:3] == [7, 300, "CaseII"]


def test_consistency_in_large_samples():
    cfg = ModelConfig(Case.I, -1.0, -1.0, 0.3, scale=Scale.power_law(0.05), n=200_000)
    est = full_estimate(generate(cfg, 11))
    assert abs(est.theta_hat - est.theta_star) < 0.01
    assert abs(est.rho_hat - est.rho_star) < 0.05
    assert abs(est.d_hat - est.d_star) < 0.1


@given(
    st.sampled_from([Case.I, Case.II]),
    st.floats(-2.0, -0.2),
    st.floats(-2.0, -0.2),
    st.integers(0, 2**63),
)
@settings(max_examples=40, deadline=None)
def test_sign_flip_correspondence(case, g1, g2, seed):
    t = generate(ModelConfig(case, g1, g2, 0.4, n=2000), seed)
    flipped, rep = sign_flip(t)
    assert rep.theta_rho_rel_error <= 1e-12
    assert rep.dw_exact_rel_error <= 1e-12
    assert flipped.schedule.theta_n == -t.schedule.theta_n
    assert np.array_equal(np.abs(flipped.X), np.abs(t.X))
    # the flipped path obeys its own recursion
    Y, eta, W = flipped.X, flipped.eps, flipped.V
    a, b = flipped.schedule.theta_n, flipped.schedule.rho_n
    np.testing.assert_allclose(eta[1:], b * eta[:-1] + W, atol=1e-9)
    np.testing.assert_allclose(Y[1:], a * Y[:-1] + eta[1:], atol=1e-9)


def test_sign_flip_dw_is_reflected_not_preserved():
    t = generate(ModelConfig(Case.I, -1.0, -1.0, 0.4, n=2000), 0)
    _, rep = sign_flip(t)
    assert rep.e_star == pytest.approx(4.0 - t.schedule.d_star, rel=1e-14)
    assert rep.max_rel_error > 0.5
