import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from middev.errors import LengthMismatch
from middev.params import Case, ModelConfig
from middev.simulate import generate, generate_with_noise, write_csv

from conftest import hand_path, kappa10_schedule


def test_hand_recursion_case1(hand_case1):
    np.testing.assert_allclose(hand_case1.eps, [0.0, 1.0, -0.1], atol=1e-15)
    np.testing.assert_allclose(hand_case1.X, [0.0, 1.0, 0.8], atol=1e-15)


def test_hand_recursion_case2(hand_case2):
    np.testing.assert_allclose(hand_case2.eps, [0.0, 1.0, -1.9], atol=1e-15)
    np.testing.assert_allclose(hand_case2.X, [0.0, 1.0, -1.0], atol=1e-15)


def test_zero_noise_gives_zero_path():
    t = hand_path(V=np.zeros(5))
    assert not t.X.any() and not t.eps.any()


def test_impulse_response():
    V = np.zeros(30)
    V[0] = 1.0
    t = hand_path(V=V)
    np.testing.assert_allclose(t.eps[1:], 0.9 ** np.arange(30), rtol=1e-13)


def test_length_mismatch():
    cfg = ModelConfig(Case.I, -1.0, -1.0, 0.5, n=3)
    with pytest.raises(LengthMismatch):
        generate_with_noise(cfg, [1.0, 2.0])


def test_generate_matches_injected_noise():
    cfg = ModelConfig(Case.II, -0.6, -1.1, 0.4, n=500)
    a = generate(cfg, 17)
    b = generate_with_noise(cfg, a.V)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.eps, b.eps)
    assert np.array_equal(generate(cfg, 17).X, a.X)


def test_paths_are_read_only():
    t = generate(ModelConfig(Case.I, -1.0, -1.0, 0.3, n=50), 1)
    with pytest.raises(ValueError):
        t.X[0] = 1.0


@given(
    st.sampled_from([Case.I, Case.II]),
    st.floats(-2.0, -0.1),
    st.floats(-2.0, -0.1),
    st.integers(0, 2**32),
)
@settings(max_examples=60, deadline=None)
def test_power_sum_and_max_bounds(case, g1, g2, seed):
    cfg = ModelConfig(case, g1, g2, 0.5, n=400)  # kappa = 20
    t = generate(cfg, seed)
    s = t.schedule
    ct, cr = 1 - abs(s.theta_n), 1 - abs(s.rho_n)
    for a in (1, 2, 4):
        lhs = np.sum(np.abs(t.X) ** a)
        rhs = (ct * cr) ** -a * np.sum(np.abs(t.V) ** a)
        assert lhs <= rhs * (1 + 1e-12)
    assert np.max(t.X**2) <= np.max(t.eps**2) / ct**2 * (1 + 1e-12)
    assert np.max(t.eps**2) <= np.max(t.V**2) / cr**2 * (1 + 1e-12)


def test_csv_layout(hand_case1):
    buf = io.StringIO()
    write_csv(hand_case1, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "k,V,eps,X"
    assert lines[1] == "0,,0.0,0.0"
    assert lines[2] == "1,1.0,1.0,1.0"
    k, V, e, X = lines[3].split(",")
    assert (k, V) == ("2", "-1.0") and float(X) == pytest.approx(0.8)


def test_schedule_override_is_used():
    t = hand_path()
    assert t.schedule == kappa10_schedule()
