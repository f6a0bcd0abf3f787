import numpy as np
import pytest
from conftest import quotient_oracle
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lognormlab import (NormSpec, NumericError, PairingSpec, SpecError, active_index_set, compatible_norm,
                        ell1_jmt_closed, jmt_lower, jmt_upper, min_index_lg_eval, norm_eval, pairing_eval)
from lognormlab.norms import norm_function
from lognormlab.pairings import jmt_upper_batch, pairing_batch

# entries are exactly zero or well above the finite-difference step; a coordinate far below the
# smallest step (say 1e-160) is a kink for the quotient but not for the closed forms
coord = st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=10), st.floats(min_value=-10, max_value=-1e-6))
vec3 = arrays(np.float64, (3,), elements=coord)
l1 = NormSpec.l1()


def test_sign_pairing_value():
    x, y = np.array([1.0, -2.0]), np.array([3.0, -3.0])
    assert pairing_eval(PairingSpec.sign(), x, y) == 18
    # y has no zero entries, so the l1 norm is differentiable there
    assert quotient_oracle(norm_function(l1), x, y) == pytest.approx(18, abs=1e-5)


def test_max_pairing_value():
    x, y = np.array([1.0, -2.0]), np.array([3.0, -3.0])
    assert pairing_eval(PairingSpec.max(), x, y) == 6
    assert jmt_upper(NormSpec.linf(), x, y) == pytest.approx(6, abs=1e-9)


def test_max_pairing_straight_angle():
    y = np.array([0.5, -2.0, 1.0])
    assert pairing_eval(PairingSpec.max(), -y, y) == -4.0


def test_abssum_breaks_straight_angle():
    e1 = np.array([1.0, 0.0])
    assert pairing_eval(PairingSpec.abssum(), -e1, e1) == 1


def test_jmt_upper_linf_unique_max():
    x, y = np.array([0.3, -1.7, 2.0]), np.array([0.5, 4.0, -1.0])
    assert jmt_upper(NormSpec.linf(), x, y) == pytest.approx(x[1] * y[1], abs=1e-9)


def test_ell1_jmt_example():
    x, y = np.array([1.0, 2.0]), np.array([0.0, -3.0])
    assert ell1_jmt_closed(x, y) == -3
    assert jmt_upper(l1, x, y) == pytest.approx(-3, abs=1e-9)
    assert quotient_oracle(norm_function(l1), x, y) == pytest.approx(-3, abs=1e-5)
    assert jmt_lower(l1, x, y) == pytest.approx(-9, abs=1e-9)


def test_jmt_on_diagonal_is_squared_norm():
    y = np.array([1.0, -2.0, 0.0])
    for spec in (l1, NormSpec.linf(), NormSpec.lp(3), NormSpec.poly(np.eye(3))):
        ny = norm_eval(spec, y)
        assert jmt_upper(spec, y, y) == pytest.approx(ny ** 2, rel=1e-9)
        assert jmt_lower(spec, y, y) == pytest.approx(ny ** 2, rel=1e-9)


def test_jmt_smooth_l2_matches_inner_product():
    rng = np.random.default_rng(3)
    spec = NormSpec.l2w(np.eye(4))
    for _ in range(20):
        x, y = rng.normal(size=4), rng.normal(size=4)
        assert jmt_upper(spec, x, y) == pytest.approx(x @ y, abs=1e-6)
        assert jmt_lower(spec, x, y) == pytest.approx(x @ y, abs=1e-6)


def test_ell1_closed_agrees_with_sign_away_from_zeros():
    rng = np.random.default_rng(4)
    for _ in range(50):
        x, y = rng.normal(size=5), rng.normal(size=5)
        assert ell1_jmt_closed(x, y) == pytest.approx(pairing_eval(PairingSpec.sign(), x, y), rel=1e-12)
    assert ell1_jmt_closed(np.zeros(3), np.array([1.0, 0.0, 2.0])) == 0


def test_active_index_set():
    assert list(active_index_set(np.array([3.0, -3.0]))) == [0, 1]
    assert list(active_index_set(np.array([3.0, -2.999999]), tol=1e-3)) == [0, 1]
    assert list(active_index_set(np.zeros(3))) == [0, 1, 2]


def test_min_index_lg():
    x, y = np.array([1.0, -2.0]), np.array([3.0, -3.0])
    assert min_index_lg_eval(x, y) == 3
    assert min_index_lg_eval(x, np.zeros(2)) == 0
    assert min_index_lg_eval(y, y) == 9


def test_min_index_is_permutation_sensitive():
    # ties are broken by position, so relabelling coordinates changes the value
    x, y = np.array([1.0, -2.0]), np.array([3.0, -3.0])
    assert min_index_lg_eval(x[::-1], y[::-1]) != min_index_lg_eval(x, y)


def test_lp_pairing_p2_is_dot():
    x, y = np.array([1.0, 2.0, -1.0]), np.array([0.5, -1.0, 3.0])
    assert pairing_eval(PairingSpec.lp(2), x, y) == pytest.approx(x @ y)


def test_lp_pairing_matches_quotient():
    rng = np.random.default_rng(5)
    f = norm_function(NormSpec.lp(3))
    for _ in range(20):
        x, y = rng.normal(size=3), rng.normal(size=3)
        assert pairing_eval(PairingSpec.lp(3), x, y) == pytest.approx(quotient_oracle(f, x, y), abs=1e-5)


def test_poly_pairing_is_linf_of_image():
    W = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    x, y = np.array([1.0, 2.0]), np.array([0.5, 1.0])
    assert pairing_eval(PairingSpec.poly(W), x, y) == pytest.approx(pairing_eval(PairingSpec.max(), W @ x, W @ y))


def test_combo_endpoints():
    x, y = np.array([1.0, -2.0]), np.array([3.0, 1.0])
    assert pairing_eval(PairingSpec.combo(1.0), x, y) == pytest.approx(x @ y)
    assert pairing_eval(PairingSpec.combo(0.0), x, y) == pytest.approx(np.abs(x * y).sum())
    assert pairing_eval(PairingSpec.combo(0.5), -np.array([1.0, 0]), np.array([1.0, 0])) == 0


def test_compatible_norms():
    assert compatible_norm(PairingSpec.sign()).kind == "l1"
    assert compatible_norm(PairingSpec.max()).kind == "linf"
    assert compatible_norm(PairingSpec.minidx()).kind == "linf"


def test_invalid_specs():
    with pytest.raises(SpecError):
        pairing_eval(PairingSpec.combo(1.5), [1.0], [1.0])
    with pytest.raises(SpecError):
        PairingSpec.from_json({"kind": "unknown"})


def test_bad_schedule_rejected():
    with pytest.raises((NumericError, SpecError, ValueError)):
        jmt_upper(l1, np.ones(2), np.ones(2), schedule=[1e-3, 1e-2])


@settings(max_examples=60, deadline=None)
@given(vec3, vec3, st.sampled_from(["sign", "max", "lp3", "minidx", "poly", "l2w", "lpw"]))
def test_batch_matches_scalar(x, y, kind):
    spec = {"sign": PairingSpec.sign(), "max": PairingSpec.max(), "lp3": PairingSpec.lp(3),
            "minidx": PairingSpec.minidx(), "poly": PairingSpec.poly(np.vstack([np.eye(3), np.ones(3)])),
            "l2w": PairingSpec.l2w(np.diag([1.0, 2.0, 3.0])),
            "lpw": PairingSpec.lpw(3, np.diag([1.0, 2.0, 0.5]))}[kind]
    v = pairing_eval(spec, x, y)
    b = pairing_batch(spec)(x[None], y[None])[0]
    assert b == pytest.approx(v, rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(vec3, vec3)
def test_max_pairing_is_linf_upper_jmt(x, y):
    vals, settled = jmt_upper_batch(NormSpec.linf(), x[None], y[None])
    assert settled[0]
    scale = 1 + np.abs(x).max() * np.abs(y).max()
    assert abs(vals[0] - pairing_eval(PairingSpec.max(), x, y)) <= 1e-6 * scale


@settings(max_examples=60, deadline=None)
@given(vec3, vec3)
def test_ell1_closed_is_l1_upper_jmt(x, y):
    scale = 1 + np.abs(x).sum() * np.abs(y).sum()
    assert abs(jmt_upper(l1, x, y) - ell1_jmt_closed(x, y)) <= 1e-6 * scale


def test_json_roundtrip():
    for spec in (PairingSpec.sign(), PairingSpec.lp(3), PairingSpec.combo(0.25),
                 PairingSpec.jmt_upper(NormSpec.l1()), PairingSpec.poly(np.eye(2))):
        again = PairingSpec.from_json(spec.to_json())
        assert again.to_json() == spec.to_json()
