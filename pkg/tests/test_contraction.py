import numpy as np
import pytest
from scipy.linalg import expm

from lognormlab import (DivergenceError, InputError, NormSpec, PairingSpec, ResourceError, VectorFieldSpec,
                        contraction_verify, integrate, jacobian_mu_bound, osl_estimate)
from lognormlab.contraction import fd_jacobian
from lognormlab.lpsolve import mu_inf

HOP_S = np.array([[0.3, -0.2], [0.1, 0.25]])


def hopfield():
    return VectorFieldSpec.hopfield(-np.eye(2), HOP_S)


def test_rk4_exponential_decay():
    tr = integrate(VectorFieldSpec.linear(-np.eye(2)), [1.0, 0.0], 0.0, 1.0, 1e-3)
    assert tr.times[-1] == 1.0
    assert np.abs(tr.states[-1] - np.exp(-1) * np.array([1.0, 0.0])).max() < 1e-9


def test_constant_and_affine():
    tr = integrate(VectorFieldSpec.linear(np.zeros((2, 2))), [1.0, 2.0], 0.0, 1.0, 0.1)
    assert np.all(tr.states == [1.0, 2.0])
    tr = integrate(VectorFieldSpec.affine(np.zeros((1, 1)), [1.0]), [0.5], 0.0, 2.0, 0.1)
    assert np.allclose(tr.states[:, 0], 0.5 + tr.times, atol=1e-12)


def test_partial_last_step():
    tr = integrate(VectorFieldSpec.linear(-np.eye(1)), [1.0], 0.0, 0.25, 0.1)
    assert tr.times[-1] == 0.25
    assert np.all(np.diff(tr.times) > 0)
    assert tr.states[-1, 0] == pytest.approx(np.exp(-0.25), abs=1e-6)


def test_fourth_order(A):
    x0 = np.array([1.0, 1.0])
    exact = expm(A * 2.0) @ x0
    errs = []
    dts = [0.1, 0.05, 0.025]
    for dt in dts:
        errs.append(np.abs(integrate(VectorFieldSpec.linear(A), x0, 0.0, 2.0, dt).states[-1] - exact).max())
    order = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert order >= 3.9
    assert errs[0] / errs[1] >= 8


def test_divergence():
    with pytest.raises(DivergenceError) as e:
        integrate(VectorFieldSpec.linear(np.array([[800.0]])), [1.0], 0.0, 10.0, 0.1)
    assert e.value.time > 0


def test_step_guard():
    with pytest.raises(ResourceError):
        integrate(VectorFieldSpec.linear(-np.eye(1)), [1.0], 0.0, 1.0, 1e-8)


def test_mu_bound_linear(A):
    assert jacobian_mu_bound(VectorFieldSpec.linear(A), NormSpec.linf(), [-1, -1], [1, 1]).b == -1
    assert jacobian_mu_bound(VectorFieldSpec.linear(np.zeros((2, 2))), NormSpec.linf(), -1, 1).b == 0


def test_mu_bound_hopfield():
    b = jacobian_mu_bound(hopfield(), NormSpec.linf(), [-2, -2], [2, 2], resolution=9).b
    assert b <= -0.5 + 1e-9


def test_mu_bound_refuses_general_p(A):
    with pytest.raises(InputError):
        jacobian_mu_bound(VectorFieldSpec.linear(A), NormSpec.lp(3), -1, 1)


def test_analytic_jacobian_matches_fd():
    vf = hopfield()
    x = np.array([0.3, -1.2])
    assert np.allclose(vf.jacobian(0.0, x), fd_jacobian(vf, 0.0, x), atol=1e-8)


def test_osl_estimates(A):
    est = osl_estimate(VectorFieldSpec.linear(A), PairingSpec.max(), [-1, -1], [1, 1], count=5000)
    assert est <= mu_inf(A) + 1e-8
    est = osl_estimate(VectorFieldSpec.linear(-np.eye(3)), PairingSpec.lp(2), -1, 1, count=200)
    assert est == pytest.approx(-1, abs=1e-12)
    est = osl_estimate(hopfield(), PairingSpec.max(), [-2, -2], [2, 2], count=5000)
    assert est <= -0.5 + 1e-8


def test_envelope_holds(A):
    rep = contraction_verify(VectorFieldSpec.linear(A), NormSpec.linf(), [1.0, 1.0], [0.0, 0.0],
                             0.0, 5.0, 1e-3, -1.0)
    assert rep.passed
    assert rep.max_envelope_ratio <= 1 + 1e-6


def test_identical_starts():
    rep = contraction_verify(VectorFieldSpec.linear(np.array([[0.0, 2.0], [0.0, 0.0]])), NormSpec.linf(),
                             [1.0, 1.0], [1.0, 1.0], 0.0, 1.0, 1e-2, -1.0)
    assert rep.records["envelope"].passed


def test_wrong_rate_rejected():
    rep = contraction_verify(VectorFieldSpec.linear(np.array([[0.0, 2.0], [0.0, 0.0]])), NormSpec.linf(),
                             [1.0, 1.0], [0.0, 0.0], 0.0, 5.0, 1e-3, -1.0)
    assert not rep.passed
    cx = rep.records["envelope"].counterexample
    assert cx["s"] <= cx["t"]


@pytest.mark.parametrize("norm", [NormSpec.l1(), NormSpec.linf(), NormSpec.l2w(np.eye(2)),
                                  NormSpec.poly(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))])
def test_decay_under_exact_mu(A, norm):
    vf = VectorFieldSpec.linear(A)
    b = jacobian_mu_bound(vf, norm, -1, 1).b
    rep = contraction_verify(vf, norm, [1.0, -0.5], [0.0, 0.3], 0.0, 3.0, 1e-2, b)
    assert rep.records["envelope"].passed and rep.records["dini_decay"].passed


def test_json_roundtrip():
    vf = hopfield()
    again = VectorFieldSpec.from_json(vf.to_json())
    x = np.array([0.2, 0.4])
    assert np.array_equal(again.f(0.0, x), vf.f(0.0, x))
