import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lognormlab import InputError, NormSpec, ResourceError, SpecError, l1_as_polyhedral, norm_eval
from lognormlab import validate_norm_spec
from lognormlab.norms import polytope_vertices

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)


def test_l1_sum_of_abs():
    assert norm_eval(NormSpec.l1(), [3, -4]) == 7


def test_poly_identity_is_linf():
    assert norm_eval(NormSpec.poly(np.eye(2)), [3, -4]) == 4


def test_poly_l1_encoding_n2():
    W = np.array([[1.0, 1.0], [1.0, -1.0]])
    assert norm_eval(NormSpec.poly(W), [3, -4]) == 7


def test_lp_and_weighted():
    assert norm_eval(NormSpec.lp(2), [3, 4]) == pytest.approx(5.0)
    assert norm_eval(NormSpec.linf(), [3, -4]) == 4
    R = np.diag([2.0, 1.0])
    assert norm_eval(NormSpec.lpw(1, R), [1, -1]) == pytest.approx(3.0)
    # l2w carries R = P^(1/2); ||x|| = sqrt(x^T P x)
    assert norm_eval(NormSpec.l2w(R), [1, 1]) == pytest.approx(np.sqrt(5.0))


def test_validate():
    assert validate_norm_spec(NormSpec.poly(np.eye(2))).ok
    bad = validate_norm_spec(NormSpec.poly([[1, 0], [2, 0]]))
    assert not bad.ok
    assert any("rank" in f for f in bad.failures)
    assert not validate_norm_spec(NormSpec.lp(1)).ok
    assert not validate_norm_spec(NormSpec.lp(np.inf)).ok


def test_invalid_spec_raises_on_eval():
    with pytest.raises(SpecError):
        norm_eval(NormSpec.lp(0.5), [1, 2])
    with pytest.raises(SpecError):
        norm_eval(NormSpec.poly([[1, 0], [2, 0]]), [1, 2])


def test_dimension_mismatch():
    with pytest.raises(InputError):
        norm_eval(NormSpec.poly(np.eye(3)), [1, 2])


def test_l1_as_polyhedral_small():
    assert np.array_equal(l1_as_polyhedral(1), [[1.0]])
    assert np.array_equal(l1_as_polyhedral(2), [[1, 1], [1, -1]])
    W3 = l1_as_polyhedral(3)
    assert W3.shape == (4, 3)
    assert np.all(W3[:, 0] == 1)
    assert {tuple(r) for r in W3[:, 1:]} == set(itertools.product((1.0, -1.0), repeat=2))


def test_l1_as_polyhedral_too_large():
    with pytest.raises(ResourceError):
        l1_as_polyhedral(40)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (4,), elements=finite))
def test_l1_polyhedral_matches_l1(x):
    W = l1_as_polyhedral(4)
    assert norm_eval(NormSpec.poly(W), x) == pytest.approx(np.abs(x).sum(), rel=1e-12, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, (3,), elements=finite), arrays(np.float64, (3,), elements=finite),
       st.sampled_from(["l1", "linf", "p3", "poly"]))
def test_norm_axioms(x, y, which):
    spec = {"l1": NormSpec.l1(), "linf": NormSpec.linf(), "p3": NormSpec.lp(3),
            "poly": NormSpec.poly([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]])}[which]
    nx, ny = norm_eval(spec, x), norm_eval(spec, y)
    assert norm_eval(spec, x + y) <= nx + ny + 1e-9 * (1 + nx + ny)
    assert norm_eval(spec, -2.5 * x) == pytest.approx(2.5 * nx, rel=1e-12, abs=1e-12)
    assert nx >= 0


def test_polytope_vertices_of_identity_box():
    V = polytope_vertices(np.eye(2))
    assert {tuple(v) for v in np.round(V, 12)} == {(1, 1), (1, -1), (-1, 1), (-1, -1)}


def test_json_roundtrip():
    spec = NormSpec.lpw(3, np.diag([1.0, 2.0]))
    again = NormSpec.from_json(spec.to_json())
    assert again == spec
    with pytest.raises(SpecError):
        NormSpec.from_json({"kind": "nope"})
