import numpy as np
import pytest
from scipy.optimize import linprog

from lognormlab import InternalConsistencyError, LinearProgram, ResourceError, SpecError, l1_as_polyhedral
from lognormlab import build_polyhedral_lognorm_lp, extract_H, lognorm, NormSpec, solve_lp
from lognormlab.lognorm import mu_1
from lognormlab.lpsolve import mu_inf, polyhedral_lognorm
from lognormlab.sampling import random_full_rank, sample_matrices


def reference(lp):
    """Independent solve with scipy's HiGHS."""
    r = linprog(lp.c, A_ub=lp.A_ub, b_ub=lp.b_ub, A_eq=lp.A_eq, b_eq=lp.b_eq, bounds=lp.bounds, method="highs")
    return r


def test_lower_bound_only():
    sol = solve_lp(LinearProgram(c=[1.0], A_ub=[[-1.0]], b_ub=[-3.0]))
    assert sol.status == "optimal"
    assert sol.z[0] == pytest.approx(3)


def test_infeasible_equalities():
    sol = solve_lp(LinearProgram(c=[1.0], A_eq=[[1.0], [1.0]], b_eq=[1.0, 2.0]))
    assert sol.status == "infeasible"


def test_unbounded():
    sol = solve_lp(LinearProgram(c=[-1.0, 0.0], A_ub=[[0.0, 1.0]], b_ub=[1.0]))
    assert sol.status == "unbounded"


def test_free_and_boxed_variables():
    lp = LinearProgram(c=[1.0, -1.0], A_ub=[[1.0, 1.0], [-1.0, 0.0]], b_ub=[4.0, 5.0],
                       bounds=[(None, None), (-1.0, 2.0)])
    sol = solve_lp(lp)
    ref = reference(lp)
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(ref.fun, abs=1e-9)


def test_pivot_guard():
    lp = build_polyhedral_lognorm_lp(l1_as_polyhedral(3), sample_matrices(1, 3, 1)[0])
    with pytest.raises(ResourceError):
        solve_lp(lp, max_pivots=3)


def test_variable_and_row_counts():
    lp = build_polyhedral_lognorm_lp(np.eye(2), np.zeros((2, 2)))
    # m*m entries of H, m*m - m off-diagonal bounds, one gamma
    assert lp.nvars == 7
    assert lp.A_eq.shape[0] == 4
    assert lp.A_ub.shape[0] == 4 + 2


def test_identity_recovers_A(A):
    lp = build_polyhedral_lognorm_lp(np.eye(2), A)
    sol = solve_lp(lp)
    H, gamma = extract_H(lp, sol, 2)
    assert gamma == pytest.approx(-1, abs=1e-9)
    assert np.allclose(H, A, atol=1e-9)


def test_zero_matrix():
    lp = build_polyhedral_lognorm_lp(np.eye(2), np.zeros((2, 2)))
    H, gamma = extract_H(lp, solve_lp(lp), 2)
    assert gamma == pytest.approx(0, abs=1e-12)
    assert np.allclose(H, 0)


def test_l1_as_polyhedral_gives_mu1(A):
    W = l1_as_polyhedral(2)
    lp = build_polyhedral_lognorm_lp(W, A)
    sol = solve_lp(lp)
    H, gamma = extract_H(lp, sol, 2)
    assert gamma == pytest.approx(-2, abs=1e-7)
    assert mu_inf(H) == pytest.approx(gamma, abs=1e-7)
    assert np.allclose(H @ W, W @ A, atol=1e-7)


@pytest.mark.parametrize("seed", range(6))
def test_matches_scipy_on_random_poly(seed):
    W = random_full_rank(seed, 4, 3)
    M = sample_matrices(seed, 3, 1)[0]
    lp = build_polyhedral_lognorm_lp(W, M)
    sol = solve_lp(lp)
    ref = reference(lp)
    assert sol.status == "optimal" and ref.status == 0
    assert sol.objective_value == pytest.approx(ref.fun, abs=1e-7)
    gamma, H, _ = polyhedral_lognorm(W, M)
    assert mu_inf(H) == pytest.approx(gamma, abs=1e-7)
    assert lognorm(NormSpec.poly(W), M).value == pytest.approx(gamma, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_l1_poly_random(n):
    for M in sample_matrices(n, n, 5):
        gamma, _, _ = polyhedral_lognorm(l1_as_polyhedral(n), M)
        assert gamma == pytest.approx(mu_1(M), abs=1e-7)


def test_extract_rejects_bad_solution(A):
    lp = build_polyhedral_lognorm_lp(np.eye(2), A)
    sol = solve_lp(lp)
    sol.z = sol.z + 0.1
    with pytest.raises(InternalConsistencyError):
        extract_H(lp, sol, 2)


def test_invalid_W():
    with pytest.raises(SpecError):
        build_polyhedral_lognorm_lp([[1.0, 0.0], [2.0, 0.0]], np.zeros((2, 2)))


def test_json_roundtrip(A):
    lp = build_polyhedral_lognorm_lp(np.eye(2), A)
    again = LinearProgram.from_json(lp.to_json())
    assert solve_lp(again).objective_value == pytest.approx(-1, abs=1e-9)
