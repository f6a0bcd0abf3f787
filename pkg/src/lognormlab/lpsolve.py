"""Dense two-phase simplex solver and the polyhedral log-norm LP builder.

The solver works on the textbook tableau with Bland's smallest-index rule,
so it terminates on degenerate problems and is deterministic for a fixed
input.  It is meant for desk-scale problems (a few hundred rows).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, InternalConsistencyError, ResourceError, SpecError
from .norms import NormSpec, validate_norm_spec

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
MAX_PIVOTS = 100_000


@dataclass
class LinearProgram:
    """minimize ``c @ z`` s.t. ``A_eq z = b_eq``, ``A_ub z <= b_ub``, ``lo <= z <= hi``.

    ``bounds`` is a list of ``(lo, hi)`` pairs; ``None`` entries or infinities
    mean unbounded.  If ``bounds`` is None every variable is nonnegative.
    """

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    bounds: list | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        nv = self.c.size
        self.A_eq, self.b_eq = _pair(self.A_eq, self.b_eq, nv, "eq")
        self.A_ub, self.b_ub = _pair(self.A_ub, self.b_ub, nv, "ub")
        if self.bounds is None:
            self.bounds = [(0.0, np.inf)] * nv
        if len(self.bounds) != nv:
            raise InputError(f"{len(self.bounds)} bounds for {nv} variables")
        norm_b = []
        for lo, hi in self.bounds:
            lo = -np.inf if lo is None else float(lo)
            hi = np.inf if hi is None else float(hi)
            if lo > hi:
                raise InputError(f"empty bound interval [{lo}, {hi}]")
            norm_b.append((lo, hi))
        self.bounds = norm_b

    @property
    def nvars(self) -> int:
        return self.c.size

    def residuals(self, z) -> tuple[float, float, float]:
        """Worst equality residual, inequality excess and bound excess at ``z``."""
        z = np.asarray(z, dtype=float)
        req = float(np.max(np.abs(self.A_eq @ z - self.b_eq))) if self.b_eq.size else 0.0
        rub = float(max(0.0, np.max(self.A_ub @ z - self.b_ub))) if self.b_ub.size else 0.0
        lo = np.array([b[0] for b in self.bounds])
        hi = np.array([b[1] for b in self.bounds])
        rb = float(max(0.0, np.max(lo - z), np.max(z - hi))) if z.size else 0.0
        return req, rub, rb

    def to_json(self) -> dict:
        def enc(v):
            return None if np.isinf(v) else v

        return {
            "c": self.c.tolist(),
            "Aeq": self.A_eq.tolist(), "beq": self.b_eq.tolist(),
            "Aub": self.A_ub.tolist(), "bub": self.b_ub.tolist(),
            "bounds": [[enc(lo), enc(hi)] for lo, hi in self.bounds],
        }

    @classmethod
    def from_json(cls, d: dict) -> "LinearProgram":
        try:
            nv = len(d["c"])
            Aeq = d.get("Aeq") or np.zeros((0, nv))
            Aub = d.get("Aub") or np.zeros((0, nv))
            return cls(d["c"], Aeq, d.get("beq") or [], Aub, d.get("bub") or [],
                       bounds=[tuple(b) for b in d["bounds"]] if d.get("bounds") is not None else None)
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"malformed LP document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _pair(A, b, nv, what):
    if A is None:
        return np.zeros((0, nv)), np.zeros(0)
    A = np.asarray(A, dtype=float).reshape(-1, nv) if np.size(A) else np.zeros((0, nv))
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[0] != b.size:
        raise InputError(f"A_{what} has {A.shape[0]} rows but b_{what} has {b.size} entries")
    if not np.all(np.isfinite(b)):
        raise InputError(f"b_{what} must be finite")
    return A, b


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    z: np.ndarray | None
    objective_value: float
    iterations: int


def _standard_form(lp: LinearProgram):
    """Map ``z = offset + M u`` with ``u >= 0`` and return the equality system in u."""
    nv = lp.nvars
    cols, offset, extra_rows = [], np.zeros(nv), []
    for j, (lo, hi) in enumerate(lp.bounds):
        e = np.zeros(nv)
        e[j] = 1.0
        if np.isfinite(lo):
            offset[j] = lo
            cols.append(e)
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append(-e)
        else:
            cols.append(e)
            cols.append(-e)
    M = np.array(cols).T if cols else np.zeros((nv, 0))
    K = M.shape[1]
    Ae = lp.A_eq @ M
    be = lp.b_eq - lp.A_eq @ offset
    Au = lp.A_ub @ M
    bu = lp.b_ub - lp.A_ub @ offset
    if extra_rows:
        B = np.zeros((len(extra_rows), K))
        for r, (k, ub) in enumerate(extra_rows):
            B[r, k] = 1.0
        Au = np.vstack([Au, B])
        bu = np.concatenate([bu, [ub for _, ub in extra_rows]])
    return M, offset, Ae, be, Au, bu


class _Simplex:
    def __init__(self, T, basis, max_pivots):
        self.T = T
        self.basis = basis
        self.iterations = 0
        self.max_pivots = max_pivots

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j
        self.iterations += 1

    def run(self, ncols):
        """Bland's rule on the first ``ncols`` columns. Returns 'optimal' or 'unbounded'."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.iterations >= self.max_pivots:
                raise ResourceError(f"simplex exceeded {self.max_pivots} pivots")
            d = T[m, :ncols]
            neg = np.flatnonzero(d < -PIVOT_TOL)
            if neg.size == 0:
                return "optimal"
            j = int(neg[0])
            a = T[:m, j]
            pos = np.flatnonzero(a > PIVOT_TOL)
            if pos.size == 0:
                return "unbounded"
            ratios = T[pos, -1] / a[pos]
            best = ratios.min()
            tied = pos[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            r = int(tied[np.argmin(self.basis[tied])])
            self.pivot(r, j)


def solve_lp(lp: LinearProgram, max_pivots: int = MAX_PIVOTS) -> LpSolution:
    """Two-phase dense simplex with Bland's anti-cycling rule.

    Free variables are split, finite upper bounds become rows, and rows
    without a ready slack get an artificial variable for phase one.  The
    final basic solution is re-solved against the original columns to wash
    out accumulated pivoting error.
    """
    M, offset, Ae, be, Au, bu = _standard_form(lp)
    K = M.shape[1]
    me, mu = Ae.shape[0], Au.shape[0]
    m = me + mu
    n_std = K + mu
    A = np.zeros((m, n_std))
    A[:me, :K] = Ae
    A[me:, :K] = Au
    A[me:, K:] = np.eye(mu)
    b = np.concatenate([be, bu])
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    basis = np.full(m, -1)
    for i in range(me, m):
        if not flip[i]:
            basis[i] = K + (i - me)
    need = np.flatnonzero(basis < 0)
    nart = need.size
    ncols = n_std + nart
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n_std] = A
    T[:m, -1] = b
    for k, i in enumerate(need):
        T[i, n_std + k] = 1.0
        basis[i] = n_std + k
    # phase-one cost row: minimise the sum of artificials
    if nart:
        T[m, :n_std] = -A[need].sum(axis=0)
        T[m, -1] = -b[need].sum()
    sx = _Simplex(T, basis, max_pivots)
    if nart:
        sx.run(ncols)
        if -T[m, -1] > FEAS_TOL * max(1.0, np.abs(b).max()):
            return LpSolution("infeasible", None, float("nan"), sx.iterations)
        # drive artificials out of the basis; drop rows that are redundant
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= n_std:
                cand = np.flatnonzero(np.abs(T[i, :n_std]) > PIVOT_TOL)
                if cand.size:
                    sx.pivot(i, int(cand[0]))
                else:
                    keep[i] = False
        rows = np.concatenate([np.flatnonzero(keep), [m]])
        T = T[np.ix_(rows, np.r_[0:n_std, ncols])]
        basis = basis[keep]
        A, b = A[keep], b[keep]
        m = basis.size
        sx.T, sx.basis = T, basis

    cost = np.zeros(n_std)
    cost[:K] = lp.c @ M
    T[m, :n_std] = cost
    T[m, -1] = 0.0
    cb = cost[basis]
    T[m] -= cb @ T[:m]
    status = sx.run(n_std)
    if status == "unbounded":
        return LpSolution("unbounded", None, float("-inf"), sx.iterations)

    u = np.zeros(n_std)
    u[basis] = T[:m, -1]
    AB = A[:, basis]
    try:
        if m == 0:
            raise np.linalg.LinAlgError
        uB = np.linalg.lstsq(AB, b, rcond=None)[0]
        if np.all(uB >= -FEAS_TOL) and np.max(np.abs(AB @ uB - b)) <= np.max(np.abs(AB @ u[basis] - b)) + 1e-15:
            u[basis] = np.maximum(uB, 0.0)
    except np.linalg.LinAlgError:
        pass
    u = np.maximum(u, 0.0)
    z = offset + M @ u[:K]
    return LpSolution("optimal", z, float(lp.c @ z), sx.iterations)


# -- polyhedral log norm ----------------------------------------------------

def _layout(m):
    """Index maps: H (m*m, row-major), off-diagonal T entries, gamma."""
    nH = m * m
    off = [(i, j) for i in range(m) for j in range(m) if i != j]
    tidx = {ij: nH + k for k, ij in enumerate(off)}
    return nH, off, tidx, nH + len(off)


def build_polyhedral_lognorm_lp(W, A) -> LinearProgram:
    """LP whose optimum is the log norm of A in the norm ``||W x||_inf``.

    Variables: H (m x m, free), the off-diagonal entries of T (>= 0) and
    gamma (free).  Constraints: ``W A = H W``; ``|H_ij| <= T_ij`` for
    i != j; ``H_ii + sum_j T_ij <= gamma`` for every row.  Minimise gamma.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    rep = validate_norm_spec(NormSpec.poly(W))
    if not rep.ok:
        raise SpecError("; ".join(rep.failures))
    m, n = W.shape
    if A.shape != (n, n):
        raise InputError(f"A must be {n}x{n} to match W, got {A.shape}")
    nH, off, tidx, g = _layout(m)
    nv = g + 1

    # (H W)_ik = sum_j H_ij W_jk
    Aeq = np.zeros((m * n, nv))
    for i in range(m):
        for k in range(n):
            Aeq[i * n + k, i * m:(i + 1) * m] = W[:, k]
    beq = (W @ A).ravel()

    Aub = np.zeros((2 * len(off) + m, nv))
    r = 0
    for (i, j) in off:
        Aub[r, i * m + j] = 1.0
        Aub[r, tidx[i, j]] = -1.0
        Aub[r + 1, i * m + j] = -1.0
        Aub[r + 1, tidx[i, j]] = -1.0
        r += 2
    for i in range(m):
        Aub[r, i * m + i] = 1.0
        for j in range(m):
            if j != i:
                Aub[r, tidx[i, j]] = 1.0
        Aub[r, g] = -1.0
        r += 1
    bub = np.zeros(Aub.shape[0])

    c = np.zeros(nv)
    c[g] = 1.0
    bounds = [(None, None)] * nH + [(0.0, None)] * len(off) + [(None, None)]
    return LinearProgram(c, Aeq, beq, Aub, bub, bounds, meta={"m": m, "n": n})


def mu_inf(M) -> float:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    d = np.diag(M)
    return float(np.max(d + np.abs(M).sum(axis=1) - np.abs(d)))


def extract_H(lp: LinearProgram, sol: LpSolution, m: int, tol: float = 1e-7):
    """Reshape the optimal point into ``(H, gamma)`` and verify it.

    Raises :class:`InternalConsistencyError` if ``W A = H W`` is violated
    beyond ``tol`` or the row formula gives ``mu_inf(H) > gamma + tol``.
    """
    if sol.status != "optimal":
        raise InputError(f"cannot extract H from a {sol.status} solution")
    z = sol.z
    H = z[: m * m].reshape(m, m)
    gamma = float(z[-1])
    res = float(np.max(np.abs(lp.A_eq @ z - lp.b_eq))) if lp.b_eq.size else 0.0
    if res > tol:
        raise InternalConsistencyError(f"||WA - HW|| = {res:.3e} exceeds {tol}")
    if mu_inf(H) > gamma + tol:
        raise InternalConsistencyError(f"mu_inf(H) = {mu_inf(H)} exceeds gamma = {gamma}")
    return H, gamma


def polyhedral_lognorm(W, A):
    """Solve the transcription and return ``(gamma, H, solution)``."""
    lp = build_polyhedral_lognorm_lp(W, A)
    sol = solve_lp(lp)
    if sol.status != "optimal":
        # feasibility is guaranteed for full-column-rank W
        raise SpecError(f"polyhedral log-norm LP is {sol.status}; W is probably rank deficient")
    H, gamma = extract_H(lp, sol, lp.meta["m"])
    return gamma, H, sol
