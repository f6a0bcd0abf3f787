"""Logarithmic norms: closed forms, the polyhedral LP, a limit-definition oracle
and sampled Lumer suprema.

``mu(A) = lim_{h->0+} (||I + hA|| - 1) / h`` for the operator norm induced by
a vector norm.  For l1/linf/(weighted) l2 and polyhedral norms the value is
computed exactly; for other p it is estimated from below by maximising the
Lumer functional ``[[Ax, x]] / ||x||**2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InputError, ResourceError
from .lpsolve import mu_inf, polyhedral_lognorm
from .norms import NormSpec, norm_function, polytope_vertices
from .pairings import PairingSpec, compatible_norm, pairing_batch
from .sampling import sample_vectors

METHODS = ("closed_form", "lp_program", "limit_oracle", "lumer_sampled")
ORACLE_SCHEDULE = 2.0 ** -np.arange(4, 31)
DEFAULT_SAMPLES = 20_000


class NumericWarning(UserWarning):
    """A limit estimate did not settle to its tolerance."""


@dataclass
class LogNormResult:
    value: float
    method: str
    witness: np.ndarray | None = None
    witness_value: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = {"value": self.value, "method": self.method, "diagnostics": self.diagnostics}
        if self.witness is not None:
            d["witness"] = self.witness.tolist()
            d["witness_value"] = self.witness_value
        return d


def mu_1(A) -> float:
    """Column formula ``max_j (a_jj + sum_{i != j} |a_ij|)``."""
    return mu_inf(np.asarray(A, dtype=float).T)


def mu_2(A) -> float:
    """Half the largest eigenvalue of ``A + A^T``."""
    A = np.asarray(A, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (A + A.T))[-1])


def _check_matrix(spec: NormSpec, A) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputError("matrix has non-finite entries")
    d = spec.dim
    if d is not None and A.shape[0] != d:
        raise InputError(f"dimension mismatch: norm acts on R^{d}, matrix is {A.shape[0]}x{A.shape[0]}")
    return A


def _frame(spec: NormSpec, A):
    """Return ``(p, M, Rinv)`` with ``mu_spec(A) = mu_p(M)`` and ``M = R A R^-1``."""
    if spec.kind in ("l2w", "lpw"):
        R = spec.R
        Rinv = np.linalg.inv(R)
        return spec.base_p, R @ A @ Rinv, Rinv
    return spec.base_p, A, None


def _unit(spec: NormSpec, x):
    return x / float(norm_function(spec)(x))


def lumer_witness(spec: NormSpec, A, epsilon: float = 1e-4) -> np.ndarray:
    """Unit vector attaining (linf) or nearly attaining (l1) the Lumer supremum.

    linf: with i* the row maximising ``a_ii + sum_{j != i} |a_ij|``, take
    ``x_i* = 1`` and ``x_j = sign(a_i*j)`` (sign 0 -> +1); the max pairing
    then equals mu_inf(A) exactly.  l1: ``e_j* + eps/(n-1) * sum_i sign(a_ij*) e_i``
    normalised, j* the maximising column; the sign pairing is within
    ``2 n max|a_ij| eps`` of mu_1(A).  Each perturbed coordinate can cost up
    to ``2 n max|a_ij|`` times its weight, so the total weight is kept at eps.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    if spec.kind == "linf":
        rows = np.diag(A) + np.abs(A).sum(axis=1) - np.abs(np.diag(A))
        i = int(np.argmax(rows))
        x = np.where(A[i] >= 0, 1.0, -1.0)
        x[i] = 1.0
        return x
    if spec.kind == "l1":
        if not 0.0 < epsilon < 1.0 / (2 * n):
            raise InputError(f"epsilon must lie in (0, 1/(2n)) = (0, {1.0 / (2 * n)})")
        cols = np.diag(A) + np.abs(A).sum(axis=0) - np.abs(np.diag(A))
        j = int(np.argmax(cols))
        x = epsilon / max(n - 1, 1) * np.where(A[:, j] > 0, 1.0, np.where(A[:, j] < 0, -1.0, 0.0))
        x[j] = 1.0
        return x / np.abs(x).sum()
    raise InputError(f"no explicit Lumer witness for {spec.kind} norms")


def _eig_witness(M):
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return V[:, -1]


_VERTEX_CACHE: dict = {}


def _vertices(W):
    key = (W.shape, W.tobytes())
    if key not in _VERTEX_CACHE:
        if len(_VERTEX_CACHE) > 64:
            _VERTEX_CACHE.clear()
        _VERTEX_CACHE[key] = polytope_vertices(W)
    return _VERTEX_CACHE[key]


def _poly_witness(W, A, eta: float = 1e-8):
    """Near-maximiser of the polyhedral Lumer functional.

    The supremum is attained at a vertex v for some constraint i active
    there, but at a computed vertex the active constraints tie only up to
    rounding.  Moving a fraction ``eta`` towards the centroid of face i makes
    i the strict maximiser at a cost of O(eta) in value.
    """
    try:
        V = _vertices(W)
    except ResourceError:
        return None
    WV, WAV = V @ W.T, V @ A.T @ W.T
    act = np.abs(WV) >= 1.0 - 1e-9
    score = np.where(act, WV * WAV, -np.inf)
    k, i = np.unravel_index(int(np.argmax(score)), score.shape)
    s = np.sign(WV[k, i])
    face = V[np.abs(WV[:, i] - s) <= 1e-9]
    x = (1.0 - eta) * V[k] + eta * face.mean(axis=0)
    return x / float(np.abs(W @ x).max())


def _pairing_for(spec: NormSpec) -> PairingSpec:
    """A regular pairing whose compatible norm is ``spec``."""
    k = spec.kind
    if k == "l1":
        return PairingSpec.sign()
    if k == "linf":
        return PairingSpec.max()
    if k == "lp":
        return PairingSpec.lp(spec.p)
    if k == "l2w":
        return PairingSpec.lpw(2.0, spec.R)
    if k == "lpw":
        return PairingSpec.lpw(spec.p, spec.R)
    return PairingSpec.poly(spec.W)


def interpolation_upper_bound(p: float, M) -> float:
    """Upper bound on ``mu_p(M)`` by interpolating between exact exponents.

    ``||I + hM||_p <= ||I + hM||_a**t ||I + hM||_b**(1-t)`` with
    ``1/p = t/a + (1-t)/b`` passes to log norms as a convex combination.
    """
    m1, m2, mi = mu_1(M), mu_2(M), mu_inf(M)
    best = (1.0 / p) * m1 + (1.0 - 1.0 / p) * mi
    if p >= 2:
        t = 2.0 / p
        best = min(best, t * m2 + (1.0 - t) * mi)
    else:
        t = 2.0 / p - 1.0
        best = min(best, t * m1 + (1.0 - t) * m2)
    return float(best)


def lognorm(spec: NormSpec, A, *, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> LogNormResult:
    """Log norm of ``A`` induced by ``spec``.

    >>> lognorm(NormSpec.linf(), [[-2, 1], [0, -3]]).value
    -1.0
    """
    spec.require_valid()
    A = _check_matrix(spec, A)
    k = spec.kind
    if k == "poly":
        gamma, H, sol = polyhedral_lognorm(spec.W, A)
        diag = {"lp_iterations": sol.iterations}
        w = _poly_witness(spec.W, A)
        res = LogNormResult(gamma, "lp_program", diagnostics=diag)
        if w is not None:
            res.witness = w
            res.witness_value = float(pairing_batch(PairingSpec.poly(spec.W))((A @ w)[None], w[None])[0])
        return res
    p, M, Rinv = _frame(spec, A)
    if p == 1 or math.isinf(p) or p == 2:
        if p == 1:
            value, v = mu_1(M), lumer_witness(NormSpec.l1(), M, epsilon=min(1e-6, 0.25 / M.shape[0]))
        elif p == 2:
            value, v = mu_2(M), _eig_witness(M)
        else:
            value, v = mu_inf(M), lumer_witness(NormSpec.linf(), M)
        x = v if Rinv is None else Rinv @ v
        x = _unit(spec, x)
        wv = float(pairing_batch(_pairing_for(spec))((A @ x)[None], x[None])[0])
        return LogNormResult(value, "closed_form", x, wv)
    value, x = lumer_sup_estimate(_pairing_for(spec), A, count=samples, seed=seed, refine=True)
    diag = {"samples": samples, "seed": seed, "approximate": True,
            "upper_bound": interpolation_upper_bound(p, M)}
    return LogNormResult(value, "lumer_sampled", x, value, diag)


# -- Lumer supremum ---------------------------------------------------------

def lumer_sup_estimate(pairing: PairingSpec, A, count: int = 10_000, seed: int = 0, stream: int = 0,
                       candidates=None, refine: bool = False, starts: int = 8):
    """Max of ``[[Ax, x]]`` over ``count`` sampled unit vectors.

    Samples come from the replayable stream ``(seed, stream)`` and are
    projected to the unit sphere of the pairing's norm, so the unrefined
    value is nondecreasing in ``count``.  ``candidates`` are extra vectors
    (e.g. structured witnesses) included in the max.  With ``refine`` the
    best ``starts`` samples are polished by local optimisation; the result
    is still a lower bound on mu(A).  Returns ``(value, witness)``.
    """
    nrm = compatible_norm(pairing)
    A = _check_matrix(nrm, A)
    n = A.shape[0]
    f = norm_function(nrm)
    g = pairing_batch(pairing)
    X = sample_vectors(seed, n, count, stream=stream) if count > 0 else np.zeros((0, n))
    if candidates is not None:
        X = np.vstack([X, np.atleast_2d(np.asarray(candidates, dtype=float))])
    nx = f(X)
    X = X[nx > 0] / nx[nx > 0, None]
    if X.shape[0] == 0:
        raise InputError("no usable sample vectors")
    vals = g(X @ A.T, X)
    best = int(np.argmax(vals))
    value, wit = float(vals[best]), X[best]
    if refine:
        order = np.argsort(-vals)[:starts]

        def obj(x):
            nxv = float(f(x))
            if nxv == 0.0:
                return 0.0
            u = x / nxv
            return -float(g((A @ u)[None], u[None])[0])

        for s in order:
            r = minimize(obj, X[s], method="BFGS", options={"gtol": 1e-11, "maxiter": 500})
            if -r.fun > value:
                value, wit = float(-r.fun), r.x / float(f(r.x))
    return value, wit


# -- limit-definition oracle ------------------------------------------------

def _induced_exact(spec: NormSpec):
    """Exact induced operator norm for the kind, or None if unavailable."""
    k = spec.kind
    if k == "poly":
        try:
            V = _vertices(spec.W)
        except ResourceError:
            return None
        W = spec.W
        return lambda N: float(np.max(np.abs(V @ N.T @ W.T)))
    p = spec.base_p
    R = spec.R if k in ("l2w", "lpw") else None
    Rinv = np.linalg.inv(R) if R is not None else None

    def frame(N):
        return N if R is None else R @ N @ Rinv

    if p == 1:
        return lambda N: float(np.abs(frame(N)).sum(axis=0).max())
    if math.isinf(p):
        return lambda N: float(np.abs(frame(N)).sum(axis=1).max())
    if p == 2:
        return lambda N: float(np.linalg.norm(frame(N), 2))
    return None


def _richardson_tail(h, q, tol):
    r = (h[:-1] * q[1:] - h[1:] * q[:-1]) / (h[:-1] - h[1:])
    d = np.abs(np.diff(r))
    ok = np.flatnonzero(d < tol)
    if ok.size:
        return float(r[ok[0] + 1]), True
    k = int(np.argmin(d))
    return float(r[k + 1]), False


def lognorm_limit_oracle(spec: NormSpec, A, schedule=None, *, seed: int = 0, samples: int = 4000) -> float:
    """Estimate ``lim_{h->0+} (||I + hA|| - 1) / h`` from its definition.

    Exact induced norms are used for l1, linf, (weighted) l2 and polyhedral
    norms (the latter by maximising over the vertices of the unit ball).
    Other exponents maximise ``||(I + hA) x|| / ||x||`` by local
    optimisation from the best sampled points, which is approximate.
    Difference quotients are Richardson-combined and read off where
    consecutive values agree; a :class:`NumericWarning` is issued when they
    never do.
    """
    spec.require_valid()
    A = _check_matrix(spec, A)
    n = A.shape[0]
    h = ORACLE_SCHEDULE if schedule is None else np.asarray(schedule, dtype=float)
    I = np.eye(n)
    scale = 1.0 + float(np.abs(A).max())
    exact = _induced_exact(spec)
    if exact is not None:
        q = np.array([(exact(I + hk * A) - 1.0) / hk for hk in h])
        tol = 1e-9 * scale
    else:
        q = _sampled_quotients(spec, A, h, seed, samples)
        tol = 1e-7 * scale
    val, ok = _richardson_tail(h, q, tol)
    if not ok:
        warnings.warn(f"log-norm limit did not settle to {tol:.1e}; returning best tail estimate", NumericWarning)
    return val


def _sampled_quotients(spec, A, h, seed, samples):
    f = norm_function(spec)
    n = A.shape[0]
    X = sample_vectors(seed, n, samples, stream=7)
    X = X / f(X)[:, None]

    def phi(x, hk):
        nx = float(f(x))
        return (float(f(x + hk * (A @ x))) / nx - 1.0) / hk

    vals = np.array([phi(x, h[0]) for x in X])
    starts = [X[i] for i in np.argsort(-vals)[:4]]
    q = []
    for hk in h:
        best, bx = -np.inf, None
        for x0 in starts:
            r = minimize(lambda x: -phi(x, hk), x0, method="BFGS", options={"gtol": 1e-12, "maxiter": 400})
            if -r.fun > best:
                best, bx = -r.fun, r.x / float(f(r.x))
        q.append(best)
        starts = [bx]
    return np.array(q)
