"""Weak pairings on R^n and numerical JMT (one-sided directional derivative) pairings.

Conventions: ``pairing(x, y)`` is linear-ish in ``x`` and carries the norm
through ``y``; ``pairing(x, x) == ||x||**2`` for the compatible norm.
Indices are 0-based throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, NumericError, SpecError
from .norms import NormSpec, check_dim, norm_function, plain_norm, _rank_ok

KINDS = ("sign", "max", "lp", "l2w", "lpw", "poly", "minidx", "abssum", "combo", "jmt+", "jmt-")
NUMERIC_KINDS = ("jmt+", "jmt-")

DEFAULT_SCHEDULE = 2.0 ** -np.arange(8, 41)
JMT_TOL = 1e-7


@dataclass(eq=False)
class PairingSpec:
    """Tagged description of a pairing.

    ``sign``/``max``/``minidx`` pair with l1/linf, ``lp`` with lp, ``l2w``
    is ``x^T P y`` for SPD ``P``, ``lpw`` is the lp pairing of ``(Rx, Ry)``,
    ``poly`` is the max pairing of ``(Wx, Wy)``.  ``abssum`` and ``combo``
    are weak pairings of the Euclidean norm that are *not* regular and are
    kept as negative controls.  ``jmt+``/``jmt-`` evaluate the upper/lower
    JMT pairing of ``norm`` numerically.
    """

    kind: str
    p: float | None = None
    P: np.ndarray | None = None
    R: np.ndarray | None = None
    W: np.ndarray | None = None
    alpha: float | None = None
    norm: NormSpec | None = None

    def __post_init__(self):
        for name in ("P", "R", "W"):
            v = getattr(self, name)
            if v is not None:
                setattr(self, name, np.atleast_2d(np.asarray(v, dtype=float)))
        if self.p is not None:
            self.p = float(self.p)
        if self.alpha is not None:
            self.alpha = float(self.alpha)
        self._checked = None
        self._norm = None

    @classmethod
    def sign(cls):
        return cls("sign")

    @classmethod
    def max(cls):
        return cls("max")

    @classmethod
    def lp(cls, p):
        return cls("lp", p=p)

    @classmethod
    def l2w(cls, P):
        return cls("l2w", P=P)

    @classmethod
    def lpw(cls, p, R):
        return cls("lpw", p=p, R=R)

    @classmethod
    def poly(cls, W):
        return cls("poly", W=W)

    @classmethod
    def minidx(cls):
        return cls("minidx")

    @classmethod
    def abssum(cls):
        return cls("abssum")

    @classmethod
    def combo(cls, alpha):
        return cls("combo", alpha=alpha)

    @classmethod
    def jmt_upper(cls, norm):
        return cls("jmt+", norm=norm)

    @classmethod
    def jmt_lower(cls, norm):
        return cls("jmt-", norm=norm)

    @property
    def label(self) -> str:
        extra = ""
        if self.kind in ("lp", "lpw"):
            extra = f"(p={self.p:g})"
        elif self.kind == "combo":
            extra = f"(alpha={self.alpha:g})"
        elif self.kind in NUMERIC_KINDS and self.norm is not None:
            extra = f"({self.norm.kind})"
        return self.kind + extra

    def validate(self) -> list:
        """Return a list of failed invariants (empty when valid)."""
        if self._checked is None:
            self._checked = _validate(self)
        return self._checked

    def require_valid(self):
        fails = self.validate()
        if fails:
            raise SpecError(f"invalid {self.kind} pairing spec: " + "; ".join(fails))

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.p is not None:
            d["p"] = "inf" if math.isinf(self.p) else self.p
        for name in ("P", "R", "W"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v.tolist()
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.norm is not None:
            d["norm"] = self.norm.to_json()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PairingSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise SpecError("pairing spec must be an object with a 'kind' field")
        kind = d["kind"]
        if kind not in KINDS:
            raise SpecError(f"unknown pairing kind {kind!r}; expected one of {KINDS}")
        norm = NormSpec.from_json(d["norm"]) if "norm" in d else None
        p = d.get("p")
        if isinstance(p, str):
            p = float(p)
        try:
            return cls(kind, p=p, P=d.get("P"), R=d.get("R"), W=d.get("W"), alpha=d.get("alpha"), norm=norm)
        except (TypeError, ValueError) as exc:
            raise SpecError(f"bad numeric payload in pairing spec: {exc}") from exc


def _validate(spec: PairingSpec) -> list:
    k = spec.kind
    if k not in KINDS:
        return [f"unknown kind {k!r}"]
    fails = []
    if k == "lp" and (spec.p is None or not 1.0 < spec.p < math.inf):
        fails.append("p out of open range (1, inf)")
    if k == "lpw" and (spec.p is None or not 1.0 <= spec.p <= math.inf):
        fails.append("p out of range [1, inf]")
    if k == "l2w":
        P = spec.P
        if P is None or P.shape[0] != P.shape[1]:
            fails.append("P missing or not square")
        elif not np.allclose(P, P.T, rtol=1e-12, atol=1e-12 * np.abs(P).max()):
            fails.append("P not symmetric")
        else:
            try:
                np.linalg.cholesky(P)
            except np.linalg.LinAlgError:
                fails.append("P not positive definite")
    if k == "lpw":
        if spec.R is None or spec.R.shape[0] != spec.R.shape[1] or not _rank_ok(spec.R):
            fails.append("R missing, not square, or singular")
    if k == "poly":
        W = spec.W
        if W is None or W.shape[0] < W.shape[1] or not _rank_ok(W):
            fails.append("W missing or not full column rank with m >= n")
    if k == "combo" and (spec.alpha is None or not 0.0 <= spec.alpha <= 1.0):
        fails.append("alpha outside [0, 1]")
    if k in NUMERIC_KINDS:
        if spec.norm is None:
            fails.append("numeric JMT pairing needs a norm")
        elif not spec.norm.report.ok:
            fails.extend(spec.norm.report.failures)
    return fails


def _spd_sqrt(P):
    w, V = np.linalg.eigh(P)
    return (V * np.sqrt(w)) @ V.T


def compatible_norm(spec: PairingSpec) -> NormSpec:
    """The norm with ``||x||**2 == pairing(x, x)`` (deterministic mapping)."""
    spec.require_valid()
    if spec._norm is None:
        k = spec.kind
        if k == "sign":
            nrm = NormSpec.l1()
        elif k in ("max", "minidx"):
            nrm = NormSpec.linf()
        elif k == "lp":
            nrm = NormSpec.lp(spec.p)
        elif k == "l2w":
            nrm = NormSpec.l2w(_spd_sqrt(spec.P))
        elif k == "lpw":
            nrm = NormSpec.lpw(spec.p, spec.R)
        elif k == "poly":
            nrm = NormSpec.poly(spec.W)
        elif k in ("abssum", "combo"):
            nrm = NormSpec.lp(2.0)
        else:
            nrm = spec.norm
        spec._norm = nrm
    return spec._norm


# -- closed-form pairings (no argument checks) ------------------------------

def sign_pairing(x, y):
    return float(np.sum(np.abs(y)) * (np.sign(y) @ x))


def max_pairing(x, y):
    ay = np.abs(y)
    top = ay.max()
    if top == 0.0:
        return 0.0
    act = ay == top
    return float(np.max(x[act] * y[act]))


def lp_pairing(x, y, p):
    if p == 1:
        return sign_pairing(x, y)
    if math.isinf(p):
        return max_pairing(x, y)
    m = np.abs(y).max()
    if m == 0.0:
        return 0.0
    u = y / m
    nu = float(plain_norm(u, p))
    return float(m * nu ** (2.0 - p) * ((np.sign(u) * np.abs(u) ** (p - 1.0)) @ x))


def min_index_lg_eval(x, y) -> float:
    """``x_m * y_m`` where m is the smallest index with ``|y_m| == ||y||_inf``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = int(np.argmax(np.abs(y)))
    return float(x[m] * y[m])


def ell1_jmt_closed(x, y) -> float:
    """Closed-form upper JMT pairing of the l1 norm.

    ``||y||_1 * (sign(y)^T x + sum_{i: y_i = 0} |x_i|)``; it coincides with
    the sign pairing whenever y has no zero coordinate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.sum(np.abs(y)) * (np.sign(y) @ x + np.sum(np.abs(x[y == 0.0]))))


def active_index_set(y, tol: float = 0.0) -> np.ndarray:
    """Indices i with ``|y_i| >= ||y||_inf - tol`` (all indices when y == 0)."""
    if tol < 0:
        raise InputError("tol must be nonnegative")
    ay = np.abs(np.asarray(y, dtype=float))
    return np.flatnonzero(ay >= ay.max() - tol)


# -- numerical JMT pairings -------------------------------------------------

def _check_schedule(schedule):
    h = np.asarray(schedule, dtype=float)
    if h.ndim != 1 or h.size < 3:
        raise InputError("schedule needs at least three step sizes")
    if np.any(h <= 0) or np.any(np.diff(h) >= 0):
        raise InputError("schedule must be positive and strictly decreasing")
    return h


def _jmt_upper_fast(f, x, y, h, tol=JMT_TOL):
    ny = float(f(y))
    if ny == 0.0:
        return 0.0
    nx = float(f(x))
    e = ny * (f(y[None, :] + h[:, None] * x[None, :]) - ny) / h
    # Richardson step removes the O(h) term for smooth norms and is exact on
    # piecewise-linear ones once h is inside the linear piece
    r = (h[:-1] * e[1:] - h[1:] * e[:-1]) / (h[:-1] - h[1:])
    d = np.abs(np.diff(r))
    ok = np.flatnonzero(d < tol * (1.0 + nx * ny))
    if ok.size == 0:
        raise NumericError("JMT difference quotients did not settle", estimates=r[-2:])
    return float(r[ok[0] + 1])


def jmt_upper(norm: NormSpec, x, y, schedule=None, tol: float = JMT_TOL) -> float:
    """Upper JMT pairing ``||y|| * lim_{h->0+} (||y + h x|| - ||y||) / h``.

    The limit is read off the tail of ``schedule`` (default ``2**-k``,
    k = 8..40): estimates are Richardson-combined and the first pair of
    consecutive combined estimates that agree to ``tol * (1 + ||x|| ||y||)``
    is accepted.  Raises :class:`NumericError` if no such pair exists.
    """
    x = check_dim(norm, x)
    y = check_dim(norm, y)
    if x.size != y.size:
        raise InputError("x and y differ in length")
    h = DEFAULT_SCHEDULE if schedule is None else _check_schedule(schedule)
    return _jmt_upper_fast(norm_function(norm), x, y, h, tol)


def jmt_lower(norm: NormSpec, x, y, schedule=None, tol: float = JMT_TOL) -> float:
    """Lower JMT pairing, computed as ``-jmt_upper(norm, -x, y)``."""
    return -jmt_upper(norm, -np.asarray(x, dtype=float), y, schedule, tol)


# -- dispatch ---------------------------------------------------------------

def pairing_function(spec: PairingSpec, schedule=None):
    """Return an unchecked evaluator ``g(x, y)`` for 1-D float arrays."""
    spec.require_valid()
    k = spec.kind
    if k == "sign":
        return sign_pairing
    if k == "max":
        return max_pairing
    if k == "minidx":
        return min_index_lg_eval
    if k == "lp":
        p = spec.p
        return lambda x, y: lp_pairing(x, y, p)
    if k == "l2w":
        P = spec.P
        return lambda x, y: float(x @ P @ y)
    if k == "lpw":
        p, R = spec.p, spec.R
        return lambda x, y: lp_pairing(R @ x, R @ y, p)
    if k == "poly":
        W = spec.W
        return lambda x, y: max_pairing(W @ x, W @ y)
    if k == "abssum":
        return lambda x, y: float(np.sum(np.abs(x * y)))
    if k == "combo":
        a = spec.alpha
        return lambda x, y: float(a * (x @ y) + (1.0 - a) * np.sum(np.abs(x * y)))
    f = norm_function(spec.norm)
    h = DEFAULT_SCHEDULE if schedule is None else _check_schedule(schedule)
    if k == "jmt+":
        return lambda x, y: _jmt_upper_fast(f, x, y, h)
    return lambda x, y: -_jmt_upper_fast(f, -x, y, h)


def pairing_eval(spec: PairingSpec, x, y, schedule=None) -> float:
    """Evaluate the pairing ``[[x, y]]`` described by ``spec``.

    >>> pairing_eval(PairingSpec.sign(), [1, -2], [3, -3])
    18.0
    >>> pairing_eval(PairingSpec.max(), [1, -2], [3, -3])
    6.0
    """
    nrm = compatible_norm(spec)
    x = check_dim(nrm, x)
    y = check_dim(nrm, y)
    if x.size != y.size:
        raise InputError("x and y differ in length")
    return pairing_function(spec, schedule)(x, y)


# -- batched evaluation -----------------------------------------------------

def _max_rows(X, Y):
    aY = np.abs(Y)
    top = aY.max(axis=1, keepdims=True)
    v = np.where(aY == top, X * Y, -np.inf).max(axis=1)
    return np.where(top[:, 0] > 0, v, 0.0)


def _lp_rows_pair(X, Y, p):
    if p == 1:
        return np.abs(Y).sum(axis=1) * np.sum(np.sign(Y) * X, axis=1)
    if math.isinf(p):
        return _max_rows(X, Y)
    m = np.abs(Y).max(axis=1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    U = Y / safe
    nu = plain_norm(U, p)
    nu = np.where(nu > 0, nu, 1.0)
    v = m[:, 0] * nu ** (2.0 - p) * np.sum(np.sign(U) * np.abs(U) ** (p - 1.0) * X, axis=1)
    return np.where(m[:, 0] > 0, v, 0.0)


def pairing_batch(spec: PairingSpec, schedule=None):
    """Row-wise evaluator ``g(X, Y) -> values`` for stacked vectors of shape (k, n).

    Closed-form kinds are vectorised; numeric JMT kinds loop over rows.
    """
    spec.require_valid()
    k = spec.kind
    if k == "sign":
        return lambda X, Y: _lp_rows_pair(X, Y, 1)
    if k == "max":
        return _max_rows
    if k == "minidx":
        def minidx(X, Y):
            idx = np.argmax(np.abs(Y), axis=1)
            r = np.arange(len(Y))
            return X[r, idx] * Y[r, idx]
        return minidx
    if k == "lp":
        p = spec.p
        return lambda X, Y: _lp_rows_pair(X, Y, p)
    if k == "l2w":
        P = spec.P
        return lambda X, Y: np.sum((X @ P) * Y, axis=1)
    if k == "lpw":
        p, R = spec.p, spec.R
        return lambda X, Y: _lp_rows_pair(X @ R.T, Y @ R.T, p)
    if k == "poly":
        W = spec.W
        return lambda X, Y: _max_rows(X @ W.T, Y @ W.T)
    if k == "abssum":
        return lambda X, Y: np.sum(np.abs(X * Y), axis=1)
    if k == "combo":
        a = spec.alpha
        return lambda X, Y: a * np.sum(X * Y, axis=1) + (1.0 - a) * np.sum(np.abs(X * Y), axis=1)
    sign = 1.0 if k == "jmt+" else -1.0

    def jmt(X, Y):
        v, ok = jmt_upper_batch(spec.norm, sign * X, Y, schedule)
        if not ok.all():
            raise NumericError("JMT difference quotients did not settle", estimates=v[~ok][:2])
        return sign * v
    return jmt


def jmt_upper_batch(norm: NormSpec, X, Y, schedule=None, tol: float = JMT_TOL, chunk: int = 2048):
    """Row-wise upper JMT pairing; returns ``(values, settled)``.

    Same estimator as :func:`jmt_upper`.  Rows whose tail never settles get
    ``settled == False`` and the value of the closest consecutive pair.
    """
    f = norm_function(norm)
    h = DEFAULT_SCHEDULE if schedule is None else _check_schedule(schedule)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    vals = np.empty(len(X))
    settled = np.empty(len(X), dtype=bool)
    for s in range(0, len(X), chunk):
        x, y = X[s:s + chunk], Y[s:s + chunk]
        ny = f(y)
        nx = f(x)
        e = ny[:, None] * (f(y[:, None, :] + h[None, :, None] * x[:, None, :]) - ny[:, None]) / h
        r = (h[:-1] * e[:, 1:] - h[1:] * e[:, :-1]) / (h[:-1] - h[1:])
        d = np.abs(np.diff(r, axis=1))
        ok = d < tol * (1.0 + nx * ny)[:, None]
        first = np.where(ok.any(axis=1), np.argmax(ok, axis=1), np.argmin(d, axis=1))
        rows = np.arange(len(x))
        vals[s:s + chunk] = np.where(ny > 0, r[rows, first + 1], 0.0)
        settled[s:s + chunk] = ok.any(axis=1) | (ny == 0)
    return vals, settled
