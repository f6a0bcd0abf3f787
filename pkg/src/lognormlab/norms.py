"""Norms on R^n: l1, linf, lp, weighted l2/lp and polyhedral max norms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputError, ResourceError, SpecError

KINDS = ("l1", "linf", "lp", "l2w", "lpw", "poly")

# smallest singular value must exceed RANK_RTOL * largest
RANK_RTOL = 1e-9
MAX_L1_POLY_DIM = 12


@dataclass
class ValidationReport:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass(eq=False)
class NormSpec:
    """Tagged description of a norm.

    ``kind`` is one of ``l1``, ``linf``, ``lp`` (1 < p < inf), ``l2w``
    (||Rx||_2), ``lpw`` (||Rx||_p, 1 <= p <= inf) and ``poly`` (||Wx||_inf).
    Specs are not validated on construction; :func:`validate_norm_spec`
    reports problems and every evaluation refuses an invalid spec.
    """

    kind: str
    p: float | None = None
    R: np.ndarray | None = None
    W: np.ndarray | None = None

    def __post_init__(self):
        if self.R is not None:
            self.R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if self.W is not None:
            self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        if self.p is not None:
            self.p = float(self.p)

    @classmethod
    def l1(cls):
        return cls("l1")

    @classmethod
    def linf(cls):
        return cls("linf")

    @classmethod
    def lp(cls, p):
        return cls("lp", p=p)

    @classmethod
    def l2w(cls, R):
        return cls("l2w", R=R)

    @classmethod
    def lpw(cls, p, R):
        return cls("lpw", p=p, R=R)

    @classmethod
    def poly(cls, W):
        return cls("poly", W=W)

    @property
    def dim(self) -> int | None:
        """Required vector dimension, or None when any n is accepted."""
        if self.kind in ("l2w", "lpw") and self.R is not None:
            return self.R.shape[1]
        if self.kind == "poly" and self.W is not None:
            return self.W.shape[1]
        return None

    @property
    def weight(self) -> np.ndarray | None:
        return self.R if self.kind in ("l2w", "lpw") else None

    @property
    def base_p(self) -> float:
        """The exponent of the underlying unweighted lp norm."""
        return {"l1": 1.0, "linf": math.inf, "l2w": 2.0, "poly": math.inf}.get(self.kind, self.p)

    @cached_property
    def report(self) -> ValidationReport:
        return validate_norm_spec(self)

    def require_valid(self):
        rep = self.report
        if not rep.ok:
            raise SpecError(f"invalid {self.kind} norm spec: " + "; ".join(rep.failures))

    def __eq__(self, other):
        if not isinstance(other, NormSpec) or self.kind != other.kind:
            return NotImplemented if not isinstance(other, NormSpec) else False
        return (self.p == other.p and _arr_eq(self.R, other.R) and _arr_eq(self.W, other.W))

    __hash__ = None

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.p is not None:
            d["p"] = "inf" if math.isinf(self.p) else self.p
        if self.R is not None:
            d["R"] = self.R.tolist()
        if self.W is not None:
            d["W"] = self.W.tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "NormSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise SpecError("norm spec must be an object with a 'kind' field")
        kind = d["kind"]
        if kind not in KINDS:
            raise SpecError(f"unknown norm kind {kind!r}; expected one of {KINDS}")
        p = d.get("p")
        if isinstance(p, str):
            p = float(p)
        try:
            return cls(kind, p=p, R=d.get("R"), W=d.get("W"))
        except (TypeError, ValueError) as exc:
            raise SpecError(f"bad numeric payload in norm spec: {exc}") from exc


def _arr_eq(a, b):
    if a is None or b is None:
        return a is b
    return a.shape == b.shape and bool(np.array_equal(a, b))


def _rank_ok(M):
    if not np.all(np.isfinite(M)):
        return False
    s = np.linalg.svd(M, compute_uv=False)
    return s.size > 0 and s[-1] > RANK_RTOL * s[0]


def validate_norm_spec(spec: NormSpec) -> ValidationReport:
    """Check the invariants of ``spec`` and report every one that fails."""
    fails = []
    if spec.kind not in KINDS:
        return ValidationReport(False, [f"unknown kind {spec.kind!r}"])
    if spec.kind == "lp":
        if spec.p is None or not (1.0 < spec.p < math.inf):
            fails.append("p out of open range (1, inf); use l1/linf for the endpoints")
    if spec.kind == "lpw":
        if spec.p is None or not (1.0 <= spec.p <= math.inf) or math.isnan(spec.p):
            fails.append("p out of range [1, inf]")
    if spec.kind in ("l2w", "lpw"):
        R = spec.R
        if R is None:
            fails.append("missing weight matrix R")
        elif R.ndim != 2 or R.shape[0] != R.shape[1]:
            fails.append("R is not square")
        elif not _rank_ok(R):
            fails.append("R is singular or ill-conditioned")
    if spec.kind == "poly":
        W = spec.W
        if W is None:
            fails.append("missing matrix W")
        elif W.ndim != 2:
            fails.append("W is not a matrix")
        elif W.shape[0] < W.shape[1]:
            fails.append("W has fewer rows than columns (need m >= n)")
        elif not _rank_ok(W):
            fails.append("W is not full column rank")
    return ValidationReport(not fails, fails)


def _lp_rows(X, p):
    """Overflow-safe lp norm along the last axis (max-factoring)."""
    ax = np.abs(X)
    m = ax.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((ax / safe) ** p, axis=-1) ** (1.0 / p)
    return np.where(m[..., 0] > 0, m[..., 0] * s, 0.0)


def plain_norm(X, p):
    """Unweighted lp norm along the last axis for any 1 <= p <= inf."""
    X = np.asarray(X, dtype=float)
    if p == 1:
        return np.sum(np.abs(X), axis=-1)
    if math.isinf(p):
        return np.max(np.abs(X), axis=-1) if X.shape[-1] else np.zeros(X.shape[:-1])
    if p == 2:
        return _lp_rows(X, 2.0)
    return _lp_rows(X, p)


def norm_function(spec: NormSpec):
    """Return a vectorised evaluator ``f(X)`` acting along the last axis.

    No dimension checks are made; this is the fast path used by the
    numerical limit estimators.
    """
    spec.require_valid()
    p = spec.base_p
    if spec.kind in ("l2w", "lpw"):
        R = spec.R
        return lambda X: plain_norm(np.asarray(X, dtype=float) @ R.T, p)
    if spec.kind == "poly":
        W = spec.W
        return lambda X: plain_norm(np.asarray(X, dtype=float) @ W.T, math.inf)
    return lambda X: plain_norm(X, p)


def check_dim(spec: NormSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise InputError(f"expected a vector, got array of shape {x.shape}")
    d = spec.dim
    if d is not None and x.size != d:
        raise InputError(f"dimension mismatch: norm acts on R^{d}, got vector of length {x.size}")
    if x.size == 0:
        raise InputError("empty vector")
    return x


def norm_eval(spec: NormSpec, x) -> float:
    """Evaluate ``||x||`` for the norm described by ``spec``.

    >>> norm_eval(NormSpec.l1(), [3, -4])
    7.0
    >>> norm_eval(NormSpec.poly([[1, 1], [1, -1]]), [3, -4])
    7.0
    """
    spec.require_valid()
    x = check_dim(spec, x)
    return float(norm_function(spec)(x))


def l1_as_polyhedral(n: int) -> np.ndarray:
    """Rows are all sign patterns with a leading +1, in lexicographic order (+1 before -1).

    ``||W x||_inf == ||x||_1`` for every x.
    """
    if n < 1:
        raise InputError("dimension must be positive")
    if n > MAX_L1_POLY_DIM:
        raise ResourceError(f"l1_as_polyhedral({n}) would need {2 ** (n - 1)} rows; limit is n <= {MAX_L1_POLY_DIM}")
    rows = [(1.0,) + s for s in itertools.product((1.0, -1.0), repeat=n - 1)]
    return np.array(rows)


def polytope_vertices(W, max_candidates: int = 200_000) -> np.ndarray:
    """Vertices of the unit ball ``{x : ||W x||_inf <= 1}`` by exhaustive enumeration.

    A vertex has n linearly independent active constraints ``w_i^T x = +-1``;
    all subsets of n rows and all sign choices are tried.
    """
    W = np.atleast_2d(np.asarray(W, dtype=float))
    m, n = W.shape
    ncand = math.comb(m, n) * 2 ** n
    if ncand > max_candidates:
        raise ResourceError(f"vertex enumeration needs {ncand} solves (limit {max_candidates})")
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    found = []
    for rows in itertools.combinations(range(m), n):
        Ws = W[list(rows)]
        if not _rank_ok(Ws):
            continue
        X = np.linalg.solve(Ws, signs.T).T
        ok = np.max(np.abs(X @ W.T), axis=1) <= 1.0 + 1e-9
        found.extend(X[ok])
    if not found:
        return np.zeros((0, n))
    V = np.array(found)
    _, idx = np.unique(np.round(V, 9), axis=0, return_index=True)
    return V[np.sort(idx)]
