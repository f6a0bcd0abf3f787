"""Contraction certificates for ODEs ``x' = f(t, x)``.

A bound ``mu(Df) <= b`` on a convex region is equivalent to the one-sided
Lipschitz condition ``[[f(x) - f(y), x - y]] <= b ||x - y||**2`` and gives
``||x(t) - y(t)|| <= exp(b (t - s)) ||x(s) - y(s)||`` for trajectories that
stay in the region.  This module checks each statement numerically.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InputError, ResourceError, SpecError
from .lognorm import _pairing_for, lognorm
from .norms import NormSpec, norm_function
from .pairings import PairingSpec, compatible_norm, pairing_batch
from .sampling import sample_box

MAX_STEPS = 10_000_000
SYSTEM_KINDS = ("linear", "affine", "hopfield")


@dataclass(eq=False)
class VectorFieldSpec:
    """Autonomous built-in vector fields with analytic Jacobians.

    ``linear``: ``A x``; ``affine``: ``A x + b``; ``hopfield``:
    ``A_lin x + S tanh(x) (+ b)`` with Jacobian ``A_lin + S diag(1 - tanh(x)**2)``.
    """

    kind: str
    A: np.ndarray
    b: np.ndarray | None = None
    S: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in SYSTEM_KINDS:
            raise SpecError(f"unknown system kind {self.kind!r}; expected one of {SYSTEM_KINDS}")
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise SpecError(f"system matrix must be square, got {self.A.shape}")
        if self.b is not None:
            self.b = np.asarray(self.b, dtype=float).ravel()
            if self.b.size != n:
                raise SpecError(f"offset b has length {self.b.size}, expected {n}")
        if self.kind == "affine" and self.b is None:
            raise SpecError("affine system needs an offset b")
        if self.kind == "hopfield":
            if self.S is None:
                raise SpecError("hopfield system needs a coupling matrix S")
            self.S = np.atleast_2d(np.asarray(self.S, dtype=float))
            if self.S.shape != (n, n):
                raise SpecError(f"S must be {n}x{n}, got {self.S.shape}")
        for M in (self.A, self.b, self.S):
            if M is not None and not np.all(np.isfinite(M)):
                raise SpecError("system data must be finite")

    @classmethod
    def linear(cls, A):
        return cls("linear", A)

    @classmethod
    def affine(cls, A, b):
        return cls("affine", A, b=b)

    @classmethod
    def hopfield(cls, A_lin, S, b=None):
        return cls("hopfield", A_lin, b=b, S=S)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def constant_jacobian(self) -> bool:
        return self.kind != "hopfield"

    def f(self, t, X):
        """Vector field on the last axis of ``X`` (any leading shape)."""
        out = X @ self.A.T
        if self.S is not None:
            out = out + np.tanh(X) @ self.S.T
        if self.b is not None:
            out = out + self.b
        return out

    def jacobian(self, t, x):
        if self.S is None:
            return self.A.copy()
        return self.A + self.S * (1.0 - np.tanh(np.asarray(x, dtype=float)) ** 2)[None, :]

    def to_json(self) -> dict:
        if self.kind == "hopfield":
            d = {"kind": "hopfield", "Alin": self.A.tolist(), "S": self.S.tolist()}
        else:
            d = {"kind": self.kind, "A": self.A.tolist()}
        if self.b is not None:
            d["b"] = self.b.tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "VectorFieldSpec":
        if not isinstance(d, dict) or "kind" not in d:
            raise SpecError("system spec must be an object with a 'kind' field")
        try:
            if d["kind"] == "hopfield":
                return cls("hopfield", d["Alin"], b=d.get("b"), S=d["S"])
            return cls(d["kind"], d["A"], b=d.get("b"))
        except KeyError as exc:
            raise SpecError(f"system spec is missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise SpecError(f"bad numeric payload in system spec: {exc}") from exc


def fd_jacobian(vf: VectorFieldSpec, t, x) -> np.ndarray:
    """Central-difference Jacobian (diagnostic only), step ``1e-6 (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    J = np.empty((n, n))
    for i in range(n):
        h = 1e-6 * (1.0 + abs(x[i]))
        e = np.zeros(n)
        e[i] = h
        J[:, i] = (vf.f(t, x + e) - vf.f(t, x - e)) / (2 * h)
    return J


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    dt: float
    order: int = 4


def integrate(vf: VectorFieldSpec, x0, t0: float, t1: float, dt: float) -> Trajectory:
    """Classical fourth-order Runge-Kutta on a fixed grid ending exactly at ``t1``.

    ``x0`` may be a single state or a stack of states (shape ``(k, n)``);
    stacked states are integrated together on the same grid.
    """
    x = np.array(x0, dtype=float)
    if x.shape[-1] != vf.dim:
        raise InputError(f"initial state has length {x.shape[-1]}, system has dimension {vf.dim}")
    if not dt > 0:
        raise InputError("dt must be positive")
    if t1 < t0:
        raise InputError("t1 must not precede t0")
    nfull = int(math.floor((t1 - t0) / dt + 1e-9))
    if nfull > MAX_STEPS:
        raise ResourceError(f"{nfull} steps exceed the limit of {MAX_STEPS}")
    times = t0 + dt * np.arange(nfull + 1)
    if t1 - times[-1] > 1e-12 * max(1.0, abs(t1)):
        times = np.append(times, t1)
    else:
        times[-1] = t1 if nfull else times[-1]
    states = np.empty((len(times),) + x.shape)
    states[0] = x
    f = vf.f
    for k in range(len(times) - 1):
        t, h = times[k], times[k + 1] - times[k]
        # overflow is reported below as a divergence, not as a numpy warning
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = f(t, x)
            k2 = f(t + h / 2, x + h / 2 * k1)
            k3 = f(t + h / 2, x + h / 2 * k2)
            k4 = f(t + h, x + h * k3)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"state became non-finite at t = {times[k + 1]}", times[k + 1])
        states[k + 1] = x
    return Trajectory(times, states, dt)


def _require_exact(norm: NormSpec):
    if norm.kind == "lp" and norm.p != 2 or norm.kind == "lpw" and norm.p not in (1.0, 2.0, math.inf):
        raise InputError("log norms for this exponent are only estimated from below; "
                         "use an l1, linf, (weighted) l2 or polyhedral norm for a bound")


@dataclass
class MuBound:
    b: float
    argmax: list
    spacing: list
    points: int

    def to_json(self):
        return {"b": self.b, "argmax": self.argmax, "spacing": self.spacing, "points": self.points}


def jacobian_mu_bound(vf: VectorFieldSpec, norm: NormSpec, lo, hi, resolution: int = 5,
                      t_samples=(0.0,)) -> MuBound:
    """Max of ``mu(Df(t, x))`` over a grid on the box ``[lo, hi]``.

    A certificate up to grid resolution only; ``spacing`` is reported with it.
    """
    norm.require_valid()
    _require_exact(norm)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (vf.dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (vf.dim,))
    if np.any(hi < lo):
        raise InputError("box has hi < lo")
    if vf.constant_jacobian:
        v = lognorm(norm, vf.jacobian(0.0, lo)).value
        return MuBound(v, lo.tolist(), [0.0] * vf.dim, 1)
    axes = [np.linspace(a, b, resolution) if b > a else np.array([a]) for a, b in zip(lo, hi)]
    best, arg, count = -np.inf, None, 0
    for t in t_samples:
        for pt in itertools.product(*axes):
            x = np.array(pt)
            v = lognorm(norm, vf.jacobian(t, x)).value
            count += 1
            if v > best:
                best, arg = v, x
    spacing = [float(b - a) / (resolution - 1) if resolution > 1 else 0.0 for a, b in zip(lo, hi)]
    return MuBound(float(best), arg.tolist(), spacing, count)


def osl_estimate(vf: VectorFieldSpec, pairing: PairingSpec, lo, hi, count: int = 10_000, seed: int = 0,
                 t_samples=(0.0,)) -> float:
    """Sampled one-sided Lipschitz constant ``max [[f(x) - f(y), x - y]] / ||x - y||**2``.

    Pairs with ``x == y`` are skipped.
    """
    nrm = compatible_norm(pairing)
    f = norm_function(nrm)
    g = pairing_batch(pairing)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (vf.dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (vf.dim,))
    X = sample_box(seed, lo, hi, count, stream=1)
    Y = sample_box(seed, lo, hi, count, stream=2)
    D = X - Y
    nd = f(D)
    keep = nd > 0
    best = -np.inf
    for t in t_samples:
        F = vf.f(t, X[keep]) - vf.f(t, Y[keep])
        best = max(best, float(np.max(g(F, D[keep]) / nd[keep] ** 2)))
    return best


@dataclass
class ContractionRecord:
    name: str
    passed: bool
    margin: float
    counterexample: dict | None = None
    note: str = ""

    def to_json(self):
        return {"name": self.name, "pass": self.passed, "margin": self.margin,
                "counterexample": self.counterexample, "note": self.note}


@dataclass
class ContractionReport:
    b_used: float
    records: dict = field(default_factory=dict)
    max_envelope_ratio: float = 1.0
    assumptions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records.values())

    def to_json(self):
        return {"b_used": self.b_used, "pass": self.passed, "max_envelope_ratio": self.max_envelope_ratio,
                "records": {k: r.to_json() for k, r in self.records.items()},
                "assumptions": self.assumptions}


def _equivalence_constant(norm: NormSpec, n: int) -> float:
    """Rough ratio max/min of ``||x||`` over Euclidean unit vectors (axes plus samples)."""
    f = norm_function(norm)
    U = np.vstack([np.eye(n), sample_box(0, -np.ones(n), np.ones(n), 512, stream=3)])
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    v = f(U)
    return float(v.max() / v.min())


def contraction_verify(vf: VectorFieldSpec, norm: NormSpec, x0, y0, t0: float, t1: float, dt: float,
                       b: float, *, osl_samples: int = 2000, seed: int = 0) -> ContractionReport:
    """Integrate two trajectories and test the contraction statements with rate ``b``.

    Records: ``envelope`` (``||D(t)|| <= exp(b (t - s)) ||D(s)|| (1 + tol_int)``
    for all grid pairs s <= t, ``tol_int = 100 dt**4 (t1 - t0)``),
    ``dini_decay`` (forward quotient of ``||D||`` against ``b ||D||`` plus an
    O(dt) allowance), and, on the bounding box of the trajectories,
    ``jacobian_mu`` (grid max of mu(Df) <= b) and ``one_sided_lipschitz``
    (sampled OSL constant <= b).
    """
    norm.require_valid()
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    traj = integrate(vf, np.stack([x0, y0]), t0, t1, dt)
    f = norm_function(norm)
    t = traj.times
    d = f(traj.states[:, 0] - traj.states[:, 1])
    rep = ContractionReport(float(b))
    rep.assumptions.append("the box spanned by the trajectories is taken as the region; "
                           "its forward invariance is assumed, not verified")

    tol_int = 1e2 * dt ** 4 * (t1 - t0)
    g = d * np.exp(-b * (t - t0))
    runmin = np.minimum.accumulate(g)
    ratio = np.where(runmin > 0, g / np.where(runmin > 0, runmin, 1.0), np.where(g > 0, np.inf, 1.0))
    k = int(np.argmax(ratio))
    rep.max_envelope_ratio = float(ratio[k])
    ok = ratio[k] <= 1.0 + tol_int
    cx = None
    if not ok:
        s = int(np.argmin(g[:k + 1]))
        cx = {"s": float(t[s]), "t": float(t[k]), "norm_s": float(d[s]), "norm_t": float(d[k]),
              "bound": float(np.exp(b * (t[k] - t[s])) * d[s])}
    rep.records["envelope"] = ContractionRecord("envelope", bool(ok), float(ratio[k] - 1.0), cx,
                                                f"tol_int = {tol_int:.3e}")

    n = vf.dim
    J = [vf.jacobian(tk, xk) for tk, xk in zip(t[:: max(len(t) // 50, 1)], traj.states[:: max(len(t) // 50, 1), 0])]
    L = max(np.linalg.norm(Jk, 2) for Jk in J) * _equivalence_constant(norm, n)
    allow = dt * (0.5 * (abs(b) + L) ** 2) * d[:-1] + 1e-14
    q = (d[1:] - d[:-1]) / np.diff(t)
    excess = q - b * d[:-1] - allow
    k = int(np.argmax(excess))
    ok = excess[k] <= 0
    cx = None if ok else {"t": float(t[k]), "quotient": float(q[k]), "b_norm": float(b * d[k]),
                          "allowance": float(allow[k])}
    rep.records["dini_decay"] = ContractionRecord("dini_decay", bool(ok), float(excess[k]), cx,
                                                  "allowance dt (|b| + L)^2 / 2 ||D||")

    lo = traj.states.reshape(-1, n).min(axis=0)
    hi = traj.states.reshape(-1, n).max(axis=0)
    try:
        mb = jacobian_mu_bound(vf, norm, lo, hi)
        ok = mb.b <= b + 1e-9
        rep.records["jacobian_mu"] = ContractionRecord(
            "jacobian_mu", bool(ok), float(mb.b - b), None if ok else {"x": mb.argmax, "mu": mb.b},
            f"grid spacing {mb.spacing}")
    except InputError as exc:
        rep.records["jacobian_mu"] = ContractionRecord("jacobian_mu", True, float("nan"), None,
                                                       f"skipped: {exc}")
    osl = osl_estimate(vf, _pairing_for(norm), lo, hi + (hi == lo), count=osl_samples, seed=seed)
    ok = osl <= b + 1e-8
    rep.records["one_sided_lipschitz"] = ContractionRecord(
        "one_sided_lipschitz", bool(ok), float(osl - b), None if ok else {"osl": osl}, "sampled on the box")
    return rep
