"""The acceptance suite: ten end-to-end criteria with fixed seeds and tolerances.

Each ``criterion_*`` function returns a :class:`CriterionResult`; the test
suite and the ``selftest`` command both call :func:`run_all`.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .contraction import VectorFieldSpec, contraction_verify
from .lognorm import lognorm, lognorm_limit_oracle, lumer_witness, mu_1
from .lpsolve import mu_inf, polyhedral_lognorm
from .norms import NormSpec, l1_as_polyhedral, norm_function
from .pairings import PairingSpec, ell1_jmt_closed, jmt_upper_batch, pairing_batch
from .regularity import (CURVE_TOL, almost_uniqueness_probe, check_regularity, curve_norm_check,
                         curve_suite)
from .sampling import TIE, UNIT, ZEROS, random_full_rank, random_spd, sample_atoms, sample_matrices, sample_vectors

SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    limit: float | None = None

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        lim = f" (limit {self.limit:.0f}s)" if self.limit else ""
        return f"[{mark}] {self.number:>2} {self.name}: {self.detail} [{self.elapsed:.1f}s{lim}]"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "pass": self.passed, "detail": self.detail}


def _random_mats(count, seed, dims, stream):
    out = []
    for k in range(count):
        n = dims[k % len(dims)]
        out.append(sample_matrices(seed, n, 1, stream=stream * 1000 + k)[0])
    return out


def criterion_1():
    mats = _random_mats(200, SEED, [2, 3, 4, 5, 6], 1)
    worst = {"l1": 0.0, "linf": 0.0, "l2": 0.0}
    specs = {"l1": NormSpec.l1(), "linf": NormSpec.linf(), "l2": NormSpec.lp(2.0)}
    for A in mats:
        for k, s in specs.items():
            worst[k] = max(worst[k], abs(lognorm(s, A).value - lognorm_limit_oracle(s, A)))
    ok = all(v < 1e-4 for v in worst.values())
    return ok, "max |closed - oracle| " + ", ".join(f"{k}={v:.2e}" for k, v in worst.items()) + " (tol 1e-4)"


def criterion_2():
    wa = wb = 0.0
    for k, A in enumerate(_random_mats(100, SEED, [1, 2, 3, 4, 5, 6], 2)):
        g, _, _ = polyhedral_lognorm(np.eye(A.shape[0]), A)
        wa = max(wa, abs(g - mu_inf(A)))
    for k, A in enumerate(_random_mats(100, SEED, [2, 3, 4], 3)):
        g, _, _ = polyhedral_lognorm(l1_as_polyhedral(A.shape[0]), A)
        wb = max(wb, abs(g - mu_1(A)))
    return wa <= 1e-7 and wb <= 1e-7, f"W=I: max err {wa:.2e}; W=l1 rows: max err {wb:.2e} (tol 1e-7)"


def _pairs_with(kind_atoms, count, seed, stream):
    dims = np.arange(count) % 7 + 2
    out = []
    for n in range(2, 9):
        idx = np.flatnonzero(dims == n)
        x = sample_vectors(seed, n, len(idx), stream=stream + n)
        half = len(idx) // 2
        y = np.vstack([sample_vectors(seed, n, len(idx) - half, stream=stream + 10 + n, atom_rate=0.2),
                       sample_atoms(seed, n, half, stream=stream + 20 + n, kinds=kind_atoms)])
        out.append((x, y))
    return out


def criterion_3():
    worst, ties, total, unsettled = 0.0, 0, 0, 0
    g = pairing_batch(PairingSpec.max())
    for X, Y in _pairs_with((TIE, UNIT), 10_000, SEED, 300):
        v, ok = jmt_upper_batch(NormSpec.linf(), X, Y)
        aY = np.abs(Y)
        ties += int(np.sum((aY == aY.max(axis=1, keepdims=True)).sum(axis=1) > 1))
        worst = max(worst, float(np.max(np.abs(g(X, Y) - v))))
        unsettled += int(np.sum(~ok))
        total += len(X)
    return worst < 1e-6 and unsettled == 0, (f"{total} pairs ({ties} with tied |y_i|), max |max - jmt+| "
                                             f"{worst:.2e} (tol 1e-6), unsettled {unsettled}")


def criterion_4():
    worst, zeros, total, unsettled = 0.0, 0, 0, 0
    for X, Y in _pairs_with((ZEROS, UNIT), 10_000, SEED, 400):
        v, ok = jmt_upper_batch(NormSpec.l1(), X, Y)
        c = np.array([ell1_jmt_closed(x, y) for x, y in zip(X, Y)])
        zeros += int(np.sum(np.any(Y == 0, axis=1) & np.any((Y == 0) & (X != 0), axis=1)))
        worst = max(worst, float(np.max(np.abs(c - v))))
        unsettled += int(np.sum(~ok))
        total += len(X)
    return worst < 1e-6 and unsettled == 0, (f"{total} pairs ({zeros} exercising zero coordinates), "
                                             f"max |closed - jmt+| {worst:.2e} (tol 1e-6), unsettled {unsettled}")


def positive_pairings():
    return [PairingSpec.sign(), PairingSpec.max(), PairingSpec.l2w(random_spd(SEED, 4, stream=5)),
            PairingSpec.lp(3.0), PairingSpec.poly(random_full_rank(SEED, 6, 3, stream=6)), PairingSpec.minidx()]


def criterion_5():
    fails = []
    for p in positive_pairings():
        rep = check_regularity(p, count=10_000, seed=SEED)
        if not rep.all_pass:
            fails.append(p.label + ": " + ",".join(k for k, c in rep.checks.items() if not c.passed))
    labels = ", ".join(p.label.split("(")[0] for p in positive_pairings())
    return not fails, ("all seven checks pass for " + labels) if not fails else "; ".join(fails)


def _verify_straight_angle_cx(p, cx):
    x = np.asarray(cx["x"])
    nx = float(norm_function(NormSpec.lp(2.0))(x))
    v = float(pairing_batch(p)((-x)[None], x[None])[0])
    return abs(v + nx ** 2) > 1e-9 * (1 + nx ** 2)


def _verify_second_cx(p, name, cx):
    g = pairing_batch(p)
    x, y = np.asarray(cx["x"]), np.asarray(cx["y"])
    ny = float(np.linalg.norm(y))
    if name == "partial_linearity":
        a = cx["a"]
        lhs = float(g((x + a * y)[None], y[None])[0])
        rhs = float(g(x[None], y[None])[0]) + a * ny ** 2
        return abs(lhs - rhs) > 1e-9
    # for the Euclidean norm both JMT pairings equal x^T y
    v = float(g(x[None], y[None])[0])
    return abs(v - float(x @ y)) > 1e-6


def criterion_6():
    details, ok = [], True
    for p in (PairingSpec.abssum(), PairingSpec.combo(0.0), PairingSpec.combo(0.5)):
        rep = check_regularity(p, count=10_000, seed=SEED)
        sa = rep.checks["straight_angle"]
        good = not sa.passed and sa.counterexample is not None and _verify_straight_angle_cx(p, sa.counterexample)
        second = [k for k in ("partial_linearity", "jmt_domination")
                  if not rep.checks[k].passed and _verify_second_cx(p, k, rep.checks[k].counterexample)]
        good = good and bool(second)
        ok &= good
        details.append(f"{p.label}: straight angle cx x={np.round(sa.counterexample['x'], 3).tolist() if sa.counterexample else None}, "
                       f"also fails {'+'.join(second) or 'nothing'}")
    return ok, "; ".join(details)


def criterion_7():
    mats = _random_mats(1000, SEED, [2, 3, 4, 5, 6], 7)
    g_max = pairing_batch(PairingSpec.max())
    g_sign = pairing_batch(PairingSpec.sign())
    we, wl = 0.0, -np.inf
    eps = 1e-4
    for A in mats:
        x = lumer_witness(NormSpec.linf(), A)
        we = max(we, abs(float(g_max((A @ x)[None], x[None])[0]) - mu_inf(A)))
        x = lumer_witness(NormSpec.l1(), A, epsilon=eps)
        bound = mu_1(A) - 2 * A.shape[0] * np.abs(A).max() * eps
        wl = max(wl, bound - float(g_sign((A @ x)[None], x[None])[0]))
    return we <= 1e-12 and wl <= 0, (f"linf witness max err {we:.1e} (tol 1e-12); "
                                     f"l1 witness worst shortfall vs bound {wl:.2e} (must be <= 0)")


def _curve_cases():
    cases = []
    for n in (2, 3, 4, 5):
        W = random_full_rank(SEED, n + 2, n, stream=80 + n)
        cases += [(NormSpec.l1(), PairingSpec.sign(), n), (NormSpec.lp(2.0), PairingSpec.lp(2.0), n),
                  (NormSpec.linf(), PairingSpec.max(), n), (NormSpec.poly(W), PairingSpec.poly(W), n)]
    return cases


def criterion_8():
    fw, dw, stable, pts, crossing = 0.0, 0.0, 0, 0, []
    for norm, pairing, n in _curve_cases():
        for c in curve_suite(n, SEED):
            formula, dini = curve_norm_check(norm, pairing, c)
            for r in formula:
                pts += 1
                if r["err"] is not None:
                    stable += 1
                    fw = max(fw, r["err"])
            for r in dini:
                dw = max(dw, r["err"])
                if norm.kind == "linf" and c.name == "linf_index_crossing" and abs(abs(r["t"]) - 1) < 1e-12:
                    crossing.append(r)
    cross_ok = bool(crossing) and all(r["err"] <= CURVE_TOL for r in crossing)
    t1 = [r for r in crossing if r["t"] == 1.0]
    extra = f"; at t=1 f*D+f={t1[0]['f'] * t1[0]['dini'][1]:.6f}" if t1 else ""
    return fw <= CURVE_TOL and dw <= CURVE_TOL and cross_ok, (
        f"formula max err {fw:.1e} on {stable}/{pts} stable points; Dini/JMT max err {dw:.1e} "
        f"incl. {len(crossing)} linf index crossings{extra} (tol 1e-5)")


def criterion_9():
    A = np.array([[-2.0, 1.0], [0.0, -3.0]])
    r = contraction_verify(VectorFieldSpec.linear(A), NormSpec.linf(), [1.0, 1.0], [0.0, 0.0], 0.0, 5.0, 1e-3, -1.0)
    bad = contraction_verify(VectorFieldSpec.linear([[0.0, 2.0], [0.0, 0.0]]), NormSpec.linf(),
                             [1.0, 1.0], [0.0, 0.0], 0.0, 5.0, 1e-3, -1.0)
    env = bad.records["envelope"]
    ok = r.passed and r.max_envelope_ratio <= 1 + 1e-6 and not env.passed and env.counterexample is not None
    cx = env.counterexample or {}
    return ok, (f"envelope ratio {r.max_envelope_ratio:.12f} (<= 1+1e-6); wrong b rejected at "
                f"s={cx.get('s')}, t={cx.get('t')}")


def criterion_10():
    pairs = [(PairingSpec.sign(), PairingSpec.jmt_upper(NormSpec.l1())), (PairingSpec.max(), PairingSpec.minidx())]
    ok, parts = True, []
    for p1, p2 in pairs:
        cont = almost_uniqueness_probe(p1, p2, count=10_000, seed=SEED, y_mode="continuous")
        atoms = almost_uniqueness_probe(p1, p2, count=10_000, seed=SEED, y_mode="atoms")
        ok &= cont.disagreements == 0 and atoms.disagreements > 0 and bool(atoms.examples)
        parts.append(f"{p1.label} vs {p2.label}: {cont.disagreements}/10000 continuous, "
                     f"{atoms.disagreements}/10000 on tie/zero atoms")
    return ok, "; ".join(parts)


CRITERIA = [
    (1, "closed form vs limit oracle", criterion_1, 30.0),
    (2, "polyhedral LP correctness", criterion_2, 120.0),
    (3, "max pairing is the linf upper JMT", criterion_3, 60.0),
    (4, "l1 upper JMT closed form", criterion_4, None),
    (5, "regular pairings pass all seven checks", criterion_5, None),
    (6, "irregular pairings are refuted", criterion_6, None),
    (7, "Lumer witness exactness", criterion_7, None),
    (8, "curve norm derivative and Dini relations", criterion_8, None),
    (9, "contraction end to end", criterion_9, 10.0),
    (10, "almost uniqueness of regular pairings", criterion_10, None),
]


def run_criterion(number: int) -> CriterionResult:
    num, name, fn, limit = CRITERIA[number - 1]
    t = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed criterion, reported as such
        ok, detail = False, f"error: {type(exc).__name__}: {exc}"
    el = time.perf_counter() - t
    if limit is not None and el > limit:
        ok, detail = False, detail + f"; exceeded time limit {limit:.0f}s"
    return CriterionResult(num, name, bool(ok), detail, el, limit)


def worker_count() -> int:
    env = os.environ.get("LOGNORMLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_all(numbers=None, workers: int | None = None) -> list[CriterionResult]:
    numbers = list(range(1, len(CRITERIA) + 1)) if numbers is None else list(numbers)
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(numbers) == 1:
        return [run_criterion(k) for k in numbers]
    with ProcessPoolExecutor(max_workers=min(workers, len(numbers))) as ex:
        return list(ex.map(run_criterion, numbers))
