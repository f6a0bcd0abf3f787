"""Command-line front end.

Every argument that takes structured data accepts either inline JSON or a
path to a JSON file.  Exit codes: 0 success, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import acceptance
from .contraction import VectorFieldSpec, contraction_verify, jacobian_mu_bound
from .errors import LognormlabError
from .lognorm import lognorm, lognorm_limit_oracle
from .lpsolve import build_polyhedral_lognorm_lp, extract_H, solve_lp
from .norms import NormSpec, norm_eval
from .pairings import PairingSpec, pairing_eval
from .regularity import check_regularity


class UsageError(Exception):
    pass


def _load(text: str, flag: str):
    """Parse inline JSON, or read the file named by ``text``."""
    src = text
    if os.path.exists(text):
        with open(text) as fh:
            src = fh.read()
        where = text
    else:
        where = "inline"
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{flag}: cannot parse JSON ({where}) at line {exc.lineno} column {exc.colno}: {exc.msg}")


def _matrix(text, flag):
    d = _load(text, flag)
    if isinstance(d, dict):
        d = d.get("A", d.get("W", d.get("matrix")))
    try:
        M = np.array(d, dtype=float)
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: expected a matrix (list of rows)")
    if M.ndim != 2:
        raise UsageError(f"{flag}: expected a matrix (list of rows), got {M.ndim}-d data")
    return M


def _vector(text, flag):
    try:
        v = np.array(_load(text, flag), dtype=float)
    except (TypeError, ValueError):
        raise UsageError(f"{flag}: expected a list of numbers")
    if v.ndim != 1:
        raise UsageError(f"{flag}: expected a list of numbers")
    return v


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for {args.command}")


def _clean(o):
    """Make a result JSON-safe: numpy to Python, non-finite floats to strings."""
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, np.ndarray):
        return _clean(o.tolist())
    if isinstance(o, (np.floating, float)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    return o


def _text(d, indent=0):
    pad = "  " * indent
    lines = []
    for k in sorted(d):
        v = d[k]
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(_text(v, indent + 1))
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines)


def cmd_norm(args):
    _need(args, "norm", "x")
    spec = NormSpec.from_json(_load(args.norm, "--norm"))
    return {"value": norm_eval(spec, _vector(args.x, "--x"))}, 0


def cmd_pairing(args):
    _need(args, "pairing", "x", "y")
    spec = PairingSpec.from_json(_load(args.pairing, "--pairing"))
    return {"value": pairing_eval(spec, _vector(args.x, "--x"), _vector(args.y, "--y"))}, 0


def cmd_lognorm(args):
    _need(args, "norm", "matrix")
    spec = NormSpec.from_json(_load(args.norm, "--norm"))
    A = _matrix(args.matrix, "--matrix")
    res = lognorm(spec, A, samples=args.samples, seed=args.seed).to_json()
    if args.oracle:
        res["oracle"] = lognorm_limit_oracle(spec, A, seed=args.seed)
    return res, 0


def cmd_polylp(args):
    _need(args, "W", "A")
    W = _matrix(args.W, "--W")
    A = _matrix(args.A, "--A")
    lp = build_polyhedral_lognorm_lp(W, A)
    sol = solve_lp(lp)
    out = {"status": sol.status, "iterations": sol.iterations, "variables": lp.nvars}
    if sol.status == "optimal":
        H, gamma = extract_H(lp, sol, lp.meta["m"], tol=args.tol if args.tol is not None else 1e-7)
        out.update(gamma=gamma, H=H)
    if args.export_lp:
        with open(args.export_lp, "w") as fh:
            fh.write(lp.dumps())
    return out, 0 if sol.status == "optimal" else 1


def cmd_regularity(args):
    _need(args, "pairing")
    spec = PairingSpec.from_json(_load(args.pairing, "--pairing"))
    kw = {} if args.tol is None else {"alg_tol": args.tol}
    rep = check_regularity(spec, count=args.samples, seed=args.seed, n=args.dim, **kw)
    return rep, 0 if rep.all_pass else 1


def cmd_contract(args):
    _need(args, "system", "norm", "x0", "y0")
    vf = VectorFieldSpec.from_json(_load(args.system, "--system"))
    norm = NormSpec.from_json(_load(args.norm, "--norm"))
    x0, y0 = _vector(args.x0, "--x0"), _vector(args.y0, "--y0")
    b = args.b
    if b is None:
        lo = np.minimum(x0, y0) - 1.0
        hi = np.maximum(x0, y0) + 1.0
        b = jacobian_mu_bound(vf, norm, lo, hi).b
    rep = contraction_verify(vf, norm, x0, y0, args.t0, args.t1, args.dt, b, seed=args.seed)
    return rep, 0 if rep.passed else 1


def cmd_selftest(args):
    nums = args.only or None
    results = acceptance.run_all(nums)
    out = {"criteria": [r.to_json() for r in results], "all_pass": all(r.passed for r in results)}
    out["_lines"] = [r.line() for r in results]
    return out, 0 if out["all_pass"] else 1


HELP = {
    "norm": "Evaluate a vector norm (l1, linf, lp, weighted lp, polyhedral max norm ||Wx||_inf).",
    "pairing": "Evaluate a weak pairing [[x, y]], including the numeric upper/lower JMT pairings.",
    "lognorm": "Logarithmic norm mu(A): closed forms for l1/linf/weighted l2, the LP of the polyhedral "
               "log-norm characterization, and a sampled lower bound from Lumer's property for other p.",
    "polylp": "Solve the polyhedral log-norm LP: minimize mu_inf(H) subject to WA = HW "
              "(the LP form of the polyhedral log-norm characterization).",
    "regularity": "Run the Characterization Theorem checks for regular pairings (straight angle, partial "
                  "linearity, JMT domination, one-sided Lumer inequality, curve norm derivative, affine curve "
                  "norm derivative, Lumer's property), plus weak-pairing axioms and LG representability.",
    "contract": "Contraction Criteria for C1-smooth vector fields: integrate two trajectories and check the "
                "exponential envelope, Dini decay, Jacobian log-norm bound and one-sided Lipschitz condition.",
    "selftest": "Run the acceptance suite and print a pass/fail matrix.",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lognormlab", description="Weak pairings, log norms and contraction checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="seed for every random draw (default 0)")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--tol", type=float, help="override the command's main tolerance")
        p.add_argument("--samples", type=int, default=10_000, help="sample count (default 10000)")

    handlers = {}
    for name, fn in [("norm", cmd_norm), ("pairing", cmd_pairing), ("lognorm", cmd_lognorm),
                     ("polylp", cmd_polylp), ("regularity", cmd_regularity), ("contract", cmd_contract),
                     ("selftest", cmd_selftest)]:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        common(p)
        p.set_defaults(handler=fn)
        handlers[name] = p
    handlers["norm"].add_argument("--norm", help="norm spec JSON or file")
    handlers["norm"].add_argument("--x", help="vector JSON or file")
    handlers["pairing"].add_argument("--pairing", help="pairing spec JSON or file")
    handlers["pairing"].add_argument("--x")
    handlers["pairing"].add_argument("--y")
    handlers["lognorm"].add_argument("--norm")
    handlers["lognorm"].add_argument("--matrix", help="square matrix JSON or file")
    handlers["lognorm"].add_argument("--oracle", action="store_true", help="also report the limit-definition oracle")
    handlers["polylp"].add_argument("--W", help="m x n full column rank matrix")
    handlers["polylp"].add_argument("--A", help="n x n matrix")
    handlers["polylp"].add_argument("--export-lp", help="also write the LP in JSON form to this path")
    handlers["regularity"].add_argument("--pairing")
    handlers["regularity"].add_argument("--dim", type=int, help="dimension when the pairing does not fix it (default 4)")
    c = handlers["contract"]
    c.add_argument("--system", help='e.g. {"kind":"linear","A":[[...]]}')
    c.add_argument("--norm")
    c.add_argument("--x0")
    c.add_argument("--y0")
    c.add_argument("--t0", type=float, default=0.0)
    c.add_argument("--t1", type=float, default=5.0)
    c.add_argument("--dt", type=float, default=1e-3)
    c.add_argument("--b", type=float, help="contraction rate; default: grid bound of mu(Df) on a box around x0, y0")
    handlers["selftest"].add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        result, code = args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LognormlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    lines = None
    if isinstance(result, dict):
        lines = result.pop("_lines", None)
    if hasattr(result, "to_json"):
        payload = result.to_json()
        table = result.table() if hasattr(result, "table") else None
    else:
        payload, table = result, None
    payload = _clean(payload)
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True, indent=2)
    else:
        text = "\n".join(lines) if lines else (table or _text(payload))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


def main():
    sys.exit(run())
