"""Command-line surface.

Exit codes: 0 = all assertions pass, 1 = a violation was found,
2 = usage/input error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import generators, io
from .counting import BaseMeasure, CountingOracle
from .dist import (GibbsDistribution, solve_stationary_lp_exact,
                   verify_stationary_lp)
from .env import EnvironmentError_
from .maxent import (solve_maxent, solve_kl_projection, dominating_base_point,
                     BoundaryDivergenceError)
from .policy import OrderStrategy, run_one_shot, run_recurring
from .rayleigh import build_witness, materialize, rayleigh_check
from .sampling import RngStream
from ._rat import rat_str


def _out(args, doc):
    text = json.dumps(doc, indent=2, default=str)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_env(args):
    return io.parse_instance(args.instance)


def _oracle(env, backend="enumeration", mode="double"):
    return CountingOracle(backend, env=env, mode=mode)


def _matroid_of(env):
    if env.kind != "matroid":
        raise EnvironmentError_("this command needs a matroid instance")
    return env.meta["matroid"]


def cmd_gen(args):
    params = json.loads(args.params) if args.params else {}
    _, _, doc = generators.gen_instance(args.name, seed=args.seed, **params)
    _out(args, doc)
    return 0


def cmd_solve_maxent(args):
    env, x, scale = _load_env(args)
    alpha = args.alpha if args.alpha is not None else 1.0
    p = alpha * np.asarray(x)
    try:
        gibbs = solve_maxent(env, _oracle(env), p, tol=args.tol)
    except BoundaryDivergenceError as exc:
        _out(args, {"status": "divergence", "detail": str(exc)})
        return 1
    _out(args, {"status": "ok", "w": list(map(float, gibbs.w)),
                "rho": list(map(float, gibbs.rho))})
    return 0


def cmd_kl_project(args):
    env, x, scale = _load_env(args)
    m = _matroid_of(env)
    mu0 = BaseMeasure.uniform_on_bases(m)
    oracle = CountingOracle("enumeration", base=mu0)
    q = dominating_base_point(m, np.asarray(x))
    w, q_used = solve_kl_projection(mu0, oracle, q, tol=args.tol)
    _out(args, {"q": list(map(float, q)), "q_used": list(map(float, q_used)),
                "w": list(map(float, w))})
    return 0


def cmd_dominate(args):
    env, x, scale = _load_env(args)
    m = _matroid_of(env)
    q = dominating_base_point(m, np.asarray(x))
    _out(args, {"q": list(map(float, q)), "sum": float(np.sum(q)),
                "rank": m.rank_total})
    return 0


def cmd_build_rayleigh(args):
    env, x, scale = _load_env(args)
    m = _matroid_of(env)
    mu0 = BaseMeasure.uniform_on_bases(m)
    witness = build_witness(m, mu0, np.asarray(x), b=scale, tol=args.tol,
                            rng=RngStream(args.seed))
    doc = witness.to_doc()
    if m.n <= 14:
        table = materialize(witness)
        doc["mu_star"] = {"+".join(map(str, sorted(S))) or "empty": float(p)
                          for S, p in sorted(table.support.items(),
                                             key=lambda kv: (len(kv[0]), sorted(kv[0])))}
    _out(args, doc)
    return 0


def cmd_run_policy(args):
    env, x, scale = _load_env(args)
    gibbs = solve_maxent(env, _oracle(env), (args.alpha or 1.0) * np.asarray(x),
                         tol=args.tol)
    rng = RngStream(args.seed)
    strategy = OrderStrategy.seeded_random()
    accepted, trace = run_one_shot(gibbs, x, strategy, rng)
    if args.trace_out:
        io.write_trace(args.trace_out, trace)
    _out(args, {"accepted": sorted(accepted), "trace_rows": len(trace)})
    return 0


def cmd_run_recurring(args):
    env, x, scale = _load_env(args)
    gibbs = solve_maxent(env, _oracle(env), (args.alpha or 1.0) * np.asarray(x),
                         tol=args.tol)
    rng = RngStream(args.seed)
    if args.replay:
        events = [(e, r, a) for (e, r, a, _) in io.read_trace(args.replay)]
    else:
        events = [(e, r, None) for r in range(args.renewals) for e in range(env.n)]
    log = run_recurring(gibbs, x, events, rng)
    if args.trace_out:
        io.write_trace(args.trace_out, log)
    freq = {}
    for (e, r, a, acc) in log:
        c = freq.setdefault(e, [0, 0])
        c[0] += int(acc)
        c[1] += 1
    _out(args, {"acceptance_frequency": {e: c[0] / c[1] for e, c in freq.items()}})
    return 0


def cmd_estimate(args):
    env, x, scale = _load_env(args)
    alpha = args.alpha
    gibbs = solve_maxent(env, _oracle(env), (alpha or 1.0) * np.asarray(x), tol=args.tol)
    config = generators.ExperimentConfig(seed=args.seed, samples=args.samples,
                                         tolerance=args.tol, alpha_target=alpha,
                                         mode=args.mode)
    rec = generators.estimate_selectability(gibbs, x, config)
    _out(args, rec.to_doc())
    if alpha is not None and rec.alpha_achieved < alpha - 3 * 0.01:
        return 1
    return 0


def cmd_verify_lp(args):
    env, x, scale = _load_env(args)
    alpha = args.alpha if args.alpha is not None else 1.0
    gibbs = solve_maxent(env, _oracle(env), alpha * np.asarray(x), tol=args.tol)
    report = verify_stationary_lp(gibbs, x, alpha)
    _out(args, report.to_doc())
    return 0 if report.passes(alpha, tol=1e-7) else 1


def cmd_lp_exact(args):
    env, x, scale = _load_env(args)
    alpha, witness = solve_stationary_lp_exact(env, x)
    _out(args, {"alpha": rat_str(alpha), "alpha_float": float(alpha),
                "support_size": len(witness.support)})
    return 0


def cmd_alpha_table(args):
    params = json.loads(args.params) if args.params else {}
    val = generators.alpha_table(args.kind, **params)
    _out(args, {"kind": args.kind, "params": params, "alpha": val})
    return 0


def cmd_barriers(args):
    report = generators.run_barriers()
    _out(args, report)
    return 0 if (report["hat_ok"] and report["k4_limit_ok"]) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="socrs",
                                description="stationary online contention resolution")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=100_000)
        sp.add_argument("--tol", type=float, default=1e-8)
        sp.add_argument("--alpha", type=float, default=None)
        sp.add_argument("--mode", choices=["exact", "mc"], default="mc")
        sp.add_argument("--out", default=None)
        if instance:
            sp.add_argument("instance", help="instance JSON file or literal document")

    sp = sub.add_parser("gen", help="emit a named instance document")
    sp.add_argument("name")
    sp.add_argument("--params", default=None, help="JSON parameter object")
    common(sp, instance=False)
    sp.set_defaults(fn=cmd_gen)

    for name, fn in [("solve-maxent", cmd_solve_maxent), ("kl-project", cmd_kl_project),
                     ("dominate", cmd_dominate), ("build-rayleigh", cmd_build_rayleigh),
                     ("verify-lp", cmd_verify_lp), ("lp-exact", cmd_lp_exact),
                     ("estimate", cmd_estimate)]:
        sp = sub.add_parser(name)
        common(sp)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("run-policy")
    common(sp)
    sp.add_argument("--trace-out", default=None)
    sp.set_defaults(fn=cmd_run_policy)

    sp = sub.add_parser("run-recurring")
    common(sp)
    sp.add_argument("--trace-out", default=None)
    sp.add_argument("--replay", default=None, help="trace file to replay")
    sp.add_argument("--renewals", type=int, default=100)
    sp.set_defaults(fn=cmd_run_recurring)

    sp = sub.add_parser("alpha-table")
    sp.add_argument("kind")
    sp.add_argument("--params", default=None)
    common(sp, instance=False)
    sp.set_defaults(fn=cmd_alpha_table)

    sp = sub.add_parser("barriers")
    common(sp, instance=False)
    sp.set_defaults(fn=cmd_barriers)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (EnvironmentError_, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:          # violations and solver failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
