"""Command line entry point.

Subcommands::

    philap verify    CONFIG
    philap solve     CONFIG [--preset desk] [--mu M] [--lambda L] [--nu V] ...
    philap ricceri   CONFIG --r R [R ...] [--mu M ...]
    philap reproduce {example51,example52}
    philap sweep     CONFIG --param {mu,lambda,nu} --values V [V ...]

CONFIG is a JSON file or a built-in name (example51, example52,
example52_desk, remark11). Exit status: 0 success, 1 failed check, 2 usage
or configuration error. ``PHILAP_THREADS`` and ``PHILAP_OUTPUT_DIR`` set the
defaults of ``--threads`` and ``--out``.

Solution CSV columns: index, pair_index, phase, start_index, iterations,
action, grad_inf, residual_inf, sup_norm, then the flat coordinates x0..
(u1 for t = 1..T, then u2), all reals with 17 significant digits.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .action import ProblemT11
from .config import ProblemConfig, dump_config, load_config
from .exceptions import ConfigError, InvalidParameterError
from .ricceri import example51_oracle, ricceri_report
from .solve import SolverConfig, count_pairs, find_critical_points
from .verify import verify_problem

logger = logging.getLogger("philap")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SOLUTION_COLUMNS = [
    "index", "pair_index", "phase", "start_index", "iterations",
    "action", "grad_inf", "residual_inf", "sup_norm",
]


# --------------------------------------------------------------------------
# output helpers


def _fmt(x):
    return format(float(x), ".17g")


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def write_json(path, doc):
    write_atomic(path, json.dumps(doc, indent=2, default=_json_default, allow_nan=True) + "\n")


def solutions_csv(points):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = points[0].u.size if points else 0
    w.writerow(SOLUTION_COLUMNS + [f"x{k}" for k in range(n)])
    for i, p in enumerate(points):
        w.writerow(
            [i, p.pair_index, p.phase, p.start_index, p.iterations,
             _fmt(p.action), _fmt(p.grad_inf), _fmt(p.residual_inf), _fmt(p.sup_norm)]
            + [_fmt(v) for v in p.u.flat()]
        )
    return buf.getvalue()


def grid_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# config resolution


def _resolve(args):
    cfg = load_config(args.config)
    problem = cfg.problem
    if getattr(args, "preset", None) == "desk" and problem.N != 1:
        problem = problem.with_params(N=1)
    changes = {}
    for flag, name in (("mu", "mu"), ("lam", "lam"), ("nu", "nu")):
        val = getattr(args, flag, None)
        if val is not None:
            if not isinstance(problem, ProblemT11):
                raise ConfigError(f"--{'lambda' if flag == 'lam' else flag} applies to T11 problems only")
            changes[name] = val
    if changes:
        problem = problem.with_params(**changes)
    cfg = replace(cfg, problem=problem)
    if getattr(args, "dump_config", None):
        dump_config(cfg, args.dump_config)
    return cfg


def _threads(args):
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("PHILAP_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"PHILAP_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ConfigError("PHILAP_THREADS must be >= 1")
        return n
    return 1


def _out_dir(args):
    out = args.out or os.environ.get("PHILAP_OUTPUT_DIR") or "philap_out"
    return Path(out)


def _solver_config(cfg, args):
    settings = dict(cfg.solver)
    settings.setdefault("even_symmetry", cfg.problem.is_even())
    for flag, key in (("starts", "start_count"), ("start_radius", "start_radius"), ("seed", "rng_seed")):
        val = getattr(args, flag, None)
        if val is not None:
            settings[key] = val
    if getattr(args, "no_deflation", False):
        settings["deflation"] = False
    settings["threads"] = _threads(args)
    return SolverConfig.from_dict(settings)


# --------------------------------------------------------------------------
# subcommands


def cmd_verify(args):
    cfg = _resolve(args)
    report = verify_problem(cfg, sample_count=args.samples, rng_seed=args.seed or 0)
    out = _out_dir(args)
    doc = {"config": cfg.name or str(args.config), **report.to_dict()}
    write_json(out / "verify_report.json", doc)
    for name, res in report.results.items():
        print(f"{'PASS' if res.passed else 'FAIL'}  {name}")
    return EXIT_OK if report.passed else EXIT_FAIL


def run_solve(cfg, scfg):
    t0 = time.perf_counter()
    points, log = find_critical_points(cfg.problem, scfg, return_log=True)
    elapsed = time.perf_counter() - t0
    manifest = {
        "config": cfg.to_dict(),
        "solver": scfg.to_dict(),
        "seed": scfg.rng_seed,
        "counts": {
            "points": len(points),
            "distinct_pairs": count_pairs(points, scfg.dedup_tol) if scfg.even_symmetry else None,
            "trivial_found": any(p.sup_norm == 0.0 for p in points),
            "nonconvergent_starts": sum(1 for e in log if e["status"] != "converged"),
        },
        "distance": "sup-norm, identified with the mirror point" if scfg.even_symmetry else "sup-norm",
        "dedup_tol": scfg.dedup_tol,
        "elapsed_seconds": elapsed,
        "log": log,
        "version": __version__,
    }
    return points, manifest


def cmd_solve(args):
    cfg = _resolve(args)
    scfg = _solver_config(cfg, args)
    points, manifest = run_solve(cfg, scfg)
    out = _out_dir(args)
    write_atomic(out / "solutions.csv", solutions_csv(points))
    write_json(out / "manifest.json", manifest)
    c = manifest["counts"]
    print(f"{c['points']} critical points", end="")
    if c["distinct_pairs"] is not None:
        print(f", {c['distinct_pairs']} distinct nonzero pairs", end="")
    print(f" -> {out}")
    return EXIT_OK


def _positive_list(values, name):
    for v in values:
        if not (np.isfinite(v) and v > 0):
            raise InvalidParameterError(f"{name} must be positive, got {v}")
    return values


def cmd_ricceri(args):
    cfg = _resolve(args)
    if not isinstance(cfg.problem, ProblemT11):
        raise ConfigError("ricceri needs a T11 problem")
    rs = _positive_list(args.r or [cfg.estimator.get("r", 1.0)], "r")
    mus = _positive_list(args.mu_grid or [cfg.problem.mu], "mu")
    seed = args.seed or 0
    reports, rows = [], []
    for r in rs:
        for mu in mus:
            rep = ricceri_report(cfg.problem, r, mu, rng_seed=seed)
            reports.append(rep.to_dict())
            rows.append([r, mu, rep.gamma_est, rep.eta_est, rep.mu_star_est, rep.beta_est,
                         int(rep.beta_est > 0)])
            print(
                f"r={r:g} mu={mu:g}: gamma={rep.gamma_est:.10g} eta={rep.eta_est:.10g} "
                f"mu*={rep.mu_star_est:.10g} beta={rep.beta_est:.10g}"
            )
    out = _out_dir(args)
    write_json(out / "ricceri_report.json", reports[0] if len(reports) == 1 else reports)
    write_atomic(
        out / "ricceri_grid.csv",
        grid_csv(["r", "mu", "gamma_est", "eta_est", "mu_star_est", "beta_est", "lambda_interval_nonempty"], rows),
    )
    return EXIT_OK


def _reproduce_example51(args, out):
    cfg = load_config("example51")
    r, seed = 1.0, args.seed if args.seed is not None else 42
    rho = cfg.problem.weights
    oracle = example51_oracle(rho[2].w, rho[3].w, r, 2.0)
    rep = ricceri_report(cfg.problem, r, 2.0, rng_seed=seed)
    mu_demo = 1.1 * oracle["mu_threshold"]
    beta_demo = ricceri_report(cfg.problem.with_params(mu=mu_demo), r, mu_demo, rng_seed=seed).beta_est
    problem = cfg.problem.with_params(mu=mu_demo, lam=0.5 * beta_demo, nu=0.0)
    scfg = SolverConfig(start_count=16, rng_seed=seed, even_symmetry=problem.is_even(), threads=_threads(args))
    points, manifest = run_solve(ProblemConfig(problem, name="example51_demo"), scfg)
    checks = {
        "gamma": abs(rep.gamma_est - oracle["gamma"]) <= 1e-6,
        "eta_lower": rep.eta_est >= oracle["eta_lower"] - 1e-8,
        "mu_star_upper": rep.mu_star_est <= oracle["mu_star_upper"] + 1e-8,
        "beta_lower": rep.beta_est >= oracle["beta_lower"] - 1e-6,
        "three_solutions": len(points) >= 3 and any(p.sup_norm == 0.0 for p in points),
    }
    write_json(out / "example51.json", {
        "report": rep.to_dict(), "oracle": oracle, "checks": checks,
        "demo": {"mu": mu_demo, "lambda": 0.5 * beta_demo, "nu": 0.0, "seed": seed, "points": len(points)},
    })
    write_atomic(out / "example51_solutions.csv", solutions_csv(points))
    return checks


def _reproduce_example52(args, out):
    cfg = load_config("example52_desk")
    seed = args.seed if args.seed is not None else 42
    report = verify_problem(cfg)
    scfg = SolverConfig(start_count=16, rng_seed=seed, even_symmetry=True, threads=_threads(args))
    points, manifest = run_solve(cfg, scfg)
    nonzero = [p for p in points if p.sup_norm > 10 * scfg.dedup_tol]
    checks = {
        "assumptions": report.passed,
        "three_pairs": manifest["counts"]["distinct_pairs"] >= 3,
        "negative_action": all(p.action < 0 for p in nonzero),
        "trivial_found": manifest["counts"]["trivial_found"],
    }
    write_json(out / "example52.json", {"verify": report.to_dict(), "manifest": manifest, "checks": checks})
    write_atomic(out / "example52_solutions.csv", solutions_csv(points))
    return checks


def cmd_reproduce(args):
    out = _out_dir(args)
    fn = {"example51": _reproduce_example51, "example52": _reproduce_example52}[args.target]
    checks = fn(args, out)
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {args.target}.{name}")
    return EXIT_OK if all(checks.values()) else EXIT_FAIL


def cmd_sweep(args):
    cfg = _resolve(args)
    if not isinstance(cfg.problem, ProblemT11):
        raise ConfigError("sweep varies mu, lambda or nu and needs a T11 problem")
    key = {"mu": "mu", "lambda": "lam", "nu": "nu"}[args.param]
    rows = []
    for v in args.values:
        problem = cfg.problem.with_params(**{key: v})
        scfg = _solver_config(replace(cfg, problem=problem), args)
        points = find_critical_points(problem, scfg)
        rows.append([
            v, len(points),
            count_pairs(points, scfg.dedup_tol) if scfg.even_symmetry else "",
            min((p.action for p in points), default=float("nan")),
            max((p.residual_inf for p in points), default=float("nan")),
        ])
        print(f"{args.param}={v:g}: {len(points)} points")
    write_atomic(
        _out_dir(args) / "sweep.csv",
        grid_csv([args.param, "points", "distinct_pairs", "min_action", "max_residual_inf"], rows),
    )
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _common(p, config=True):
    if config:
        p.add_argument("config", help="JSON config file or built-in name")
        p.add_argument("--dump-config", metavar="PATH", help="write the resolved config as JSON")
    p.add_argument("--out", help="output directory (default $PHILAP_OUTPUT_DIR or ./philap_out)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)


def _scalars(p):
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)


def _solver_flags(p):
    p.add_argument("--preset", choices=["desk"], default=None, help="desk: spatial dimension N = 1")
    p.add_argument("--starts", type=int, default=None)
    p.add_argument("--start-radius", type=float, default=None)
    p.add_argument("--no-deflation", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="philap", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the assumption suite")
    _common(p)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="find critical points")
    _common(p)
    _scalars(p)
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ricceri", help="estimate gamma, eta_r, mu*, beta")
    _common(p)
    p.add_argument("--r", type=float, nargs="+", default=None)
    p.add_argument("--mu", dest="mu_grid", type=float, nargs="+", default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    p.set_defaults(func=cmd_ricceri)

    p = sub.add_parser("reproduce", help="rerun a worked example end to end")
    p.add_argument("target", choices=["example51", "example52"])
    _common(p, config=False)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("sweep", help="solve over a grid of one scalar parameter")
    _common(p)
    _scalars(p)
    _solver_flags(p)
    p.add_argument("--param", choices=["mu", "lambda", "nu"], required=True)
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"philap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
