"""Assumption suites for the two systems.

``verify_problem`` runs every sample-scale checker that applies to a problem
and collects :class:`ConditionResult` objects under stable names:

* two-parameter system: ``rho``, ``A1[i]``, ``A2``, ``A3[i]``, ``A4[i]``,
  ``A5``, ``A6``;
* symmetric system: ``gamma``, ``phi[i]``, ``F0``..``F3``, ``periodic``.

Checker parameters come from the ``assumptions`` block of a config.
"""

from dataclasses import dataclass, field

import numpy as np

from .action import ProblemT11, ProblemT12
from .config import ProblemConfig
from .exceptions import ConfigError
from .nonlinearity import (
    ConditionResult,
    check_A5,
    check_A6,
    check_F_conditions,
    check_periodicity,
    evaluate,
)
from .potentials import check_A1, check_A3, check_growth, radial_value
from .validation import check_problem

__all__ = [
    "VerificationReport",
    "check_weights",
    "check_nonlinearity_gradient",
    "check_radial_growth",
    "verify_problem",
]


@dataclass
class VerificationReport:
    system: str
    results: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.results.values())

    @property
    def failures(self):
        return [name for name, r in self.results.items() if not r.passed]

    def to_dict(self):
        return {
            "system": self.system,
            "passed": self.passed,
            "failures": self.failures,
            "checks": {name: r.to_dict() for name, r in self.results.items()},
        }


def check_weights(weights, name="rho"):
    """Every entry of every weight sequence is finite and strictly positive.

    Takes raw arrays so that invalid data can be inspected; the witness is
    the first offending ``(sequence, t)`` pair with ``t`` counted from 1.
    """
    for i, w in enumerate(weights):
        arr = np.asarray(getattr(w, "w", w), dtype=float)
        bad = np.flatnonzero(~(np.isfinite(arr) & (arr > 0)))
        if bad.size:
            j = int(bad[0])
            return ConditionResult(
                name, False, {"sequence": i + 1, "t": j + 1, "value": float(arr[j])}, (i + 1, j + 1)
            )
    mins = [float(np.min(getattr(w, "w", w))) for w in weights]
    return ConditionResult(name, True, {"minima": mins})


def check_nonlinearity_gradient(spec, T, N=2, sample_count=200, rng_seed=0, rtol=1e-6):
    """Analytic gradient of a nonlinear term against central differences."""
    rng = np.random.default_rng(rng_seed)
    worst, witness = 0.0, None
    for k in range(sample_count):
        t = int(rng.integers(1, T + 1))
        x = rng.normal(size=2 * N) * 10.0 ** rng.uniform(-1, 1)
        _, g1, g2 = evaluate(spec, t, x[:N], x[N:])
        g = np.concatenate([g1, g2])
        fd = np.empty_like(x)
        for j in range(x.size):
            h = 1e-6 * max(1.0, abs(x[j]))
            e = np.zeros_like(x)
            e[j] = h
            fp = evaluate(spec, t, (x + e)[:N], (x + e)[N:])[0]
            fm = evaluate(spec, t, (x - e)[:N], (x - e)[N:])[0]
            fd[j] = (fp - fm) / (2 * h)
        err = float(np.max(np.abs(g - fd)) / max(1.0, float(np.max(np.abs(g)))))
        if err > worst:
            worst, witness = err, (t, x[:N].copy(), x[N:].copy())
    ok = worst <= rtol
    return ConditionResult("gradient", ok, {"max_rel_err": worst}, None if ok else witness)


def check_radial_growth(spec, N=2, radii=None):
    """``s -> Phi(s e)`` strictly increasing and unbounded (coercivity surrogate)."""
    radii = np.geomspace(1e-3, 1e6, 64) if radii is None else np.asarray(radii)
    vals = np.array([float(radial_value(spec, s)) for s in radii])
    increasing = bool(np.all(np.diff(vals) > 0))
    return ConditionResult(
        "radial", increasing and vals[-1] > 1e3 * max(vals[0], 1e-300),
        {"value_at_max_radius": float(vals[-1])},
    )


def _potential_checks(results, problem, theta, l, sample_count, rng_seed):
    N = problem.N
    for i, spec in enumerate(problem.potentials, start=1):
        a1 = check_A1(spec, sample_count=sample_count, rng_seed=rng_seed, N=N)
        results[f"A1[{i}]"] = ConditionResult(
            f"A1[{i}]", a1.passed,
            {"gradient_consistency_max_err": a1.gradient_consistency_max_err,
             "strict_convexity_witnessed": a1.strict_convexity_witnessed},
            None if a1.passed else a1.worst_gradient_point,
        )
        a3 = check_A3(spec, theta, sample_count=sample_count, rng_seed=rng_seed, N=N)
        results[f"A3[{i}]"] = ConditionResult(
            f"A3[{i}]", a3.passed, {"estimate": a3.estimate, "theta": theta},
            None if a3.passed else a3.witness,
        )
        gr = check_growth(spec, l, rng_seed=rng_seed, N=N)
        rad = check_radial_growth(spec, N=N)
        results[f"A4[{i}]"] = ConditionResult(
            f"A4[{i}]", gr.upper_bounded and rad.passed and l >= theta,
            {"l": l, "d": gr.d, "m": gr.m, "upper_bounded": gr.upper_bounded,
             "coercive": rad.passed, "l_ge_theta": l >= theta},
        )


def _verify_T11(problem, assumptions, sample_count, rng_seed):
    try:
        theta = float(assumptions["theta"])
        l = float(assumptions["l"])
    except KeyError as exc:
        raise ConfigError(f"assumptions need {exc.args[0]!r}", field=f"assumptions.{exc.args[0]}") from None
    lambdas = assumptions.get("lambdas", [problem.lam if problem.lam > 0 else 1.0, 1e-2])
    results = {"rho": check_weights(problem.weights, "rho")}
    _potential_checks(results, problem, theta, l, sample_count, rng_seed)

    T, N = problem.T, problem.N
    details, ok = {}, True
    for key in ("F", "G", "H"):
        spec = getattr(problem, key)
        per = check_periodicity(spec, T, N=N, rng_seed=rng_seed)
        grad = check_nonlinearity_gradient(spec, T, N=N, rng_seed=rng_seed)
        details[key] = {"periodic": per.details, "gradient": grad.details}
        ok = ok and per.passed and grad.passed
    results["A2"] = ConditionResult("A2", ok, details)

    a5 = [check_A5(problem.F, problem.G, T, l, lam, N=N, rng_seed=rng_seed) for lam in lambdas]
    results["A5"] = ConditionResult(
        "A5", all(r.passed for r in a5), {f"lambda={lam:g}": r.details for lam, r in zip(lambdas, a5)}
    )
    results["A6"] = check_A6(problem.G, T, N=N)
    return results


def _verify_T12(problem, assumptions, sample_count, rng_seed):
    T, N = problem.T, problem.N
    q, p = float(problem.q), float(problem.p)
    results = {"gamma": check_weights(problem.weights, "gamma")}
    for i, spec in enumerate(problem.potentials, start=1):
        e = q if i in (1, 3) else p
        gr = check_growth(spec, e, rng_seed=rng_seed, N=N)
        results[f"phi[{i}]"] = ConditionResult(
            f"phi[{i}]", gr.two_sided and gr.a > 0,
            {"exponent": e, "a": gr.a, "b": gr.b, "local_exponents": gr.local_exponents},
        )
    params = {}
    which = ["periodic", "F1", "F2"]
    if "F0" in assumptions:
        params["F0"] = dict(assumptions["F0"], q=q, p=p)
        which.insert(0, "F0")
    if "F3" in assumptions:
        params["F3"] = dict(assumptions["F3"], q=q, p=p)
        which.append("F3")
    for name in ("F1", "F2", "periodic"):
        params[name] = {}
    for name in ("F0", "F2", "F3", "periodic"):
        if name in params:
            params[name].setdefault("rng_seed", rng_seed)
    results.update(check_F_conditions(problem.F, which, T, N=N, **params))
    for name in ("F0", "F3"):
        if name not in assumptions:
            results[name] = ConditionResult(name, False, {"reason": "no candidate constants supplied"})
    return results


def verify_problem(problem, assumptions=None, sample_count=1000, rng_seed=0):
    """Run the assumption suite of ``problem`` (a problem or a :class:`ProblemConfig`)."""
    if isinstance(problem, ProblemConfig):
        assumptions = problem.assumptions if assumptions is None else assumptions
    problem = check_problem(problem)
    assumptions = dict(assumptions or {})
    if isinstance(problem, ProblemT11):
        results = _verify_T11(problem, assumptions, sample_count, rng_seed)
    elif isinstance(problem, ProblemT12):
        results = _verify_T12(problem, assumptions, sample_count, rng_seed)
    return VerificationReport(problem.system, results)
