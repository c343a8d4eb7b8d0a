"""Sampling estimators for the quantities of the three-critical-point theorem.

For a two-parameter problem with ``I`` (the weighted potential part),
``Psi = -sum F`` and ``PhiG = sum G`` these are::

    gamma   = inf_E (Psi + PhiG)
    eta_r   = inf { I(u) : PhiG(u) = r }
    mu*     = inf { (Psi(u) - gamma + r) / (eta_r - I(u)) : PhiG(u) < r, I(u) < eta_r }
    beta(mu)= sup { (inner - mu I(u) - Psi(u)) / (PhiG(u) - r) : PhiG(u) > r }
    inner   = inf { mu I(u) + Psi(u) : PhiG(u) <= r }

Local search can only see one side of an extremum, so every estimate is
one-sided: infima are estimated from above, suprema from below. ``beta``
inherits the side of ``inner`` as well, which is why ``u = 0`` is always
among the inner candidates.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize
from sklearn.base import BaseEstimator

from .action import I_gradient, ProblemT11, coerce_state, component_values
from .exceptions import InvalidParameterError
from .nonlinearity import evaluate
from .periodic import as_sequence, et_norm, r_norm, sup_norm, weighted_norm
from .validation import check_positive, check_problem, check_seed

__all__ = [
    "Estimate",
    "RicceriReport",
    "estimate_gamma",
    "estimate_eta",
    "estimate_mu_star",
    "estimate_beta",
    "example51_oracle",
    "estimate_equivalence_constants",
    "ricceri_report",
    "RicceriEstimator",
]

GAMMA_51 = -27.0 / 64.0


@dataclass
class Estimate:
    """A one-sided estimate together with the point that realises it."""

    value: float
    side: str
    point: np.ndarray = None
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


class _Parts:
    """Values and flat gradients of ``I``, ``Psi`` and ``PhiG``."""

    def __init__(self, problem):
        if not isinstance(problem, ProblemT11):
            raise InvalidParameterError("Ricceri quantities are defined for the two-parameter system")
        self.problem = problem
        self.t = problem.t

    def _state(self, x):
        return coerce_state(self.problem, x)

    def I(self, x):
        return component_values(self.problem, x)[0]

    def I_grad(self, x):
        return I_gradient(self.problem, x)

    def _nl(self, spec, x):
        u = self._state(x)
        v, d1, d2 = evaluate(spec, self.t, u.u1, u.u2)
        return float(np.sum(v)), np.concatenate([d1.ravel(), d2.ravel()])

    def psi(self, x):
        return -self._nl(self.problem.F, x)[0]

    def psi_grad(self, x):
        return -self._nl(self.problem.F, x)[1]

    def G(self, x):
        return self._nl(self.problem.G, x)[0]

    def G_grad(self, x):
        return self._nl(self.problem.G, x)[1]


def _rng(seed, *stream):
    return np.random.default_rng(np.random.SeedSequence([check_seed(seed), *stream]))


def _directions(n, count, rng):
    """Structured directions (constants, coordinates, sign patterns) then random ones."""
    dirs = [np.ones(n), -np.ones(n)]
    dirs.extend(np.eye(n))
    if n <= 10:
        signs = np.array(np.meshgrid(*[[-1.0, 1.0]] * n)).reshape(n, -1).T
        dirs.extend(signs)
    z = rng.normal(size=(max(count - len(dirs), 0), n))
    dirs.extend(z)
    dirs = np.array(dirs[: max(count, 2 + n)], dtype=float)
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def _ray_hit(fun, d, level, s_max=1e6):
    """Smallest-bracket root ``s > 0`` of ``fun(s d) = level`` or None."""
    hi = 1.0
    while fun(hi * d) < level:
        hi *= 2.0
        if hi > s_max:
            return None
    lo = 0.0
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        if fun(mid * d) < level:
            lo = mid
        else:
            hi = mid
    return brentq(lambda s: fun(s * d) - level, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


# --------------------------------------------------------------------------
# gamma


def estimate_gamma(problem, n_starts=24, start_radius=2.0, rng_seed=0, unbounded_level=-1e12):
    """Upper estimate of ``inf (Psi + PhiG)`` by multi-start BFGS."""
    problem = check_problem(problem)
    parts = _Parts(problem)
    n = problem.size
    f = lambda x: parts.psi(x) + parts.G(x)
    g = lambda x: parts.psi_grad(x) + parts.G_grad(x)
    rng = _rng(rng_seed, 11)
    starts = [np.zeros(n)]
    for d in _directions(n, n_starts, rng):
        starts.append(d * start_radius * rng.uniform(0.1, 1.0) * np.sqrt(n))
    best_val, best_x = f(starts[0]), starts[0]
    unbounded = False
    for x0 in starts:
        res = minimize(f, x0, jac=g, method="BFGS", options={"gtol": 1e-11, "maxiter": 2000})
        if not np.isfinite(res.fun) or res.fun < unbounded_level:
            unbounded = True
            continue
        if res.fun < best_val:
            best_val, best_x = float(res.fun), res.x
    if unbounded:
        return Estimate(-np.inf, "upper", None, {"unbounded": True, "starts": len(starts)})
    return Estimate(best_val, "upper", best_x, {"unbounded": False, "starts": len(starts)})


# --------------------------------------------------------------------------
# eta_r


def _project(parts, x, r):
    """Radial rescaling of ``x`` onto ``PhiG = r`` (None if the ray misses it)."""
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return None
    s = _ray_hit(parts.G, x / nx, r)
    return None if s is None else s * x / nx


def _level_set_objective(parts, r):
    """``d -> I(P(d))`` with ``P`` the radial projection onto ``PhiG = r``.

    The gradient follows from ``PhiG(s(d) d) = r`` by implicit
    differentiation; ``d`` is left unnormalised, so the objective is
    constant along rays.
    """

    def point(d):
        nd = float(np.linalg.norm(d))
        s = _ray_hit(parts.G, d / nd, r)
        return s / nd

    def fun(d):
        s = point(d)
        x = s * d
        gI, gG = parts.I_grad(x), parts.G_grad(x)
        ds = -s * gG / float(gG @ d)
        return parts.I(x), s * gI + float(gI @ d) * ds

    return fun, point


def estimate_eta(problem, r, n_starts=16, rng_seed=0, stages=6, kappa0=None):
    """Upper estimate of ``inf { I : PhiG = r }``.

    Each start runs a quadratic-penalty continuation ``I + kappa (PhiG - r)^2``
    (kappa x10 per stage, starting from ``kappa0 = 1/r`` by default) and is
    then refined on the level set itself through the radial projection, so
    every returned point is feasible to rounding.
    """
    problem = check_problem(problem)
    r = check_positive(r, "r")
    parts = _Parts(problem)
    n = problem.size
    rng = _rng(rng_seed, 13)
    kappa0 = 1.0 / r if kappa0 is None else check_positive(kappa0, "kappa0")
    reduced, scale_of = _level_set_objective(parts, r)

    best_val, best_x, hits = np.inf, None, 0
    for d in _directions(n, n_starts, rng):
        x = _project(parts, d, r)
        if x is None:
            continue
        hits += 1
        kappa = kappa0
        for _ in range(stages):

            def f(y, k=kappa):
                c = parts.G(y) - r
                return parts.I(y) + k * c * c

            def g(y, k=kappa):
                c = parts.G(y) - r
                return parts.I_grad(y) + 2.0 * k * c * parts.G_grad(y)

            x = minimize(f, x, jac=g, method="BFGS", options={"gtol": 1e-8, "maxiter": 200}).x
            kappa *= 10.0
        if not np.any(x) or not np.all(np.isfinite(x)):
            x = _project(parts, d, r)
        res = minimize(reduced, x / np.linalg.norm(x), jac=True, method="BFGS",
                       options={"gtol": 1e-12, "maxiter": 500})
        for y in (x, res.x):
            yp = _project(parts, y, r) if np.all(np.isfinite(y)) else None
            if yp is None:
                continue
            val = parts.I(yp)
            if val < best_val:
                best_val, best_x = val, yp
    if best_x is None:
        raise InvalidParameterError(f"level set PhiG = {r} is not reached along any sampled ray")
    violation = abs(parts.G(best_x) - r)
    return Estimate(
        float(best_val), "upper", best_x,
        {"constraint_violation": violation, "feasible_rays": hits, "stages": stages},
    )


# --------------------------------------------------------------------------
# mu*


def estimate_mu_star(problem, r, gamma=None, eta=None, n_samples=400, n_refine=6, rng_seed=0):
    """Upper estimate of ``mu*``: the smallest sampled ratio over the feasible
    region ``{PhiG < r, I < eta}``, which always contains ``u = 0``."""
    problem = check_problem(problem)
    r = check_positive(r, "r")
    parts = _Parts(problem)
    gamma = float(estimate_gamma(problem, rng_seed=rng_seed)) if gamma is None else float(gamma)
    eta = float(estimate_eta(problem, r, rng_seed=rng_seed)) if eta is None else float(eta)
    n = problem.size

    def feasible(x):
        return parts.G(x) < r and parts.I(x) < eta

    def ratio(x):
        return (parts.psi(x) - gamma + r) / (eta - parts.I(x))

    x0 = np.zeros(n)
    if not feasible(x0):
        raise InvalidParameterError("u = 0 is not in the feasible region; check PhiG(0) and I(0)")
    cands = [(ratio(x0), x0)]
    rng = _rng(rng_seed, 17)
    dirs = _directions(n, max(n_samples // 8, 2 * n + 2), rng)
    for d in dirs:
        # exit radius along the ray, then a few interior samples
        sg = _ray_hit(parts.G, d, r)
        si = _ray_hit(parts.I, d, eta)
        s_exit = min(v for v in (sg, si, 1e6) if v is not None)
        for frac in rng.uniform(0.0, 1.0, size=8):
            x = frac * s_exit * d
            if feasible(x):
                cands.append((ratio(x), x))
    cands.sort(key=lambda c: c[0])
    best_val, best_x = cands[0]

    cons = [
        {"type": "ineq", "fun": lambda x: r * (1 - 1e-9) - parts.G(x), "jac": lambda x: -parts.G_grad(x)},
        {"type": "ineq", "fun": lambda x: eta * (1 - 1e-9) - parts.I(x), "jac": lambda x: -parts.I_grad(x)},
    ]
    for _, x in cands[:n_refine]:
        res = minimize(ratio, x, method="SLSQP", constraints=cons, options={"ftol": 1e-14, "maxiter": 300})
        if np.all(np.isfinite(res.x)) and feasible(res.x):
            v = ratio(res.x)
            if v < best_val:
                best_val, best_x = v, res.x
    return Estimate(
        float(best_val), "upper", best_x,
        {"gamma": gamma, "eta": eta, "ratio_at_zero": float(ratio(x0)), "samples": len(cands)},
    )


# --------------------------------------------------------------------------
# beta


def _inner_inf(parts, mu, r, rng, n_starts):
    n = parts.problem.size
    f = lambda x: mu * parts.I(x) + parts.psi(x)
    g = lambda x: mu * parts.I_grad(x) + parts.psi_grad(x)
    x0 = np.zeros(n)
    best_val, best_x = f(x0), x0
    cons = [{"type": "ineq", "fun": lambda x: r - parts.G(x), "jac": lambda x: -parts.G_grad(x)}]
    starts = [x0]
    for d in _directions(n, n_starts, rng):
        s = _ray_hit(parts.G, d, r)
        if s is not None:
            starts.append(rng.uniform(0.2, 1.0) * s * d)
    for x in starts:
        res = minimize(f, x, jac=g, method="SLSQP", constraints=cons, options={"ftol": 1e-14, "maxiter": 500})
        if np.all(np.isfinite(res.x)) and parts.G(res.x) <= r:
            v = f(res.x)
            if v < best_val:
                best_val, best_x = v, res.x
    return float(best_val), best_x


def estimate_beta(problem, mu, r, n_dirs=64, n_refine=6, rng_seed=0, scale_range=(1.0, 1e3), scale_points=60):
    """Lower estimate of ``beta(mu I + Psi, PhiG, r)``.

    Outer samples sit on rays from the origin beyond the level set, on a
    geometric grid from the hitting radius to ``scale_range[1]`` times it.
    """
    problem = check_problem(problem)
    mu = check_positive(mu, "mu")
    r = check_positive(r, "r")
    parts = _Parts(problem)
    n = problem.size
    rng = _rng(rng_seed, 19)
    inner, inner_x = _inner_inf(parts, mu, r, rng, n_starts=2 * n + 4)

    def ratio(x):
        return (inner - mu * parts.I(x) - parts.psi(x)) / (parts.G(x) - r)

    cands = []
    lo, hi = scale_range
    grid = np.geomspace(1.0 + 1e-6, hi, scale_points) if lo <= 1.0 else np.geomspace(lo, hi, scale_points)
    for d in _directions(n, n_dirs, rng):
        s = _ray_hit(parts.G, d, r)
        if s is None:
            continue
        for k in grid:
            x = k * s * d
            if parts.G(x) > r:
                cands.append((ratio(x), x))
    if not cands:
        return Estimate(-np.inf, "lower", None, {"inner_inf": inner, "inner_point": inner_x, "outer_samples": 0})
    cands.sort(key=lambda c: -c[0])
    best_val, best_x = cands[0]
    cons = [{"type": "ineq", "fun": lambda x: parts.G(x) - r * (1 + 1e-9), "jac": lambda x: parts.G_grad(x)}]
    for _, x in cands[:n_refine]:
        res = minimize(lambda y: -ratio(y), x, method="SLSQP", constraints=cons, options={"ftol": 1e-14, "maxiter": 300})
        if np.all(np.isfinite(res.x)) and parts.G(res.x) > r:
            v = ratio(res.x)
            if v > best_val:
                best_val, best_x = v, res.x
    return Estimate(
        float(best_val), "lower", best_x,
        {
            "inner_inf": inner,
            "inner_point": inner_x,
            "outer_samples": len(cands),
            "admissible_lambda": [0.0, float(best_val)] if best_val > 0 else None,
        },
    )


# --------------------------------------------------------------------------
# closed forms and reports


def example51_oracle(rho3, rho4, r, mu):
    """Closed-form bounds for the T = 2 two-parameter example.

    With ``m = min(rho3, rho4)`` and ``S = sum(rho3) + sum(rho4)``: gamma =
    -27/64, eta_r >= m sqrt(r), mu* <= (27/64 + r) / (m sqrt(r)),
    beta >= 3 mu^3 S^3 / (4 mu^4 S^4 - r), and the admissible mu must exceed
    max{(27/64 + r)/sqrt(r), r^(1/4)} / m.
    """
    rho3 = np.asarray(rho3, dtype=float).ravel()
    rho4 = np.asarray(rho4, dtype=float).ravel()
    if np.any(rho3 <= 0) or np.any(rho4 <= 0):
        raise InvalidParameterError("weights must be positive")
    r = check_positive(r, "r")
    mu = check_positive(mu, "mu")
    m = float(min(rho3.min(), rho4.min()))
    S = float(rho3.sum() + rho4.sum())
    sr = np.sqrt(r)
    return {
        "gamma": GAMMA_51,
        "eta_lower": m * sr,
        "mu_star_upper": (-GAMMA_51 + r) / (m * sr),
        "beta_lower": 3.0 * mu**3 * S**3 / (4.0 * mu**4 * S**4 - r),
        "mu_threshold": max((-GAMMA_51 + r) / sr, r**0.25) / m,
    }


def _ratio_extremes(fun, dim, sample_count, rng, refine):
    z = rng.normal(size=(sample_count, dim))
    z *= 10.0 ** rng.uniform(-2, 2, size=(sample_count, 1))
    vals = np.array([fun(v) for v in z])
    lo, hi = float(vals.min()), float(vals.max())
    if refine:
        for sign in (1.0, -1.0):
            order = np.argsort(sign * vals)[:3]
            for j in order:
                res = minimize(lambda v: sign * fun(v), z[j], method="Nelder-Mead",
                               options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
                if np.all(np.isfinite(res.x)) and np.any(res.x):
                    v = fun(res.x)
                    lo, hi = min(lo, v), max(hi, v)
    return lo, hi


def estimate_equivalence_constants(T, N, exponents, weights=None, sample_count=10000, rng_seed=0, refine=True):
    """Sampled equivalence constants between the norms used in the theory.

    ``exponents`` holds ``theta`` and optionally ``l``, ``q``, ``p``;
    ``weights`` holds the four weight sequences of the weighted norms (unit
    weights when omitted). Each pair ``(C1, C2)`` etc. is the (min, max) of
    the norm ratio over random nonzero arguments, optionally sharpened by a
    local search, so ``C_odd`` over-estimates the best lower constant and
    ``C_even`` under-estimates the best upper constant.

    Keys: ``C1/C2`` (r-norm with theta vs E_T), ``C3/C4`` (r-norm with l vs
    E_T), ``C5/C6`` (bracket vs E_T), ``R1/R2`` (pair sup vs coordinate
    2-norm), ``R3/R4`` (q-weighted vs sup), ``R5/R6`` (p-weighted vs sup).
    """
    if int(T) != T or T < 2 or int(N) != N or N < 1:
        raise InvalidParameterError("T must be >= 2 and N >= 1")
    theta = float(exponents["theta"])
    l = float(exponents.get("l", theta))
    q = float(exponents.get("q", 2.0))
    p = float(exponents.get("p", 2.0))
    if weights is None:
        weights = [np.ones(T)] * 4
    w1, w2, w3, w4 = (np.asarray(getattr(w, "w", w), dtype=float) for w in weights)
    rng = _rng(rng_seed, 23)
    n = T * N

    def seq(v):
        return as_sequence(v.reshape(T, N))

    pairs = {
        ("C1", "C2"): lambda v: r_norm(seq(v), theta) / et_norm(seq(v), theta),
        ("C3", "C4"): lambda v: r_norm(seq(v), l) / et_norm(seq(v), theta),
        ("C5", "C6"): lambda v: et_norm(seq(v), l) / et_norm(seq(v), theta),
        ("R3", "R4"): lambda v: weighted_norm(seq(v), q, w1, w3) / sup_norm(seq(v)),
        ("R5", "R6"): lambda v: weighted_norm(seq(v), p, w2, w4) / sup_norm(seq(v)),
    }
    out = {}
    for (a, b), fun in pairs.items():
        out[a], out[b] = _ratio_extremes(fun, n, sample_count, rng, refine)

    def pair_ratio(v):
        u1, u2 = seq(v[:n]), seq(v[n:])
        return (sup_norm(u1) + sup_norm(u2)) / float(np.linalg.norm(v))

    out["R1"], out["R2"] = _ratio_extremes(pair_ratio, 2 * n, sample_count, rng, refine)
    return out


@dataclass
class RicceriReport:
    r: float
    mu: float
    gamma_est: float
    eta_est: float
    mu_star_est: float
    beta_est: float
    oracle: dict = None
    diagnostics: dict = field(default_factory=dict)
    sides: dict = field(
        default_factory=lambda: {"gamma": "upper", "eta": "upper", "mu_star": "upper", "beta": "lower"}
    )
    assumed_minima: str = "{0}"

    @property
    def lambda_interval(self):
        """Open interval ``(0, beta_est)`` for lambda, or None when empty."""
        return (0.0, self.beta_est) if self.beta_est > 0 else None

    def to_dict(self):
        return {
            "r": self.r,
            "mu": self.mu,
            "gamma_est": self.gamma_est,
            "eta_est": self.eta_est,
            "mu_star_est": self.mu_star_est,
            "beta_est": self.beta_est,
            "lambda_interval": list(self.lambda_interval) if self.lambda_interval else None,
            "sides": dict(self.sides),
            "assumed_minima_of_I": self.assumed_minima,
            "oracle": self.oracle,
            "diagnostics": _plain(self.diagnostics),
        }


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _is_example51(problem):
    return (
        problem.T == 2
        and problem.N == 1
        and problem.F.kind == "example51_F"
        and problem.G.kind == "example51_G"
    )


def ricceri_report(problem, r, mu, rng_seed=0, n_starts=24):
    """All four estimates at ``(r, mu)``; adds the closed forms on the T = 2 example."""
    problem = check_problem(problem)
    gamma = estimate_gamma(problem, n_starts=n_starts, rng_seed=rng_seed)
    eta = estimate_eta(problem, r, rng_seed=rng_seed)
    mu_star = estimate_mu_star(problem, r, gamma=gamma.value, eta=eta.value, rng_seed=rng_seed)
    beta = estimate_beta(problem, mu, r, rng_seed=rng_seed)
    oracle = None
    if _is_example51(problem):
        oracle = example51_oracle(problem.weights[2].w, problem.weights[3].w, r, mu)
    return RicceriReport(
        r=float(r),
        mu=float(mu),
        gamma_est=gamma.value,
        eta_est=eta.value,
        mu_star_est=mu_star.value,
        beta_est=beta.value,
        oracle=oracle,
        diagnostics={
            "gamma_point": gamma.point,
            "gamma_unbounded": gamma.diagnostics.get("unbounded", False),
            "eta_point": eta.point,
            "eta_constraint_violation": eta.diagnostics["constraint_violation"],
            "mu_star_point": mu_star.point,
            "beta_point": beta.point,
            "beta_inner_inf": beta.diagnostics["inner_inf"],
            "feasible_set_nonempty": True,
        },
    )


class RicceriEstimator(BaseEstimator):
    """Estimator wrapper: ``fit(problem)`` stores ``report_``."""

    def __init__(self, r=1.0, mu=None, n_starts=24, random_state=0):
        self.r = r
        self.mu = mu
        self.n_starts = n_starts
        self.random_state = random_state

    def fit(self, problem, y=None):
        problem = check_problem(problem)
        check_positive(self.r, "r")
        mu = problem.mu if self.mu is None else self.mu
        self.report_ = ricceri_report(problem, self.r, mu, rng_seed=check_seed(self.random_state), n_starts=self.n_starts)
        return self
