"""Multi-start search for distinct critical points of an action functional.

Two phases share one pool of certified points:

1. descent on the action itself (BFGS with Armijo backtracking) from
   random starts and, optionally, seeds on a small coordinate sphere where
   an even action is negative;
2. deflated descent on ``M(u) * |g(u)|^2`` with
   ``M(u) = prod_k (shift + 1/|u - u_k|^power)`` over the points found so far
   (and their mirrors ``-u_k`` for even problems), which also reaches saddles.

Every candidate is finished by a Newton polish on the analytic gradient with
a finite-difference Jacobian, then re-verified against the undeflated
gradient and the system residual before it is accepted.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator

from .action import action_gradient, action_value
from .exceptions import ConvergenceError, InvalidParameterError
from .periodic import PeriodicState
from .residual import system_residual
from .validation import check_fraction, check_problem, check_seed, check_state

__all__ = [
    "SolverConfig",
    "CriticalPoint",
    "minimize_from",
    "deflated_search_from",
    "find_critical_points",
    "clark_seeds",
    "clark_threshold",
    "dedup",
    "count_pairs",
    "CriticalPointFinder",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    start_count: int = 16
    start_radius: float = 2.0
    tol_grad: float = 1e-9
    max_iter: int = 500
    dedup_tol: float = 1e-6
    deflation: bool = True
    deflation_power: float = 2.0
    deflation_shift: float = 1.0
    deflation_rounds: int = 3
    rng_seed: int = 0
    even_symmetry: bool = False
    clark_count: int = 0
    clark_delta: float = 0.5
    clark_r0: float = None
    threads: int = 1

    def __post_init__(self):
        if int(self.start_count) < 1:
            raise InvalidParameterError("start_count must be >= 1")
        for name in ("tol_grad", "dedup_tol", "deflation_power"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be > 0")
        if self.start_radius < 0:
            raise InvalidParameterError("start_radius must be >= 0")
        if self.deflation_shift < 0:
            raise InvalidParameterError("deflation_shift must be >= 0")
        if int(self.max_iter) < 1 or int(self.threads) < 1:
            raise InvalidParameterError("max_iter and threads must be >= 1")
        check_seed(self.rng_seed)

    @classmethod
    def from_dict(cls, d):
        fields = cls.__dataclass_fields__
        unknown = set(d) - set(fields)
        if unknown:
            raise InvalidParameterError(f"unknown solver settings: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CriticalPoint:
    u: PeriodicState
    action: float
    grad_inf: float
    residual_inf: float
    start_index: int
    iterations: int
    phase: str = "minimize"
    pair_index: int = -1

    @property
    def sup_norm(self):
        return float(np.max(np.abs(self.u.flat()))) if self.u.size else 0.0


# --------------------------------------------------------------------------
# local searches


def _armijo(f, x, fx, gx, d, max_step=None, c1=1e-4, min_step=1e-14):
    slope = float(gx @ d)
    step = 1.0
    if max_step is not None:
        dn = float(np.linalg.norm(d))
        if dn > max_step:
            step = max_step / dn
    while step >= min_step:
        xn = x + step * d
        fn = f(xn)
        if np.isfinite(fn) and fn <= fx + c1 * step * slope:
            return xn, fn
        # safeguarded quadratic interpolation of the backtrack
        if np.isfinite(fn):
            denom = 2.0 * (fn - fx - step * slope)
            trial = -slope * step * step / denom if denom > 0 else 0.5 * step
            step = min(0.5 * step, max(0.1 * step, trial))
        else:
            step *= 0.1
    return None, None


def _bfgs(f, grad, x0, stop, max_iter, max_step=1.0, stall_window=25):
    """BFGS on ``f``; ``stop(x, g)`` ends the run early.

    Returns ``(x, iterations, history, stopped)``; ``stopped`` is False when
    the line search or the iteration budget gave out first.
    """
    x = np.array(x0, dtype=float)
    fx = f(x)
    g = grad(x)
    if not (np.isfinite(fx) and np.all(np.isfinite(g))):
        raise ConvergenceError("non-finite value at the starting point", x=x)
    n = x.size
    Hinv = np.eye(n)
    history = [fx]
    scaled = False
    for it in range(max_iter):
        if stop(x, g):
            return x, it, history, True
        d = -Hinv @ g
        if not float(g @ d) < 0:
            Hinv = np.eye(n)
            d = -g
        xn, fn = _armijo(f, x, fx, g, d, max_step * max(1.0, float(np.linalg.norm(x))))
        if xn is None:
            return x, it, history, False
        gn = grad(xn)
        if not np.all(np.isfinite(gn)):
            raise ConvergenceError("NaN detected in gradient", x=x, iterations=it)
        s, y = xn - x, gn - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if not scaled:
                Hinv = np.eye(n) * (sy / float(y @ y))
                scaled = True
            rho = 1.0 / sy
            V = np.eye(n) - rho * np.outer(s, y)
            Hinv = V @ Hinv @ V.T + rho * np.outer(s, s)
        x, fx, g = xn, fn, gn
        history.append(fx)
        if len(history) > stall_window and history[-stall_window - 1] - fx <= 1e-10 * abs(fx):
            return x, it + 1, history, stop(x, g)
    return x, max_iter, history, stop(x, g)


def _fd_jacobian(grad, x, rel_step=1e-6):
    n = x.size
    J = np.empty((n, n))
    for i in range(n):
        h = rel_step * max(1.0, abs(x[i]))
        e = np.zeros(n)
        e[i] = h
        J[:, i] = (grad(x + e) - grad(x - e)) / (2 * h)
    return 0.5 * (J + J.T)


def _newton_polish(grad, x, tol, max_iter=40):
    """Damped Newton on ``grad = 0``; keeps only steps that shrink ``|g|_inf``."""
    g = grad(x)
    best = float(np.max(np.abs(g)))
    for _ in range(max_iter):
        if best <= tol:
            break
        J = _fd_jacobian(grad, x)
        dx = np.linalg.lstsq(J, -g, rcond=1e-13)[0]
        moved = False
        step = 1.0
        while step > 1e-6:
            xn = x + step * dx
            gn = grad(xn)
            gi = float(np.max(np.abs(gn)))
            if np.isfinite(gi) and gi < best:
                x, g, best, moved = xn, gn, gi, True
                break
            step *= 0.5
        if not moved:
            break
    return x, best


def _certify(problem, x, start_index, iterations, phase):
    u = PeriodicState.from_flat(x, problem.T, problem.N)
    g = action_gradient(problem, u)
    r = system_residual(problem, u).flat()
    return CriticalPoint(
        u=u,
        action=action_value(problem, u),
        grad_inf=float(np.max(np.abs(g))),
        residual_inf=float(np.max(np.abs(r))),
        start_index=start_index,
        iterations=iterations,
        phase=phase,
    )


def minimize_from(problem, u0, cfg=None, start_index=0):
    """Descend the action from ``u0`` to a point with ``|g|_inf <= tol_grad``.

    Raises :class:`ConvergenceError` (carrying the last iterate) otherwise.
    The action history of accepted BFGS steps is non-increasing.
    """
    cfg = cfg or SolverConfig()
    u0 = check_state(problem, u0)
    f = lambda x: action_value(problem, x)
    grad = lambda x: action_gradient(problem, x)
    tol = cfg.tol_grad
    x, it, history, _ = _bfgs(f, grad, u0.flat(), lambda x, g: np.max(np.abs(g)) <= tol, cfg.max_iter)
    x, gi = _newton_polish(grad, x, tol)
    if not gi <= tol:
        raise ConvergenceError(
            f"gradient sup-norm {gi:.3e} above tolerance after {it} iterations",
            x=x, iterations=it, grad_inf=gi,
        )
    point = _certify(problem, x, start_index, it, "minimize")
    minimize_from.last_history = history
    return point


def _deflation_factor(x, found, power, shift):
    """``M(x)`` and its gradient for the shifted multiplicative operator.

    ``found`` is a 2-D array with one deflated point per row.
    """
    if found.shape[0] == 0:
        return 1.0, np.zeros_like(x)
    diff = x[None, :] - found
    d2 = np.einsum("ij,ij->i", diff, diff)
    if np.any(d2 == 0.0):
        return np.inf, np.zeros_like(x)
    inv = d2 ** (-power / 2)
    terms = shift + inv
    M = float(np.prod(terms))
    # d/dx log(shift + |x-y|^-p) summed over the rows
    coef = -power * inv / d2 / terms
    return M, M * (coef @ diff)


def deflated_search_from(problem, u0, found, cfg=None, start_index=0):
    """Descend ``M(u) |g(u)|^2`` from ``u0`` and polish the result on ``g``."""
    cfg = cfg or SolverConfig()
    u0 = check_state(problem, u0)
    grad = lambda x: action_gradient(problem, x)
    found = np.asarray(found, dtype=float).reshape(-1, problem.size)
    if cfg.even_symmetry:
        found = np.vstack([found, -found[np.any(found != 0, axis=1)]])
    power, shift = cfg.deflation_power, cfg.deflation_shift

    cache = {}

    def parts(x):
        key = x.tobytes()
        if key not in cache:
            cache.clear()
            g = grad(x)
            M, dM = _deflation_factor(x, found, power, shift)
            cache[key] = (g, M, dM)
        return cache[key]

    def f(x):
        g, M, _ = parts(x)
        return M * float(g @ g)

    def fgrad(x):
        g, M, dM = parts(x)
        gn = float(np.linalg.norm(g))
        if gn == 0.0:
            return np.zeros_like(x)
        d = g / gn
        eps = 1e-6 * max(1.0, float(np.linalg.norm(x)))
        Hd = (grad(x + eps * d) - grad(x - eps * d)) / (2 * eps)
        return 2.0 * M * gn * Hd + gn * gn * dM

    switch = max(1e-6, cfg.tol_grad)
    x0 = u0.flat()
    if not np.isfinite(f(x0)):
        raise ConvergenceError("start coincides with a deflated point", x=x0)
    x, it, _, stopped = _bfgs(f, fgrad, x0, lambda x, g: np.max(np.abs(parts(x)[0])) <= switch, cfg.max_iter)
    if not stopped:
        # a stalled deflated descent usually sits on the repelling shell of a
        # known point; polishing from there only rediscovers it
        gi = float(np.max(np.abs(grad(x))))
        if gi > 1e-4 * max(1.0, float(np.max(np.abs(x)))):
            raise ConvergenceError(
                f"deflated search stalled at gradient sup-norm {gi:.3e}", x=x, iterations=it, grad_inf=gi
            )
    x, gi = _newton_polish(grad, x, cfg.tol_grad)
    if not gi <= cfg.tol_grad:
        raise ConvergenceError(
            f"deflated search stalled at gradient sup-norm {gi:.3e}", x=x, iterations=it, grad_inf=gi
        )
    return _certify(problem, x, start_index, it, "deflation")


# --------------------------------------------------------------------------
# seeding and bookkeeping


def clark_seeds(problem, delta, r0, count, rng_seed=0):
    """``count`` points on the coordinate sphere of radius ``r0 * delta``.

    Directions are drawn uniformly and every direction is followed by its
    antipode.
    """
    delta = check_fraction(delta, "delta")
    if not r0 > 0:
        raise InvalidParameterError("r0 must be > 0")
    count = int(count)
    rng = np.random.default_rng(np.random.SeedSequence([check_seed(rng_seed), 7]))
    n_dir = (count + 1) // 2
    z = rng.normal(size=(n_dir, problem.size))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    z *= r0 * delta
    seeds = []
    for row in z:
        seeds.extend([row, -row])
    return [PeriodicState.from_flat(s, problem.T, problem.N) for s in seeds[:count]]


def clark_threshold(problem, delta, count=64, rng_seed=0, iterations=60):
    """Largest ``r0`` in (0, 1] (by bisection) with ``action(r0 * s) < 0`` for
    every sampled seed direction ``s`` of coordinate norm ``delta``.

    Returns 0.0 when no such radius is found down to 1e-12.
    """
    dirs = [s.flat() for s in clark_seeds(problem, delta, 1.0, count, rng_seed)]

    def negative(r):
        return all(action_value(problem, r * s) < 0 for s in dirs)

    if negative(1.0):
        return 1.0
    lo = 1e-12
    if not negative(lo):
        return 0.0
    hi = 1.0
    for _ in range(iterations):
        mid = np.sqrt(lo * hi)
        if negative(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _distance(a, b, even):
    d = float(np.max(np.abs(a - b)))
    if even:
        d = min(d, float(np.max(np.abs(a + b))))
    return d


def dedup(points, tol, even_symmetry=False):
    """One representative per class under sup-norm distance ``<= tol``.

    With ``even_symmetry`` the distance is ``min(|u-v|, |u+v|)``. The
    representative has the smaller action, ties broken lexicographically on
    the flat coordinates. Output is sorted the same way.
    """
    order = sorted(points, key=lambda p: (p.action, tuple(p.u.flat())))
    kept = []
    for p in order:
        x = p.u.flat()
        if all(_distance(x, q.u.flat(), even_symmetry) > tol for q in kept):
            kept.append(p)
    return kept


def count_pairs(points, dedup_tol):
    """Number of distinct nonzero ``+-`` pairs (classes with ``|u|_inf > 10*tol``)."""
    return len({p.pair_index for p in points if p.sup_norm > 10 * dedup_tol})


def _mirror(problem, p):
    q = _certify(problem, -p.u.flat(), p.start_index, p.iterations, p.phase)
    return replace(q, pair_index=p.pair_index)


# --------------------------------------------------------------------------
# driver


def _run(tasks, threads):
    if threads <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda task: task(), tasks))


def _attempt(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConvergenceError as exc:
        return exc


def _random_starts(problem, cfg, phase, count):
    starts = []
    for k in range(count):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, phase, k]))
        z = rng.uniform(-1.0, 1.0, size=problem.size) * cfg.start_radius
        starts.append(PeriodicState.from_flat(z, problem.T, problem.N))
    return starts


def find_critical_points(problem, cfg=None, return_log=False):
    """Certified, deduplicated critical points sorted by ``(action, coords)``.

    With ``even_symmetry`` each nonzero class is returned as the pair
    ``u, -u`` sharing one ``pair_index``, so the list is closed under
    negation. Nonconvergent starts are logged and skipped.
    """
    cfg = cfg or SolverConfig()
    problem = check_problem(problem)
    tol, even = cfg.tol_grad, cfg.even_symmetry
    log = []
    pool = []

    zero = _certify(problem, np.zeros(problem.size), -1, 0, "trivial")
    if zero.grad_inf <= tol:
        pool.append(zero)

    starts = []
    if cfg.clark_count > 0:
        r0 = cfg.clark_r0
        if r0 is None:
            r0 = 0.5 * clark_threshold(problem, cfg.clark_delta, rng_seed=cfg.rng_seed)
        if r0 > 0:
            starts.extend(clark_seeds(problem, cfg.clark_delta, r0, cfg.clark_count, cfg.rng_seed))
    starts.extend(_random_starts(problem, cfg, 0, cfg.start_count))
    results = _run(
        [lambda s=s, k=k: _attempt(minimize_from, problem, s, cfg, k) for k, s in enumerate(starts)],
        cfg.threads,
    )
    pool.extend(_accept(results, tol, log, "minimize"))
    pool = dedup(pool, cfg.dedup_tol, even)

    if cfg.deflation:
        offset = len(starts)
        for rnd in range(cfg.deflation_rounds):
            found = [p.u.flat() for p in pool]
            rstarts = _random_starts(problem, cfg, rnd + 1, cfg.start_count)
            tasks = [
                lambda s=s, k=offset + k: _attempt(deflated_search_from, problem, s, found, cfg, k)
                for k, s in enumerate(rstarts)
            ]
            offset += len(rstarts)
            before = len(pool)
            pool = dedup(pool + _accept(_run(tasks, cfg.threads), tol, log, "deflation"), cfg.dedup_tol, even)
            logger.info("deflation round %d: %d -> %d points", rnd, before, len(pool))
            if len(pool) == before:
                break

    points = [p for p in pool if p.grad_inf <= tol]
    if even:
        expanded = []
        for k, p in enumerate(points):
            p = replace(p, pair_index=k)
            expanded.append(p)
            if np.any(p.u.flat()):
                expanded.append(_mirror(problem, p))
        points = expanded
    else:
        points = [replace(p, pair_index=k) for k, p in enumerate(points)]
    points.sort(key=lambda p: (p.action, tuple(p.u.flat())))
    if return_log:
        return points, log
    return points


def _accept(results, tol, log, phase):
    good = []
    for res in results:
        if isinstance(res, ConvergenceError):
            log.append({"phase": phase, "status": "nonconvergent", "message": str(res)})
        elif res.grad_inf <= tol:
            good.append(res)
            log.append({"phase": phase, "status": "converged", "start_index": res.start_index})
        else:
            log.append({"phase": phase, "status": "rejected", "grad_inf": res.grad_inf})
    return good


class CriticalPointFinder(BaseEstimator):
    """Estimator wrapper around :func:`find_critical_points`.

    ``fit(problem)`` stores ``critical_points_``, ``n_pairs_`` and
    ``solver_log_``; parameters mirror :class:`SolverConfig`. With
    ``even_symmetry=None`` it is switched on when the problem is even.
    """

    def __init__(
        self,
        start_count=16,
        start_radius=2.0,
        tol_grad=1e-9,
        max_iter=500,
        dedup_tol=1e-6,
        deflation=True,
        deflation_power=2.0,
        deflation_shift=1.0,
        deflation_rounds=3,
        even_symmetry=None,
        clark_count=0,
        clark_delta=0.5,
        clark_r0=None,
        random_state=0,
        n_jobs=1,
    ):
        self.start_count = start_count
        self.start_radius = start_radius
        self.tol_grad = tol_grad
        self.max_iter = max_iter
        self.dedup_tol = dedup_tol
        self.deflation = deflation
        self.deflation_power = deflation_power
        self.deflation_shift = deflation_shift
        self.deflation_rounds = deflation_rounds
        self.even_symmetry = even_symmetry
        self.clark_count = clark_count
        self.clark_delta = clark_delta
        self.clark_r0 = clark_r0
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self, problem):
        even = problem.is_even() if self.even_symmetry is None else bool(self.even_symmetry)
        return SolverConfig(
            start_count=self.start_count,
            start_radius=self.start_radius,
            tol_grad=self.tol_grad,
            max_iter=self.max_iter,
            dedup_tol=self.dedup_tol,
            deflation=self.deflation,
            deflation_power=self.deflation_power,
            deflation_shift=self.deflation_shift,
            deflation_rounds=self.deflation_rounds,
            rng_seed=check_seed(self.random_state),
            even_symmetry=even,
            clark_count=self.clark_count,
            clark_delta=self.clark_delta,
            clark_r0=self.clark_r0,
            threads=self.n_jobs,
        )

    def fit(self, problem, y=None):
        problem = check_problem(problem)
        self.config_ = self._config(problem)
        self.critical_points_, self.solver_log_ = find_critical_points(
            problem, self.config_, return_log=True
        )
        self.n_pairs_ = count_pairs(self.critical_points_, self.dedup_tol)
        self.problem_ = problem
        return self

    def transform(self, problem=None):
        """Flat coordinates of the found points, one row per point."""
        if not hasattr(self, "critical_points_"):
            from sklearn.exceptions import NotFittedError

            raise NotFittedError("call fit before transform")
        if not self.critical_points_:
            return np.empty((0, self.problem_.size))
        return np.vstack([p.u.flat() for p in self.critical_points_])

    def fit_transform(self, problem, y=None):
        return self.fit(problem).transform()
