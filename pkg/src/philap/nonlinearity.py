"""Built-in nonlinear terms F, G, H with analytic gradients, and sample-scale
checkers for the conditions placed on them.

Every kind is vectorised: ``t`` has shape ``(...)`` and ``x1``, ``x2`` shape
``(..., N)``; values come back with shape ``(...)`` and gradients with the
shape of ``x1``.
"""

from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .exceptions import InvalidParameterError

__all__ = [
    "KINDS",
    "NonlinearitySpec",
    "evaluate",
    "ConditionResult",
    "check_periodicity",
    "check_F0",
    "check_F1",
    "check_F2",
    "check_F3",
    "check_A5",
    "check_A5_prime",
    "check_A6",
    "check_F_conditions",
]


def _abs_pow(x, a):
    """``|x|^a`` and its gradient ``a |x|^(a-2) x`` (0 at x = 0)."""
    s = np.linalg.norm(x, axis=-1)
    pos = s > 0
    safe = np.where(pos, s, 1.0)
    val = np.where(pos, safe**a, 0.0)
    fac = np.where(pos, a * safe ** (a - 2), 0.0)
    return val, fac[..., None] * x


def _sq(x):
    return np.sum(x * x, axis=-1)


def _remark11_F(p, t, x1, x2):
    l, T = p["l"], p["T"]
    c = np.cos(np.pi * t / T)
    a1, a2 = c**2 + 2, np.abs(c) + 2
    v1, g1 = _abs_pow(x1, l)
    v2, g2 = _abs_pow(x2, l)
    s = _sq(x1) + _sq(x2)
    L = np.log1p(s)
    A = a1 * v1 + a2 * v2
    dL = 2.0 / (s + 1.0)
    grad1 = (a1 * L)[..., None] * g1 + (A * dL)[..., None] * x1
    grad2 = (a2 * L)[..., None] * g2 + (A * dL)[..., None] * x2
    return A * L, grad1, grad2


def _remark11_G(p, t, x1, x2):
    l, T = p["l"], p["T"]
    b = np.abs(np.sin(np.pi * t / T)) + 2
    v1, g1 = _abs_pow(x1, l)
    v2, g2 = _abs_pow(x2, l)
    s = _sq(x1) + _sq(x2)
    L = np.log1p(s)
    P = v1 + v2
    dL = 2.0 / (s + 1.0)
    outer = (b * 2 * P * L)[..., None]
    inner = (b * P * P * dL)[..., None]
    return b * P * P * L, outer * g1 + inner * x1, outer * g2 + inner * x2


def _trig_H(p, t, x1, x2):
    T = p.get("T", 2)
    c = np.cos(np.pi * t / T) ** 2 + 2
    s = _sq(x1) + _sq(x2)
    dv = (c * np.cos(s + 2) * 2)[..., None]
    return c * np.sin(s + 2), dv * x1, dv * x2


def _example51_F(p, t, x1, x2):
    v1, g1 = _abs_pow(x1, 3.0)
    v2, g2 = _abs_pow(x2, 3.0)
    return v1 + v2 + 0.0 * t, g1, g2


def _example51_G(p, t, x1, x2):
    v1, g1 = _abs_pow(x1, 4.0)
    v2, g2 = _abs_pow(x2, 4.0)
    return v1 + v2 + 0.0 * t, g1, g2


def _example52_F(p, t, x1, x2):
    h1 = np.abs(np.sin(np.pi * t / 4)) + 1
    h2 = np.cos(np.pi * t / 4) ** 2 + 1
    v1, g1 = _abs_pow(x1, 1.5)
    v2, g2 = _abs_pow(x2, 2.0)
    return h1 * v1 + h2 * v2, h1[..., None] * g1, h2[..., None] * g2


def _generic_terms(terms, x):
    val = np.zeros(x.shape[:-1])
    grad = np.zeros_like(x)
    for term in terms:
        c, a = float(term["c"]), float(term["p"])
        if term.get("odd", False):
            # c |x|^(a-1) (x . 1): odd in x
            v, g = _abs_pow(x, a - 1)
            lin = np.sum(x, axis=-1)
            val = val + c * v * lin
            grad = grad + c * (g * lin[..., None] + v[..., None])
        else:
            v, g = _abs_pow(x, a)
            val = val + c * v
            grad = grad + c * g
    return val, grad


def _power_sum_generic(p, t, x1, x2):
    v1, g1 = _generic_terms(p.get("terms1", ()), x1)
    v2, g2 = _generic_terms(p.get("terms2", ()), x2)
    return v1 + v2 + 0.0 * t, g1, g2


KINDS = MappingProxyType(
    {
        "remark11_F": (_remark11_F, ("l", "T")),
        "remark11_G": (_remark11_G, ("l", "T")),
        "remark11_H": (_trig_H, ("T",)),
        "example51_F": (_example51_F, ()),
        "example51_G": (_example51_G, ()),
        "example51_H": (_trig_H, ()),
        "example52_F": (_example52_F, ()),
        "power_sum_generic": (_power_sum_generic, ()),
    }
)

# kinds whose value does not depend on t
T_INDEPENDENT = frozenset({"example51_F", "example51_G", "power_sum_generic"})


@dataclass(frozen=True)
class NonlinearitySpec:
    """A registry kind plus its parameters.

    ``power_sum_generic`` takes ``terms1``/``terms2``: lists of
    ``{"c": ..., "p": ..., "odd": bool}`` contributing ``c|x|^p`` (or the odd
    variant ``c|x|^(p-1) sum_j x_j``) in ``x1`` and ``x2`` respectively.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameterError(
                f"unknown nonlinearity kind {self.kind!r}; expected one of {sorted(KINDS)}"
            )
        params = dict(self.params)
        for name in KINDS[self.kind][1]:
            if name not in params:
                raise InvalidParameterError(f"{self.kind} needs parameter {name!r}")
        if self.kind in ("remark11_F", "remark11_G") and not params["l"] > 1:
            raise InvalidParameterError("exponent l must be > 1")
        if self.kind == "power_sum_generic":
            for key in ("terms1", "terms2"):
                for k, term in enumerate(params.get(key, ())):
                    if not float(term["p"]) > 1:
                        raise InvalidParameterError(f"{key}[{k}]: exponent must be > 1")
            params = {
                key: tuple(dict(term) for term in params.get(key, ()))
                for key in ("terms1", "terms2")
            }
        object.__setattr__(self, "params", MappingProxyType(params))

    @classmethod
    def zero(cls):
        return cls("power_sum_generic", {})

    @property
    def is_zero(self):
        return self.kind == "power_sum_generic" and not any(self.params.values())

    def __call__(self, t, x1, x2):
        return evaluate(self, t, x1, x2)

    def value(self, t, x1, x2):
        return evaluate(self, t, x1, x2)[0]

    def to_dict(self):
        params = {}
        for key, val in self.params.items():
            params[key] = [dict(v) for v in val] if isinstance(val, tuple) else val
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, record):
        return cls(record["kind"], dict(record.get("params", {})))


def evaluate(spec, t, x1, x2):
    """Value and gradient pair ``(W, grad_x1 W, grad_x2 W)`` at ``(t, x1, x2)``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    t = np.asarray(t, dtype=float)
    fn = KINDS[spec.kind][0]
    val, g1, g2 = fn(spec.params, t, x1, x2)
    shape = np.broadcast_shapes(t.shape, x1.shape[:-1])
    return np.broadcast_to(val, shape).copy(), g1, g2


# --------------------------------------------------------------------------
# condition checkers


@dataclass
class ConditionResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    witness: object = None

    def to_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "details": _jsonable(self.details),
            "witness": _jsonable(self.witness),
        }


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _sample_pairs(rng, n, N, log10_range):
    x = rng.normal(size=(n, 2, N))
    x /= np.linalg.norm(x.reshape(n, -1), axis=1)[:, None, None]
    r = 10.0 ** rng.uniform(*log10_range, size=n)
    x *= r[:, None, None]
    return x[:, 0], x[:, 1]


def _on_sphere(rng, n, N, R):
    """Points with ``|x1| + |x2| = R``."""
    x = rng.normal(size=(n, 2, N))
    x /= np.linalg.norm(x, axis=2, keepdims=True)
    split = rng.uniform(0, 1, size=n)
    # include the axis directions where one block vanishes
    split[:2] = [0.0, 1.0]
    x[:, 0] *= (R * split)[:, None]
    x[:, 1] *= (R * (1 - split))[:, None]
    return x[:, 0], x[:, 1]


def check_periodicity(spec, T, N=2, sample_count=200, rng_seed=0):
    """``value(t) == value(t + T)`` exactly at integer t; also reports t-independence."""
    rng = np.random.default_rng(rng_seed)
    x1, x2 = _sample_pairs(rng, sample_count, N, (-1.0, 1.0))
    worst = 0.0
    varies = False
    base = spec.value(np.ones(sample_count), x1, x2)
    for t in range(1, T + 1):
        a = spec.value(np.full(sample_count, t), x1, x2)
        b = spec.value(np.full(sample_count, t + T), x1, x2)
        worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(a)))))
        varies = varies or bool(np.any(a != base))
    return ConditionResult(
        "periodic",
        worst <= 1e-12,
        {"max_rel_diff": worst, "t_independent": not varies},
    )


def check_F0(spec, T, alpha1, alpha2, h1, h2, l, q=None, p=None, N=2, sample_count=2000, rng_seed=0):
    """``F <= h1(t)|x1|^alpha1 + h2(t)|x2|^alpha2 + l(t)`` on samples.

    ``h1``, ``h2``, ``l`` are length-T arrays (t = 1..T). When ``q``/``p`` are
    given the exponent ranges ``alpha1 in [0, q)``, ``alpha2 in [0, p)`` are
    checked as well.
    """
    h1, h2, l = (np.asarray(v, dtype=float) for v in (h1, h2, l))
    ranges_ok = alpha1 >= 0 and alpha2 >= 0
    if q is not None:
        ranges_ok = ranges_ok and alpha1 < q
    if p is not None:
        ranges_ok = ranges_ok and alpha2 < p
    rng = np.random.default_rng(rng_seed)
    x1, x2 = _sample_pairs(rng, sample_count, N, (-3.0, 3.0))
    worst, witness = -np.inf, None
    for t in range(1, T + 1):
        F = spec.value(np.full(sample_count, t), x1, x2)
        bound = (
            h1[t - 1] * np.linalg.norm(x1, axis=1) ** alpha1
            + h2[t - 1] * np.linalg.norm(x2, axis=1) ** alpha2
            + l[t - 1]
        )
        excess = (F - bound) / np.maximum(1.0, np.abs(bound))
        k = int(np.argmax(excess))
        if excess[k] > worst:
            worst, witness = float(excess[k]), (t, x1[k], x2[k])
    ok = ranges_ok and worst <= 1e-12
    return ConditionResult(
        "F0", ok, {"max_rel_excess": worst, "exponent_ranges_ok": ranges_ok},
        None if ok else witness,
    )


def check_F1(spec, T, N=2):
    z = np.zeros((T, N))
    vals = spec.value(np.arange(1, T + 1), z, z)
    bad = np.flatnonzero(vals != 0)
    return ConditionResult(
        "F1", bad.size == 0, {"values": vals},
        None if bad.size == 0 else int(bad[0]) + 1,
    )


def check_F2(spec, T, N=2, sample_count=2000, rng_seed=0, rtol=0.0):
    """Evenness ``F(t, -x1, -x2) = F(t, x1, x2)``; bit-exact by default."""
    rng = np.random.default_rng(rng_seed)
    x1, x2 = _sample_pairs(rng, sample_count, N, (-2.0, 2.0))
    worst, witness = 0.0, None
    for t in range(1, T + 1):
        tt = np.full(sample_count, t)
        a = spec.value(tt, x1, x2)
        b = spec.value(tt, -x1, -x2)
        diff = np.abs(a - b) / np.maximum(1.0, np.abs(a))
        k = int(np.argmax(diff))
        if diff[k] > worst:
            worst, witness = float(diff[k]), (t, x1[k], x2[k])
    ok = worst <= rtol
    return ConditionResult("F2", ok, {"max_rel_diff": worst}, None if ok else witness)


def check_F3(spec, T, beta1, beta2, M1, M2, delta, q=None, p=None, N=2, sample_count=2000, rng_seed=0):
    """``F >= M1|x1|^beta1 + M2|x2|^beta2`` for ``|x1|, |x2| < delta``."""
    params_ok = 0 < delta < 1 and M1 > 0 and M2 > 0 and beta1 > 1 and beta2 > 1
    if q is not None and p is not None:
        params_ok = params_ok and max(beta1, beta2) < min(q, p)
    rng = np.random.default_rng(rng_seed)
    x1 = rng.normal(size=(sample_count, N))
    x2 = rng.normal(size=(sample_count, N))
    x1 /= np.linalg.norm(x1, axis=1, keepdims=True)
    x2 /= np.linalg.norm(x2, axis=1, keepdims=True)
    x1 *= (delta * 10.0 ** rng.uniform(-4, 0, size=sample_count) * 0.999)[:, None]
    x2 *= (delta * 10.0 ** rng.uniform(-4, 0, size=sample_count) * 0.999)[:, None]
    x1[:10] = 0.0
    x2[10:20] = 0.0
    worst, witness = np.inf, None
    for t in range(1, T + 1):
        F = spec.value(np.full(sample_count, t), x1, x2)
        lower = M1 * np.linalg.norm(x1, axis=1) ** beta1 + M2 * np.linalg.norm(x2, axis=1) ** beta2
        slack = F - lower
        k = int(np.argmin(slack))
        if slack[k] < worst:
            worst, witness = float(slack[k]), (t, x1[k], x2[k])
    ok = params_ok and worst >= 0
    return ConditionResult(
        "F3", ok, {"min_slack": worst, "parameters_ok": params_ok}, None if ok else witness
    )


def _min_ratio_on_sphere(spec, T, R, exponent, N, rng, n):
    x1, x2 = _on_sphere(rng, n, N, R)
    denom = np.linalg.norm(x1, axis=1) ** exponent + np.linalg.norm(x2, axis=1) ** exponent
    worst = np.inf
    for t in range(1, T + 1):
        worst = min(worst, float(np.min(spec.value(np.full(n, t), x1, x2) / denom)))
    return worst


def _max_ratio_on_sphere(spec, T, R, exponent, N, rng, n):
    x1, x2 = _on_sphere(rng, n, N, R)
    denom = np.linalg.norm(x1, axis=1) ** exponent + np.linalg.norm(x2, axis=1) ** exponent
    worst = -np.inf
    for t in range(1, T + 1):
        worst = max(worst, float(np.max(spec.value(np.full(n, t), x1, x2) / denom)))
    return worst


DIVERGENCE_RADII = (1e2, 1e3, 1e4)


def _diverges(ratios, threshold):
    return bool(all(b > a for a, b in zip(ratios, ratios[1:])) and ratios[-1] >= threshold)


def _sampled_gap_inf(F, G, T, lam, N, R, rng, n):
    """Smallest ``lam*G - F`` over samples in the ball of radius R, sharpened by
    a local search from the best few samples; returns ``(value, (t, x1, x2))``."""
    from scipy.optimize import minimize

    x1, x2 = _sample_pairs(rng, n, N, (-3.0, np.log10(R)))
    best, arg = np.inf, None
    starts = []
    for t in range(1, T + 1):
        tt = np.full(x1.shape[0], t)
        gap = lam * G.value(tt, x1, x2) - F.value(tt, x1, x2)
        for k in np.argsort(gap)[:3]:
            starts.append((float(gap[k]), t, np.concatenate([x1[k], x2[k]])))
    starts.sort(key=lambda s: s[0])
    for val, t, x in starts[:4]:
        if val < best:
            best, arg = val, (t, x[:N], x[N:])

        def fun(y, t=t):
            v, g1, g2 = evaluate(G, t, y[:N], y[N:])
            w, h1, h2 = evaluate(F, t, y[:N], y[N:])
            return float(lam * v - w), np.concatenate([lam * g1 - h1, lam * g2 - h2])

        res = minimize(fun, x, jac=True, method="L-BFGS-B", bounds=[(-R, R)] * (2 * N))
        if np.isfinite(res.fun) and res.fun < best and np.linalg.norm(res.x) <= R:
            best, arg = float(res.fun), (t, res.x[:N], res.x[N:])
    return best, arg


def _sphere_min(F, G, T, lam, N, R, rng, n):
    x1, x2 = _on_sphere(rng, n, N, R)
    worst = np.inf
    for t in range(1, T + 1):
        tt = np.full(n, t)
        worst = min(worst, float(np.min(lam * G.value(tt, x1, x2) - F.value(tt, x1, x2))))
    return worst


def check_A5(F, G, T, l, lam, N=2, threshold=10.0, ball_radius=1e3, sample_count=500, rng_seed=0):
    """Superlinear growth of F against ``|x1|^l + |x2|^l`` and ``lam*G >= F + C0``.

    The limit is replaced by: the worst sampled ratio increases across radii
    1e2, 1e3, 1e4 and exceeds ``threshold`` at the last one. ``C0`` is the
    smallest value of ``lam*G - F`` found on the ball of radius
    ``ball_radius`` (sampling plus local search, so an upper bound on the true
    infimum). It is accepted as finite when ``lam*G - F`` on the spheres of
    radius ``ball_radius`` and ``2*ball_radius`` stays above it and grows
    outward.
    """
    rng = np.random.default_rng(rng_seed)
    ratios = [_min_ratio_on_sphere(F, T, R, l, N, rng, sample_count) for R in DIVERGENCE_RADII]
    growth_ok = _diverges(ratios, threshold)
    c0, arg = _sampled_gap_inf(F, G, T, lam, N, ball_radius, rng, sample_count * 4)
    shell = _sphere_min(F, G, T, lam, N, ball_radius, rng, sample_count)
    shell_out = _sphere_min(F, G, T, lam, N, 2 * ball_radius, rng, sample_count)
    bounded_below = bool(lam > 0 and np.isfinite(c0) and shell >= c0 and shell_out >= shell)
    return ConditionResult(
        "A5",
        growth_ok and bounded_below,
        {
            "ratios": ratios,
            "radii": DIVERGENCE_RADII,
            "growth_ok": growth_ok,
            "C0_sampled": c0,
            "C0_is_upper_estimate": True,
            "gap_on_shells": (shell, shell_out),
            "bounded_below": bounded_below,
        },
        arg if not bounded_below else None,
    )


def check_A5_prime(F, G, T, l, s, N=2, threshold=10.0, sample_count=500, rng_seed=0):
    """``s > l``, F/(|x1|^s+|x2|^s) bounded and G/(|x1|^s+|x2|^s) divergent."""
    rng = np.random.default_rng(rng_seed)
    lower = [_min_ratio_on_sphere(F, T, R, l, N, rng, sample_count) for R in DIVERGENCE_RADII]
    upper = [_max_ratio_on_sphere(F, T, R, s, N, rng, sample_count) for R in DIVERGENCE_RADII]
    g_ratio = [_min_ratio_on_sphere(G, T, R, s, N, rng, sample_count) for R in DIVERGENCE_RADII]
    f_bounded = upper[-1] <= upper[0] * (1 + 1e-9)
    ok = s > l and _diverges(lower, threshold) and f_bounded and _diverges(g_ratio, threshold)
    return ConditionResult(
        "A5_prime",
        bool(ok),
        {"F_over_l": lower, "F_over_s": upper, "G_over_s": g_ratio, "radii": DIVERGENCE_RADII},
    )


def check_A6(G, T, N=2):
    z = np.zeros((T, N))
    total = float(np.sum(G.value(np.arange(1, T + 1), z, z)))
    return ConditionResult("A6", total == 0.0, {"sum_G_at_0": total})


_F_CHECKS = {
    "F0": check_F0,
    "F1": check_F1,
    "F2": check_F2,
    "F3": check_F3,
}


def check_F_conditions(spec, which, T, N=2, **params):
    """Run the named F-conditions; ``params`` maps condition name to kwargs.

    ``which`` is an iterable of names among F0, F1, F2, F3, periodic.
    """
    results = {}
    for name in which:
        kwargs = dict(params.get(name, {}))
        if name == "periodic":
            results[name] = check_periodicity(spec, T, N=N, **kwargs)
        elif name in _F_CHECKS:
            results[name] = _F_CHECKS[name](spec, T, N=N, **kwargs)
        else:
            raise InvalidParameterError(f"unknown condition {name!r}")
    return results
