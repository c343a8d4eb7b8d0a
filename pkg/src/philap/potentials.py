"""Power-sum potentials ``Phi(y) = sum_k c_k |y|^p_k / p_k`` and their
gradients ``phi = grad Phi``, with sample-based checks of convexity,
monotonicity and growth.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError

__all__ = [
    "PotentialSpec",
    "potential_value",
    "potential_gradient",
    "A1Report",
    "check_A1",
    "A3Report",
    "check_A3",
    "GrowthReport",
    "check_growth",
]

FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class PotentialSpec:
    """Nonempty list of ``(c, p)`` terms with ``c > 0`` and ``p > 1``."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((float(c), float(p)) for c, p in self.terms)
        if not terms:
            raise InvalidParameterError("a potential needs at least one term")
        for k, (c, p) in enumerate(terms):
            if not (np.isfinite(c) and c > 0):
                raise InvalidParameterError(f"term {k}: coefficient must be positive, got c={c}")
            if not (np.isfinite(p) and p > 1):
                raise InvalidParameterError(f"term {k}: exponent must be > 1, got p={p}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def power(cls, p, c=1.0):
        return cls(((c, p),))

    @property
    def min_exponent(self):
        return min(p for _, p in self.terms)

    @property
    def max_exponent(self):
        return max(p for _, p in self.terms)

    def value(self, y):
        return potential_value(self, y)

    def gradient(self, y):
        return potential_gradient(self, y)

    def to_list(self):
        return [{"c": c, "p": p} for c, p in self.terms]

    @classmethod
    def from_list(cls, records):
        return cls(tuple((rec["c"], rec["p"]) for rec in records))


def radial_value(spec, s):
    """``Phi`` as a function of ``s = |y|``."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for c, p in spec.terms:
        out = out + (c / p) * s**p
    return out


def radial_derivative_factor(spec, s):
    """``sum_k c_k s^(p_k - 2)`` with the ``s = 0`` entries set to 0.

    ``phi(y) = factor(|y|) * y``; the convention ``phi(0) = 0`` is exact since
    every ``p_k > 1``.
    """
    s = np.asarray(s, dtype=float)
    pos = s > 0
    safe = np.where(pos, s, 1.0)
    out = np.zeros_like(s)
    for c, p in spec.terms:
        out = out + c * safe ** (p - 2)
    return np.where(pos, out, 0.0)


def potential_value(spec, y):
    """``Phi(y)`` for ``y`` of shape ``(..., N)``; returns shape ``(...)``."""
    y = np.asarray(y, dtype=float)
    return radial_value(spec, np.linalg.norm(y, axis=-1))


def potential_gradient(spec, y):
    """``phi(y) = grad Phi(y)``, same shape as ``y``."""
    y = np.asarray(y, dtype=float)
    s = np.linalg.norm(y, axis=-1)
    return radial_derivative_factor(spec, s)[..., None] * y


def fd_gradient(fun, y, rel_step=FD_REL_STEP):
    """Central-difference gradient of a scalar function of one point."""
    y = np.asarray(y, dtype=float)
    h = rel_step * max(1.0, float(np.linalg.norm(y)))
    g = np.empty_like(y)
    for i in range(y.size):
        e = np.zeros_like(y)
        e.flat[i] = h
        g.flat[i] = (fun(y + e) - fun(y - e)) / (2 * h)
    return g


def _random_points(rng, n, N, log10_range=(-3.0, 3.0)):
    direction = rng.normal(size=(n, N))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = 10.0 ** rng.uniform(*log10_range, size=n)
    return direction * radius[:, None]


@dataclass
class A1Report:
    passed: bool
    gradient_consistency_max_err: float
    strict_convexity_witnessed: bool
    worst_gradient_point: np.ndarray = None
    convexity_witness: tuple = None


def check_A1(spec, sample_count=1000, rng_seed=0, N=2):
    """Sample evidence for strict convexity, ``Phi(0) = 0`` and ``phi = grad Phi``.

    Midpoint convexity ``Phi((x+y)/2) < (Phi(x)+Phi(y))/2`` is tested on random
    pairs; gradient consistency uses central differences with relative
    error ``|phi - FD| / max(1, |phi|)``.
    """
    if sample_count < 1:
        raise InvalidParameterError("sample_count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    x = _random_points(rng, sample_count, N, (-2.0, 1.5))
    y = _random_points(rng, sample_count, N, (-2.0, 1.5))
    mid = potential_value(spec, 0.5 * (x + y))
    avg = 0.5 * (potential_value(spec, x) + potential_value(spec, y))
    gap = avg - mid
    convex = bool(np.all(gap > 0))
    witness = None
    if not convex:
        k = int(np.argmin(gap))
        witness = (x[k], y[k])

    worst, worst_pt = 0.0, None
    for pt in x:
        g = potential_gradient(spec, pt)
        fd = fd_gradient(lambda z: float(potential_value(spec, z)), pt)
        err = float(np.linalg.norm(g - fd) / max(1.0, np.linalg.norm(g)))
        if err > worst:
            worst, worst_pt = err, pt
    at_zero = float(potential_value(spec, np.zeros(N))) == 0.0 and not np.any(
        potential_gradient(spec, np.zeros(N))
    )
    return A1Report(
        passed=convex and worst <= 1e-6 and at_zero,
        gradient_consistency_max_err=worst,
        strict_convexity_witnessed=convex,
        worst_gradient_point=worst_pt,
        convexity_witness=witness,
    )


@dataclass
class A3Report:
    passed: bool
    estimate: float
    witness: tuple = None


def check_A3(spec, theta, sample_count=10000, rng_seed=0, N=2):
    """Estimate ``c = min <phi(x) - phi(y), x - y> / |x - y|^theta`` over samples.

    The estimate upper-bounds the true constant; a positive value is only
    sample-scale evidence for the uniform monotonicity condition.
    """
    if not theta > 1:
        raise InvalidParameterError(f"theta must be > 1, got {theta}")
    rng = np.random.default_rng(rng_seed)
    x = _random_points(rng, sample_count, N, (-2.0, 2.0))
    y = _random_points(rng, sample_count, N, (-2.0, 2.0))
    # a quarter of the pairs are close together to probe the local regime
    k = sample_count // 4
    y[:k] = x[:k] + _random_points(rng, k, N, (-4.0, -1.0))
    d = x - y
    dist = np.linalg.norm(d, axis=1)
    keep = dist > 0
    inner = np.sum((potential_gradient(spec, x) - potential_gradient(spec, y)) * d, axis=1)
    ratio = inner[keep] / dist[keep] ** theta
    j = int(np.argmin(ratio))
    est = float(ratio[j])
    idx = np.flatnonzero(keep)[j]
    return A3Report(passed=est > 0, estimate=est, witness=(x[idx], y[idx]))


@dataclass
class GrowthReport:
    """Sampled constants for ``a|x|^e <= Phi(x) <= b|x|^e`` and ``Phi <= d|x|^e + m``."""

    exponent: float
    a: float
    b: float
    d: float
    m: float
    upper_bounded: bool
    two_sided: bool
    local_exponents: tuple


def check_growth(spec, exponent, sample_count=400, radius_range=(1e-3, 1e3), rng_seed=0, N=2):
    """Fit growth constants of ``Phi`` against ``|x|^exponent`` on sampled radii.

    ``a``/``b`` are the min/max of ``Phi(x)/|x|^exponent``; ``m`` is the max of
    ``Phi`` on the unit ball and ``d`` the max of ``(Phi - m)/|x|^exponent``
    outside it. ``upper_bounded`` is False when the ratio still grows across
    the last decade of ``radius_range``, i.e. no ``d`` (and no ``b``) exists.
    ``two_sided`` additionally needs the ratio to stay flat at the small end
    and not decay at the large end, which for a power sum means every term
    has exactly this exponent. Local log-slopes of ``Phi`` at both ends of the
    range are reported.
    """
    if not exponent > 0:
        raise InvalidParameterError(f"exponent must be positive, got {exponent}")
    lo, hi = radius_range
    rng = np.random.default_rng(rng_seed)
    radii = np.sort(10.0 ** rng.uniform(np.log10(lo), np.log10(hi), size=sample_count))
    radii = np.concatenate([[lo], radii, [hi]])
    direction = rng.normal(size=(radii.size, N))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    pts = direction * radii[:, None]
    vals = potential_value(spec, pts)
    ratio = vals / radii**exponent
    a, b = float(ratio.min()), float(ratio.max())

    inside = radii <= 1.0
    m = float(vals[inside].max()) if inside.any() else float(radial_value(spec, 1.0))
    outside = ~inside
    d = float(np.max((vals[outside] - m) / radii[outside] ** exponent)) if outside.any() else 0.0
    d = max(d, 0.0)

    def ratio_at(s):
        return float(radial_value(spec, s)) / s**exponent

    def slope_at(s):
        return float(
            (np.log(radial_value(spec, s * 1.01)) - np.log(radial_value(spec, s / 1.01)))
            / (2 * np.log(1.01))
        )

    tol = 1e-9
    big, big_prev = ratio_at(hi), ratio_at(hi / 10.0)
    small, small_next = ratio_at(lo), ratio_at(lo * 10.0)
    upper_bounded = big <= big_prev * (1 + tol)
    flat_small = abs(small - small_next) <= tol * small_next
    two_sided = upper_bounded and big >= big_prev * (1 - tol) and flat_small
    return GrowthReport(
        exponent=float(exponent),
        a=a,
        b=b,
        d=d,
        m=m,
        upper_bounded=bool(upper_bounded),
        two_sided=bool(two_sided),
        local_exponents=(slope_at(lo), slope_at(hi)),
    )
