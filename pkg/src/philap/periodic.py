"""T-periodic vector sequences, the periodic forward difference and the norms
used on them.

A sequence ``h`` in E_T is stored as an array of shape ``(T, N)``; row ``k``
holds ``h(k + 1)`` so that the natural index range is ``t = 1..T`` and every
access outside it wraps periodically.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError

__all__ = [
    "PeriodicState",
    "WeightSequence",
    "as_sequence",
    "wrap_index",
    "forward_difference",
    "norm",
    "sup_norm",
    "r_norm",
    "et_norm",
    "weighted_norm",
    "coord2_norm",
    "sup_pair_norm",
    "pair_norm",
]


def wrap_index(t, T):
    """Map any integer ``t`` onto ``1..T`` periodically."""
    return ((np.asarray(t) - 1) % T) + 1


def as_sequence(h, T=None, N=None):
    """Coerce ``h`` to a float array of shape ``(T, N)``.

    A 1-D array is read as a scalar sequence (``N = 1``).
    """
    arr = np.asarray(h, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionMismatchError(f"expected a (T, N) array, got shape {arr.shape}")
    if T is not None and arr.shape[0] != T:
        raise DimensionMismatchError(f"expected period {T}, got {arr.shape[0]}")
    if N is not None and arr.shape[1] != N:
        raise DimensionMismatchError(f"expected dimension {N}, got {arr.shape[1]}")
    if arr.shape[0] < 2:
        raise InvalidParameterError("period T must be at least 2")
    return arr


def _readonly(arr):
    arr = np.array(arr, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PeriodicState:
    """An element ``u = (u1, u2)`` of E = E_T x E_T.

    The flat coordinate view orders ``u1(1), ..., u1(T)`` then
    ``u2(1), ..., u2(T)`` with each point in R^N contiguous.
    """

    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        u1 = as_sequence(self.u1)
        u2 = as_sequence(self.u2, T=u1.shape[0], N=u1.shape[1])
        object.__setattr__(self, "u1", _readonly(u1))
        object.__setattr__(self, "u2", _readonly(u2))

    @property
    def T(self):
        return self.u1.shape[0]

    @property
    def N(self):
        return self.u1.shape[1]

    @property
    def size(self):
        return 2 * self.N * self.T

    def flat(self):
        return np.concatenate([self.u1.ravel(), self.u2.ravel()])

    @classmethod
    def from_flat(cls, x, T, N):
        x = np.asarray(x, dtype=float)
        if x.shape != (2 * N * T,):
            raise DimensionMismatchError(
                f"flat vector must have length 2NT = {2 * N * T}, got {x.shape}"
            )
        parts = x.reshape(2, T, N)
        return cls(parts[0], parts[1])

    @classmethod
    def zeros(cls, T, N):
        return cls(np.zeros((T, N)), np.zeros((T, N)))

    def __neg__(self):
        return PeriodicState(-self.u1, -self.u2)

    def shifted(self, k=1):
        """The state ``t -> u(t + k)``."""
        return PeriodicState(np.roll(self.u1, -k, axis=0), np.roll(self.u2, -k, axis=0))


@dataclass(frozen=True)
class WeightSequence:
    """A strictly positive T-periodic scalar weight ``w(1), ..., w(T)``."""

    w: np.ndarray = field()

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.shape[0] < 2:
            raise InvalidParameterError("weights must be a 1-D array of length T >= 2")
        bad = np.flatnonzero(~(w > 0) | ~np.isfinite(w))
        if bad.size:
            k = int(bad[0])
            raise InvalidParameterError(
                f"weight must be strictly positive, got w({k + 1}) = {w[k]} at index {k}"
            )
        object.__setattr__(self, "w", _readonly(w))

    @property
    def T(self):
        return self.w.shape[0]

    @property
    def min(self):
        return float(self.w.min())

    @property
    def max(self):
        return float(self.w.max())

    def __call__(self, t):
        return self.w[wrap_index(t, self.T) - 1]

    def shifted(self, k=1):
        return WeightSequence(np.roll(self.w, -k))

    @classmethod
    def ones(cls, T):
        return cls(np.ones(T))


def forward_difference(h):
    """``Dh(t) = h(t + 1) - h(t)`` with ``h(T + 1) = h(1)``."""
    h = as_sequence(h)
    return np.roll(h, -1, axis=0) - h


def _check_exponent(r, name="exponent"):
    if not np.isfinite(r) or r <= 1:
        raise InvalidParameterError(f"{name} must be > 1, got {r}")


def _pointwise(h):
    return np.linalg.norm(as_sequence(h), axis=1)


def _scaled_power_sum(parts, weights, e):
    """``(sum_k sum w_k a_k^e)^(1/e)`` computed relative to the largest entry,
    so tiny or huge sequences neither underflow nor overflow."""
    scale = max(float(np.max(a)) if np.size(a) else 0.0 for a in parts)
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    total = sum(float(np.sum(w * (a / scale) ** e)) for a, w in zip(parts, weights))
    return scale * total ** (1.0 / e)


def sup_norm(h):
    return float(_pointwise(h).max())


def r_norm(h, r):
    _check_exponent(r, "r")
    return _scaled_power_sum([_pointwise(h)], [1.0], r)


def et_norm(h, theta):
    """``(sum |Dh|^theta + sum |h|^theta)^(1/theta)``.

    With ``theta = l`` this is the bracket norm ``||.||_[E_T]``.
    """
    _check_exponent(theta, "theta")
    h = as_sequence(h)
    dh = np.linalg.norm(forward_difference(h), axis=1)
    return _scaled_power_sum([dh, _pointwise(h)], [1.0, 1.0], theta)


def weighted_norm(h, exponent, diff_weight, value_weight):
    """``(sum w_d |Dh|^q + sum w_v |h|^q)^(1/q)`` as used on system (1.5)."""
    _check_exponent(exponent)
    h = as_sequence(h)
    wd = _as_weight(diff_weight, h.shape[0])
    wv = _as_weight(value_weight, h.shape[0])
    dh = np.linalg.norm(forward_difference(h), axis=1)
    return _scaled_power_sum([dh, _pointwise(h)], [wd, wv], exponent)


def _as_weight(w, T):
    if not isinstance(w, WeightSequence):
        w = WeightSequence(w)
    if w.T != T:
        raise DimensionMismatchError(f"weight period {w.T} does not match sequence period {T}")
    return w.w


def _flat(u):
    if isinstance(u, PeriodicState):
        return u.flat()
    return np.asarray(u, dtype=float).ravel()


def coord2_norm(u):
    """Euclidean norm of the flat coordinates (standard basis of R^{2NT})."""
    return float(np.linalg.norm(_flat(u)))


def sup_pair_norm(u):
    """``||u1||_inf + ||u2||_inf``."""
    return sup_norm(u.u1) + sup_norm(u.u2)


def pair_norm(u, theta):
    """``||u1||_{E_T} + ||u2||_{E_T}``."""
    return et_norm(u.u1, theta) + et_norm(u.u2, theta)


_SEQUENCE_KINDS = {
    "sup": lambda h, **kw: sup_norm(h),
    "r": lambda h, r, **kw: r_norm(h, r),
    "et": lambda h, theta, **kw: et_norm(h, theta),
    "bracket": lambda h, l, **kw: et_norm(h, l),
    "weighted": lambda h, exponent, diff_weight, value_weight, **kw: weighted_norm(
        h, exponent, diff_weight, value_weight
    ),
}

_STATE_KINDS = {
    "coord2": lambda u, **kw: coord2_norm(u),
    "sup_pair": lambda u, **kw: sup_pair_norm(u),
    "pair": lambda u, theta, **kw: pair_norm(u, theta),
}


def norm(h, kind="sup", **params):
    """Dispatch to one of the named norms.

    Sequence kinds: ``sup``, ``r`` (``r=``), ``et`` (``theta=``), ``bracket``
    (``l=``), ``weighted`` (``exponent=``, ``diff_weight=``, ``value_weight=``).
    State kinds take a :class:`PeriodicState`: ``coord2``, ``sup_pair``,
    ``pair`` (``theta=``).
    """
    if kind in _SEQUENCE_KINDS:
        return _SEQUENCE_KINDS[kind](h, **params)
    if kind in _STATE_KINDS:
        if kind != "coord2" and not isinstance(h, PeriodicState):
            raise InvalidParameterError(f"norm kind {kind!r} needs a PeriodicState")
        return _STATE_KINDS[kind](h, **params)
    raise InvalidParameterError(f"unknown norm kind {kind!r}")
