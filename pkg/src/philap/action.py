"""Action functionals of the two periodic systems and their coordinate
gradients.

``ProblemT11`` is the two-parameter system with weights rho_i and the
composite nonlinearity ``W = F - lam*G + nu*H``::

    action(u) = mu*I(u) + Psi(u) + lam*PhiG(u) + nu*Gamma(u)
    I(u)      = sum_t rho1 Phi1(Du1) + rho2 Phi2(Du2) + rho3 Phi3(u1) + rho4 Phi4(u2)
    Psi(u)    = -sum_t F,   PhiG(u) = sum_t G,   Gamma(u) = -sum_t H

``ProblemT12`` is the symmetric system with weights gamma_i::

    action(u) = sum_t g1 Phi1(Du1) + g2 Phi2(Du2) + g3 Phi3(u1) + g4 Phi4(u2) - sum_t F
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatchError, InvalidParameterError
from .nonlinearity import NonlinearitySpec, evaluate
from .periodic import PeriodicState, WeightSequence, forward_difference
from .potentials import PotentialSpec, potential_gradient, potential_value

__all__ = [
    "ProblemT11",
    "ProblemT12",
    "action_value",
    "action_gradient",
    "component_values",
    "I_gradient",
    "pairing",
    "coerce_state",
]


def _weights(ws, T):
    ws = tuple(w if isinstance(w, WeightSequence) else WeightSequence(w) for w in ws)
    if len(ws) != 4:
        raise InvalidParameterError("exactly four weight sequences are required")
    for k, w in enumerate(ws):
        if w.T != T:
            raise DimensionMismatchError(f"weight {k + 1} has period {w.T}, expected {T}")
    return ws


def _potentials(ps):
    ps = tuple(p if isinstance(p, PotentialSpec) else PotentialSpec(p) for p in ps)
    if len(ps) != 4:
        raise InvalidParameterError("exactly four potentials are required")
    return ps


class _ProblemBase:
    """Shared evaluation of the Lagrangian sum over one period."""

    @property
    def t(self):
        return np.arange(1, self.T + 1)

    @property
    def size(self):
        return 2 * self.N * self.T

    @property
    def scale(self):
        return 1.0

    def nonlinear_terms(self):
        """``(coefficient, spec)`` pairs whose sum is the potential part."""
        raise NotImplementedError

    def is_even(self):
        """True when every nonlinear term is even in ``(x1, x2)`` by construction."""
        for _, spec in self.nonlinear_terms():
            if spec.kind == "power_sum_generic":
                if any(term.get("odd", False) for key in ("terms1", "terms2") for term in spec.params.get(key, ())):
                    return False
        return True


@dataclass(frozen=True)
class ProblemT11(_ProblemBase):
    T: int
    N: int
    weights: tuple
    potentials: tuple
    mu: float = 1.0
    lam: float = 1.0
    nu: float = 0.0
    F: NonlinearitySpec = field(default_factory=NonlinearitySpec.zero)
    G: NonlinearitySpec = field(default_factory=NonlinearitySpec.zero)
    H: NonlinearitySpec = field(default_factory=NonlinearitySpec.zero)

    def __post_init__(self):
        _check_TN(self.T, self.N)
        object.__setattr__(self, "weights", _weights(self.weights, self.T))
        object.__setattr__(self, "potentials", _potentials(self.potentials))
        for name in ("mu", "lam", "nu"):
            val = float(getattr(self, name))
            if not np.isfinite(val):
                raise InvalidParameterError(f"{name} must be finite")
            object.__setattr__(self, name, val)

    system = "T11"

    @property
    def scale(self):
        return self.mu

    def nonlinear_terms(self):
        return ((-1.0, self.F), (self.lam, self.G), (-self.nu, self.H))

    def with_params(self, **changes):
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return ProblemT11(**data)


@dataclass(frozen=True)
class ProblemT12(_ProblemBase):
    """Symmetric system; ``q`` is the growth exponent of Phi1, Phi3 and ``p``
    that of Phi2, Phi4."""

    T: int
    N: int
    weights: tuple
    potentials: tuple
    F: NonlinearitySpec = field(default_factory=NonlinearitySpec.zero)
    q: float = 2.0
    p: float = 2.0

    def __post_init__(self):
        _check_TN(self.T, self.N)
        object.__setattr__(self, "weights", _weights(self.weights, self.T))
        object.__setattr__(self, "potentials", _potentials(self.potentials))
        for name in ("q", "p"):
            if not float(getattr(self, name)) > 1:
                raise InvalidParameterError(f"{name} must be > 1")

    system = "T12"

    def nonlinear_terms(self):
        return ((-1.0, self.F),)

    def with_params(self, **changes):
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return ProblemT12(**data)


def _check_TN(T, N):
    if int(T) != T or T < 2:
        raise InvalidParameterError(f"period T must be an integer >= 2, got {T}")
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"dimension N must be an integer >= 1, got {N}")


def coerce_state(problem, u):
    """Accept a :class:`PeriodicState` or a flat vector and check its shape."""
    if isinstance(u, PeriodicState):
        if u.T != problem.T or u.N != problem.N:
            raise DimensionMismatchError(
                f"state has (T, N) = ({u.T}, {u.N}), problem has ({problem.T}, {problem.N})"
            )
        return u
    return PeriodicState.from_flat(u, problem.T, problem.N)


def _I_parts(problem, u):
    w1, w2, w3, w4 = (w.w for w in problem.weights)
    P1, P2, P3, P4 = problem.potentials
    du1 = forward_difference(u.u1)
    du2 = forward_difference(u.u2)
    return (
        w1 * potential_value(P1, du1)
        + w2 * potential_value(P2, du2)
        + w3 * potential_value(P3, u.u1)
        + w4 * potential_value(P4, u.u2)
    )


def _nonlinear_sums(problem, u):
    t = problem.t
    return [float(np.sum(evaluate(spec, t, u.u1, u.u2)[0])) for _, spec in problem.nonlinear_terms()]


def action_value(problem, u):
    u = coerce_state(problem, u)
    total = problem.scale * float(np.sum(_I_parts(problem, u)))
    for (coef, _), s in zip(problem.nonlinear_terms(), _nonlinear_sums(problem, u)):
        if coef != 0.0:
            total += coef * s
    return total


def component_values(problem, u):
    """``(I, Psi, PhiG, Gamma)`` for the two-parameter system."""
    if not isinstance(problem, ProblemT11):
        raise InvalidParameterError("component_values needs a ProblemT11")
    u = coerce_state(problem, u)
    I = float(np.sum(_I_parts(problem, u)))
    sF, sG, sH = _nonlinear_sums(problem, u)
    return I, -sF, sG, -sH


def I_gradient(problem, u):
    """Flat gradient of the unscaled ``I`` part.

    Coefficient of ``v(s)`` in ``sum_t w(t) (phi(Du(t)), Dv(t))`` is
    ``w(s-1) phi(Du(s-1)) - w(s) phi(Du(s))``.
    """
    u = coerce_state(problem, u)
    w1, w2, w3, w4 = (w.w[:, None] for w in problem.weights)
    P1, P2, P3, P4 = problem.potentials
    flux1 = w1 * potential_gradient(P1, forward_difference(u.u1))
    flux2 = w2 * potential_gradient(P2, forward_difference(u.u2))
    g1 = np.roll(flux1, 1, axis=0) - flux1 + w3 * potential_gradient(P3, u.u1)
    g2 = np.roll(flux2, 1, axis=0) - flux2 + w4 * potential_gradient(P4, u.u2)
    return np.concatenate([g1.ravel(), g2.ravel()])


def action_gradient(problem, u):
    """The flat vector ``g`` with ``<action'(u), v> = g . v``."""
    u = coerce_state(problem, u)
    g = problem.scale * I_gradient(problem, u)
    t = problem.t
    for coef, spec in problem.nonlinear_terms():
        if coef == 0.0:
            continue
        _, d1, d2 = evaluate(spec, t, u.u1, u.u2)
        g = g + coef * np.concatenate([d1.ravel(), d2.ravel()])
    return g


def pairing(problem, u, v):
    """``<action'(u), v>`` summed term by term as the bilinear form is written.

    Kept independent of :func:`action_gradient` (no rearrangement of the
    difference terms) so the two can check each other.
    """
    u = coerce_state(problem, u)
    v = coerce_state(problem, v)
    w1, w2, w3, w4 = problem.weights
    P1, P2, P3, P4 = problem.potentials
    T = problem.T
    total = 0.0
    for k in range(T):
        t = k + 1
        nxt = (k + 1) % T
        du1, du2 = u.u1[nxt] - u.u1[k], u.u2[nxt] - u.u2[k]
        dv1, dv2 = v.u1[nxt] - v.u1[k], v.u2[nxt] - v.u2[k]
        lin = (
            w1(t) * np.dot(potential_gradient(P1, du1), dv1)
            + w2(t) * np.dot(potential_gradient(P2, du2), dv2)
            + w3(t) * np.dot(potential_gradient(P3, u.u1[k]), v.u1[k])
            + w4(t) * np.dot(potential_gradient(P4, u.u2[k]), v.u2[k])
        )
        total += problem.scale * lin
        for coef, spec in problem.nonlinear_terms():
            if coef == 0.0:
                continue
            _, d1, d2 = evaluate(spec, t, u.u1[k], u.u2[k])
            total += coef * (np.dot(d1, v.u1[k]) + np.dot(d2, v.u2[k]))
    return float(total)
