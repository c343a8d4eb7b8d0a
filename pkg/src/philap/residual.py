"""Pointwise left-hand sides of the two difference systems and the
summation-by-parts identity that ties them to the action gradient."""

import numpy as np

from .action import coerce_state
from .exceptions import DimensionMismatchError
from .nonlinearity import evaluate
from .periodic import PeriodicState, WeightSequence, as_sequence
from .potentials import potential_gradient

__all__ = [
    "system_residual",
    "summation_by_parts_check",
    "summation_by_parts_sides",
    "discrete_flux_divergence",
]


def discrete_flux_divergence(weight, phi, u_comp):
    """``D[w(t-1) phi(Du(t-1))]`` at t = 1..T, evaluated with explicit wrapping."""
    u = as_sequence(u_comp)
    T = u.shape[0]

    def flux(t):
        # w(t) phi(u(t+1) - u(t)) for any integer t
        k = (t - 1) % T
        return weight.w[k] * potential_gradient(phi, u[(k + 1) % T] - u[k])

    return np.array([flux(t) - flux(t - 1) for t in range(1, T + 1)])


def system_residual(problem, u):
    """Left-hand sides ``(r1(t), r2(t))`` of the system at every t.

    A T-periodic solution has residual zero; ``flat(residual)`` equals the
    negated action gradient.
    """
    u = coerce_state(problem, u)
    w1, w2, w3, w4 = problem.weights
    P1, P2, P3, P4 = problem.potentials
    t = problem.t
    r1 = discrete_flux_divergence(w1, P1, u.u1) - w3.w[:, None] * potential_gradient(P3, u.u1)
    r2 = discrete_flux_divergence(w2, P2, u.u2) - w4.w[:, None] * potential_gradient(P4, u.u2)
    r1 = problem.scale * r1
    r2 = problem.scale * r2
    # grad W with W = F - lam*G + nu*H enters with a plus sign; the action
    # carries the opposite signs, hence the minus on each coefficient
    for coef, spec in problem.nonlinear_terms():
        if coef == 0.0:
            continue
        _, d1, d2 = evaluate(spec, t, u.u1, u.u2)
        r1 = r1 - coef * d1
        r2 = r2 - coef * d2
    return PeriodicState(r1, r2)


def summation_by_parts_sides(weight, phi, u_comp, v_comp):
    """Both sides of

        -sum_t (D[w(t-1) phi(Du(t-1))], v(t)) = sum_t (w(t) phi(Du(t)), Dv(t))
    """
    u = as_sequence(u_comp)
    v = as_sequence(v_comp)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shapes differ: {u.shape} vs {v.shape}")
    if not isinstance(weight, WeightSequence):
        weight = WeightSequence(weight)
    T = u.shape[0]
    lhs = -float(np.sum(discrete_flux_divergence(weight, phi, u) * v))
    rhs = 0.0
    for k in range(T):
        du = u[(k + 1) % T] - u[k]
        dv = v[(k + 1) % T] - v[k]
        rhs += weight.w[k] * float(np.dot(potential_gradient(phi, du), dv))
    return lhs, rhs


def summation_by_parts_check(weight, phi, u_comp, v_comp):
    """Discrepancy ``|LHS - RHS|`` of the summation-by-parts identity."""
    lhs, rhs = summation_by_parts_sides(weight, phi, u_comp, v_comp)
    return abs(lhs - rhs)
