import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_problem
from philap.action import (
    ProblemT11,
    ProblemT12,
    action_gradient,
    action_value,
    component_values,
    pairing,
)
from philap.config import example51_problem, example52_problem
from philap.exceptions import DimensionMismatchError, InvalidParameterError
from philap.nonlinearity import T_INDEPENDENT
from philap.periodic import PeriodicState
from philap.potentials import PotentialSpec


def _fd(problem, x):
    g = np.empty_like(x)
    for j in range(x.size):
        h = 1e-6 * max(1.0, abs(x[j]))
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (action_value(problem, x + e) - action_value(problem, x - e)) / (2 * h)
    return g


def test_example51_constant_state():
    p = example51_problem(mu=1.0, lam=1.0, nu=0.0)
    u = np.full(4, 0.75)
    I, psi, phig, gamma = component_values(p, u)
    assert I == pytest.approx(2.25, rel=1e-15)
    assert psi == pytest.approx(-1.6875, rel=1e-15)
    assert phig == pytest.approx(1.265625, rel=1e-15)
    assert action_value(p, u) == pytest.approx(1.828125, rel=1e-14)


def test_value_and_gradient_vanish_at_zero():
    for p in (example51_problem(), example52_problem(N=2)):
        assert action_value(p, np.zeros(p.size)) == 0.0
        assert not np.any(action_gradient(p, np.zeros(p.size)))


def test_quadratic_action_by_hand():
    # all Phi = |y|^2/2, unit weights, no nonlinear part
    T, N = 3, 1
    p = ProblemT12(T, N, (np.ones(T),) * 4, (PotentialSpec.power(2.0),) * 4)
    u1, u2 = np.array([1.0, 2.0, 4.0]), np.array([0.0, -1.0, 1.0])
    du1, du2 = np.roll(u1, -1) - u1, np.roll(u2, -1) - u2
    want = 0.5 * (du1 @ du1 + du2 @ du2 + u1 @ u1 + u2 @ u2)
    x = np.concatenate([u1, u2])
    assert action_value(p, x) == pytest.approx(want, rel=1e-15)
    # gradient of the quadratic form: (2I - S - S^T + I) u
    g1 = 2 * u1 - np.roll(u1, 1) - np.roll(u1, -1) + u1
    g2 = 2 * u2 - np.roll(u2, 1) - np.roll(u2, -1) + u2
    assert np.allclose(action_gradient(p, x), np.concatenate([g1, g2]), rtol=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_gradient_matches_fd(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng)
    x = rng.normal(size=p.size) * 10.0 ** rng.uniform(-0.5, 0.5)
    g = action_gradient(p, x)
    fd = _fd(p, x)
    assert np.max(np.abs(g - fd)) <= 1e-6 * max(1.0, np.max(np.abs(g)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_pairing_matches_gradient(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng)
    x, v = rng.normal(size=p.size), rng.normal(size=p.size)
    g = action_gradient(p, x)
    scale = np.abs(g) @ np.abs(v) + 1.0
    assert abs(pairing(p, x, v) - g @ v) <= 1e-12 * scale


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_shift_equivariance(seed):
    # shifting time and weights together leaves the action unchanged
    rng = np.random.default_rng(seed)
    p = random_problem(rng)
    if any(coef and spec.kind not in T_INDEPENDENT for coef, spec in p.nonlinear_terms()):
        return
    u = PeriodicState.from_flat(rng.normal(size=p.size), p.T, p.N)
    shifted = p.with_params(weights=tuple(w.shifted(1) for w in p.weights))
    assert action_value(shifted, u.shifted(1)) == pytest.approx(action_value(p, u), rel=1e-12, abs=1e-12)


def test_even_problem_has_even_action(rng):
    p = example52_problem(N=2)
    x = rng.normal(size=p.size)
    assert action_value(p, x) == action_value(p, -x)
    assert p.is_even()


def test_shape_mismatch():
    p = example51_problem()
    with pytest.raises(DimensionMismatchError):
        action_value(p, PeriodicState.zeros(3, 1))
    with pytest.raises((DimensionMismatchError, InvalidParameterError)):
        action_value(p, np.zeros(5))


def test_invalid_problems():
    with pytest.raises(InvalidParameterError):
        ProblemT11(1, 1, (np.ones(1),) * 4, (PotentialSpec.power(2.0),) * 4)
    with pytest.raises(DimensionMismatchError):
        ProblemT11(3, 1, (np.ones(2),) * 4, (PotentialSpec.power(2.0),) * 4)
    with pytest.raises(InvalidParameterError):
        ProblemT12(3, 1, (np.ones(3),) * 4, (PotentialSpec.power(2.0),) * 4, q=1.0)
    with pytest.raises(InvalidParameterError):
        component_values(example52_problem(N=1), np.zeros(8))
