import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_potential, random_problem
from philap.action import action_gradient
from philap.config import example51_problem
from philap.exceptions import DimensionMismatchError
from philap.periodic import PeriodicState, WeightSequence
from philap.potentials import PotentialSpec, potential_gradient
from philap.residual import (
    discrete_flux_divergence,
    summation_by_parts_check,
    summation_by_parts_sides,
    system_residual,
)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_residual_is_negated_gradient(seed):
    rng = np.random.default_rng(seed)
    p = random_problem(rng)
    x = rng.normal(size=p.size) * 2
    r = system_residual(p, x).flat()
    g = action_gradient(p, x)
    assert np.max(np.abs(r + g)) <= 1e-12 * max(1.0, np.max(np.abs(g)))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_summation_by_parts(seed):
    rng = np.random.default_rng(seed)
    T, N = int(rng.integers(2, 7)), int(rng.integers(1, 4))
    w = WeightSequence(rng.uniform(0.2, 3.0, size=T))
    phi = random_potential(rng)
    u, v = rng.normal(size=(T, N)), rng.normal(size=(T, N))
    lhs, rhs = summation_by_parts_sides(w, phi, u, v)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs), abs(rhs))


def test_flux_divergence_by_hand():
    # T = 3, N = 1, phi = identity, unit weights: D^2 u(t-1) = u(t+1) - 2u(t) + u(t-1)
    u = np.array([1.0, 4.0, 9.0])
    got = discrete_flux_divergence(WeightSequence.ones(3), PotentialSpec.power(2.0), u).ravel()
    want = np.roll(u, -1) - 2 * u + np.roll(u, 1)
    assert np.array_equal(got, want)


def test_residual_zero_at_trivial_solution():
    p = example51_problem()
    assert not np.any(system_residual(p, np.zeros(p.size)).flat())


def test_residual_example51_constant():
    # u constant: Delta-terms vanish, r = -mu*2u + 3u|u| - 4 lam u^3 + nu dH
    p = example51_problem(mu=1.0, lam=1.0, nu=0.0)
    res = system_residual(p, np.full(4, 0.75))
    want = -2 * 0.75 + 3 * 0.75**2 - 4 * 0.75**3
    assert np.allclose(res.flat(), want, rtol=1e-14)


def test_sbp_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        summation_by_parts_check(np.ones(3), PotentialSpec.power(2.0), np.zeros(3), np.zeros(4))


def test_sbp_check_returns_discrepancy():
    rng = np.random.default_rng(1)
    d = summation_by_parts_check(np.ones(4), PotentialSpec.power(3.0), rng.normal(size=4), rng.normal(size=4))
    assert 0.0 <= d <= 1e-12
