import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from philap.exceptions import DimensionMismatchError, InvalidParameterError
from philap.periodic import (
    PeriodicState,
    WeightSequence,
    coord2_norm,
    et_norm,
    forward_difference,
    norm,
    pair_norm,
    r_norm,
    sup_norm,
    sup_pair_norm,
    weighted_norm,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def sequences(max_T=6, max_N=3):
    return st.tuples(st.integers(2, max_T), st.integers(1, max_N)).flatmap(
        lambda tn: arrays(float, tn, elements=finite)
    )


def test_difference_of_constant_is_zero():
    h = np.full((5, 2), 3.7)
    assert np.all(forward_difference(h) == 0)


def test_difference_wraps():
    assert forward_difference(np.array([1.0, 3.0])).ravel().tolist() == [2.0, -2.0]


@given(sequences())
def test_difference_telescopes(h):
    d = forward_difference(h)
    assert np.allclose(d.sum(axis=0), 0.0, atol=1e-9 * max(1.0, np.abs(h).max()))


def test_norm_values_small_case():
    h = np.array([3.0, 4.0])
    assert sup_norm(h) == 4.0
    assert r_norm(h, 2) == pytest.approx(5.0, rel=1e-15)
    assert 4.0 <= 5.0 <= np.sqrt(2) * 4.0


def test_constant_et_norm():
    h = np.full(4, -1.5)
    assert et_norm(h, 3.0) == pytest.approx((4 * 1.5**3) ** (1 / 3), rel=1e-14)


@pytest.mark.parametrize("kind,params", [
    ("sup", {}), ("r", {"r": 2.5}), ("et", {"theta": 2}), ("bracket", {"l": 3}),
    ("weighted", {"exponent": 3, "diff_weight": np.ones(3), "value_weight": np.ones(3)}),
])
def test_zero_sequence_has_zero_norm(kind, params):
    assert norm(np.zeros((3, 2)), kind, **params) == 0.0


def test_state_norms():
    u = PeriodicState(np.array([[1.0], [-2.0]]), np.array([[0.5], [0.0]]))
    assert coord2_norm(u) == pytest.approx(np.sqrt(1 + 4 + 0.25))
    assert sup_pair_norm(u) == 2.5
    assert pair_norm(u, 2) == pytest.approx(et_norm(u.u1, 2) + et_norm(u.u2, 2))
    assert norm(u, "coord2") == coord2_norm(u)


@pytest.mark.parametrize("r", [1.0, 0.5, -2.0])
def test_bad_exponent(r):
    with pytest.raises(InvalidParameterError):
        r_norm(np.ones(3), r)


def test_unit_weights_match_unweighted():
    h = np.random.default_rng(0).normal(size=(4, 2))
    assert weighted_norm(h, 3.0, np.ones(4), np.ones(4)) == pytest.approx(et_norm(h, 3.0), rel=1e-14)


def test_weight_rejects_nonpositive_and_names_index():
    with pytest.raises(InvalidParameterError, match="2"):
        WeightSequence(np.array([1.0, 1.0, 0.0]))


def test_weight_periodic_call():
    w = WeightSequence(np.array([1.0, 2.0, 3.0]))
    assert w(4) == 1.0 and w(0) == 3.0 and w.min == 1.0


@given(sequences(), sequences())
def test_flat_roundtrip(a, b):
    if a.shape != b.shape:
        b = np.resize(b, a.shape)
    u = PeriodicState(a, b)
    x = u.flat()
    assert x.size == 2 * u.N * u.T
    v = PeriodicState.from_flat(x, u.T, u.N)
    assert np.array_equal(v.u1, u.u1) and np.array_equal(v.u2, u.u2)


def test_state_shape_checks():
    with pytest.raises((InvalidParameterError, DimensionMismatchError)):
        PeriodicState(np.zeros((3, 2)), np.zeros((2, 2)))
    with pytest.raises(InvalidParameterError):
        PeriodicState(np.zeros((1, 2)), np.zeros((1, 2)))


@settings(max_examples=200)
@given(sequences(), st.sampled_from([1.5, 2.0, 3.0, 5.0]))
def test_sup_vs_r_norm_bounds(h, r):
    s, n = sup_norm(h), r_norm(h, r)
    T = h.shape[0]
    assert s <= n * (1 + 1e-12) + 1e-300
    assert n <= T ** (1 / r) * s * (1 + 1e-12) + 1e-300
