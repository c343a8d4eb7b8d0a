import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from philap.config import example52_weights
from philap.exceptions import InvalidParameterError
from philap.nonlinearity import (
    NonlinearitySpec,
    T_INDEPENDENT,
    check_A5,
    check_A5_prime,
    check_A6,
    check_F0,
    check_F1,
    check_F2,
    check_F3,
    check_F_conditions,
    check_periodicity,
    evaluate,
)

F51 = NonlinearitySpec("example51_F")
G51 = NonlinearitySpec("example51_G")
F52 = NonlinearitySpec("example52_F")
ALL_KINDS = [
    NonlinearitySpec("remark11_F", {"l": 3.0, "T": 3}),
    NonlinearitySpec("remark11_G", {"l": 3.0, "T": 3}),
    NonlinearitySpec("remark11_H", {"T": 3}),
    F51,
    G51,
    NonlinearitySpec("example51_H", {"T": 2}),
    F52,
    NonlinearitySpec("power_sum_generic", {"terms1": [{"c": 1.0, "p": 2.5}], "terms2": [{"c": 0.5, "p": 3.0, "odd": True}]}),
]


def test_example51_F_at_ones():
    v, g1, g2 = evaluate(F51, 1, np.array([1.0]), np.array([1.0]))
    assert v == 2.0 and g1[0] == 3.0 and g2[0] == 3.0


def test_example51_G_at_three_quarters():
    v, _, _ = evaluate(G51, 2, np.array([0.75]), np.array([0.75]))
    assert v == pytest.approx(81.0 / 128.0, rel=1e-15)


def test_example52_F_vanishes_at_origin():
    v, g1, g2 = evaluate(F52, 3, np.zeros(2), np.zeros(2))
    assert v == 0.0 and not np.any(g1) and not np.any(g2)


def test_example52_F_formula():
    t = 1
    x1, x2 = np.array([0.3, -0.4]), np.array([1.0, 2.0])
    s, c = abs(np.sin(np.pi * t / 4)), np.cos(np.pi * t / 4) ** 2
    want = (s + 1) * 0.5**1.5 + (c + 1) * 5.0
    assert evaluate(F52, t, x1, x2)[0] == pytest.approx(want, rel=1e-14)


@pytest.mark.parametrize("spec", ALL_KINDS, ids=lambda s: s.kind)
def test_gradient_matches_fd(spec):
    rng = np.random.default_rng(3)
    N = 2
    worst = 0.0
    for _ in range(125):
        t = int(rng.integers(1, 5))
        x = rng.normal(size=2 * N) * 10.0 ** rng.uniform(-1, 1)
        _, g1, g2 = evaluate(spec, t, x[:N], x[N:])
        g = np.concatenate([g1, g2])
        fd = np.empty_like(x)
        for j in range(x.size):
            h = 1e-6 * max(1.0, abs(x[j]))
            e = np.zeros_like(x)
            e[j] = h
            fd[j] = (evaluate(spec, t, (x + e)[:N], (x + e)[N:])[0] - evaluate(spec, t, (x - e)[:N], (x - e)[N:])[0]) / (2 * h)
        worst = max(worst, np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(g))))
    assert worst <= 1e-6


@pytest.mark.parametrize("spec", ALL_KINDS, ids=lambda s: s.kind)
def test_periodic_in_t(spec):
    T = spec.params.get("T", 4)
    res = check_periodicity(spec, T)
    assert res.passed
    assert res.details["t_independent"] == (spec.kind in T_INDEPENDENT)


@settings(max_examples=100)
@given(st.integers(1, 8), st.lists(st.floats(-50, 50), min_size=4, max_size=4))
def test_example52_F_even_bit_exact(t, xs):
    x1, x2 = np.array(xs[:2]), np.array(xs[2:])
    assert evaluate(F52, t, x1, x2)[0] == evaluate(F52, t, -x1, -x2)[0]


def test_F0_example52_equality():
    w = example52_weights()
    res = check_F0(F52, 4, 1.5, 2.0, w[2], w[1], np.zeros(4), q=5, p=3)
    assert res.passed
    assert abs(res.details["max_rel_excess"]) <= 1e-12


def test_F3_example52():
    assert check_F3(F52, 4, 2.0, 2.5, 1.0, 1.0, 0.1, q=5, p=3).passed


def test_F3_fails_for_negated_coefficient():
    neg = NonlinearitySpec("power_sum_generic", {"terms1": [{"c": -1.0, "p": 2.0}], "terms2": [{"c": 1.0, "p": 2.0}]})
    res = check_F3(neg, 4, 2.0, 2.5, 1.0, 1.0, 0.1, q=5, p=3)
    assert not res.passed and res.witness is not None


def test_F1_F2_example52():
    assert check_F1(F52, 4).passed and check_F2(F52, 4).passed


def test_F2_fails_for_odd_term_with_witness():
    odd = NonlinearitySpec("power_sum_generic", {"terms1": [{"c": 1.0, "p": 3.0, "odd": True}]})
    res = check_F2(odd, 4)
    assert not res.passed
    t, x1, x2 = res.witness
    assert evaluate(odd, t, x1, x2)[0] != evaluate(odd, t, -x1, -x2)[0]


def test_A6_example51():
    assert check_A6(G51, 2, N=1).passed


def test_A5_example51():
    res = check_A5(F51, G51, 2, 2.5, 0.05, N=1)
    assert res.passed
    # per coordinate min of 0.05 a^4 - a^3 is at a = 15
    assert res.details["C0_sampled"] == pytest.approx(-1687.5, rel=1e-8)


def test_A5_fails_when_F_too_weak():
    res = check_A5(F51, G51, 2, 3.5, 0.05, N=1)
    assert not res.passed and not res.details["growth_ok"]


def test_A5_prime_example51():
    assert check_A5_prime(F51, G51, 2, 2.5, 3.5, N=1).passed


def test_periodicity_detects_wrong_period():
    assert not check_periodicity(NonlinearitySpec("remark11_H", {"T": 3}), 4).passed


def test_dispatcher_and_unknown_name():
    out = check_F_conditions(F52, ["F1", "F2", "periodic"], 4)
    assert all(r.passed for r in out.values())
    with pytest.raises(InvalidParameterError):
        check_F_conditions(F52, ["F9"], 4)


def test_unknown_kind_and_missing_param():
    with pytest.raises(InvalidParameterError):
        NonlinearitySpec("nope")
    with pytest.raises(InvalidParameterError):
        NonlinearitySpec("remark11_F", {"T": 3})


def test_dict_roundtrip():
    for spec in ALL_KINDS:
        assert NonlinearitySpec.from_dict(spec.to_dict()).to_dict() == spec.to_dict()
