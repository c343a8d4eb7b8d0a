import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from philap.exceptions import InvalidParameterError
from philap.potentials import (
    PotentialSpec,
    check_A1,
    check_A3,
    check_growth,
    fd_gradient,
    potential_gradient,
    potential_value,
)

PHI1_51 = PotentialSpec(((1.0, 2.0), (1.0, 7.0 / 3.0)))

specs = st.lists(
    st.tuples(st.floats(0.1, 5.0), st.floats(1.2, 6.0)), min_size=1, max_size=3
).map(lambda terms: PotentialSpec(tuple(terms)))


def test_value_at_origin():
    assert potential_value(PHI1_51, np.zeros(1)) == 0.0


def test_example51_phi1_at_unit():
    assert potential_value(PHI1_51, np.array([1.0])) == pytest.approx(0.5 + 3.0 / 7.0, rel=1e-15)


def test_example52_phi1_at_two():
    assert potential_value(PotentialSpec.power(5.0), np.array([2.0])) == pytest.approx(32.0 / 5.0, rel=1e-15)


def test_gradient_values():
    assert potential_gradient(PHI1_51, np.array([1.0]))[0] == pytest.approx(2.0, rel=1e-15)
    y = np.zeros(6)
    y[:2] = [3.0, 4.0]
    g = potential_gradient(PotentialSpec.power(3.0), y)
    assert np.allclose(g[:2], [15.0, 20.0], rtol=1e-15) and not np.any(g[2:])
    assert not np.any(potential_gradient(PotentialSpec.power(1.5), np.zeros(3)))


@pytest.mark.parametrize("terms", [((-1.0, 2.0),), ((1.0, 1.0),), ((1.0, 0.5),), ()])
def test_invalid_terms_rejected(terms):
    with pytest.raises(InvalidParameterError):
        PotentialSpec(terms)


@settings(max_examples=60)
@given(specs, st.integers(1, 4), st.floats(-3, 3))
def test_gradient_matches_fd(spec, N, log_r):
    rng = np.random.default_rng(N)
    y = rng.normal(size=N)
    y *= 10.0**log_r / np.linalg.norm(y)
    g = potential_gradient(spec, y)
    fd = fd_gradient(lambda z: potential_value(spec, z), y)
    assert np.max(np.abs(g - fd)) / max(1.0, np.max(np.abs(g))) <= 1e-6


@settings(max_examples=60)
@given(specs, st.floats(-2, 2))
def test_even_positive_and_radially_increasing(spec, log_r):
    e = np.array([0.6, -0.8])
    s = 10.0**log_r
    a = potential_value(spec, s * e)
    assert a > 0
    assert a == potential_value(spec, -s * e)
    assert potential_value(spec, 1.01 * s * e) > a


def test_check_A1_passes_on_example_spec():
    rep = check_A1(PHI1_51, sample_count=500)
    assert rep.passed and rep.strict_convexity_witnessed
    assert rep.gradient_consistency_max_err <= 1e-6


def test_check_A1_low_exponent():
    assert check_A1(PotentialSpec.power(1.5), sample_count=300).gradient_consistency_max_err <= 1e-6


def test_check_A3_identity_is_exactly_one():
    rep = check_A3(PotentialSpec.power(2.0), 2.0, sample_count=2000)
    assert rep.estimate == pytest.approx(1.0, rel=1e-12)


def test_check_A3_linear_phi3():
    assert check_A3(PotentialSpec.power(2.0, c=2.0), 2.0, sample_count=2000).estimate == pytest.approx(2.0, rel=1e-12)


def test_check_A3_remark_spec():
    rep = check_A3(PotentialSpec(((1.0, 2.0), (1.0, 3.0))), 2.0, sample_count=10000)
    assert rep.passed and rep.estimate >= 1.0 - 1e-12


def test_check_A3_single_term_positive():
    assert check_A3(PotentialSpec.power(3.0), 3.0, sample_count=10000).estimate > 0


def test_growth_exact_power():
    rep = check_growth(PotentialSpec.power(5.0), 5.0)
    assert rep.a == pytest.approx(0.2, rel=1e-12) and rep.b == pytest.approx(0.2, rel=1e-12)
    assert rep.two_sided


def test_growth_upper_bound_exists_for_l():
    rep = check_growth(PHI1_51, 2.5)
    assert rep.upper_bounded and np.isfinite(rep.d)


def test_growth_flags_too_small_exponent():
    rep = check_growth(PHI1_51, 2.0)
    assert not rep.upper_bounded and not rep.two_sided


def test_serialisation_roundtrip():
    assert PotentialSpec.from_list(PHI1_51.to_list()) == PHI1_51
