import numpy as np
import pytest
from sklearn.base import clone

from philap.action import ProblemT12, action_value
from philap.config import builtin, example51_problem
from philap.exceptions import InvalidParameterError
from philap.nonlinearity import NonlinearitySpec
from philap.periodic import PeriodicState
from philap.potentials import PotentialSpec
from philap.solve import (
    CriticalPoint,
    CriticalPointFinder,
    SolverConfig,
    clark_seeds,
    count_pairs,
    dedup,
    find_critical_points,
    minimize_from,
)

DEMO = dict(mu=1.1 * 91 / 64, lam=0.06)


@pytest.fixture(scope="module")
def demo_points():
    p = example51_problem(**DEMO)
    return p, find_critical_points(p, SolverConfig(rng_seed=3, even_symmetry=True))


def _quadratic(T=3, N=2):
    return ProblemT12(T, N, (np.ones(T),) * 4, (PotentialSpec.power(2.0),) * 4, F=NonlinearitySpec.zero())


def _point(x, action, T=2, N=1):
    return CriticalPoint(PeriodicState.from_flat(np.asarray(x, float), T, N), action, 0.0, 0.0, 0, 0)


def test_start_at_zero_returns_immediately():
    p = builtin("example52_desk").problem
    cp = minimize_from(p, np.zeros(p.size))
    assert cp.iterations == 0 and cp.grad_inf == 0.0 and cp.action == 0.0


def test_clark_seed_reaches_negative_action():
    p = builtin("example52_desk").problem
    seed = clark_seeds(p, 0.5, 0.05, 1, rng_seed=1)[0]
    cp = minimize_from(p, seed)
    assert cp.grad_inf <= 1e-9
    assert cp.action < 0


def test_minimize_history_non_increasing():
    p = example51_problem(**DEMO)
    minimize_from(p, np.array([0.9, -0.3, 0.4, 0.1]))
    h = np.array(minimize_from.last_history)
    assert np.all(np.diff(h) <= 1e-12 * np.maximum(1.0, np.abs(h[:-1])))


def test_quadratic_has_only_zero():
    p = _quadratic()
    pts = find_critical_points(p, SolverConfig(start_count=6, rng_seed=5))
    assert len(pts) == 1
    assert pts[0].sup_norm <= 1e-6 and pts[0].phase == "trivial"


def test_tiny_start_radius_gives_only_trivial():
    p = builtin("example52_desk").problem
    pts = find_critical_points(p, SolverConfig(start_count=1, start_radius=0.0))
    assert len(pts) == 1 and pts[0].sup_norm == 0.0


def test_dedup_examples():
    a = _point([1.0, 0.0, 0.0, 0.0], -1.0)
    b = _point([1.0 + 5e-7, 0.0, 0.0, 0.0], -0.9)
    c = _point([-1.0, 0.0, 0.0, 0.0], -1.0)
    kept = dedup([b, a, c], 1e-6)
    assert len(kept) == 2 and kept[0] is c and kept[1] is a
    assert dedup([a, b, c], 1e-6, even_symmetry=True) == [c]
    assert len(dedup([a, _point([1.0 + 2e-6, 0.0, 0.0, 0.0], 0.0)], 1e-6)) == 2


def test_clark_seeds_norm_and_antipodes():
    p = builtin("example52_desk").problem
    seeds = clark_seeds(p, 0.25, 0.4, 8, rng_seed=9)
    for s in seeds:
        assert abs(np.linalg.norm(s.flat()) - 0.1) <= 1e-12
    for a, b in zip(seeds[::2], seeds[1::2]):
        assert np.array_equal(a.flat(), -b.flat())
        assert action_value(p, a) == action_value(p, b)
    with pytest.raises(InvalidParameterError):
        clark_seeds(p, 1.5, 0.4, 2)


def test_points_certified(demo_points):
    p, pts = demo_points
    for cp in pts:
        assert cp.grad_inf <= 1e-9
        assert cp.residual_inf <= 10 * cp.grad_inf + 1e-12


def test_mirror_closure_and_pairs(demo_points):
    p, pts = demo_points
    assert p.is_even()
    flats = [cp.u.flat() for cp in pts]
    for cp in pts:
        assert min(np.max(np.abs(cp.u.flat() + y)) for y in flats) <= 1e-6
        mates = [q for q in pts if q.pair_index == cp.pair_index]
        assert len(mates) == (2 if cp.sup_norm > 0 else 1)
        assert len({q.action for q in mates}) == 1
    assert count_pairs(pts, 1e-6) == (len(pts) - 1) // 2


def test_sorted_by_action(demo_points):
    _, pts = demo_points
    keys = [(cp.action, tuple(cp.u.flat())) for cp in pts]
    assert keys == sorted(keys)


def test_deterministic_across_threads():
    p = builtin("example52_desk").problem
    cfg = SolverConfig(start_count=6, rng_seed=11, even_symmetry=True, deflation_rounds=1)
    one = find_critical_points(p, cfg)
    four = find_critical_points(p, SolverConfig(**{**cfg.to_dict(), "threads": 4}))
    assert len(one) == len(four)
    for a, b in zip(one, four):
        assert np.array_equal(a.u.flat(), b.u.flat()) and a.pair_index == b.pair_index


def test_config_validation_and_roundtrip():
    cfg = SolverConfig(start_count=3, rng_seed=7)
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg
    for bad in ({"start_count": 0}, {"tol_grad": 0.0}, {"start_radius": -1.0}, {"threads": 0}):
        with pytest.raises(InvalidParameterError):
            SolverConfig(**bad)
    with pytest.raises(InvalidParameterError):
        SolverConfig.from_dict({"colour": 1})


def test_estimator_api():
    est = CriticalPointFinder(start_count=4, deflation=False, random_state=2)
    assert clone(est).get_params() == est.get_params()
    p = example51_problem(**DEMO)
    X = est.fit_transform(p)
    assert X.shape == (len(est.critical_points_), p.size)
    assert est.config_.even_symmetry
    assert est.n_pairs_ == count_pairs(est.critical_points_, est.dedup_tol)
