import numpy as np
import pytest

from philap.action import ProblemT11, ProblemT12
from philap.nonlinearity import NonlinearitySpec
from philap.potentials import PotentialSpec


def random_potential(rng):
    k = int(rng.integers(1, 3))
    return PotentialSpec(tuple((float(rng.uniform(0.5, 2.0)), float(rng.uniform(1.6, 4.0))) for _ in range(k)))


def random_generic(rng, odd=False):
    def terms():
        return [
            {"c": float(rng.uniform(-1, 1)), "p": float(rng.uniform(1.6, 4.0)), "odd": bool(odd and rng.random() < 0.5)}
            for _ in range(int(rng.integers(0, 3)))
        ]

    return NonlinearitySpec("power_sum_generic", {"terms1": terms(), "terms2": terms()})


def random_problem(rng, system=None):
    """A small problem of either system with random weights and terms."""
    system = system or ("T11" if rng.random() < 0.5 else "T12")
    T = int(rng.integers(2, 6))
    N = int(rng.integers(1, 4))
    weights = tuple(rng.uniform(0.5, 2.0, size=T) for _ in range(4))
    potentials = tuple(random_potential(rng) for _ in range(4))
    if system == "T11":
        choice = int(rng.integers(0, 3))
        if choice == 0:
            F, G, H = (NonlinearitySpec("remark11_F", {"l": 3.0, "T": T}),
                       NonlinearitySpec("remark11_G", {"l": 3.0, "T": T}),
                       NonlinearitySpec("remark11_H", {"T": T}))
        elif choice == 1:
            F, G, H = NonlinearitySpec("example51_F"), NonlinearitySpec("example51_G"), NonlinearitySpec("example51_H", {"T": T})
        else:
            F, G, H = random_generic(rng, odd=True), random_generic(rng), random_generic(rng)
        return ProblemT11(
            T, N, weights, potentials,
            mu=float(rng.uniform(0.5, 2)), lam=float(rng.uniform(0.01, 1)), nu=float(rng.uniform(0, 0.5)),
            F=F, G=G, H=H,
        )
    F = NonlinearitySpec("example52_F") if rng.random() < 0.5 else random_generic(rng, odd=True)
    return ProblemT12(T, N, weights, potentials, F=F, q=3.0, p=2.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
