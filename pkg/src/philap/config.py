"""JSON problem configuration and the built-in problems.

A config is one JSON document::

    {
      "system": "T11" | "T12",
      "T": 2, "N": 1,
      "weights": [[...T values...] x 4],
      "potentials": [[{"c": 1.0, "p": 2.0}, ...] x 4],
      "nonlinearity": {"F": {"kind": ..., "params": {...}}, "G": ..., "H": ...},
      "scalars": {"mu": ..., "lambda": ..., "nu": ...},      # T11 only
      "growth": {"q": ..., "p": ...},                        # T12 only
      "assumptions": {...},   # checker parameters, see philap.verify
      "solver": {...},        # SolverConfig fields
      "estimator": {...}      # Ricceri estimator settings
    }
"""

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .action import ProblemT11, ProblemT12
from .exceptions import ConfigError, InvalidParameterError
from .nonlinearity import NonlinearitySpec
from .periodic import WeightSequence
from .potentials import PotentialSpec

__all__ = [
    "ProblemConfig",
    "BUILTINS",
    "builtin",
    "load_config",
    "parse_config",
    "dump_config",
    "problem_to_dict",
    "problem_from_dict",
    "example51_problem",
    "example52_problem",
    "remark11_problem",
]


@dataclass
class ProblemConfig:
    problem: object
    assumptions: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    estimator: dict = field(default_factory=dict)
    name: str = ""

    def to_dict(self):
        doc = problem_to_dict(self.problem)
        doc["assumptions"] = copy.deepcopy(self.assumptions)
        doc["solver"] = copy.deepcopy(self.solver)
        doc["estimator"] = copy.deepcopy(self.estimator)
        if self.name:
            doc["name"] = self.name
        return doc


def problem_to_dict(problem):
    doc = {
        "system": problem.system,
        "T": int(problem.T),
        "N": int(problem.N),
        "weights": [w.w.tolist() for w in problem.weights],
        "potentials": [p.to_list() for p in problem.potentials],
    }
    if problem.system == "T11":
        doc["nonlinearity"] = {k: getattr(problem, k).to_dict() for k in ("F", "G", "H")}
        doc["scalars"] = {"mu": problem.mu, "lambda": problem.lam, "nu": problem.nu}
    else:
        doc["nonlinearity"] = {"F": problem.F.to_dict()}
        doc["growth"] = {"q": float(problem.q), "p": float(problem.p)}
    return doc


def _require(doc, key, where=None):
    if not isinstance(doc, dict) or key not in doc:
        raise ConfigError(f"missing required entry {key!r}", field=where or key)
    return doc[key]


def _int_field(doc, key):
    val = _require(doc, key)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{key} must be an integer, got {val!r}", field=key)
    return val


def problem_from_dict(doc):
    system = _require(doc, "system")
    if system not in ("T11", "T12"):
        raise ConfigError(f"system must be 'T11' or 'T12', got {system!r}", field="system")
    T = _int_field(doc, "T")
    N = _int_field(doc, "N")
    if T < 2:
        raise ConfigError("T must be >= 2", field="T")
    if N < 1:
        raise ConfigError("N must be >= 1", field="N")

    raw_w = _require(doc, "weights")
    if not isinstance(raw_w, list) or len(raw_w) != 4:
        raise ConfigError("weights must be a list of four arrays", field="weights")
    weights = []
    for i, w in enumerate(raw_w):
        if not isinstance(w, list) or len(w) != T:
            raise ConfigError(f"weights[{i}] must have length T = {T}", field=f"weights[{i}]")
        for j, val in enumerate(w):
            if not isinstance(val, (int, float)) or isinstance(val, bool) or not val > 0:
                raise ConfigError(
                    f"weight must be strictly positive, got {val!r}", field=f"weights[{i}][{j}]"
                )
        weights.append(WeightSequence(np.array(w, dtype=float)))

    raw_p = _require(doc, "potentials")
    if not isinstance(raw_p, list) or len(raw_p) != 4:
        raise ConfigError("potentials must be a list of four term lists", field="potentials")
    potentials = []
    for i, terms in enumerate(raw_p):
        try:
            potentials.append(PotentialSpec.from_list(terms))
        except (InvalidParameterError, KeyError, TypeError) as exc:
            raise ConfigError(str(exc), field=f"potentials[{i}]") from exc

    nl = _require(doc, "nonlinearity")
    specs = {}
    for key in ("F", "G", "H") if system == "T11" else ("F",):
        if key not in nl:
            specs[key] = NonlinearitySpec.zero()
            continue
        try:
            specs[key] = NonlinearitySpec.from_dict(nl[key])
        except (InvalidParameterError, KeyError, TypeError) as exc:
            raise ConfigError(str(exc), field=f"nonlinearity.{key}") from exc

    try:
        if system == "T11":
            sc = doc.get("scalars", {})
            return ProblemT11(
                T, N, tuple(weights), tuple(potentials),
                mu=sc.get("mu", 1.0), lam=sc.get("lambda", 1.0), nu=sc.get("nu", 0.0),
                **specs,
            )
        gr = doc.get("growth", {})
        return ProblemT12(
            T, N, tuple(weights), tuple(potentials), F=specs["F"],
            q=gr.get("q", 2.0), p=gr.get("p", 2.0),
        )
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(doc, name=""):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    problem = problem_from_dict(doc)
    return ProblemConfig(
        problem=problem,
        assumptions=copy.deepcopy(doc.get("assumptions", {})),
        solver=copy.deepcopy(doc.get("solver", {})),
        estimator=copy.deepcopy(doc.get("estimator", {})),
        name=doc.get("name", name),
    )


def load_config(source):
    """Load a config from a JSON file path or a built-in name."""
    if isinstance(source, str) and source in BUILTINS:
        return builtin(source)
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {source!r}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return parse_config(doc, name=path.stem)


def dump_config(cfg, path=None):
    text = json.dumps(cfg.to_dict(), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


# --------------------------------------------------------------------------
# built-in problems


def example51_problem(mu=2.0, lam=0.05, nu=0.0, N=1, rho=None):
    """T = 2 two-parameter example with F = |x1|^3+|x2|^3, G = |x1|^4+|x2|^4."""
    T = 2
    if rho is None:
        rho = [np.ones(T)] * 4
    potentials = (
        PotentialSpec(((1.0, 2.0), (1.0, 7.0 / 3.0))),
        PotentialSpec(((1.0, 2.0), (1.0, 5.0 / 2.0))),
        PotentialSpec.power(2.0, c=2.0),
        PotentialSpec.power(2.0, c=2.0),
    )
    return ProblemT11(
        T, N, tuple(rho), potentials, mu=mu, lam=lam, nu=nu,
        F=NonlinearitySpec("example51_F"),
        G=NonlinearitySpec("example51_G"),
        H=NonlinearitySpec("example51_H", {"T": 2}),
    )


def example52_weights(T=4):
    t = np.arange(1, T + 1)
    s, c = np.sin(np.pi * t / 4), np.cos(np.pi * t / 4)
    return (s**2 + 1, c**2 + 1, np.abs(s) + 1, np.abs(c) + 1)


def example52_problem(N=6):
    """T = 4 symmetric example with phi1 = phi3 = |x|^3 x and phi2 = phi4 = |x| x."""
    T = 4
    potentials = (
        PotentialSpec.power(5.0),
        PotentialSpec.power(3.0),
        PotentialSpec.power(5.0),
        PotentialSpec.power(3.0),
    )
    return ProblemT12(
        T, N, example52_weights(T), potentials, F=NonlinearitySpec("example52_F"), q=5.0, p=3.0
    )


def remark11_problem(T=3, N=2, theta=2.0, qs=(2.0, 3.0, 2.5, 3.0), mu=1.0, lam=1.0, nu=0.01, rho=None):
    l = max(theta, *qs)
    if rho is None:
        t = np.arange(1, T + 1)
        rho = tuple(1.0 + 0.5 * k + 0.25 * np.sin(2 * np.pi * t / T) ** 2 for k in range(4))
    potentials = tuple(PotentialSpec(((1.0, theta), (1.0, q))) for q in qs)
    return ProblemT11(
        T, N, tuple(rho), potentials, mu=mu, lam=lam, nu=nu,
        F=NonlinearitySpec("remark11_F", {"l": l, "T": T}),
        G=NonlinearitySpec("remark11_G", {"l": l, "T": T}),
        H=NonlinearitySpec("remark11_H", {"T": T}),
    )


def _example51_config():
    return ProblemConfig(
        example51_problem(),
        assumptions={"theta": 2.0, "l": 2.5},
        estimator={"r": 1.0},
        name="example51",
    )


def _example52_config(N=6):
    weights = example52_weights()
    return ProblemConfig(
        example52_problem(N=N),
        assumptions={
            "F0": {
                "alpha1": 1.5,
                "alpha2": 2.0,
                "h1": (weights[2]).tolist(),
                "h2": (weights[1]).tolist(),
                "l": [0.0, 0.0, 0.0, 0.0],
            },
            "F3": {"beta1": 2.0, "beta2": 2.5, "M1": 1.0, "M2": 1.0, "delta": 0.1},
        },
        name="example52" if N == 6 else f"example52_N{N}",
    )


def _remark11_config():
    return ProblemConfig(
        remark11_problem(),
        assumptions={"theta": 2.0, "l": 3.0},
        estimator={"r": 1.0},
        name="remark11",
    )


BUILTINS = {
    "example51": _example51_config,
    "example52": _example52_config,
    "example52_desk": lambda: _example52_config(N=1),
    "remark11": _remark11_config,
}


def builtin(name):
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ConfigError(f"unknown built-in problem {name!r}") from None
