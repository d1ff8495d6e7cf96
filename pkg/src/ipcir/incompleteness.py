"""Multi-valued maps describing how facts turn into observations.

A map sends each fact y to the nonempty set of observations it may
produce. Two derived sets matter throughout: the facts compatible with an
observation w, and the facts for which w is the only possible observation.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .config import EPS_POS
from .errors import InvalidMap, UnknownObservation
from .lp import lp_solve_maxmin


@dataclass(frozen=True, eq=False)
class MultiValuedMap:
    facts: tuple
    observations: tuple
    gamma: Mapping

    def __post_init__(self):
        facts = tuple(self.facts)
        obs = tuple(self.observations)
        if len(set(facts)) != len(facts) or len(set(obs)) != len(obs):
            raise InvalidMap("facts and observations must be unique")
        g = {}
        for y in facts:
            if y not in self.gamma:
                raise InvalidMap(f"no image given for fact {y!r}")
            img = frozenset(self.gamma[y])
            if not img <= set(obs):
                raise InvalidMap(f"image of {y!r} uses undeclared observations")
            g[y] = img
        extra = set(self.gamma) - set(facts)
        if extra:
            raise InvalidMap(f"images given for undeclared facts {sorted(map(str, extra))}")
        object.__setattr__(self, "facts", facts)
        object.__setattr__(self, "observations", obs)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def identity(cls, facts) -> "MultiValuedMap":
        facts = tuple(facts)
        return cls(facts, facts, {y: {y} for y in facts})

    @classmethod
    def missingness(cls, facts, missing="?") -> "MultiValuedMap":
        """Each fact is either reported as itself or as `missing`."""
        facts = tuple(facts)
        return cls(facts, facts + (missing,), {y: {y, missing} for y in facts})

    def _check(self, w):
        if w not in self.observations:
            raise UnknownObservation(f"{w!r} is not an observation label")

    def compatible_facts(self, w) -> list:
        self._check(w)
        return [y for y in self.facts if w in self.gamma[y]]

    def sole_observation_facts(self, w) -> list:
        self._check(w)
        return [y for y in self.facts if self.gamma[y] == {w}]

    def require_valid(self) -> None:
        """Raise unless every image is nonempty and every label reachable."""
        for y in self.facts:
            if not self.gamma[y]:
                raise InvalidMap(f"fact {y!r} has an empty image")
        for w in self.observations:
            if not self.compatible_facts(w):
                raise InvalidMap(f"observation {w!r} is produced by no fact")

    # JSON: {"facts": [...], "observations": [...], "gamma": {"<fact>": [...]}}
    @classmethod
    def from_dict(cls, data: dict) -> "MultiValuedMap":
        try:
            facts = [str(f) for f in data["facts"]]
            obs = [str(o) for o in data["observations"]]
            gamma = {str(k): [str(x) for x in v] for k, v in data["gamma"].items()}
        except (KeyError, AttributeError, TypeError) as exc:
            raise InvalidMap(f"malformed map document: {exc}") from exc
        return cls(tuple(facts), tuple(obs), gamma)

    @classmethod
    def load(cls, path) -> "MultiValuedMap":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidMap(f"cannot read map {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "facts": [str(y) for y in self.facts],
            "observations": [str(w) for w in self.observations],
            "gamma": {str(y): sorted(str(w) for w in self.gamma[y]) for y in self.facts},
        }


@dataclass(frozen=True)
class Violation:
    assumption: str
    witness: object
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_unknown_ip(m: MultiValuedMap) -> ValidationReport:
    """Check nonempty images, reachable labels and the no-singleton-image rule."""
    out = []
    for y in m.facts:
        if not m.gamma[y]:
            out.append(Violation("IP4", y, "fact has an empty image"))
    for w in m.observations:
        if not m.compatible_facts(w):
            out.append(Violation("IP6", w, "observation is produced by no fact"))
    for w in m.observations:
        for y in m.sole_observation_facts(w):
            out.append(Violation("IP8", (w, y), f"fact {y!r} can only be observed as {w!r}"))
    return ValidationReport(tuple(out))


def product_map(gbar: MultiValuedMap, ghat: MultiValuedMap) -> MultiValuedMap:
    facts = tuple(itertools.product(gbar.facts, ghat.facts))
    obs = tuple(itertools.product(gbar.observations, ghat.observations))
    gamma = {(a, b): set(itertools.product(gbar.gamma[a], ghat.gamma[b])) for a, b in facts}
    return MultiValuedMap(facts, obs, gamma)


@dataclass(frozen=True)
class CarCoefficients:
    alpha: Mapping

    def __post_init__(self):
        a = {k: float(v) for k, v in dict(self.alpha).items()}
        if any(not v > 0 for v in a.values()):
            raise InvalidMap("CAR coefficients must be strictly positive")
        object.__setattr__(self, "alpha", a)

    def __getitem__(self, w) -> float:
        return self.alpha[w]

    def residuals(self, m: MultiValuedMap) -> np.ndarray:
        """sum of alpha over the image of each fact, minus one."""
        return np.array([sum(self.alpha[w] for w in m.gamma[y]) - 1.0 for y in m.facts])

    def check(self, m: MultiValuedMap, tol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.residuals(m)) <= tol))


@dataclass(frozen=True)
class CarFeasible:
    coefficients: CarCoefficients
    t_star: float
    feasible: bool = field(default=True, init=False)


@dataclass(frozen=True)
class CarInfeasible:
    explanation: str
    status: str
    t_star: float | None
    feasible: bool = field(default=False, init=False)


def car_system(m: MultiValuedMap) -> tuple:
    """One equation per fact: the coefficients of its image add up to one."""
    A = np.zeros((len(m.facts), len(m.observations)))
    col = {w: k for k, w in enumerate(m.observations)}
    for i, y in enumerate(m.facts):
        for w in m.gamma[y]:
            A[i, col[w]] = 1.0
    return A, np.ones(len(m.facts))


def car_admissibility(m: MultiValuedMap, eps_pos: float = EPS_POS):
    """Decide whether strictly positive CAR coefficients exist for the map."""
    A, b = car_system(m)
    res = lp_solve_maxmin(A, b)
    if res.status == "infeasible":
        return CarInfeasible(
            f"the image equations have no nonnegative solution (phase-1 residual {res.phase1_residual:.3g})",
            res.status, None)
    if res.status != "optimal":
        return CarInfeasible(f"LP ended with status {res.status}", res.status, None)
    if res.value <= eps_pos:
        return CarInfeasible(
            f"every solution sets some coefficient to zero (max-min value {res.value:.3g})",
            res.status, res.value)
    alpha = dict(zip(m.observations, (float(v) for v in res.x)))
    return CarFeasible(CarCoefficients(alpha), float(res.value))


# --- missing cells in tabular data --------------------------------------------

@dataclass(frozen=True)
class Missing:
    """A data cell with no value; `tag` names the process that hid it."""

    tag: str

    def __post_init__(self):
        if self.tag not in ("car", "unknown"):
            raise InvalidMap(f"missing-cell tag must be 'car' or 'unknown', not {self.tag!r}")

    def __str__(self):
        return "*" if self.tag == "car" else "?"


CAR = Missing("car")
UNKNOWN = Missing("unknown")


def parse_cell(text: str):
    text = text.strip()
    if text == "?":
        return UNKNOWN
    if text == "*":
        return CAR
    return text


def is_missing(cell) -> bool:
    return isinstance(cell, Missing)
