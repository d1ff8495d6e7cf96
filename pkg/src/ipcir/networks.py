"""Discrete Bayesian and credal networks queried by conservative updating.

Inference enumerates the joint explicitly. That is exact and cheap for the
networks this package targets (a few hundred cells).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .cir import ObservationSpec, cir_lower
from .cohgraph import CollectionSpec
from .config import RunConfig
from .errors import EnumerationCapExceeded, IpcirError, InvalidEvidence, InvalidMass
from .previsions import (
    ConditionalTable,
    CredalSet,
    Gamble,
    ProductSpace,
    VariableSpec,
    state_indicator,
    strong_product,
)


@dataclass(frozen=True, eq=False)
class Node:
    var: str
    parents: tuple
    rows: Mapping          # parent-state tuple -> array (vertices, states)


@dataclass(frozen=True, eq=False)
class DiscreteNet:
    space: ProductSpace
    nodes: tuple

    def __post_init__(self):
        names = set(self.space.names)
        seen = set()
        ts = TopologicalSorter()
        for nd in self.nodes:
            if nd.var not in names or nd.var in seen:
                raise InvalidMass(f"node {nd.var!r} is undeclared or repeated")
            seen.add(nd.var)
            if any(p not in names for p in nd.parents):
                raise InvalidMass(f"node {nd.var!r} has an undeclared parent")
            ts.add(nd.var, *nd.parents)
            card = self.space.variables[self.space.names.index(nd.var)].card
            pstates = [self.space.variables[self.space.names.index(p)].states for p in nd.parents]
            for cfg in itertools.product(*pstates):
                if cfg not in nd.rows:
                    raise InvalidMass(f"node {nd.var!r} lacks a row for parents {cfg}")
                arr = np.asarray(nd.rows[cfg], dtype=float)
                if arr.ndim != 2 or arr.shape[1] != card:
                    raise InvalidMass(f"row {cfg} of {nd.var!r} has the wrong shape")
        if seen != names:
            raise InvalidMass(f"variables without a node: {sorted(names - seen)}")
        try:
            tuple(ts.static_order())
        except CycleError as exc:
            raise InvalidMass("network graph has a cycle") from exc

    def node(self, var: str) -> Node:
        return next(nd for nd in self.nodes if nd.var == var)

    def tables(self) -> list:
        out = []
        for nd in self.nodes:
            (j,) = self.space.indices([nd.var])
            I = self.space.indices(nd.parents)
            # rows are keyed by parent labels in declaration order; tables want
            # index cells in sorted variable order
            order = [self.space.names.index(p) for p in nd.parents]
            rows = {}
            for cfg, arr in nd.rows.items():
                idx = {k: self.space.variables[k].index(s) for k, s in zip(order, cfg)}
                rows[tuple(idx[k] for k in I)] = CredalSet(self.space.sub([j]), arr)
            out.append(ConditionalTable(self.space, (j,), I, rows))
        return out

    def collection(self) -> CollectionSpec:
        ix = {v: k for k, v in enumerate(self.space.names)}
        entries = [({ix[nd.var]}, {ix[p] for p in nd.parents}) for nd in self.nodes]
        return CollectionSpec(self.space.n, tuple(entries), self.space.names)

    # JSON: {"variables":[{"name","states"}], "nodes":[{"var","parents","rows"}]}
    # row keys are parent labels joined by commas ("" for a root node)
    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteNet":
        try:
            space = ProductSpace(tuple(VariableSpec(v["name"], tuple(v["states"])) for v in data["variables"]))
            nodes = []
            for nd in data["nodes"]:
                parents = tuple(nd.get("parents", ()))
                rows = {}
                for key, verts in nd["rows"].items():
                    cfg = tuple(key.split(",")) if parents else ()
                    rows[cfg] = np.asarray(verts, dtype=float)
                nodes.append(Node(nd["var"], parents, rows))
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise InvalidMass(f"malformed network document: {exc}") from exc
        return cls(space, tuple(nodes))

    @classmethod
    def load(cls, path) -> "DiscreteNet":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidMass(f"cannot read network {path}: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "variables": [{"name": v.name, "states": list(v.states)} for v in self.space.variables],
            "nodes": [{"var": nd.var, "parents": list(nd.parents),
                       "rows": {",".join(cfg): np.asarray(a).tolist() for cfg, a in nd.rows.items()}}
                      for nd in self.nodes],
        }


def asia_net() -> DiscreteNet:
    text = resources.files("ipcir").joinpath("data/asia.json").read_text()
    return DiscreteNet.from_dict(json.loads(text))


def joint_enumerate(net: DiscreteNet, config: RunConfig | None = None) -> CredalSet:
    cfg = config or RunConfig()
    if net.space.size > cfg.cell_cap:
        raise EnumerationCapExceeded(f"joint has {net.space.size} cells, cap is {cfg.cell_cap}")
    return strong_product(net.tables(), cfg.vertex_cap)


# --- evidence -------------------------------------------------------------

@dataclass(frozen=True)
class Observed:
    value: object


@dataclass(frozen=True)
class MissingCar:
    pass


@dataclass(frozen=True)
class MissingUnknown:
    pass


@dataclass(frozen=True)
class CoarsenedUnknown:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(tuple(v) if isinstance(v, (list, tuple)) else (v,)
                                                 for v in self.values))


@dataclass(frozen=True)
class CoarsenedCar:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(tuple(v) if isinstance(v, (list, tuple)) else (v,)
                                                 for v in self.values))


UNKNOWN_TAGS = (MissingUnknown, CoarsenedUnknown)


@dataclass(frozen=True)
class EvidenceSpec:
    """Tags attached to single variables or ordered groups of variables."""

    items: tuple

    def __post_init__(self):
        items = []
        for key, tag in self.items:
            group = (key,) if isinstance(key, str) else tuple(key)
            items.append((group, tag))
        object.__setattr__(self, "items", tuple(items))

    @classmethod
    def of(cls, mapping: Mapping) -> "EvidenceSpec":
        return cls(tuple(mapping.items()))

    # JSON: {"H": {"observed": "no"}, "V,K": {"coarsened_unknown": [["yes","no"], ...]}, "B": "missing_car"}
    @classmethod
    def from_dict(cls, data: dict) -> "EvidenceSpec":
        items = []
        for key, spec in data.items():
            group = tuple(key.split(","))
            if isinstance(spec, str):
                spec = {spec: None}
            if not isinstance(spec, dict) or len(spec) != 1:
                raise InvalidEvidence(f"tag for {key!r} must be a one-key object or string")
            (kind, val), = spec.items()
            if kind == "observed":
                tag = Observed(tuple(val) if isinstance(val, list) else val)
            elif kind == "missing_car":
                tag = MissingCar()
            elif kind == "missing_unknown":
                tag = MissingUnknown()
            elif kind == "coarsened_unknown":
                tag = CoarsenedUnknown(tuple(val))
            elif kind == "coarsened_car":
                tag = CoarsenedCar(tuple(val))
            else:
                raise InvalidEvidence(f"unknown evidence tag {kind!r}")
            items.append((group, tag))
        return cls(tuple(items))

    @classmethod
    def load(cls, path) -> "EvidenceSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidEvidence(f"cannot read evidence {path}: {exc}") from exc


def _group_cells(space: ProductSpace, group: tuple, tag) -> list | None:
    """Index cells of the group allowed by the tag; None means unrestricted."""
    vs = [space.variables[space.names.index(v)] for v in group]
    if isinstance(tag, (MissingCar, MissingUnknown)):
        return None if isinstance(tag, MissingCar) else list(itertools.product(*(range(v.card) for v in vs)))
    if isinstance(tag, Observed):
        values = [tag.value if isinstance(tag.value, tuple) else (tag.value,)]
    elif isinstance(tag, (CoarsenedUnknown, CoarsenedCar)):
        values = list(tag.values)
        if not values:
            raise InvalidEvidence(f"empty coarsening set for {group}")
    else:
        raise InvalidEvidence(f"unsupported tag {tag!r}")
    cells = []
    for val in values:
        if len(val) != len(group):
            raise InvalidEvidence(f"value {val} does not match group {group}")
        try:
            cells.append(tuple(v.index(s) for v, s in zip(vs, val)))
        except IpcirError as exc:
            raise InvalidEvidence(str(exc)) from exc
    return list(dict.fromkeys(cells))


def evidence_to_observation(net: DiscreteNet, evidence: EvidenceSpec, target: str | None = None) -> ObservationSpec:
    """Split tagged evidence into the unknown part and the CAR part.

    Untagged variables other than the target are latent and behave like
    CAR-missing ones: they are summed out.
    """
    space = net.space
    seen = set()
    unknown_vars, unknown_sets = [], []
    car_vars, car_sets = [], []
    for group, tag in evidence.items:
        for v in group:
            if v not in space.names:
                raise InvalidEvidence(f"unknown variable {v!r}")
            if v in seen:
                raise InvalidEvidence(f"variable {v!r} is tagged twice")
            if v == target:
                raise InvalidEvidence(f"target {v!r} cannot carry evidence")
            seen.add(v)
        cells = _group_cells(space, group, tag)
        if isinstance(tag, UNKNOWN_TAGS):
            unknown_vars += list(group)
            unknown_sets.append(cells)
        elif cells is not None:
            car_vars += list(group)
            car_sets.append(cells)
    unknown = [sum(parts, ()) for parts in itertools.product(*unknown_sets)] or [()]
    car = [sum(parts, ()) for parts in itertools.product(*car_sets)] or [()]
    return ObservationSpec(tuple(unknown_vars), tuple(unknown), tuple(car_vars), tuple(car))


def query_cir(net: DiscreteNet, target: str, evidence: EvidenceSpec, g: Gamble | None = None,
              config: RunConfig | None = None, joint: CredalSet | None = None):
    """CIR interval for g, or a dict state -> CirResult over the target's states."""
    cfg = config or RunConfig()
    if target not in net.space.names:
        raise InvalidEvidence(f"unknown target {target!r}")
    obs = evidence_to_observation(net, evidence, target)
    K = joint if joint is not None else joint_enumerate(net, cfg)
    if g is not None:
        return cir_lower(K, g, obs, cfg)
    var = net.space.variables[net.space.names.index(target)]
    return {s: cir_lower(K, state_indicator(net.space, target, s), obs, cfg) for s in var.states}


# --- the worked Asia walkthrough ---------------------------------------------

ASIA_CAR = {"H": Observed("no"), "A": Observed("yes"), "B": MissingCar(), "O": MissingCar(), "L": MissingCar()}
ASIA_COARSENING = (("yes", "no"), ("no", "yes"))


def asia_steps(scenario: int) -> list:
    """(description, evidence) pairs for the four scripted scenarios."""
    base = dict(ASIA_CAR)
    if scenario == 1:
        ev = dict(base)
        ev[("V", "K")] = CoarsenedUnknown(ASIA_COARSENING)
        return [("(V,K) coarsened, unknown process", ev)]
    if scenario == 2:
        ev = dict(base)
        ev["V"], ev["K"] = Observed("yes"), Observed("no")
        return [("V=yes, K=no observed", ev)]
    if scenario == 3:
        ev = dict(base)
        ev["V"], ev["K"] = Observed("yes"), Observed("no")
        ev2 = dict(ev)
        ev2["L"] = Observed("yes")
        return [("V=yes, K=no observed", ev), ("plus L=yes", ev2)]
    if scenario == 4:
        ev = dict(base)
        ev[("V", "K")] = CoarsenedCar(ASIA_COARSENING)
        ev2 = dict(ev)
        ev2["L"] = Observed("yes")
        return [("(V,K) coarsened at random", ev), ("plus L=yes", ev2)]
    raise InvalidEvidence(f"no scenario {scenario}")


def asia_walkthrough(scenario: int, config: RunConfig | None = None, net: DiscreteNet | None = None) -> list:
    net = net or asia_net()
    K = joint_enumerate(net, config)
    out = []
    for desc, ev in asia_steps(scenario):
        spec = EvidenceSpec.of(ev)
        row = {"step": desc}
        for label, var in (("cancer", "R"), ("tuberculosis", "B")):
            ev_t = spec if var != "B" else EvidenceSpec(tuple(it for it in spec.items if it[0] != ("B",)))
            res = query_cir(net, var, ev_t, config=config, joint=K)["yes"]
            row[label] = [res.lower, res.upper]
        out.append(row)
    return out
