"""Coherence graphs over collections of conditional-assessment signatures.

Only signatures matter here: entry j says "outputs O_j given I_j". Each
entry becomes a dummy node with arcs from its inputs and to its outputs.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from pathlib import Path
from typing import Sequence

from .errors import InvalidCollection, NoCompatibleOrder


class GraphClass(str, enum.Enum):
    A1_PLUS = "A1+"
    A1 = "A1"
    OTHER = "other"


@dataclass(frozen=True)
class CollectionSpec:
    n: int
    entries: tuple
    names: tuple | None = None

    def __post_init__(self):
        entries = []
        for k, (O, I) in enumerate(self.entries):
            O, I = frozenset(int(x) for x in O), frozenset(int(x) for x in I)
            if not O:
                raise InvalidCollection(f"entry {k} has no outputs")
            if O & I:
                raise InvalidCollection(f"entry {k} conditions on its own outputs")
            if any(not 0 <= x < self.n for x in O | I):
                raise InvalidCollection(f"entry {k} refers to a variable outside 0..{self.n - 1}")
            entries.append((O, I))
        if len(set(entries)) != len(entries):
            raise InvalidCollection("two entries share the same (O, I) signature")
        object.__setattr__(self, "entries", tuple(entries))
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != self.n:
                raise InvalidCollection("one name per variable is required")

    @classmethod
    def from_dict(cls, data: dict) -> "CollectionSpec":
        try:
            names = data.get("names")
            n = int(data["n"]) if "n" in data else len(names)
            lookup = {nm: i for i, nm in enumerate(names)} if names else {}

            def idx(x):
                return lookup[x] if isinstance(x, str) else int(x)

            entries = [([idx(x) for x in e["O"]], [idx(x) for x in e.get("I", [])])
                       for e in data["entries"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCollection(f"malformed collection document: {exc}") from exc
        return cls(n, tuple(entries), names)

    @classmethod
    def load(cls, path) -> "CollectionSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidCollection(f"cannot read collection {path}: {exc}") from exc

    def label(self, j: int) -> str:
        return self.names[j] if self.names else str(j)


@dataclass(frozen=True)
class CoherenceGraph:
    n: int
    m: int
    arcs: tuple             # (("x", i), ("d", j)) or (("d", j), ("x", i))

    def parents(self, node) -> list:
        return [a for a, b in self.arcs if b == node]

    def children(self, node) -> list:
        return [b for a, b in self.arcs if a == node]

    def is_acyclic(self) -> bool:
        ts = TopologicalSorter()
        for a, b in self.arcs:
            ts.add(b, a)
        try:
            tuple(ts.static_order())
        except CycleError:
            return False
        return True


def build_graph(spec: CollectionSpec) -> CoherenceGraph:
    arcs = []
    for j, (O, I) in enumerate(spec.entries):
        arcs += [(("x", i), ("d", j)) for i in sorted(I)]
        arcs += [(("d", j), ("x", o)) for o in sorted(O)]
    return CoherenceGraph(spec.n, len(spec.entries), tuple(arcs))


def classify(graph: CoherenceGraph) -> GraphClass:
    if not graph.is_acyclic():
        return GraphClass.OTHER
    counts = [len(graph.parents(("x", i))) for i in range(graph.n)]
    if all(c == 1 for c in counts):
        return GraphClass.A1_PLUS
    if all(c <= 1 for c in counts):
        return GraphClass.A1
    return GraphClass.OTHER


def is_compatible(spec: CollectionSpec, order: Sequence[int]) -> bool:
    """O_k shares nothing with the inputs of entries placed before it."""
    seen_inputs = set()
    for k in order:
        O, I = spec.entries[k]
        if O & seen_inputs:
            return False
        seen_inputs |= I
    return True


def compatible_order(spec: CollectionSpec) -> list:
    """Order the entries so no output feeds an earlier entry's inputs.

    The order is filled from the back: the last slot takes an entry whose
    outputs no other remaining entry consumes. Taking the largest eligible
    index each time keeps an already compatible order unchanged.
    """
    if classify(build_graph(spec)) is GraphClass.OTHER:
        raise NoCompatibleOrder("the collection's coherence graph is not of type A1")
    remaining = list(range(len(spec.entries)))
    tail = []
    while remaining:
        eligible = [k for k in remaining
                    if not spec.entries[k][0] & set().union(*(spec.entries[i][1] for i in remaining if i != k))]
        if not eligible:
            raise NoCompatibleOrder("no entry can be placed last")
        k = max(eligible)
        tail.append(k)
        remaining.remove(k)
    order = tail[::-1]
    assert is_compatible(spec, order), "compatible_order produced an invalid order"
    return order


def a1plus_partition_check(spec: CollectionSpec) -> bool:
    outs = [O for O, _ in spec.entries]
    return sum(len(o) for o in outs) == spec.n and set().union(*outs) == set(range(spec.n))


# --- fixture collections --------------------------------------------------

ASIA_ORDER = ("V", "K", "B", "R", "H", "O", "L", "A")
ASIA_PARENTS = {"V": (), "K": (), "B": ("V",), "R": ("K",), "H": ("K",),
                "O": ("B", "R"), "L": ("O",), "A": ("O", "H")}


def asia_collection() -> CollectionSpec:
    ix = {v: k for k, v in enumerate(ASIA_ORDER)}
    entries = [({ix[v]}, {ix[p] for p in ASIA_PARENTS[v]}) for v in ASIA_ORDER]
    return CollectionSpec(len(ASIA_ORDER), tuple(entries), ASIA_ORDER)


def parametric_collection() -> CollectionSpec:
    """Parameter, a fact split in two parts, and one observation per part."""
    names = ("Theta", "Ybar", "Yhat", "Wbar", "What")
    entries = [({0}, set()), ({1, 2}, {0}), ({3}, {1}), ({4}, {2})]
    return CollectionSpec(5, tuple(entries), names)


def iid_collection(N: int = 3) -> CollectionSpec:
    """N units drawn given the parameter, each observed through its own map."""
    names = ["Theta"]
    entries = [({0}, set())]
    for i in range(1, N + 1):
        base = len(names)
        names += [f"Ybar{i}", f"Yhat{i}", f"Wbar{i}", f"What{i}"]
        entries += [({base, base + 1}, {0}), ({base + 2}, {base}), ({base + 3}, {base + 1})]
    return CollectionSpec(len(names), tuple(entries), names)


def classification_collection(N: int = 3) -> CollectionSpec:
    """N labelled units plus one unit to classify whose class is never seen."""
    names = ["Theta"]
    entries = [({0}, set())]
    for i in range(1, N + 2):
        base = len(names)
        names += [f"C{i}", f"Fbar{i}", f"Fhat{i}", f"Wbar{i}", f"What{i}"]
        c, fb, fh, wb, wh = range(base, base + 5)
        entries.append(({c, fb, fh}, {0}))
        entries.append(({wb}, {c, fb} if i <= N else {fb}))
        entries.append(({wh}, {fh}))
    return CollectionSpec(len(names), tuple(entries), names)
