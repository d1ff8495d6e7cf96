"""Finite spaces, gambles, linear previsions and credal sets.

Everything lives on a :class:`ProductSpace`. Cells are tuples of state
indices, one per variable; events are boolean masks shaped like the space.
A credal set is a finite list of extreme points, so every lower envelope is
a minimum over vertices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import EPS_ZERO, RENORM_TOL
from .errors import (
    EmptyEvent,
    EnumerationCapExceeded,
    InvalidChain,
    InvalidIndexSet,
    InvalidMass,
    SpaceMismatch,
    ZeroMassEvent,
    ZeroUpperProbability,
)

MASS_TOL = 1e-12


@dataclass(frozen=True)
class VariableSpec:
    name: str
    states: tuple

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if not states:
            raise InvalidIndexSet(f"variable {self.name!r} has no states")
        if len(set(states)) != len(states):
            raise InvalidIndexSet(f"variable {self.name!r} has duplicate states")

    @property
    def card(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise InvalidIndexSet(f"{state!r} is not a state of {self.name!r}") from None


@dataclass(frozen=True)
class ProductSpace:
    variables: tuple

    def __post_init__(self):
        vs = tuple(self.variables)
        object.__setattr__(self, "variables", vs)
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            raise InvalidIndexSet("variable names must be unique")

    @classmethod
    def of(cls, **domains) -> "ProductSpace":
        """``ProductSpace.of(X=(0, 1), Y="abc")``"""
        return cls(tuple(VariableSpec(k, tuple(v)) for k, v in domains.items()))

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple:
        return tuple(v.card for v in self.variables)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def indices(self, J: Iterable) -> tuple:
        """Canonical sorted index tuple; accepts variable names or positions."""
        out = set()
        for j in J:
            if isinstance(j, str):
                if j not in self.names:
                    raise InvalidIndexSet(f"no variable named {j!r}")
                out.add(self.names.index(j))
            else:
                j = int(j)
                if not 0 <= j < self.n:
                    raise InvalidIndexSet(f"index {j} out of range for {self.n} variables")
                out.add(j)
        return tuple(sorted(out))

    def sub(self, J: Iterable) -> "ProductSpace":
        return ProductSpace(tuple(self.variables[j] for j in self.indices(J)))

    def cells(self):
        return itertools.product(*(range(c) for c in self.shape))

    def cell(self, labels: Sequence) -> tuple:
        if len(labels) != self.n:
            raise InvalidIndexSet("label tuple length differs from variable count")
        return tuple(v.index(s) for v, s in zip(self.variables, labels))

    def labels(self, cell: Sequence) -> tuple:
        return tuple(v.states[i] for v, i in zip(self.variables, cell))

    def event(self, cells: Iterable, J: Iterable | None = None) -> np.ndarray:
        """Mask of the cylinder over `cells` of the projected space on J."""
        J = tuple(range(self.n)) if J is None else self.indices(J)
        sub = np.zeros(self.sub(J).shape, dtype=bool)
        for c in cells:
            sub[tuple(c)] = True
        return lift(sub, J, self)

    def full_event(self) -> np.ndarray:
        return np.ones(self.shape, dtype=bool)


def project(cell: Sequence, J: Iterable):
    """Coordinates of `cell` at the positions in J, in cell order."""
    J = sorted(set(int(j) for j in J))
    if J and (J[0] < 0 or J[-1] >= len(cell)):
        raise InvalidIndexSet(f"index set {J} out of range for cell of length {len(cell)}")
    return tuple(cell[j] for j in J)


def lift(values: np.ndarray, scope: Sequence[int], space: ProductSpace,
         onto: Sequence[int] | None = None) -> np.ndarray:
    """Broadcast an array over X_scope to an array over X_onto (default: all)."""
    onto = tuple(range(space.n)) if onto is None else tuple(onto)
    if not set(scope) <= set(onto):
        raise SpaceMismatch(f"scope {tuple(scope)} is not contained in {onto}")
    arr = np.asarray(values)
    shape = [space.variables[j].card if j in scope else 1 for j in onto]
    target = [space.variables[j].card for j in onto]
    return np.broadcast_to(arr.reshape(shape), target)


def _as_mask(space: ProductSpace, B) -> np.ndarray:
    if isinstance(B, np.ndarray) and B.dtype == bool:
        if B.shape == space.shape:
            return B
        if B.size == space.size:
            return B.reshape(space.shape)
        raise SpaceMismatch("event mask shape does not match the space")
    return space.event(B)


@dataclass(frozen=True, eq=False)
class Gamble:
    """Bounded payoff with scope J, stored densely over X_J."""

    space: ProductSpace
    scope: tuple
    values: np.ndarray

    def __post_init__(self):
        scope = self.space.indices(self.scope)
        vals = np.array(self.values, dtype=float)
        expected = self.space.sub(scope).shape
        if vals.shape != expected:
            if vals.size == int(np.prod(expected, dtype=np.int64)):
                vals = vals.reshape(expected)
            else:
                raise SpaceMismatch(f"gamble values of shape {vals.shape}, expected {expected}")
        if not np.all(np.isfinite(vals)):
            raise InvalidMass("gamble values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "scope", scope)
        object.__setattr__(self, "values", vals)

    @classmethod
    def full(cls, space: ProductSpace, values) -> "Gamble":
        return cls(space, tuple(range(space.n)), values)

    @classmethod
    def constant(cls, space: ProductSpace, c: float) -> "Gamble":
        return cls(space, (), np.array(float(c)))

    @classmethod
    def indicator(cls, space: ProductSpace, B) -> "Gamble":
        return cls.full(space, _as_mask(space, B).astype(float))

    @classmethod
    def state_indicator(cls, space: ProductSpace, var, state) -> "Gamble":
        return state_indicator(space, var, state)

    def on(self, J: Sequence[int]) -> np.ndarray:
        return lift(self.values, self.scope, self.space, self.space.indices(J))

    def array(self) -> np.ndarray:
        return lift(self.values, self.scope, self.space)

    def inf(self) -> float:
        return float(self.values.min())

    def sup(self) -> float:
        return float(self.values.max())

    def _combine(self, other, op):
        if isinstance(other, Gamble):
            if other.space != self.space:
                raise SpaceMismatch("gambles live on different spaces")
            scope = tuple(sorted(set(self.scope) | set(other.scope)))
            return Gamble(self.space, scope, op(self.on(scope), other.on(scope)))
        return Gamble(self.space, self.scope, op(self.values, float(other)))

    def __add__(self, other):
        return self._combine(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return Gamble(self.space, self.scope, -self.values)


def state_indicator(space: ProductSpace, var, state) -> Gamble:
    """Indicator of ``var == state`` (state given by label)."""
    (j,) = space.indices([var])
    v = space.variables[j]
    vals = np.zeros(v.card)
    vals[v.index(state)] = 1.0
    return Gamble(space, (j,), vals)


def _check_mass(mass: np.ndarray, tol: float = MASS_TOL) -> None:
    if not np.all(np.isfinite(mass)) or np.any(mass < 0):
        raise InvalidMass("mass entries must be finite and nonnegative")
    if abs(mass.sum() - 1.0) > tol:
        raise InvalidMass(f"mass sums to {mass.sum()!r}, not 1")


def renormalize(mass: np.ndarray, tol: float = RENORM_TOL) -> np.ndarray:
    """Correct summation drift of a constructed mass vector, or refuse."""
    mass = np.asarray(mass, dtype=float)
    total = mass.sum()
    if abs(total - 1.0) > tol:
        raise InvalidMass(f"constructed mass sums to {total!r}")
    return mass / total


@dataclass(frozen=True, eq=False)
class LinearPrevision:
    space: ProductSpace
    mass: np.ndarray

    def __post_init__(self):
        m = np.array(self.mass, dtype=float).reshape(self.space.shape)
        _check_mass(m)
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @classmethod
    def point(cls, space: ProductSpace, cell) -> "LinearPrevision":
        m = np.zeros(space.shape)
        m[tuple(cell)] = 1.0
        return cls(space, m)

    @classmethod
    def uniform(cls, space: ProductSpace) -> "LinearPrevision":
        return cls(space, np.full(space.shape, 1.0 / space.size))

    def probability(self, B) -> float:
        return float(self.mass[_as_mask(self.space, B)].sum())


def _check_space(space: ProductSpace, f: Gamble) -> None:
    if f.space != space:
        raise SpaceMismatch("gamble and prevision live on different spaces")


def expectation(p: LinearPrevision, f: Gamble) -> float:
    _check_space(p.space, f)
    return float(np.dot(p.mass.ravel(), f.array().ravel()))


@dataclass(frozen=True, eq=False)
class CredalSet:
    """Extreme points of a credal set, one flattened mass vector per row."""

    space: ProductSpace
    masses: np.ndarray

    def __post_init__(self):
        m = np.array(self.masses, dtype=float)
        m = m.reshape(-1, self.space.size) if m.size else m
        if m.ndim != 2 or m.shape[0] == 0:
            raise InvalidMass("a credal set needs at least one vertex")
        for row in m:
            _check_mass(row)
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)

    @classmethod
    def from_vertices(cls, vertices: Sequence[LinearPrevision]) -> "CredalSet":
        vertices = list(vertices)
        if not vertices:
            raise InvalidMass("a credal set needs at least one vertex")
        space = vertices[0].space
        if any(v.space != space for v in vertices):
            raise SpaceMismatch("vertices live on different spaces")
        return cls(space, np.stack([v.mass.ravel() for v in vertices]))

    @classmethod
    def precise(cls, p: LinearPrevision) -> "CredalSet":
        return cls(p.space, p.mass.ravel()[None, :])

    @property
    def vertices(self) -> list:
        return [LinearPrevision(self.space, row) for row in self.masses]

    def __len__(self) -> int:
        return self.masses.shape[0]

    @property
    def is_precise(self) -> bool:
        return len(self) == 1

    def expectations(self, f: Gamble) -> np.ndarray:
        _check_space(self.space, f)
        return self.masses @ f.array().ravel()

    def probabilities(self, B) -> np.ndarray:
        return self.masses @ _as_mask(self.space, B).ravel().astype(float)

    def marginal(self, J: Iterable) -> "CredalSet":
        J = self.space.indices(J)
        drop = tuple(j + 1 for j in range(self.space.n) if j not in J)
        m = self.masses.reshape((len(self),) + self.space.shape).sum(axis=drop)
        return CredalSet(self.space.sub(J), m.reshape(len(self), -1))


def lower_prevision(K: CredalSet, f: Gamble) -> float:
    return float(K.expectations(f).min())


def upper_prevision(K: CredalSet, f: Gamble) -> float:
    return -lower_prevision(K, -f)


def vacuous(space: ProductSpace, A: Iterable) -> CredalSet:
    cells = list(dict.fromkeys(tuple(c) for c in A))
    if not cells:
        raise EmptyEvent("vacuous credal set over an empty event")
    return CredalSet.from_vertices([LinearPrevision.point(space, c) for c in cells])


def bayes_condition(p: LinearPrevision, B, f: Gamble, eps: float = EPS_ZERO) -> float:
    _check_space(p.space, f)
    mask = _as_mask(p.space, B)
    pb = float(p.mass[mask].sum())
    if pb <= eps:
        raise ZeroMassEvent(f"P(B) = {pb!r} is not positive")
    return float((p.mass * f.array())[mask].sum()) / pb


def regular_extension(K: CredalSet, B, f: Gamble, eps: float = EPS_ZERO) -> float:
    """Minimum Bayes value over the vertices that give B positive mass."""
    _check_space(K.space, f)
    mask = _as_mask(K.space, B).ravel()
    pb = K.masses[:, mask].sum(axis=1)
    keep = pb > eps
    if not keep.any():
        raise ZeroUpperProbability("every vertex gives the event zero mass")
    num = K.masses[keep][:, mask] @ f.array().ravel()[mask]
    return float((num / pb[keep]).min())


def regular_extension_upper(K: CredalSet, B, f: Gamble, eps: float = EPS_ZERO) -> float:
    return -regular_extension(K, B, -f, eps)


def mediant_holds(b: Sequence[float], c: Sequence[float]) -> bool:
    """min_j b_j/c_j <= sum(b)/sum(c) for positive c (reference check)."""
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    return bool((b / c).min() <= b.sum() / c.sum() + 1e-12 * (1 + abs(b.sum() / c.sum())))


@dataclass(frozen=True, eq=False)
class ConditionalTable:
    """P(X_O | X_I): one credal set over X_O per cell of X_I."""

    space: ProductSpace
    target: tuple
    given: tuple
    rows: Mapping

    def __post_init__(self):
        O = self.space.indices(self.target)
        I = self.space.indices(self.given)
        if not O:
            raise InvalidIndexSet("conditional table needs a nonempty target")
        if set(O) & set(I):
            raise InvalidIndexSet("target and conditioning sets overlap")
        object.__setattr__(self, "target", O)
        object.__setattr__(self, "given", I)
        out_space = self.space.sub(O)
        rows = {}
        for x in self.space.sub(I).cells():
            if x not in self.rows:
                raise InvalidIndexSet(f"no row for conditioning cell {x}")
            row = self.rows[x]
            if not isinstance(row, CredalSet):
                row = CredalSet(out_space, row)
            if row.space != out_space:
                raise SpaceMismatch(f"row {x} is not a credal set over the target space")
            rows[x] = row
        object.__setattr__(self, "rows", rows)

    @classmethod
    def unconditional(cls, space: ProductSpace, target, credal) -> "ConditionalTable":
        return cls(space, target, (), {(): credal})

    @property
    def scope(self) -> tuple:
        return tuple(sorted(set(self.target) | set(self.given)))

    @property
    def is_linear(self) -> bool:
        return all(r.is_precise for r in self.rows.values())

    def restrict(self, f: Gamble, x) -> np.ndarray:
        """Values of f on the fibre {X_I = x}, as a flat array over X_O."""
        if not set(f.scope) <= set(self.scope):
            raise SpaceMismatch("gamble is not measurable with respect to the table's domain")
        arr = f.on(self.scope)
        pos = {j: k for k, j in enumerate(self.scope)}
        sl = [slice(None)] * len(self.scope)
        for j, xi in zip(self.given, x):
            sl[pos[j]] = xi
        return np.asarray(arr[tuple(sl)]).ravel()

    def lower(self, f: Gamble, x) -> float:
        return float((self.rows[tuple(x)].masses @ self.restrict(f, x)).min())

    def upper(self, f: Gamble, x) -> float:
        return -self.lower(-f, x)

    def fibre(self, x) -> np.ndarray:
        return self.space.event([x], self.given)


def gamble_residual(f: Gamble, ct: ConditionalTable, x=None) -> Gamble:
    """I_x (f - P(f|x)); with x=None the sum over every conditioning cell."""
    cells = list(ct.space.sub(ct.given).cells()) if x is None else [tuple(x)]
    scope = ct.scope
    base = f.on(scope)
    out = np.zeros(ct.space.sub(scope).shape)
    for c in cells:
        mask = ct.fibre(c)[tuple(slice(None) if j in scope else 0 for j in range(ct.space.n))]
        out = out + mask * (base - ct.lower(f, c))
    return Gamble(ct.space, scope, out)


def gbr_residual(p: LinearPrevision, ct: ConditionalTable, f: Gamble, x) -> float:
    if not ct.rows[tuple(x)].is_precise:
        raise InvalidMass("generalized Bayes residual needs a precise row")
    return expectation(p, gamble_residual(f, ct, x))


def support(f: Gamble, I: Iterable) -> list:
    """Cells x of X_I on whose fibre f is not identically zero."""
    space = f.space
    I = space.indices(I)
    arr = f.array()
    rest = [j for j in range(space.n) if j not in I]
    flat = np.transpose(arr, list(I) + rest).reshape(space.sub(I).size, -1)
    nz = np.any(flat != 0, axis=1)
    return [c for c, hit in zip(space.sub(I).cells(), nz) if hit]


@dataclass(frozen=True)
class WitnessBound:
    source: str        # "j0" or "S_<j>"
    table: int
    cell: tuple
    sup: float


@dataclass(frozen=True)
class WitnessReport:
    bounds: list
    total: np.ndarray = field(repr=False)

    @property
    def incoherent(self) -> bool:
        return all(b.sup < 0 for b in self.bounds)


def coherence_witness_sup(tables: Sequence[ConditionalTable], fs: Sequence[Gamble],
                          f0: Gamble, j0: int, z0) -> WitnessReport:
    """Suprema of sum_j G_j(f_j|X_Ij) - G_j0(f0|z0) over each admissible set B."""
    if len(tables) != len(fs):
        raise InvalidIndexSet("one gamble per table is required")
    space = tables[0].space
    total = np.zeros(space.shape)
    for ct, f in zip(tables, fs):
        total = total + gamble_residual(f, ct).array()
    total = total - gamble_residual(f0, tables[j0], z0).array()
    bounds = [WitnessBound("j0", j0, tuple(z0), float(total[tables[j0].fibre(z0)].max()))]
    for j, (ct, f) in enumerate(zip(tables, fs)):
        for x in support(f, ct.given):
            bounds.append(WitnessBound(f"S_{j}", j, x, float(total[ct.fibre(x)].max())))
    return WitnessReport(bounds, total)


# --- products -------------------------------------------------------------

def _conditional_array(ct: ConditionalTable, context: tuple, choice: dict, group_of) -> np.ndarray:
    """Array over X_context x X_O holding the chosen row vertex per context cell."""
    space = ct.space
    ctx_space = space.sub(context)
    out_size = space.sub(ct.target).size
    pos = [context.index(j) for j in ct.given]
    arr = np.empty((ctx_space.size, out_size))
    for k, a in enumerate(ctx_space.cells()):
        x = tuple(a[p] for p in pos)
        arr[k] = ct.rows[x].masses[choice[group_of(a, x)]]
    return arr.reshape(ctx_space.shape + space.sub(ct.target).shape)


def _chain_vertices(first: CredalSet, first_idx: tuple, steps, cap: int):
    """Enumerate joint vertices along a nested chain.

    `steps` holds (table, context, mode). The context of each step is the
    set of variables generated so far. In "strong" mode the row vertex is
    picked once per cell of the table's own conditioning set; in
    "irrelevant" mode once per context cell.
    """
    plans = []
    count = len(first)
    for ct, context, mode in steps:
        ctx_space = ct.space.sub(context)
        pos = [context.index(j) for j in ct.given]
        if mode == "strong":
            group_of = lambda a, x: x  # noqa: E731
            groups = list(ct.space.sub(ct.given).cells())
            sizes = [len(ct.rows[g]) for g in groups]
        else:
            group_of = lambda a, x: a  # noqa: E731
            groups = list(ctx_space.cells())
            sizes = [len(ct.rows[tuple(a[p] for p in pos)]) for a in groups]
        n = 1
        for s in sizes:
            n *= s
            if n * count > cap:
                break
        count *= n
        if count > cap:
            raise EnumerationCapExceeded(f"more than {cap} joint vertices")
        plans.append((ct, context, groups, sizes, group_of))

    space = steps[0][0].space if steps else first.space
    for v0 in range(len(first)):
        base = first.masses[v0].reshape(space.sub(first_idx).shape)
        yield from _extend(base, first_idx, plans, 0)


def _extend(joint, axes, plans, k):
    if k == len(plans):
        yield joint, axes
        return
    ct, context, groups, sizes, group_of = plans[k]
    assert axes == context
    new_axes = tuple(sorted(set(axes) | set(ct.target)))
    order = list(axes) + list(ct.target)
    perm = [order.index(j) for j in new_axes]
    expand = joint.reshape(joint.shape + (1,) * len(ct.target))
    for picks in itertools.product(*(range(s) for s in sizes)):
        choice = dict(zip(groups, picks))
        cond = _conditional_array(ct, context, choice, group_of)
        yield from _extend(np.transpose(expand * cond, perm), new_axes, plans, k + 1)


def _collect(vertices, space: ProductSpace, generated: tuple) -> CredalSet:
    out_space = space.sub(generated)
    rows = []
    for joint, axes in vertices:
        rows.append(renormalize(joint.ravel()))
    return CredalSet(out_space, np.stack(rows))


def marginal_extension(p1: CredalSet, chain: Sequence[ConditionalTable], cap: int = 2**20) -> CredalSet:
    """Joint from p1 on X_O1 and tables with I_j = I_(j-1) u O_(j-1)."""
    if not chain:
        return p1
    space = chain[0].space
    names = p1.space.names
    try:
        first_idx = space.indices(names)
    except InvalidIndexSet as exc:
        raise InvalidChain(str(exc)) from exc
    if space.sub(first_idx) != p1.space:
        raise InvalidChain("p1 must be a credal set over a subspace of the chain's space")
    generated = first_idx
    steps = []
    for ct in chain:
        if ct.space != space:
            raise InvalidChain("tables live on different spaces")
        if ct.given != generated:
            raise InvalidChain(f"table conditions on {ct.given}, expected {generated}")
        if set(ct.target) & set(generated):
            raise InvalidChain("table outputs overlap earlier variables")
        steps.append((ct, generated, "strong"))
        generated = tuple(sorted(set(generated) | set(ct.target)))
    return _collect(_chain_vertices(p1, first_idx, steps, cap), space, generated)


def _product(tables: Sequence[ConditionalTable], mode: str, cap: int) -> CredalSet:
    from .cohgraph import CollectionSpec, compatible_order

    if not tables:
        raise InvalidChain("no tables given")
    space = tables[0].space
    if any(t.space != space for t in tables):
        raise InvalidChain("tables live on different spaces")
    spec = CollectionSpec(space.n, [(t.target, t.given) for t in tables])
    order = compatible_order(spec)
    ordered = [tables[k] for k in order]
    outs = [set(t.target) for t in ordered]
    if sum(len(o) for o in outs) != len(set().union(*outs)):
        raise InvalidChain("table outputs overlap")
    first = ordered[0]
    if first.given:
        raise InvalidChain("the first table in a compatible order must be unconditional")
    generated = first.target
    steps = []
    for ct in ordered[1:]:
        if not set(ct.given) <= set(generated):
            raise InvalidChain("a table conditions on variables no earlier table outputs")
        steps.append((ct, generated, mode))
        generated = tuple(sorted(set(generated) | set(ct.target)))
    return _collect(_chain_vertices(first.rows[()], first.target, steps, cap), space, generated)


def strong_product(tables: Sequence[ConditionalTable], cap: int = 2**20) -> CredalSet:
    """Joint vertices with row choices tied across cells sharing X_I."""
    return _product(tables, "strong", cap)


def irrelevant_product(tables: Sequence[ConditionalTable], cap: int = 2**20) -> CredalSet:
    """Joint vertices with row choices made independently per context cell."""
    return _product(tables, "irrelevant", cap)
