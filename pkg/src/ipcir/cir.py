"""Conservative updating under a mix of unknown and CAR incompleteness.

The fact vector splits into a part whose incompleteness process is
unknown (Ybar) and a part coarsened at random (Yhat). The lower posterior
is the worst regular extension over the completions of the unknown part
that still have positive upper probability.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .config import EPS_ZERO, RunConfig
from .errors import (
    CurPreconditionViolated,
    EnumerationCapExceeded,
    InvalidIndexSet,
    InvalidMap,
    ObservationImpossible,
    OracleMismatch,
    SpaceMismatch,
)
from .incompleteness import CarCoefficients, MultiValuedMap, validate_unknown_ip
from .previsions import (
    CredalSet,
    Gamble,
    ProductSpace,
    VariableSpec,
    regular_extension,
    renormalize,
)


@dataclass(frozen=True)
class ObservationSpec:
    """Compatible sets of an incomplete observation.

    `unknown_part` lists cells of X over `unknown_vars`; `car_part` lists
    cells over `car_vars`. Either variable set may be empty, in which case
    its part is the single empty cell.
    """

    unknown_vars: tuple
    unknown_part: tuple
    car_vars: tuple = ()
    car_part: tuple = ((),)

    def __post_init__(self):
        object.__setattr__(self, "unknown_part", tuple(dict.fromkeys(tuple(c) for c in self.unknown_part)))
        object.__setattr__(self, "car_part", tuple(dict.fromkeys(tuple(c) for c in self.car_part)))
        if not self.unknown_part or not self.car_part:
            raise InvalidIndexSet("both compatible sets must be nonempty")

    @classmethod
    def from_labels(cls, space: ProductSpace, unknown_vars, unknown_part, car_vars=(), car_part=((),)):
        uv, cv = list(unknown_vars), list(car_vars)
        su = ProductSpace(tuple(space.variables[space.indices([v])[0]] for v in uv))
        sc = ProductSpace(tuple(space.variables[space.indices([v])[0]] for v in cv))
        return cls(tuple(uv), tuple(su.cell(c) for c in unknown_part),
                   tuple(cv), tuple(sc.cell(c) for c in car_part))

    def resolve(self, space: ProductSpace):
        """Index tuples (in the order given) for both variable groups."""
        uv = tuple(space.indices([v])[0] for v in self.unknown_vars)
        cv = tuple(space.indices([v])[0] for v in self.car_vars)
        if len(set(uv)) != len(uv) or len(set(cv)) != len(cv) or set(uv) & set(cv):
            raise InvalidIndexSet("unknown and CAR variable groups must be disjoint")
        for part, vs in ((self.unknown_part, uv), (self.car_part, cv)):
            cards = [space.variables[j].card for j in vs]
            for c in part:
                if len(c) != len(vs) or any(not 0 <= x < k for x, k in zip(c, cards)):
                    raise InvalidIndexSet(f"cell {c} does not belong to its group's space")
        return uv, cv


def _group_event(space: ProductSpace, vars_: tuple, cells) -> np.ndarray:
    """Mask of {X_vars in cells}; vars_ may be in any order."""
    mask = np.zeros(space.shape, dtype=bool)
    idx = np.indices(space.shape)
    for c in cells:
        hit = np.ones(space.shape, dtype=bool)
        for j, x in zip(vars_, c):
            hit &= idx[j] == x
        mask |= hit
    return mask


@dataclass(frozen=True)
class CompletionRow:
    completion: tuple
    supported: bool
    lower: float | None
    upper: float | None


@dataclass(frozen=True)
class CirResult:
    lower: float
    upper: float
    per_completion: tuple
    attaining_completions: tuple
    attaining_upper: tuple = ()

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "per_completion": [
                {"completion": list(r.completion), "supported": r.supported,
                 "lower": r.lower, "upper": r.upper} for r in self.per_completion],
            "attaining_completions": [list(c) for c in self.attaining_completions],
        }


def _masks(K1: CredalSet, obs: ObservationSpec):
    uv, cv = obs.resolve(K1.space)
    car = _group_event(K1.space, cv, obs.car_part) if cv else K1.space.full_event()
    return uv, car


def completion_support(K1: CredalSet, obs: ObservationSpec, eps: float = EPS_ZERO) -> list:
    uv, car = _masks(K1, obs)
    out = []
    for y in obs.unknown_part:
        ev = _group_event(K1.space, uv, [y]) & car
        if K1.probabilities(ev).max() > eps:
            out.append(y)
    return out


def cir_lower(K1: CredalSet, g: Gamble, obs: ObservationSpec, config: RunConfig | None = None) -> CirResult:
    cfg = config or RunConfig()
    if g.space != K1.space:
        raise SpaceMismatch("gamble and credal set live on different spaces")
    if len(obs.unknown_part) * len(K1) > cfg.bayes_eval_cap:
        raise EnumerationCapExceeded(
            f"{len(obs.unknown_part)} completions x {len(K1)} vertices exceeds {cfg.bayes_eval_cap}")
    uv, car = _masks(K1, obs)
    whole = _group_event(K1.space, uv, obs.unknown_part) & car
    if K1.probabilities(whole).max() <= cfg.eps_zero:
        raise ObservationImpossible("the observation has zero upper probability")
    rows = []
    for y in obs.unknown_part:
        ev = _group_event(K1.space, uv, [y]) & car
        if K1.probabilities(ev).max() > cfg.eps_zero:
            lo = regular_extension(K1, ev, g, cfg.eps_zero)
            hi = -regular_extension(K1, ev, -g, cfg.eps_zero)
            rows.append(CompletionRow(y, True, lo, hi))
        else:
            rows.append(CompletionRow(y, False, None, None))
    live = [r for r in rows if r.supported]
    assert live, "positive upper probability of the observation implies a supported completion"
    lower = min(r.lower for r in live)
    upper = max(r.upper for r in live)
    tie = 1e-12 * (1.0 + abs(lower))
    at_lo = tuple(r.completion for r in live if r.lower <= lower + tie)
    at_hi = tuple(r.completion for r in live if r.upper >= upper - 1e-12 * (1.0 + abs(upper)))
    return CirResult(lower, upper, tuple(rows), at_lo, at_hi)


def cir_upper(K1: CredalSet, g: Gamble, obs: ObservationSpec, config: RunConfig | None = None) -> float:
    return cir_lower(K1, g, obs, config).upper


def cur_lower(K1: CredalSet, g: Gamble, unknown_vars, unknown_set, config: RunConfig | None = None) -> CirResult:
    """Conservative updating with no CAR part; every completion must be possible."""
    cfg = config or RunConfig()
    obs = ObservationSpec(tuple(unknown_vars), tuple(unknown_set))
    uv, _ = obs.resolve(K1.space)
    for y in obs.unknown_part:
        if K1.probabilities(_group_event(K1.space, uv, [y])).max() <= cfg.eps_zero:
            raise CurPreconditionViolated(y)
    return cir_lower(K1, g, obs, cfg)


def car_update(K1: CredalSet, g: Gamble, car_vars, car_set, config: RunConfig | None = None) -> tuple:
    cfg = config or RunConfig()
    cv = tuple(K1.space.indices([v])[0] for v in car_vars)
    ev = _group_event(K1.space, cv, car_set) if cv else K1.space.full_event()
    return (regular_extension(K1, ev, g, cfg.eps_zero), -regular_extension(K1, ev, -g, cfg.eps_zero))


# --- explicit joint with the incompleteness processes ------------------------

@dataclass(frozen=True, eq=False)
class IncompletenessModel:
    """Unknown map on Ybar cells, CAR map on Yhat cells and its coefficients."""

    unknown_vars: tuple
    gbar: MultiValuedMap
    car_vars: tuple
    ghat: MultiValuedMap
    alpha: CarCoefficients

    def observation(self, wbar, what) -> ObservationSpec:
        return ObservationSpec(tuple(self.unknown_vars), tuple(self.gbar.compatible_facts(wbar)),
                               tuple(self.car_vars), tuple(self.ghat.compatible_facts(what)))


def _selection_array(space: ProductSpace, uv: tuple, gbar: MultiValuedMap, sel: dict) -> np.ndarray:
    arr = np.zeros(space.shape + (len(gbar.observations),))
    idx = np.indices(space.shape)
    col = {w: k for k, w in enumerate(gbar.observations)}
    for y, w in sel.items():
        hit = np.ones(space.shape, dtype=bool)
        for j, x in zip(uv, y):
            hit &= idx[j] == x
        arr[hit, col[w]] = 1.0
    return arr


def joint_with_ip(K1: CredalSet, ip: IncompletenessModel, cap: int = 2**20,
                  validate: bool = True) -> CredalSet:
    """Credal set over (Z, Y, Wbar, What) built from K1 and the two processes.

    One vertex per K1 vertex and per selection ybar -> wbar in Gamma(ybar).
    `validate=False` skips the unknown-process assumptions (test use only).
    """
    space = K1.space
    uv = tuple(space.indices([v])[0] for v in ip.unknown_vars)
    cv = tuple(space.indices([v])[0] for v in ip.car_vars)
    ybar_cells = list(itertools.product(*(range(space.variables[j].card) for j in uv)))
    yhat_cells = list(itertools.product(*(range(space.variables[j].card) for j in cv)))
    if set(ip.gbar.facts) != set(ybar_cells) or set(ip.ghat.facts) != set(yhat_cells):
        raise InvalidMap("maps must list every cell of their fact spaces")
    if validate:
        rep = validate_unknown_ip(ip.gbar)
        if not rep.ok:
            raise InvalidMap(f"unknown-process map violates {sorted({v.assumption for v in rep.violations})}")
    if not ip.alpha.check(ip.ghat):
        raise InvalidMap("CAR coefficients do not solve the map's system")
    choices = [sorted(ip.gbar.gamma[y], key=ip.gbar.observations.index) for y in ip.gbar.facts]
    n = len(K1)
    for c in choices:
        n *= len(c)
        if n > cap:
            raise EnumerationCapExceeded(f"more than {cap} joint vertices")

    names = set(space.names)
    wb, wh = "Wbar", "What"
    while wb in names or wh in names:
        wb, wh = wb + "_", wh + "_"
    jspace = ProductSpace(space.variables + (VariableSpec(wb, ip.gbar.observations),
                                             VariableSpec(wh, ip.ghat.observations)))

    # CAR kernel: alpha_what on the compatible Yhat cells
    H = np.zeros(space.shape + (len(ip.ghat.observations),))
    idx = np.indices(space.shape)
    for y in ip.ghat.facts:
        hit = np.ones(space.shape, dtype=bool)
        for j, x in zip(cv, y):
            hit &= idx[j] == x
        for k, w in enumerate(ip.ghat.observations):
            if w in ip.ghat.gamma[y]:
                H[hit, k] = ip.alpha[w]

    rows = []
    for v in K1.masses:
        m = v.reshape(space.shape)
        for pick in itertools.product(*choices):
            S = _selection_array(space, uv, ip.gbar, dict(zip(ip.gbar.facts, pick)))
            joint = m[..., None, None] * S[..., :, None] * H[..., None, :]
            rows.append(renormalize(joint.ravel()))
    return CredalSet(jspace, np.stack(rows))


def theorem1_oracle(K1: CredalSet, g: Gamble, w: tuple, ip: IncompletenessModel,
                    config: RunConfig | None = None, check: bool = True,
                    tol: float = 1e-9, validate: bool = True) -> float:
    """Regular extension on the explicit joint at {W = w}.

    With `check`, the value is compared to cir_lower on the matching
    observation and OracleMismatch is raised on disagreement.
    """
    cfg = config or RunConfig()
    wbar, what = w
    joint = joint_with_ip(K1, ip, cfg.vertex_cap, validate)
    ev = np.zeros(joint.space.shape, dtype=bool)
    ev[..., ip.gbar.observations.index(wbar), ip.ghat.observations.index(what)] = True
    gj = Gamble(joint.space, g.scope, g.values)
    value = regular_extension(joint, ev, gj, cfg.eps_zero)
    if check:
        direct = cir_lower(K1, g, ip.observation(wbar, what), cfg).lower
        if abs(direct - value) > tol:
            raise OracleMismatch(f"joint conditioning gives {value!r}, conservative rule gives {direct!r}")
    return value
