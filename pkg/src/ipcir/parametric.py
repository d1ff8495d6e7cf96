"""Beta-Bernoulli inference from incomplete paired samples.

Units are pairs (b, v) of binary variables; the quantity of interest is
P(b = first state | v = first state). Cells may be missing at random (CAR)
or through an unknown process. Unknown cells are resolved by enumerating
their completions, CAR cells by EM.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .config import RunConfig
from .errors import EmDidNotConverge, EnumerationCapExceeded, InvalidParameter, InvalidSample
from .incompleteness import CAR, UNKNOWN, Missing, is_missing, parse_cell


def beta_posterior_mean(s: float, t: float, n1: int, n: int) -> float:
    if not s > 0 or not 0 < t < 1 or not 0 <= n1 <= n:
        raise InvalidParameter(f"need s > 0, 0 < t < 1, 0 <= n1 <= n (got {s}, {t}, {n1}, {n})")
    return (n1 + s * t) / (n + s)


def imprecise_beta_interval(s: float, n1: int, n: int) -> tuple:
    """Closed hull of the posterior means over all prior expectations t."""
    if not s > 0 or not 0 <= n1 <= n:
        raise InvalidParameter(f"need s > 0 and 0 <= n1 <= n (got {s}, {n1}, {n})")
    return (n1 / (n + s), (n1 + s) / (n + s))


@dataclass(frozen=True)
class BetaPrior:
    s: float = 1.0
    t: float | None = 0.5        # None: imprecise, t ranges over (0, 1)

    def __post_init__(self):
        if not self.s > 0:
            raise InvalidParameter("prior strength must be positive")
        if self.t is not None and not 0 < self.t < 1:
            raise InvalidParameter("prior expectation must lie in (0, 1)")

    @property
    def imprecise(self) -> bool:
        return self.t is None


@dataclass(frozen=True)
class PairedSample:
    units: tuple
    b_states: tuple = ("yes", "no")
    v_states: tuple = ("yes", "no")

    def __post_init__(self):
        units = tuple(tuple(u) for u in self.units)
        if not units:
            raise InvalidSample("a sample needs at least one unit")
        for u in units:
            if len(u) != 2:
                raise InvalidSample(f"unit {u} is not a (b, v) pair")
            for cell, dom in zip(u, (self.b_states, self.v_states)):
                if not is_missing(cell) and cell not in dom:
                    raise InvalidSample(f"{cell!r} is not in {dom}")
        if len(self.b_states) != 2 or len(self.v_states) != 2:
            raise InvalidSample("both variables must be binary")
        object.__setattr__(self, "units", units)

    def unknown_cells(self) -> list:
        return [(i, k) for i, u in enumerate(self.units) for k in (0, 1)
                if is_missing(u[k]) and u[k].tag == "unknown"]

    def with_cells(self, assignment: dict) -> "PairedSample":
        units = [list(u) for u in self.units]
        for (i, k), val in assignment.items():
            units[i][k] = val
        return replace(self, units=tuple(tuple(u) for u in units))

    @classmethod
    def read_csv(cls, path, b_states=("yes", "no"), v_states=("yes", "no")) -> "PairedSample":
        try:
            with open(path, newline="") as fh:
                rows = list(csv.reader(fh))
        except OSError as exc:
            raise InvalidSample(f"cannot read {path}: {exc}") from exc
        if not rows or [h.strip() for h in rows[0]] != ["b", "v"]:
            raise InvalidSample("sample CSV must start with the header 'b,v'")
        units = [tuple(parse_cell(c) for c in r) for r in rows[1:] if r]
        return cls(tuple(units), tuple(b_states), tuple(v_states))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["b", "v"])
            for u in self.units:
                w.writerow([str(c) for c in u])


def _prior_triplet(t) -> np.ndarray:
    """Prior expectations for (theta_v, theta_b|v1, theta_b|v2)."""
    arr = np.broadcast_to(np.asarray(t, dtype=float), (3,)).copy()
    if np.any(arr <= 0) or np.any(arr >= 1):
        raise InvalidParameter("prior expectations must lie in (0, 1)")
    return arr


@dataclass(frozen=True)
class EmFit:
    theta_v: float                 # P(v = first state)
    theta_b: tuple                 # P(b = first state | v) per v state
    iterations: int

    @property
    def estimate(self) -> float:
        return self.theta_b[0]


def _expected_counts(sample: PairedSample, theta_v: float, theta_b: np.ndarray) -> np.ndarray:
    """Expected count table N[b, v] with CAR cells filled from the current fit."""
    pv = np.array([theta_v, 1 - theta_v])
    pb = np.stack([theta_b, 1 - theta_b])          # pb[b, v]
    joint = pb * pv                                 # P(b, v)
    N = np.zeros((2, 2))
    for b, v in sample.units:
        bi = None if is_missing(b) else sample.b_states.index(b)
        vi = None if is_missing(v) else sample.v_states.index(v)
        if bi is not None and vi is not None:
            N[bi, vi] += 1
        elif bi is None and vi is not None:
            N[:, vi] += joint[:, vi] / joint[:, vi].sum()
        elif vi is None and bi is not None:
            N[bi, :] += joint[bi, :] / joint[bi, :].sum()
        else:
            N += joint
    return N


def _m_step(N: np.ndarray, s: float, t: np.ndarray) -> tuple:
    n = N.sum()
    nv = N.sum(axis=0)
    theta_v = (nv[0] + s * t[0]) / (n + s)
    theta_b = (N[0] + s * t[1:]) / (nv + s)
    return theta_v, theta_b


def em_fit(sample: PairedSample, s: float = 1.0, t=0.5, tol: float = 1e-9,
           max_iter: int = 10_000) -> EmFit:
    """Posterior-mean EM for P(v) P(b|v) with Beta smoothing of strength s."""
    if not s > 0:
        raise InvalidParameter("prior strength must be positive")
    if sample.unknown_cells():
        raise InvalidSample("EM accepts CAR-missing cells only; resolve unknown cells first")
    tt = _prior_triplet(t)
    theta_v, theta_b = 0.5, np.array([0.5, 0.5])
    if not any(is_missing(c) for u in sample.units for c in u):
        theta_v, theta_b = _m_step(_expected_counts(sample, theta_v, theta_b), s, tt)
        return EmFit(float(theta_v), tuple(float(x) for x in theta_b), 0)
    for it in range(1, max_iter + 1):
        new_v, new_b = _m_step(_expected_counts(sample, theta_v, theta_b), s, tt)
        delta = max(abs(new_v - theta_v), float(np.abs(new_b - theta_b).max()))
        theta_v, theta_b = new_v, new_b
        if delta < tol:
            return EmFit(float(theta_v), tuple(float(x) for x in theta_b), it)
    raise EmDidNotConverge(f"EM did not settle within {max_iter} iterations")


def em_estimate(sample: PairedSample, s: float = 1.0, t=0.5, tol: float = 1e-9,
                max_iter: int = 10_000) -> float:
    return em_fit(sample, s, t, tol, max_iter).estimate


@dataclass(frozen=True)
class CompletionEstimate:
    completion: tuple          # ((unit, column, state), ...)
    lower: float
    upper: float


@dataclass(frozen=True)
class ParametricResult:
    lower: float
    upper: float
    per_completion: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "per_completion": [
                {"completion": [[i, "bv"[k], st] for i, k, st in r.completion],
                 "lower": r.lower, "upper": r.upper} for r in self.per_completion],
        }


def completions(sample: PairedSample, cap: int = 20):
    """Binary counter over unknown cells in unit order, low bit first."""
    cells = sample.unknown_cells()
    if len(cells) > cap:
        raise EnumerationCapExceeded(f"{len(cells)} unknown cells exceed the cap of {cap}")
    doms = [sample.b_states if k == 0 else sample.v_states for _, k in cells]
    for code in range(2 ** len(cells)):
        yield tuple((i, k, dom[(code >> bit) & 1]) for bit, ((i, k), dom) in enumerate(zip(cells, doms)))


def cir_parametric(sample: PairedSample, s: float = 1.0, prior: BetaPrior | None = None,
                   config: RunConfig | None = None) -> ParametricResult:
    """Lower and upper estimate over completions of the unknown cells.

    With a precise prior each completion gets one EM run. With an imprecise
    prior each completion is swept over the corners of (eps, 1-eps)^3 for
    the three prior expectations.
    """
    cfg = config or RunConfig()
    prior = prior or BetaPrior(s, 0.5)
    eps = cfg.eps_t
    corners = ([prior.t] if not prior.imprecise
               else list(itertools.product((eps, 1 - eps), repeat=3)))
    rows = []
    for comp in completions(sample, cfg.unknown_cell_cap):
        filled = sample.with_cells({(i, k): st for i, k, st in comp})
        vals = [em_estimate(filled, prior.s, t, cfg.em_tol, cfg.em_max_iter) for t in corners]
        rows.append(CompletionEstimate(comp, min(vals), max(vals)))
    return ParametricResult(min(r.lower for r in rows), max(r.upper for r in rows), tuple(rows))


def mar_baseline(sample: PairedSample, s: float = 1.0, t=0.5, config: RunConfig | None = None) -> float:
    """Treat every missing cell as missing at random."""
    cfg = config or RunConfig()
    units = tuple(tuple(CAR if is_missing(c) else c for c in u) for u in sample.units)
    return em_estimate(replace(sample, units=units), s, t, cfg.em_tol, cfg.em_max_iter)


def discard_fully_car_missing_units(sample: PairedSample) -> PairedSample:
    keep = tuple(u for u in sample.units if not all(c == CAR for c in u))
    if not keep:
        raise InvalidSample("every unit is fully missing at random")
    return replace(sample, units=keep)


def observation_marginal(theta: Sequence[float], phi) -> np.ndarray:
    """Psi_w = sum_d theta_d Phi[d, w]."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if theta.ndim != 1 or phi.ndim != 2 or phi.shape[0] != theta.size:
        raise InvalidParameter("theta must be a vector and phi a matrix with one row per fact")
    for vec in (theta, *phi):
        if np.any(vec < 0) or abs(vec.sum() - 1) > 1e-12:
            raise InvalidParameter("theta and every row of phi must be mass vectors")
    return theta @ phi


DATASET_3 = (
    ("yes", "yes"), ("yes", "no"), ("yes", UNKNOWN), ("no", "no"), ("no", UNKNOWN), (CAR, "yes"),
)


def dataset3() -> PairedSample:
    """Six units: two with v hidden by an unknown process, one with b missing at random."""
    return PairedSample(DATASET_3)


__all__ = [
    "BetaPrior", "PairedSample", "Missing", "EmFit", "ParametricResult",
    "beta_posterior_mean", "imprecise_beta_interval", "em_fit", "em_estimate",
    "cir_parametric", "mar_baseline", "discard_fully_car_missing_units",
    "observation_marginal", "completions", "dataset3",
]
