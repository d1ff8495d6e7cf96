"""Naive Bayes and a naive credal classifier for incomplete data.

The prior follows the imprecise-Dirichlet parametrization: a class
component t(c) and, per feature and class, a conditional component
t(f|c). With strength s the smoothed estimates are

    P(c)   = (n(c) + s t(c)) / (N + s)
    P(f|c) = (n(f, c) + s t(c) t(f|c)) / (n_k(c) + s t(c))

where n_k(c) counts class-c units with feature k present. The credal
classifier returns every class that wins for some completion of the
unknown cells and some prior in the (eps-trimmed) prior simplex.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field
from math import comb, log
from typing import Mapping, Sequence

import numpy as np

from .config import RunConfig
from .errors import EnumerationCapExceeded, InvalidParameter, InvalidSample, UnsupportedClassArity
from .incompleteness import CAR, UNKNOWN, Missing, is_missing, parse_cell


@dataclass(frozen=True)
class LabeledSample:
    feature_names: tuple
    feature_states: tuple          # one tuple of labels per feature
    class_name: str
    class_states: tuple
    units: tuple                   # (feature cells tuple, class label)

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "feature_states", tuple(tuple(s) for s in self.feature_states))
        object.__setattr__(self, "class_states", tuple(self.class_states))
        units = tuple((tuple(f), c) for f, c in self.units)
        object.__setattr__(self, "units", units)
        if len(self.feature_names) != len(self.feature_states):
            raise InvalidSample("one state list per feature is required")
        if len(self.class_states) < 2:
            raise InvalidSample("the class needs at least two states")
        for f, c in units:
            if c not in self.class_states:
                raise InvalidSample(f"class label {c!r} is not declared")
            if len(f) != len(self.feature_names):
                raise InvalidSample(f"unit {f} has the wrong number of features")
            for cell, dom in zip(f, self.feature_states):
                if not is_missing(cell) and cell not in dom:
                    raise InvalidSample(f"{cell!r} is not a declared feature state")

    def __len__(self):
        return len(self.units)

    def check_instance(self, instance: Sequence) -> tuple:
        inst = tuple(instance)
        if len(inst) != len(self.feature_names):
            raise InvalidSample("instance has the wrong number of features")
        for cell, dom in zip(inst, self.feature_states):
            if not is_missing(cell) and cell not in dom:
                raise InvalidSample(f"{cell!r} is not a declared feature state")
        return inst

    @classmethod
    def read_csv(cls, path, feature_states: Mapping | None = None,
                 class_states: Sequence | None = None) -> "LabeledSample":
        """Header lists the features then the class; '?' unknown, '*' CAR."""
        header, rows = _read_rows(path)
        feats, cname = header[:-1], header[-1]
        units = [(tuple(parse_cell(c) for c in r[:-1]), r[-1].strip()) for r in rows]
        fs = []
        for k, name in enumerate(feats):
            if feature_states and name in feature_states:
                fs.append(tuple(feature_states[name]))
            else:
                fs.append(tuple(dict.fromkeys(u[0][k] for u in units if not is_missing(u[0][k]))))
        cs = tuple(class_states) if class_states else tuple(dict.fromkeys(u[1] for u in units))
        return cls(tuple(feats), tuple(fs), cname, cs, tuple(units))


def _read_rows(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise InvalidSample(f"cannot read {path}: {exc}") from exc
    if len(rows) < 1:
        raise InvalidSample(f"{path} is empty")
    return [h.strip() for h in rows[0]], rows[1:]


def read_instances(path, sample: LabeledSample) -> list:
    """Test CSV with the training header; the class column may be empty or '?'."""
    header, rows = _read_rows(path)
    names = list(sample.feature_names)
    if header[:len(names)] != names:
        raise InvalidSample("test header must start with the training features")
    out = []
    for r in rows:
        inst = sample.check_instance(tuple(parse_cell(c) for c in r[:len(names)]))
        truth = r[len(names)].strip() if len(r) > len(names) and r[len(names)].strip() not in ("", "?") else None
        out.append((inst, truth))
    return out


# --- naive Bayes ----------------------------------------------------------------

@dataclass(frozen=True)
class NbModel:
    class_states: tuple
    feature_states: tuple
    s: float
    class_counts: np.ndarray               # n(c)
    feature_counts: tuple                  # per feature: array (|F_k|, |C|)
    t_class: np.ndarray                    # t(c)
    t_feature: tuple                       # per feature: array (|F_k|, |C|), columns sum to 1
    smoothing: str = "idm"

    def log_scores(self, instance: Sequence) -> np.ndarray:
        N = self.class_counts.sum()
        st = self.s * self.t_class
        out = np.log(self.class_counts + st) - log(N + self.s)
        for k, cell in enumerate(instance):
            if is_missing(cell):
                continue
            f = self.feature_states[k].index(cell)
            nfc = self.feature_counts[k]
            nc = nfc.sum(axis=0)
            if self.smoothing == "idm":
                num = nfc[f] + st * self.t_feature[k][f]
                den = nc + st
            else:
                num = nfc[f] + self.s * self.t_feature[k][f]
                den = nc + self.s
            out = out + np.log(num) - np.log(den)
        return out


def _uniform_prior(sample: LabeledSample):
    tc = np.full(len(sample.class_states), 1.0 / len(sample.class_states))
    tf = tuple(np.full((len(st), len(sample.class_states)), 1.0 / len(st)) for st in sample.feature_states)
    return tc, tf


def _counts(sample: LabeledSample):
    C = len(sample.class_states)
    nc = np.zeros(C)
    nf = [np.zeros((len(st), C)) for st in sample.feature_states]
    for f, c in sample.units:
        ci = sample.class_states.index(c)
        nc[ci] += 1
        for k, cell in enumerate(f):
            if not is_missing(cell):
                nf[k][sample.feature_states[k].index(cell), ci] += 1
    return nc, tuple(nf)


def nb_train(sample: LabeledSample, s: float = 1.0, t_class=None, t_feature=None,
             smoothing: str = "idm") -> NbModel:
    """Count-based training; missing cells are skipped feature by feature.

    smoothing="idm" uses the prior weights described in the module
    docstring; smoothing="flat" adds s/|F_k| to every feature count instead.
    """
    if not s > 0:
        raise InvalidParameter("prior strength must be positive")
    if len(sample) == 0:
        raise InvalidSample("cannot train on an empty sample")
    if smoothing not in ("idm", "flat"):
        raise InvalidParameter("smoothing must be 'idm' or 'flat'")
    tc0, tf0 = _uniform_prior(sample)
    tc = tc0 if t_class is None else np.asarray(t_class, dtype=float)
    tf = tf0 if t_feature is None else tuple(np.asarray(a, dtype=float) for a in t_feature)
    nc, nf = _counts(sample)
    return NbModel(sample.class_states, sample.feature_states, float(s), nc, nf, tc, tf, smoothing)


def nb_predict(model: NbModel, instance: Sequence) -> tuple:
    """(argmax class, {class: posterior}); missing features are marginalized."""
    ls = model.log_scores(instance)
    p = np.exp(ls - ls.max())
    p = p / p.sum()
    k = int(np.argmax(p))
    return model.class_states[k], {c: float(x) for c, x in zip(model.class_states, p)}


# --- naive credal classifier ------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    class_set: tuple
    intervals: Mapping | None = None
    determinate: bool = field(init=False)

    def __post_init__(self):
        if not self.class_set:
            raise InvalidSample("empty class set")
        object.__setattr__(self, "determinate", len(self.class_set) == 1)

    def to_dict(self) -> dict:
        return {"class_set": list(self.class_set), "determinate": self.determinate}


def _compositions(m: int, k: int):
    """All ways to split m unknown cells among k states."""
    for cut in itertools.combinations(range(m + k - 1), k - 1):
        prev, out = -1, []
        for c in cut + (m + k - 1,):
            out.append(c - prev - 1)
            prev = c
        yield np.array(out, dtype=float)


def _simplex_vertices(k: int, eps: float) -> list:
    out = []
    for j in range(k):
        v = np.full(k, eps)
        v[j] = 1.0 - (k - 1) * eps
        out.append(v)
    return out


def class_prior_grid(eps: float, n: int = 200) -> np.ndarray:
    """Values of t(c0) searched by the credal classifier (vertices included)."""
    return np.linspace(eps, 1.0 - eps, n + 1)


def ncc2_predict(sample: LabeledSample, instance: Sequence, s: float = 1.0,
                 config: RunConfig | None = None, grid: int = 200) -> Classification:
    """Union of naive-Bayes decisions over completions and priors (binary class).

    Training completions only matter through the per-(feature, class)
    counts, so each group of unknown cells is enumerated by how many of its
    cells take each state. For a fixed class prior the posterior odds split
    into one factor per feature, each monotone in its own conditional prior
    component, so those components sit at simplex vertices. The class prior
    enters every factor, so it is searched on a grid that contains both
    vertices.
    """
    cfg = config or RunConfig()
    if len(sample.class_states) != 2:
        raise UnsupportedClassArity("the credal classifier supports binary classes only")
    if not s > 0:
        raise InvalidParameter("prior strength must be positive")
    inst = sample.check_instance(instance)
    keep = [k for k, cell in enumerate(inst) if not (is_missing(cell) and cell.tag == "car")]

    nc = np.zeros(2)
    obs = {k: np.zeros((len(sample.feature_states[k]), 2)) for k in keep}
    unk = {k: np.zeros(2, dtype=int) for k in keep}
    for f, c in sample.units:
        ci = sample.class_states.index(c)
        nc[ci] += 1
        for k in keep:
            cell = f[k]
            if not is_missing(cell):
                obs[k][sample.feature_states[k].index(cell), ci] += 1
            elif cell.tag == "unknown":
                unk[k][ci] += 1

    evals = 0
    allocs = {}
    for k in keep:
        nk = len(sample.feature_states[k])
        for ci in range(2):
            evals += comb(int(unk[k][ci]) + nk - 1, nk - 1) * nk
            allocs[k, ci] = list(_compositions(int(unk[k][ci]), nk))
    tcs = class_prior_grid(cfg.eps_t, grid)
    if evals * len(tcs) > cfg.nb_eval_cap:
        raise EnumerationCapExceeded(f"about {evals * len(tcs)} evaluations exceed {cfg.nb_eval_cap}")

    best = -np.inf           # max over configurations of log score(c0) - log score(c1)
    worst = np.inf
    for t0 in tcs:
        st = s * np.array([t0, 1.0 - t0])
        d_max = log(nc[0] + st[0]) - log(nc[1] + st[1])
        d_min = d_max
        for k in keep:
            nk = len(sample.feature_states[k])
            verts = _simplex_vertices(nk, cfg.eps_t)
            states = range(nk) if is_missing(inst[k]) else [sample.feature_states[k].index(inst[k])]
            hi_k, lo_k = -np.inf, np.inf
            for f in states:
                per = []
                for ci in range(2):
                    vals = []
                    for a in allocs[k, ci]:
                        n_f = obs[k][f, ci] + a[f]
                        n_c = obs[k][:, ci].sum() + a.sum()
                        for v in verts:
                            vals.append(log(n_f + st[ci] * v[f]) - log(n_c + st[ci]))
                    per.append((min(vals), max(vals)))
                hi_k = max(hi_k, per[0][1] - per[1][0])
                lo_k = min(lo_k, per[0][0] - per[1][1])
            d_max += hi_k
            d_min += lo_k
        best = max(best, d_max)
        worst = min(worst, d_min)
    classes = []
    if best >= 0:            # ties go to the first class, as in nb_predict
        classes.append(sample.class_states[0])
    if worst < 0:
        classes.append(sample.class_states[1])
    return Classification(tuple(classes))


# --- fixtures from the worked classification example -----------------------------

def _units(rows):
    return tuple(((r, h), k) for r, h, k in rows)


COMPLETE_ROWS = (
    ("yes", "no", "yes"), ("yes", "no", "yes"),
    ("yes", "yes", "yes"), ("yes", "yes", "yes"),
    ("no", "yes", "yes"),
    ("no", "yes", "no"), ("no", "yes", "no"),
    ("no", "no", "no"), ("no", "no", "no"),
    ("yes", "no", "no"),
)
HIDDEN_H_UNITS = (2, 3, 4, 7, 8, 9)     # zero-based units with H hidden in the incomplete set


def complete_sample() -> LabeledSample:
    """Ten units over features (R, H) and class K."""
    return LabeledSample(("R", "H"), (("yes", "no"), ("yes", "no")), "K", ("yes", "no"), _units(COMPLETE_ROWS))


def incomplete_sample(tag: Missing = UNKNOWN) -> LabeledSample:
    """The complete sample with H hidden in six units."""
    rows = [list(r) for r in COMPLETE_ROWS]
    for i in HIDDEN_H_UNITS:
        rows[i][1] = tag
    return LabeledSample(("R", "H"), (("yes", "no"), ("yes", "no")), "K", ("yes", "no"),
                         _units(tuple(tuple(r) for r in rows)))


# --- drift demonstration ---------------------------------------------------------

@dataclass(frozen=True)
class IpDriftScenario:
    """XOR data, B hidden with probability kernel[(a, b)] in each phase."""

    seed: int = 0
    n_train: int = 1000
    n_test: int = 1000
    train_kernel: Mapping = field(default_factory=lambda: {(1, 0): 1.0})
    deploy_kernel: Mapping = field(default_factory=lambda: {(1, 1): 1.0})

    def __post_init__(self):
        for ker in (self.train_kernel, self.deploy_kernel):
            for key, p in ker.items():
                if not 0.0 <= p <= 1.0 or len(key) != 2:
                    raise InvalidParameter("kernel entries map (a, b) to a probability")
        if self.n_train < 1 or self.n_test < 1:
            raise InvalidParameter("unit counts must be positive")


def _generate(rng: np.random.Generator, n: int, kernel: Mapping):
    a = rng.integers(0, 2, n)
    b = rng.integers(0, 2, n)
    c = a ^ b
    u = rng.random(n)
    p = np.array([kernel.get((int(x), int(y)), 0.0) for x, y in zip(a, b)])
    hidden = u < p
    return a, b, c, hidden


def _as_value_sample(a, b, c, hidden) -> LabeledSample:
    units = tuple(((str(x), "?" if h else str(y)), str(z)) for x, y, z, h in zip(a, b, c, hidden))
    return LabeledSample(("A", "WB"), (("0", "1"), ("0", "1", "?")), "C", ("0", "1"), units)


def _missing_sample(a, b, c, hidden, tag: Missing) -> LabeledSample:
    units = tuple(((str(x), tag if h else str(y)), str(z)) for x, y, z, h in zip(a, b, c, hidden))
    return LabeledSample(("A", "B"), (("0", "1"), ("0", "1")), "C", ("0", "1"), units)


def xor_demo(scenario: IpDriftScenario, config: RunConfig | None = None, s: float = 1.0) -> dict:
    """Accuracy on the pattern (A=1, B hidden) before and after the kernel changes."""
    cfg = config or RunConfig()
    rng = np.random.default_rng(scenario.seed)
    train = _generate(rng, scenario.n_train, scenario.train_kernel)
    phases = {"train": _generate(rng, scenario.n_test, scenario.train_kernel),
              "deploy": _generate(rng, scenario.n_test, scenario.deploy_kernel)}

    nb_value = nb_train(_as_value_sample(*train), s)
    nb_mar = nb_train(_missing_sample(*train, CAR), s)
    unknown_train = _missing_sample(*train, UNKNOWN)
    cir_set = ncc2_predict(unknown_train, ("1", UNKNOWN), s, cfg).class_set

    value_pred = nb_predict(nb_value, ("1", "?"))[0]
    mar_pred = nb_predict(nb_mar, ("1", CAR))[0]
    report = {"seed": scenario.seed, "n_train": scenario.n_train, "n_test": scenario.n_test,
              "cir_class_set": list(cir_set), "nb_value_prediction": value_pred,
              "nb_mar_prediction": mar_pred}
    for name, (a, b, c, hidden) in phases.items():
        pat = (a == 1) & hidden
        truth = [str(z) for z in c[pat]]
        n = len(truth)
        report[name] = {
            "pattern_units": n,
            "nb_value_accuracy": sum(t == value_pred for t in truth) / n if n else None,
            "nb_mar_accuracy": sum(t == mar_pred for t in truth) / n if n else None,
            "cir_containment": sum(t in cir_set for t in truth) / n if n else None,
        }
        # accuracy over every test unit for the '?'-as-value classifier
        test = _as_value_sample(a, b, c, hidden)
        preds = [nb_predict(nb_value, f)[0] for f, _ in test.units]
        report[name]["nb_value_overall_accuracy"] = float(np.mean([p == y for p, (_, y) in zip(preds, test.units)]))
    return report


def report_lines(results: Sequence[dict]) -> str:
    return "\n".join(json.dumps(r, sort_keys=True) for r in results)


__all__ = [
    "LabeledSample", "NbModel", "Classification", "IpDriftScenario",
    "nb_train", "nb_predict", "ncc2_predict", "xor_demo",
    "complete_sample", "incomplete_sample", "read_instances", "class_prior_grid",
]
