import itertools

import numpy as np
import pytest

from ipcir.config import RunConfig
from ipcir.errors import EnumerationCapExceeded, InvalidParameter, InvalidSample, UnsupportedClassArity
from ipcir.incompleteness import CAR, UNKNOWN, is_missing
from ipcir.classifier import (
    IpDriftScenario,
    LabeledSample,
    class_prior_grid,
    complete_sample,
    incomplete_sample,
    nb_predict,
    nb_train,
    ncc2_predict,
    read_instances,
    xor_demo,
)

INSTANCES = (("yes", "yes"), ("yes", "no"), ("no", "yes"), ("no", "no"))
EPS_T = RunConfig().eps_t


# --- naive Bayes on the worked example ---------------------------------------------------

def test_nb_complete_predictions():
    model = nb_train(complete_sample(), s=1.0)
    preds = [nb_predict(model, x) for x in INSTANCES]
    assert [c for c, _ in preds] == ["yes", "yes", "no", "no"]
    # frozen from an independent count-by-hand evaluation of the smoothed estimates
    assert [p["yes"] for _, p in preds] == pytest.approx([0.8308, 0.7018, 0.2982, 0.1692], abs=1e-4)


def test_nb_hand_computed_posterior():
    # (R=yes, H=yes): n(k') = 5, n(k'') = 5, s = 1, t = 1/2 everywhere
    # P(r'|k') = (4 + .25)/(5 + .5), P(h'|k') = (3 + .25)/(5 + .5), likewise for k''
    pk = (5 + 0.5) / 11
    a = pk * (4.25 / 5.5) * (3.25 / 5.5)
    b = pk * (1.25 / 5.5) * (2.25 / 5.5)
    _, post = nb_predict(nb_train(complete_sample()), ("yes", "yes"))
    assert post["yes"] == pytest.approx(a / (a + b), abs=1e-12)


def test_nb_missing_at_random_instances():
    model = nb_train(incomplete_sample(CAR), s=1.0)
    c1, p1 = nb_predict(model, (CAR, "yes"))
    c2, p2 = nb_predict(model, (CAR, "no"))
    assert (c1, c2) == ("no", "yes")
    assert abs(p1["no"] - 0.90) <= 0.10 and abs(p2["yes"] - 0.90) <= 0.10


def test_nb_posterior_sums_to_one(rng):
    for _ in range(200):
        sample = _random_sample(rng, n_unknown=0)
        model = nb_train(sample, s=float(rng.uniform(0.1, 5)))
        inst = tuple(rng.choice(["a", "b", CAR]) if k else rng.choice(["a", "b", "c"]) for k in range(2))
        _, post = nb_predict(model, inst)
        assert abs(sum(post.values()) - 1.0) <= 1e-12


def test_nb_single_class_sample():
    units = ((("yes", "no"), "a"), (("no", "no"), "a"))
    sample = LabeledSample(("R", "H"), (("yes", "no"), ("yes", "no")), "C", ("a", "b"), units)
    flat = nb_train(sample, smoothing="flat")
    for inst in itertools.product(("yes", "no"), repeat=2):
        c, post = nb_predict(flat, inst)
        assert c == "a" and post["a"] > 0.5
    # the class-weighted prior only guarantees this on feature values seen in training
    idm = nb_train(sample)
    for inst in (("yes", "no"), ("no", "no")):
        assert nb_predict(idm, inst)[0] == "a"
    assert nb_predict(idm, ("yes", "yes"))[0] == "b"


def test_nb_parameter_checks():
    with pytest.raises(InvalidParameter):
        nb_train(complete_sample(), s=0)
    with pytest.raises(InvalidParameter):
        nb_train(complete_sample(), smoothing="laplace")
    empty = LabeledSample(("R",), (("yes", "no"),), "K", ("yes", "no"), ())
    with pytest.raises(InvalidSample):
        nb_train(empty)
    with pytest.raises(InvalidSample):
        LabeledSample(("R",), (("yes", "no"),), "K", ("yes", "no"), ((("maybe",), "yes"),))
    with pytest.raises(InvalidSample):
        LabeledSample(("R",), (("yes", "no"),), "K", ("yes", "no"), ((("yes",), CAR),))


# --- the credal classifier ---------------------------------------------------------------

def test_ncc2_complete_is_determinate_and_matches_nb():
    sample = complete_sample()
    for inst, expected in zip(INSTANCES, ("yes", "yes", "no", "no")):
        res = ncc2_predict(sample, inst)
        assert res.determinate and res.class_set == (expected,)


def test_ncc2_unknown_instance_feature_gives_both_classes():
    for h in ("yes", "no"):
        res = ncc2_predict(complete_sample(), (UNKNOWN, h))
        assert set(res.class_set) == {"yes", "no"} and not res.determinate


def test_ncc2_incomplete_training_gives_both_classes():
    for h in ("yes", "no"):
        res = ncc2_predict(incomplete_sample(UNKNOWN), (CAR, h))
        assert set(res.class_set) == {"yes", "no"}


def test_ncc2_missing_at_random_feature_is_dropped():
    # a CAR feature is ignored, so only H decides
    a = ncc2_predict(complete_sample(), (CAR, "yes"))
    b = ncc2_predict(LabeledSample(("H",), (("yes", "no"),), "K", ("yes", "no"),
                                   tuple(((f[1],), c) for f, c in complete_sample().units)), ("yes",))
    assert a.class_set == b.class_set


def test_ncc2_errors():
    three = LabeledSample(("R",), (("yes", "no"),), "K", ("a", "b", "c"), ((("yes",), "a"),))
    with pytest.raises(UnsupportedClassArity):
        ncc2_predict(three, ("yes",))
    with pytest.raises(InvalidSample):
        ncc2_predict(complete_sample(), ("yes",))
    with pytest.raises(EnumerationCapExceeded):
        ncc2_predict(incomplete_sample(UNKNOWN), (UNKNOWN, UNKNOWN), config=RunConfig(nb_eval_cap=10))


def _random_sample(rng, n_unknown, n=None):
    fs = (("a", "b", "c"), ("a", "b"))
    n = n or int(rng.integers(2, 7))
    units = []
    for _ in range(n):
        units.append(((str(rng.choice(fs[0])), str(rng.choice(fs[1]))), str(rng.choice(["p", "q"]))))
    cells = rng.permutation([(i, k) for i in range(n) for k in (0, 1)])[:n_unknown]
    units = [list(u) for u in units]
    for i, k in cells:
        f = list(units[i][0])
        f[k] = UNKNOWN
        units[i][0] = tuple(f)
    return LabeledSample(("F0", "F1"), fs, "C", ("p", "q"), tuple(tuple(u) for u in units))


def _feature_vertex_sets(sample, eps):
    """Every feature prior with each (feature, class) column at a vertex of the trimmed simplex."""
    per = []
    for states in sample.feature_states:
        k = len(states)
        verts = []
        for j in range(k):
            v = np.full(k, eps)
            v[j] = 1 - (k - 1) * eps
            verts.append(v)
        per.append([np.stack(pair, axis=1) for pair in itertools.product(verts, repeat=2)])
    return list(itertools.product(*per))


def _feature_grid_sets(sample, m):
    """A dense grid of feature priors, interior points included."""
    per = []
    for states in sample.feature_states:
        k = len(states)
        cols = [np.array(w, dtype=float) / m for w in itertools.product(range(m + 1), repeat=k) if sum(w) == m]
        cols = [np.clip(c, EPS_T, 1) / np.clip(c, EPS_T, 1).sum() for c in cols]
        per.append([np.stack(pair, axis=1) for pair in itertools.product(cols, repeat=2)])
    return list(itertools.product(*per))


def raw_union(sample, inst, s, t_classes, feature_priors):
    """Union of naive Bayes argmax classes over every raw completion and prior."""
    cells = [(i, k) for i, (f, _) in enumerate(sample.units) for k in range(len(f))
             if is_missing(f[k]) and f[k].tag == "unknown"]
    inst_unknown = [k for k, c in enumerate(inst) if is_missing(c) and c.tag == "unknown"]
    out = set()
    for fill in itertools.product(*(sample.feature_states[k] for _, k in cells)):
        units = [[list(f), c] for f, c in sample.units]
        for (i, k), v in zip(cells, fill):
            units[i][0][k] = v
        filled = LabeledSample(sample.feature_names, sample.feature_states, sample.class_name,
                               sample.class_states, tuple((tuple(f), c) for f, c in units))
        for t0 in t_classes:
            for tf in feature_priors:
                model = nb_train(filled, s, t_class=[t0, 1 - t0], t_feature=tf)
                for ifill in itertools.product(*(sample.feature_states[k] for k in inst_unknown)):
                    x = list(inst)
                    for k, v in zip(inst_unknown, ifill):
                        x[k] = v
                    out.add(nb_predict(model, x)[0])
    return out


def test_ncc2_equals_raw_completion_union(rng):
    grid = 10
    tcs = class_prior_grid(EPS_T, grid)
    for _ in range(25):
        sample = _random_sample(rng, n_unknown=int(rng.integers(0, 4)))
        inst = (str(rng.choice(["a", "b", "c"])), str(rng.choice(["a", "b"])))
        if rng.random() < 0.3:
            inst = (UNKNOWN, inst[1])
        s = float(rng.choice([0.5, 1.0, 2.0]))
        got = set(ncc2_predict(sample, inst, s, grid=grid).class_set)
        assert got == raw_union(sample, inst, s, tcs, _feature_vertex_sets(sample, EPS_T))


def test_vertex_priors_cover_a_dense_grid(rng):
    # interior feature priors never produce a class that the vertex search misses
    for _ in range(4):
        sample = _random_sample(rng, n_unknown=int(rng.integers(0, 3)))
        inst = (str(rng.choice(["a", "b", "c"])), str(rng.choice(["a", "b"])))
        got = set(ncc2_predict(sample, inst, 1.0).class_set)
        dense = class_prior_grid(EPS_T, 200)[::20]
        assert raw_union(sample, inst, 1.0, dense, _feature_grid_sets(sample, 3)) <= got


def test_ncc2_contains_nb_of_every_completion(rng):
    for _ in range(30):
        sample = _random_sample(rng, n_unknown=2)
        inst = (str(rng.choice(["a", "b", "c"])), str(rng.choice(["a", "b"])))
        got = set(ncc2_predict(sample, inst).class_set)
        assert raw_union(sample, inst, 1.0, [0.5], [tuple(
            np.full((len(st), 2), 1 / len(st)) for st in sample.feature_states)]) <= got


def test_more_unknown_cells_never_shrink_the_set(rng):
    for _ in range(40):
        sample = _random_sample(rng, n_unknown=0, n=5)
        inst = (str(rng.choice(["a", "b", "c"])), str(rng.choice(["a", "b"])))
        prev = set(ncc2_predict(sample, inst).class_set)
        units = [[list(f), c] for f, c in sample.units]
        for i, k in rng.permutation([(i, k) for i in range(5) for k in (0, 1)])[:4]:
            units[i][0][k] = UNKNOWN
            more = LabeledSample(sample.feature_names, sample.feature_states, "C", sample.class_states,
                                 tuple((tuple(f), c) for f, c in units))
            cur = set(ncc2_predict(more, inst).class_set)
            assert prev <= cur
            prev = cur


def test_prior_grid_includes_vertices():
    g = class_prior_grid(1e-6, 200)
    assert g[0] == 1e-6 and g[-1] == 1 - 1e-6 and len(g) == 201


# --- drift demonstration -----------------------------------------------------------------

def test_xor_default_kernels():
    rep = xor_demo(IpDriftScenario(seed=0, n_train=1000, n_test=1000))
    assert rep["nb_value_prediction"] == "1"
    assert rep["train"]["nb_value_accuracy"] == 1.0
    assert rep["deploy"]["nb_value_accuracy"] == 0.0
    assert rep["train"]["cir_containment"] == 1.0 and rep["deploy"]["cir_containment"] == 1.0
    assert set(rep["cir_class_set"]) == {"0", "1"}
    assert rep["train"]["pattern_units"] > 0 and rep["deploy"]["pattern_units"] > 0


def test_xor_identical_kernels_are_stable():
    for seed in range(3):
        kernel = {(1, 0): 1.0, (0, 0): 0.3}
        rep = xor_demo(IpDriftScenario(seed, 1000, 1000, kernel, kernel))
        for key in ("nb_value_accuracy", "nb_mar_accuracy", "nb_value_overall_accuracy"):
            assert abs(rep["train"][key] - rep["deploy"][key]) <= 0.05


def test_xor_iid_selective_kernel_is_learned():
    # with the same kernel in both phases '?' is informative and the pattern is predicted well
    kernel = {(1, 0): 1.0}
    rep = xor_demo(IpDriftScenario(1, 10_000, 10_000, kernel, kernel))
    assert rep["deploy"]["nb_value_accuracy"] >= 0.95


def test_scenario_validation():
    with pytest.raises(InvalidParameter):
        IpDriftScenario(train_kernel={(1, 0): 1.5})
    with pytest.raises(InvalidParameter):
        IpDriftScenario(n_train=0)


# --- files -------------------------------------------------------------------------------

def test_bundled_csv_fixtures():
    from importlib import resources
    data = resources.files("ipcir").joinpath("data")
    full = LabeledSample.read_csv(data / "complete_train.csv")
    assert full.feature_names == ("R", "H") and full.class_name == "K" and len(full) == 10
    inc = LabeledSample.read_csv(data / "incomplete_train.csv", full_states := dict(R=("yes", "no"), H=("yes", "no")))
    assert sum(is_missing(f[1]) for f, _ in inc.units) == 6
    assert full_states["R"] == ("yes", "no")
    tests = read_instances(data / "complete_test.csv", full)
    assert [x for x, _ in tests] == list(INSTANCES)
    partial = read_instances(data / "partial_test.csv", full)
    assert all(is_missing(x[0]) for x, _ in partial)
