import itertools
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from ipcir.errors import InvalidMap, ProblemTooLarge, UnknownObservation
from ipcir.incompleteness import (
    CAR,
    UNKNOWN,
    CarCoefficients,
    CarFeasible,
    CarInfeasible,
    Missing,
    MultiValuedMap,
    car_admissibility,
    car_system,
    is_missing,
    parse_cell,
    product_map,
    validate_unknown_ip,
)
from ipcir.lp import lp_solve_maxmin, simplex_max


def _data(name):
    return resources.files("ipcir").joinpath("data", name)


def four_fact_map():
    return MultiValuedMap(("1", "2", "3", "4"), ("a", "b", "c"),
                          {"1": {"a", "b"}, "2": {"b", "c"}, "3": {"a", "c"}, "4": {"a", "b", "c"}})


def scipy_maxmin(A, b):
    """max t s.t. A a = b, a >= t, t >= 0 via scipy; None when infeasible."""
    m, n = A.shape
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_eq = np.hstack([A, np.zeros((m, 1))])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=b,
                  bounds=[(0, None)] * (n + 1), method="highs")
    if res.status == 2:
        return None
    assert res.status == 0
    return -res.fun


# --- simplex ----------------------------------------------------------------------

def test_single_variable_maxmin():
    res = lp_solve_maxmin([[1.0]], [1.0])
    assert res.status == "optimal"
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.x[0] == pytest.approx(1.0, abs=1e-12)


def test_four_fact_system_is_phase1_infeasible():
    A, b = car_system(four_fact_map())
    res = lp_solve_maxmin(A, b)
    assert res.status == "infeasible"
    assert res.phase1_residual > 1e-9


def test_size_cap():
    with pytest.raises(ProblemTooLarge):
        lp_solve_maxmin(np.ones((1, 201)), [1.0])
    with pytest.raises(ProblemTooLarge):
        simplex_max(np.zeros(3), np.ones((201, 3)), np.ones(201))


def test_unbounded_is_reported():
    res = simplex_max([1.0, 0.0], [[1.0, -1.0]], [0.0])
    assert res.status == "unbounded"


def _random_bounded_lp(rng, m, n):
    A = rng.integers(0, 3, size=(m, n)).astype(float)
    A[0] = 1.0                      # sum x = const keeps the region bounded
    x0 = rng.random(n)
    return A, A @ x0, rng.normal(size=n)


def test_simplex_matches_scipy(rng):
    for _ in range(200):
        m, n = int(rng.integers(1, 5)), int(rng.integers(2, 7))
        A, b, c = _random_bounded_lp(rng, m, n)
        ours = simplex_max(c, A, b)
        ref = linprog(-c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
        assert ours.status == "optimal" and ref.status == 0
        assert ours.value == pytest.approx(-ref.fun, abs=1e-8)
        assert np.allclose(A @ ours.x, b, atol=1e-8) and ours.x.min() >= -1e-12


def test_simplex_matches_basic_solution_enumeration(rng):
    for _ in range(100):
        m, n = int(rng.integers(1, 4)), int(rng.integers(2, 6))
        A, b, c = _random_bounded_lp(rng, m, n)
        best = -np.inf
        subsets = itertools.chain.from_iterable(
            itertools.combinations(range(n), r) for r in range(1, min(m, n) + 1))
        for cols in subsets:
            sub = A[:, cols]
            sol, *_ = np.linalg.lstsq(sub, b, rcond=None)
            if np.allclose(sub @ sol, b, atol=1e-9) and sol.min() >= -1e-9:
                x = np.zeros(n)
                x[list(cols)] = sol
                best = max(best, c @ x)
        assert simplex_max(c, A, b).value == pytest.approx(best, abs=1e-8)


def test_simplex_is_deterministic(rng):
    A, b, c = _random_bounded_lp(rng, 3, 6)
    r1, r2 = simplex_max(c, A, b), simplex_max(c, A, b)
    assert r1.value == r2.value and r1.pivots == r2.pivots
    assert r1.x.tobytes() == r2.x.tobytes()


def test_infeasible_matches_scipy(rng):
    hits = 0
    for _ in range(200):
        m, n = int(rng.integers(2, 5)), int(rng.integers(2, 5))
        A = rng.integers(0, 2, size=(m, n)).astype(float)
        b = np.ones(m)
        ref = scipy_maxmin(A, b)
        ours = lp_solve_maxmin(A, b)
        if ref is None:
            assert ours.status == "infeasible"
            hits += 1
        else:
            assert ours.status == "optimal"
            assert ours.value == pytest.approx(ref, abs=1e-8)
    assert hits > 0


# --- maps --------------------------------------------------------------------------

def test_identity_compatible_and_sole_sets():
    m = MultiValuedMap.identity(("x", "y"))
    assert m.compatible_facts("x") == ["x"]
    assert m.sole_observation_facts("y") == ["y"]


def test_four_fact_compatible_facts():
    m = four_fact_map()
    assert m.compatible_facts("a") == ["1", "3", "4"]
    assert all(m.sole_observation_facts(w) == [] for w in m.observations)


def test_unknown_observation():
    with pytest.raises(UnknownObservation):
        four_fact_map().compatible_facts("z")
    with pytest.raises(UnknownObservation):
        four_fact_map().sole_observation_facts("z")


def test_map_construction_checks():
    with pytest.raises(InvalidMap):
        MultiValuedMap(("1",), ("a",), {"1": {"b"}})
    with pytest.raises(InvalidMap):
        MultiValuedMap(("1",), ("a",), {})
    with pytest.raises(InvalidMap):
        MultiValuedMap(("1", "1"), ("a",), {"1": {"a"}})


def test_replace_anything_map_on_seven_variables():
    n = 7
    facts = list(itertools.product((0, 1), repeat=n))
    obs = list(itertools.product((0, 1, "?"), repeat=n))
    gamma = {y: {tuple("?" if hide else v for v, hide in zip(y, mask))
                 for mask in itertools.product((False, True), repeat=n)} for y in facts}
    m = MultiValuedMap(tuple(facts), tuple(obs), gamma)
    w = ("?", "?", "?", 1, "?", "?", 0)          # H and A fixed, the rest hidden
    comp = m.compatible_facts(w)
    assert len(comp) == 2 ** 5
    assert all(y[3] == 1 and y[6] == 0 for y in comp)
    assert validate_unknown_ip(m).ok


def test_validation_report_names_violations():
    ident = validate_unknown_ip(MultiValuedMap.identity(("x", "y")))
    assert {v.assumption for v in ident.violations} == {"IP8"}
    assert validate_unknown_ip(MultiValuedMap.missingness(("x", "y"))).ok
    unreachable = MultiValuedMap(("x",), ("x", "?", "z"), {"x": {"x", "?"}})
    rep = validate_unknown_ip(unreachable)
    assert [(v.assumption, v.witness) for v in rep.violations] == [("IP6", "z")]
    empty = MultiValuedMap(("x", "y"), ("x", "y"), {"x": set(), "y": {"x", "y"}})
    assert "IP4" in {v.assumption for v in validate_unknown_ip(empty).violations}
    with pytest.raises(InvalidMap):
        empty.require_valid()


def test_identity_product_is_identity():
    p = product_map(MultiValuedMap.identity((0, 1)), MultiValuedMap.identity(("a", "b")))
    assert all(p.gamma[y] == {y} for y in p.facts)


def test_coarsening_times_missingness():
    gbar = MultiValuedMap(("vk", "vK", "Vk", "VK"), ("vK|Vk", "vk", "VK", "vK", "Vk"),
                          {"vk": {"vk"}, "VK": {"VK"}, "vK": {"vK", "vK|Vk"}, "Vk": {"Vk", "vK|Vk"}})
    ghat = MultiValuedMap.missingness(("h", "H"))
    p = product_map(gbar, ghat)
    assert sorted(p.compatible_facts(("vK|Vk", "?"))) == sorted(
        itertools.product(["vK", "Vk"], ["h", "H"]))


@st.composite
def small_maps(draw, prefix):
    nf = draw(st.integers(1, 3))
    no = draw(st.integers(1, 3))
    facts = tuple(f"{prefix}{i}" for i in range(nf))
    obs = tuple(f"{prefix}w{j}" for j in range(no))
    gamma = {y: set(draw(st.sets(st.sampled_from(obs), min_size=1))) for y in facts}
    for w in obs:                    # keep every label reachable
        if not any(w in g for g in gamma.values()):
            gamma[draw(st.sampled_from(facts))].add(w)
    return MultiValuedMap(facts, obs, gamma)


@settings(max_examples=300)
@given(small_maps("a"), small_maps("b"))
def test_product_map_compatible_sets_factor(g1, g2):
    p = product_map(g1, g2)
    p.require_valid()
    for w1, w2 in itertools.product(g1.observations, g2.observations):
        assert set(p.compatible_facts((w1, w2))) == set(itertools.product(g1.compatible_facts(w1),
                                                                          g2.compatible_facts(w2)))


@settings(max_examples=300)
@given(small_maps("a"))
def test_sole_set_inside_compatible_set(m):
    for w in m.observations:
        assert set(m.sole_observation_facts(w)) <= set(m.compatible_facts(w))


# --- CAR admissibility ----------------------------------------------------------------

def test_four_fact_map_is_infeasible():
    res = car_admissibility(four_fact_map())
    assert isinstance(res, CarInfeasible) and not res.feasible
    assert res.status == "infeasible"


def test_bundled_four_fact_map_file():
    m = MultiValuedMap.load(_data("map_infeasible.json"))
    assert isinstance(car_admissibility(m), CarInfeasible)


def test_missingness_map_is_feasible():
    m = MultiValuedMap.missingness(("1", "2"))
    res = car_admissibility(m)
    assert isinstance(res, CarFeasible)
    assert res.coefficients.check(m, 1e-9)
    # max-min optimum, solved by hand: a_1 + a_? = a_2 + a_? = 1 with every a >= t
    assert res.t_star == pytest.approx(0.5, abs=1e-12)
    assert res.t_star == pytest.approx(scipy_maxmin(*car_system(m)), abs=1e-9)
    assert min(res.coefficients.alpha.values()) == pytest.approx(0.5, abs=1e-12)


def test_identity_map_coefficients_are_one():
    m = MultiValuedMap.identity(("x", "y", "z"))
    res = car_admissibility(m)
    assert isinstance(res, CarFeasible)
    assert all(v == pytest.approx(1.0, abs=1e-12) for v in res.coefficients.alpha.values())


def test_only_zero_solutions_are_rejected():
    # image {a} forces a = 1, image {a, b} then forces b = 0
    m = MultiValuedMap(("1", "2"), ("a", "b"), {"1": {"a"}, "2": {"a", "b"}})
    res = car_admissibility(m)
    assert isinstance(res, CarInfeasible)
    assert res.t_star == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=300)
@given(small_maps("a"))
def test_car_admissibility_agrees_with_scipy(m):
    res = car_admissibility(m)
    ref = scipy_maxmin(*car_system(m))
    if ref is None or ref <= 1e-9:
        assert isinstance(res, CarInfeasible)
    else:
        assert isinstance(res, CarFeasible)
        assert res.t_star == pytest.approx(ref, abs=1e-8)
        assert np.all(np.abs(res.coefficients.residuals(m)) <= 1e-9)
        assert min(res.coefficients.alpha.values()) >= 1e-9


def test_coefficients_must_be_positive():
    with pytest.raises(InvalidMap):
        CarCoefficients({"a": 0.0})


def test_missing_cells():
    assert parse_cell("?") == UNKNOWN
    assert parse_cell(" * ") == CAR
    assert parse_cell("yes") == "yes"
    assert is_missing(CAR) and not is_missing("?")
    assert str(CAR) == "*" and str(UNKNOWN) == "?"
    with pytest.raises(InvalidMap):
        Missing("lost")


def test_map_json_round_trip():
    m = four_fact_map()
    again = MultiValuedMap.from_dict(m.to_dict())
    assert again.facts == m.facts and again.gamma == m.gamma
