import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ipcir.previsions import CredalSet, Gamble, ProductSpace

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")

AXIOM_CASES = 1000


def random_mass(rng, n, zero_prob=0.2):
    m = rng.dirichlet(np.ones(n))
    if n > 1:
        drop = rng.random(n) < zero_prob
        if drop.all():
            drop[rng.integers(n)] = False
        m[drop] = 0.0
        m = m / m.sum()
    return m


def random_credal(rng, space, k, zero_prob=0.2):
    return CredalSet(space, np.stack([random_mass(rng, space.size, zero_prob) for _ in range(k)]))


def binary_space(n, prefix="X"):
    return ProductSpace.of(**{f"{prefix}{i}": (0, 1) for i in range(n)})


@st.composite
def spaces(draw, max_vars=3, max_card=3):
    n = draw(st.integers(1, max_vars))
    cards = [draw(st.integers(1 if n > 1 else 2, max_card)) for _ in range(n)]
    return ProductSpace.of(**{f"X{i}": tuple(range(c)) for i, c in enumerate(cards)})


@st.composite
def mass_vectors(draw, n):
    raw = draw(hnp.arrays(np.float64, n, elements=st.floats(0, 1, allow_nan=False)))
    if raw.sum() <= 1e-6:
        raw = np.ones(n)
    return raw / raw.sum()


@st.composite
def credal_sets(draw, space=None, max_vertices=4):
    space = space or draw(spaces())
    k = draw(st.integers(1, max_vertices))
    return CredalSet(space, np.stack([draw(mass_vectors(space.size)) for _ in range(k)]))


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def gambles(draw, space):
    vals = draw(hnp.arrays(np.float64, space.shape, elements=finite))
    return Gamble.full(space, vals)


@st.composite
def events(draw, space):
    mask = draw(hnp.arrays(np.bool_, space.shape))
    if not mask.any():
        mask = mask.copy()
        mask.flat[draw(st.integers(0, space.size - 1))] = True
    return mask


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def all_cells(space):
    return list(itertools.product(*(range(c) for c in space.shape)))


def random_unknown_map(rng, facts, n_obs):
    """Map with images of size >= 2, so no label is any fact's only outcome."""
    from ipcir.incompleteness import MultiValuedMap

    obs = tuple(f"w{j}" for j in range(n_obs))
    gamma = {}
    for y in facts:
        size = int(rng.integers(2, n_obs + 1))
        gamma[y] = set(rng.choice(obs, size=size, replace=False).tolist())
    for w in obs:
        if not any(w in g for g in gamma.values()):
            gamma[facts[int(rng.integers(len(facts)))]].add(w)
    return MultiValuedMap(tuple(facts), obs, gamma)


def random_car_map(rng, facts):
    """A random map on `facts` that admits positive CAR coefficients."""
    from ipcir.incompleteness import CarFeasible, MultiValuedMap, car_admissibility

    for _ in range(50):
        n_obs = int(rng.integers(1, 4))
        obs = tuple(f"c{j}" for j in range(n_obs))
        gamma = {y: set(rng.choice(obs, size=int(rng.integers(1, n_obs + 1)), replace=False).tolist())
                 for y in facts}
        if not all(any(w in g for g in gamma.values()) for w in obs):
            continue
        m = MultiValuedMap(tuple(facts), obs, gamma)
        res = car_admissibility(m)
        if isinstance(res, CarFeasible):
            return m, res.coefficients
    m = MultiValuedMap.missingness(tuple(facts), "c?")
    return m, car_admissibility(m).coefficients


def random_ip_instance(rng):
    """(K1, g, ip, w) with |Z|, |Ybar|, |Yhat| <= 3 and at most three vertices."""
    from ipcir.cir import IncompletenessModel

    nz, nb, nh = (int(rng.integers(2, 4)), int(rng.integers(1, 4)), int(rng.integers(1, 4)))
    space = ProductSpace.of(Z=tuple(range(nz)), Yb=tuple(range(nb)), Yh=tuple(range(nh)))
    K1 = random_credal(rng, space, int(rng.integers(1, 4)), zero_prob=0.3)
    g = Gamble(space, (0,), rng.normal(size=nz))
    bfacts = [(i,) for i in range(nb)]
    gbar = random_unknown_map(rng, bfacts, int(rng.integers(2, 4)))
    ghat, alpha = random_car_map(rng, [(j,) for j in range(nh)])
    ip = IncompletenessModel(("Yb",), gbar, ("Yh",), ghat, alpha)
    w = (gbar.observations[int(rng.integers(len(gbar.observations)))],
         ghat.observations[int(rng.integers(len(ghat.observations)))])
    return K1, g, ip, w


# acceptance lines, printed once at the end of the run
ACCEPTANCE = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(line)
