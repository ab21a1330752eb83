import itertools
import random
from fractions import Fraction

import pytest

from domlab.constructions import hat_problem
from domlab.core import Lottery, Mechanism, OrdinalState, Preference

THETA_HAT = "i1:b>a>c;i2:c>a>b"


@pytest.fixture(scope="session")
def hat():
    return hat_problem()


@pytest.fixture(scope="session")
def theta_hat():
    return OrdinalState.parse(THETA_HAT)


def random_lottery(rng, outcomes, q):
    """Uniform draw from the grid lotteries with denominator ``q``."""
    cuts = sorted(rng.randint(0, q) for _ in range(len(outcomes) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [q])]
    return Lottery({z: Fraction(p, q) for z, p in zip(outcomes, parts) if p})


def random_mechanism(rng, n_agents=2, n_outcomes=3, max_strats=3, q=4, shape=None):
    agents = [f"i{k + 1}" for k in range(n_agents)]
    outcomes = "abcdef"[:n_outcomes]
    shape = shape or [rng.randint(1, max_strats) for _ in agents]
    strategies = [[f"s{k + 1}" for k in range(n)] for n in shape]
    table = {p: random_lottery(rng, outcomes, q) for p in itertools.product(*strategies)}
    return Mechanism(agents, outcomes, strategies, table)


def random_strict_state(rng, agents, outcomes):
    prefs = []
    for a in agents:
        order = list(outcomes)
        rng.shuffle(order)
        prefs.append((a, Preference.strict(order)))
    return OrdinalState.of(prefs)


@pytest.fixture
def rng():
    return random.Random(7)


# acceptance outcomes, printed once at the end of the session
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
