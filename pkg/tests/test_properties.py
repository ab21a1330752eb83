"""Property tests over seeded random mechanisms and states."""

import itertools
import random
from fractions import Fraction as F

from hypothesis import given, settings, strategies as st

from domlab.core import CardinalState, Lottery, Restriction, format_rational, mix, parse_rational
from domlab.domains import sample_cardinal
from domlab.dominance import (
    dominates_at,
    has_non_domination_property,
    robust_udinf,
    ud1_at,
    udinf_at,
    udk_at,
)
from domlab.formats import dump_mechanism, load_mechanism

from conftest import random_lottery, random_mechanism, random_strict_state

PROPS = settings(max_examples=120, derandomize=True, deadline=None)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def setup(seed, **kw):
    rng = random.Random(seed)
    mech = random_mechanism(rng, **kw)
    theta = random_strict_state(rng, mech.agents, mech.outcomes)
    return rng, mech, theta


def sequential_deletion(mech, u, rng):
    """Delete one dominated strategy at a time, picked at random."""
    sets = {a: list(s) for a, s in zip(mech.agents, mech.strategies)}
    while True:
        r = Restriction.of(mech, sets)
        found = [(a, s) for a in mech.agents for s in sets[a]
                 if any(dominates_at(mech, r, a, d, s, u[a]) for d in mech.strategies[mech.agent_index(a)])]
        if not found:
            return r
        a, s = rng.choice(found)
        sets[a].remove(s)


def product_subsets(mech):
    powers = [[c for k in range(1, len(s) + 1) for c in itertools.combinations(s, k)]
              for s in mech.strategies]
    for combo in itertools.product(*powers):
        yield Restriction(mech.agents, combo)


@PROPS
@given(seeds)
def test_deletion_order_does_not_matter(seed):
    rng, mech, theta = setup(seed)
    u = sample_cardinal(theta, seed)
    assert sequential_deletion(mech, u, rng) == udinf_at(mech, u)[0]


@PROPS
@given(seeds)
def test_rounds_shrink_and_never_empty(seed):
    _, mech, theta = setup(seed, max_strats=4)
    u = sample_cardinal(theta, seed)
    final, trace = udinf_at(mech, u)
    prev = Restriction.full(mech)
    for k in range(1, len(trace.rounds) + 2):
        cur = udk_at(mech, u, k)
        assert cur.issubset(prev) and all(cur.sets)
        prev = cur
    assert prev == final and udk_at(mech, u, 1) == ud1_at(mech, u)


@PROPS
@given(seeds)
def test_fixed_point_is_largest_closed_product(seed):
    _, mech, theta = setup(seed, max_strats=3)
    u = sample_cardinal(theta, seed)
    final = udinf_at(mech, u)[0]
    assert has_non_domination_property(mech, final, u)
    for r in product_subsets(mech):
        if has_non_domination_property(mech, r, u):
            assert r.issubset(final)


@PROPS
@given(seeds)
def test_robust_fixed_point_contains_every_representation(seed):
    _, mech, theta = setup(seed, n_outcomes=3)
    robust = robust_udinf(mech, theta)[0]
    for k in range(5):
        u = sample_cardinal(theta, seed * 7 + k)
        assert udinf_at(mech, u)[0].issubset(robust)


@PROPS
@given(seeds)
def test_first_round_is_local_and_affine_invariant(seed):
    rng, mech, theta = setup(seed)
    u = sample_cardinal(theta, seed)
    base = ud1_at(mech, u)
    other = random_strict_state(rng, mech.agents, mech.outcomes)
    v = sample_cardinal(other, seed + 1)
    for a in mech.agents:
        mixed = CardinalState.of({b: (u[b] if b == a else v[b]) for b in mech.agents})
        assert ud1_at(mech, mixed)[a] == base[a]
    scaled = CardinalState.of({b: {z: 3 * x + F(1, 2) for z, x in u[b].items()} for b in mech.agents})
    assert udinf_at(mech, scaled)[0] == udinf_at(mech, u)[0]


@PROPS
@given(seeds)
def test_mechanism_text_roundtrip(seed):
    mech = random_mechanism(random.Random(seed), n_outcomes=4, q=6)
    text = dump_mechanism(mech)
    assert load_mechanism(text) == mech and dump_mechanism(load_mechanism(text)) == text


@PROPS
@given(st.fractions(), st.integers(min_value=1, max_value=40))
def test_rationals_and_mixtures(x, q):
    assert parse_rational(format_rational(x)) == x
    rng = random.Random(q)
    ys = [random_lottery(rng, "abc", q) for _ in range(3)]
    w = [F(1, 2), F(1, 3), F(1, 6)]
    m = mix(w, ys)
    assert sum(p for _, p in m.items()) == 1
    for z in "abc":
        assert m.prob(z) == sum(wi * y.prob(z) for wi, y in zip(w, ys))
    assert mix([1], [ys[0]]) == ys[0] and isinstance(Lottery.point("a"), Lottery)
