import itertools
from fractions import Fraction as F

import pytest

from domlab.core import OrdinalState, Preference
from domlab.domains import (
    DomainKind,
    DomainTag,
    build_problem,
    canonical_cardinal,
    domain_states,
    enumerate_strict_preferences,
    extreme_cardinal,
    is_second_best_pair_state,
    sample_cardinal,
    strict_states,
    top,
    unanimity_strict_states,
)
from domlab.errors import DomainViolation, ScfPartial, SizeLimit, ValidationError


@pytest.mark.parametrize("outcomes,count", [("ab", 2), ("abc", 6), ("abcd", 24)])
def test_strict_preference_counts(outcomes, count):
    prefs = enumerate_strict_preferences(outcomes)
    assert len(prefs) == count == len(set(prefs))
    assert all(p.is_strict for p in prefs)


def test_first_order_is_label_order():
    assert enumerate_strict_preferences("abcd")[0].ranking() == tuple("abcd")


def test_unanimity_states():
    una = unanimity_strict_states(["i1", "i2"], "abc")
    assert len(una) == 6
    assert all(t.is_unanimous and t.is_strict for t in una)
    assert len(unanimity_strict_states(["i1", "i2", "i3"], "ab")) == 2


def test_strict_states_count():
    assert len(strict_states(["i1", "i2"], "abc")) == 36
    assert len(strict_states(["i1", "i2"], "ab")) == 4


def test_caps_guard(monkeypatch):
    monkeypatch.setenv("DOMLAB_CAPS", "outcomes=3")
    with pytest.raises(SizeLimit):
        enumerate_strict_preferences("abcd")


def test_second_best_pair(theta_hat):
    assert is_second_best_pair_state(theta_hat, "i1", "i2", "a")
    assert not is_second_best_pair_state(theta_hat, "i1", "i2", "b")
    for t in unanimity_strict_states(["i1", "i2"], "abc"):
        for z in "abc":
            assert not is_second_best_pair_state(t, "i1", "i2", z)


def test_top():
    assert top(Preference.parse("b>a>c")) == {"b"}
    assert top(Preference.parse("a=b>c")) == {"a", "b"}
    assert top(Preference.parse("c>b>a")) == {"c"}


def test_canonical_cardinal():
    u = canonical_cardinal(OrdinalState.parse("i1:b>a>c;i2:a=b>c"))
    assert u["i1"] == {"b": 1, "a": F(1, 2), "c": 0}
    assert u["i2"] == {"a": 1, "b": 1, "c": 0}
    assert canonical_cardinal(OrdinalState.parse("i1:x>y"))["i1"] == {"x": 1, "y": 0}


def test_sampler_is_valid_and_deterministic(theta_hat):
    seen = set()
    for seed in range(1000):
        u = sample_cardinal(theta_hat, seed)
        assert u.represents(theta_hat)
        seen.add(u)
        for a in u.agents:
            assert all(v.denominator <= 10**6 for v in u[a].values())
    assert len(seen) >= 2
    assert sample_cardinal(theta_hat, 42) == sample_cardinal(theta_hat, 42)


def test_sampler_handles_ties():
    theta = OrdinalState.parse("i1:a=b>c;i2:c>a=b")
    for seed in range(50):
        assert sample_cardinal(theta, seed).represents(theta)


def test_extreme_corners_represent(theta_hat):
    for corners in itertools.product([False, True], repeat=2):
        assert extreme_cardinal(theta_hat, corners).represents(theta_hat)
    lo = extreme_cardinal(theta_hat, [False, False])
    assert lo["i1"]["a"] == F(1, 200)
    hi = extreme_cardinal(theta_hat, [True, True])
    assert hi["i1"]["a"] == F(199, 200)


def test_build_problem_hat(hat, theta_hat):
    _, problem = hat
    assert len(problem.theta_set) == 7
    assert problem.scf(theta_hat) == "a"


def test_build_problem_dictatorial_two_outcomes():
    agents, zs = ["i1", "i2"], "ab"
    kind = DomainKind(DomainTag.STRICT_ALL)
    p = build_problem(kind, agents, zs, lambda t: t["i1"].ranking()[0])
    assert len(p.theta_set) == 4


def test_build_problem_errors():
    agents, zs = ["i1", "i2"], "ab"
    kind = DomainKind(DomainTag.STRICT_ALL)
    states = strict_states(agents, zs)
    partial = {t: "a" for t in states[1:]}
    with pytest.raises(ScfPartial):
        build_problem(kind, agents, zs, partial)
    with pytest.raises(DomainViolation):
        build_problem(kind, agents, zs, lambda t: "z")
    with pytest.raises(DomainViolation):
        build_problem(kind, agents, zs, lambda t: "b", unanimity_respecting=True)
    weak = OrdinalState.parse("i1:a=b;i2:a>b")
    with pytest.raises(DomainViolation):
        build_problem(DomainKind(DomainTag.CUSTOM, (weak,)), agents, zs, lambda t: "a")


def test_sandwich_is_not_a_single_domain():
    with pytest.raises(ValidationError):
        domain_states(DomainKind(DomainTag.SANDWICH), ["i1", "i2"], "ab")
