"""Ordinal domains: strict orders, unanimity states, representations."""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .core import (
    CardinalState,
    ImplementationProblem,
    OrdinalState,
    Preference,
    SCF,
    current_caps,
)
from .errors import DomainViolation, NotStrict, ScfPartial, SizeLimit, ValidationError

SAMPLE_DENOMINATOR_CAP = 10**6


class DomainTag(enum.Enum):
    STRICT_ALL = "STRICT_ALL"
    UNANIMITY_STRICT = "UNANIMITY_STRICT"
    CUSTOM = "CUSTOM"
    # every Theta with (una & strict) <= Theta <= strict; used by the miner
    SANDWICH = "SANDWICH"


@dataclass(frozen=True)
class DomainKind:
    """Which ordinal states a problem ranges over.

    ``UNANIMITY_STRICT`` is the unanimity strict states plus ``extra_states``;
    ``CUSTOM`` is exactly ``extra_states``; ``STRICT_ALL`` is every strict
    profile. ``SANDWICH`` names the whole family of domains between the
    unanimity strict states and all strict states and is only meaningful to
    the search module.
    """

    tag: DomainTag
    extra_states: tuple[OrdinalState, ...] = ()


def _check_sizes(n_agents: int, n_outcomes: int) -> None:
    caps = current_caps()
    if n_outcomes > caps.outcomes:
        raise SizeLimit(f"|Z| = {n_outcomes} exceeds the cap {caps.outcomes}")
    if n_agents > caps.agents:
        raise SizeLimit(f"|I| = {n_agents} exceeds the cap {caps.agents}")


def enumerate_strict_preferences(outcomes: Sequence[str]) -> list[Preference]:
    """All ``|Z|!`` strict orders, lexicographic in the canonical label order."""
    _check_sizes(0, len(outcomes))
    return [Preference.strict(p) for p in itertools.permutations(outcomes)]


def unanimity_strict_states(agents: Sequence[str], outcomes: Sequence[str]) -> list[OrdinalState]:
    _check_sizes(len(agents), len(outcomes))
    return [OrdinalState(tuple((a, p) for a in agents))
            for p in enumerate_strict_preferences(outcomes)]


def strict_states(agents: Sequence[str], outcomes: Sequence[str]) -> list[OrdinalState]:
    """Every strict profile; unanimity states come first, then the rest in product order."""
    _check_sizes(len(agents), len(outcomes))
    prefs = enumerate_strict_preferences(outcomes)
    if len(prefs) ** len(agents) > current_caps().scfs:
        raise SizeLimit("too many strict profiles")
    una = unanimity_strict_states(agents, outcomes)
    rest = [OrdinalState(tuple(zip(agents, combo)))
            for combo in itertools.product(prefs, repeat=len(agents))
            if len(set(combo)) > 1]
    return una + rest


def top(pref: Preference) -> frozenset[str]:
    return pref.top


def is_second_best_pair_state(theta: OrdinalState, i1: str, i2: str, z: str) -> bool:
    """``z`` is second-best for both agents and their top outcomes differ."""
    if i1 == i2:
        raise ValidationError("the two agents must be distinct")
    p1, p2 = theta[i1], theta[i2]
    if not (p1.is_strict and p2.is_strict):
        raise NotStrict(f"{theta} has ties")
    if len(p1.classes) < 2:
        return False
    r1, r2 = p1.ranking(), p2.ranking()
    return r1[1] == z and r2[1] == z and r1[0] != r2[0]


def canonical_cardinal(theta: OrdinalState) -> CardinalState:
    """Rank-spaced utilities: class j of k gets ``(k - j) / (k - 1)``."""
    utils = {}
    for agent, pref in theta.prefs:
        k = len(pref.classes)
        u = {}
        for j, cls in enumerate(pref.classes):
            val = Fraction(k - 1 - j, k - 1) if k >= 2 else Fraction(0)
            for z in cls:
                u[z] = val
        utils[agent] = u
    return CardinalState.of(utils)


def sample_cardinal(theta: OrdinalState, seed: int) -> CardinalState:
    """A seeded random representation of ``theta``.

    Gaps between consecutive classes are log-uniform over five decades, so
    both nearly-indifferent and wildly unequal spacings get drawn. Values are
    normalised to [0, 1] with a common denominator per agent that stays at or
    below 10^6.
    """
    rng = random.Random(seed)
    utils = {}
    for agent, pref in theta.prefs:
        k = len(pref.classes)
        if k == 1:
            utils[agent] = {z: Fraction(0) for z in pref.outcomes}
            continue
        budget = SAMPLE_DENOMINATOR_CAP // (k - 1)
        gaps = [max(1, int(10 ** rng.uniform(0, math.log10(budget)))) for _ in range(k - 1)]
        total = sum(gaps)
        level = total
        u = {}
        for j, cls in enumerate(pref.classes):
            for z in cls:
                u[z] = Fraction(level, total)
            if j < k - 1:
                level -= gaps[j]
        utils[agent] = u
    return CardinalState.of(utils)


def extreme_cardinal(theta: OrdinalState, corners: Sequence[bool], eps: Fraction = Fraction(1, 100)) -> CardinalState:
    """Near-degenerate representations, one corner flag per agent.

    ``False`` puts every non-top class just above the bottom (the top dominates
    everything); ``True`` puts every non-bottom class just below the top.
    """
    utils = {}
    for (agent, pref), high in zip(theta.prefs, corners):
        k = len(pref.classes)
        u = {}
        for j, cls in enumerate(pref.classes):
            if k == 1:
                val = Fraction(0)
            elif j == 0:
                val = Fraction(1)
            elif j == k - 1:
                val = Fraction(0)
            elif high:
                val = 1 - eps * j / (k - 1)
            else:
                val = eps * (k - 1 - j) / (k - 1)
            for z in cls:
                u[z] = val
        utils[agent] = u
    return CardinalState.of(utils)


def _as_lookup(f_table: Mapping[OrdinalState, str] | Callable[[OrdinalState], str]):
    if callable(f_table) and not isinstance(f_table, Mapping):
        return f_table
    return lambda theta: f_table[theta]


def domain_states(kind: DomainKind, agents: Sequence[str], outcomes: Sequence[str]) -> list[OrdinalState]:
    if kind.tag is DomainTag.STRICT_ALL:
        return strict_states(agents, outcomes)
    if kind.tag is DomainTag.UNANIMITY_STRICT:
        una = unanimity_strict_states(agents, outcomes)
        return una + [t for t in kind.extra_states if t not in una]
    if kind.tag is DomainTag.CUSTOM:
        return list(dict.fromkeys(kind.extra_states))
    raise ValidationError("a SANDWICH domain names a family of domains, not one domain")


def build_problem(kind: DomainKind, agents: Sequence[str], outcomes: Sequence[str],
                  f_table: Mapping[OrdinalState, str] | Callable[[OrdinalState], str],
                  *, require_strict: bool = True, unanimity_respecting: bool = False,
                  omega: Mapping[OrdinalState, Sequence[CardinalState]] | None = None,
                  ) -> ImplementationProblem:
    """Assemble and validate an implementation problem.

    ``omega=None`` is the ordinal problem (every representation admitted).
    """
    states = domain_states(kind, agents, outcomes)
    zs = frozenset(outcomes)
    lookup = _as_lookup(f_table)
    choice = {}
    for theta in states:
        if theta.agents != tuple(agents) or theta.outcomes != zs:
            raise DomainViolation(f"{theta} is not over the given agents and outcomes")
        if require_strict and not theta.is_strict:
            raise DomainViolation(f"{theta} is not strict")
        try:
            z = lookup(theta)
        except KeyError:
            raise ScfPartial(f"f is undefined at {theta}") from None
        if z not in zs:
            raise DomainViolation(f"f({theta}) = {z!r} is not an outcome")
        if unanimity_respecting and theta.is_unanimous and theta.is_strict:
            shared = theta.prefs[0][1].ranking()[0]
            if z != shared:
                raise DomainViolation(f"f({theta}) = {z} is not the shared top {shared}")
        choice[theta] = z
    scf = SCF(tuple(states), choice)
    om = None if omega is None else {t: tuple(omega.get(t, ())) for t in states}
    return ImplementationProblem(tuple(states), scf, om)
