"""Reference mechanisms: dictatorial ones and the non-dictatorial positives.

* :func:`dictatorial_mechanism`: one agent names an outcome, it is chosen.
* :func:`hat_mechanism`: the 3x3 two-agent mechanism for three outcomes.
* :func:`star_mechanism`: its extension to four or more outcomes.
* :func:`truncated_infinite_mechanism`: the ``Z x N x Z`` announcement
  mechanism with the integer coordinate capped at ``N``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .core import (
    CardinalState,
    ImplementationProblem,
    Lottery,
    Mechanism,
    OrdinalState,
    Preference,
    make_lottery,
    mix,
)
from .domains import DomainKind, DomainTag, build_problem, is_second_best_pair_state
from .errors import DictatorialCase, LabelClash, NotStrict, ValidationError

DUMMY = "-"
HALF, QUARTER = Fraction(1, 2), Fraction(1, 4)


def _lot(*pairs) -> Lottery:
    return make_lottery(pairs)


def _players_and_dummies(agents: Sequence[str], players: Sequence[str],
                         player_strategies: Sequence[str]):
    strategies = []
    for a in agents:
        strategies.append(tuple(player_strategies) if a in players else (DUMMY,))
    return strategies


def dictatorial_mechanism(agent: str, outcomes: Sequence[str],
                          agents: Sequence[str] = ("i1", "i2")) -> Mechanism:
    """``agent`` announces an outcome and gets it; everyone else has one dummy strategy."""
    if agent not in agents:
        raise ValidationError(f"{agent!r} is not one of the agents")
    k = list(agents).index(agent)
    strategies = _players_and_dummies(agents, [agent], outcomes)
    table = {prof: Lottery.point(prof[k]) for prof in itertools.product(*strategies)}
    return Mechanism(agents, outcomes, strategies, table)


def _two_player_mechanism(outcomes, agents, players, cell) -> Mechanism:
    if len(players) != 2 or players[0] == players[1]:
        raise ValidationError("exactly two distinct participating agents are required")
    if not set(players) <= set(agents):
        raise ValidationError("participating agents must be among the agents")
    k1, k2 = list(agents).index(players[0]), list(agents).index(players[1])
    strategies = _players_and_dummies(agents, players, outcomes)
    table = {prof: cell(prof[k1], prof[k2]) for prof in itertools.product(*strategies)}
    return Mechanism(agents, outcomes, strategies, table)


def hat_mechanism(a: str = "a", b: str = "b", c: str = "c",
                  agents: Sequence[str] = ("i1", "i2"),
                  players: Sequence[str] | None = None) -> Mechanism:
    """The 3x3 table: diagonal degenerate, quarters and halves off it."""
    if len({a, b, c}) != 3:
        raise LabelClash("the three labels must be distinct")
    players = tuple(players or agents[:2])
    table = {
        (a, a): _lot((a, 1)),
        (a, b): _lot((a, QUARTER), (b, 3 * QUARTER)),
        (a, c): _lot((a, HALF), (b, HALF)),
        (b, a): _lot((a, HALF), (c, HALF)),
        (b, b): _lot((b, 1)),
        (b, c): _lot((b, HALF), (c, HALF)),
        (c, a): _lot((a, QUARTER), (c, 3 * QUARTER)),
        (c, b): _lot((b, HALF), (c, HALF)),
        (c, c): _lot((c, 1)),
    }
    return _two_player_mechanism((a, b, c), agents, players, lambda x, y: table[(x, y)])


@dataclass(frozen=True)
class StarLabels:
    """``a`` is the target at the base state, ``b`` and ``c`` the two players' tops."""

    a: str
    b: str
    c: str

    def __post_init__(self):
        if len({self.a, self.b, self.c}) != 3:
            raise LabelClash("labels a, b, c must be pairwise distinct")

    @classmethod
    def from_state(cls, theta_bar: OrdinalState, target: str, i1: str, i2: str) -> "StarLabels":
        if not is_second_best_pair_state(theta_bar, i1, i2, target):
            raise ValidationError(
                f"{target!r} is not second-best for both {i1} and {i2} with distinct tops")
        return cls(target, theta_bar[i1].ranking()[0], theta_bar[i2].ranking()[0])


def star_cell(x: str, y: str, lab: StarLabels) -> Lottery:
    """``g*(x, y)`` read off the three-row table (rows split on ``x in {a, b}``,
    columns on ``y in {a, c}``)."""
    a, b, c = lab.a, lab.b, lab.c
    if x == y:
        return _lot((x, 1))
    if x == a:
        if y == c:
            return _lot((a, 3 * QUARTER), (b, QUARTER))
        return _lot((a, HALF), (y, HALF))
    if x == b:
        if y == a:
            return _lot((a, 3 * QUARTER), (c, QUARTER))
        if y == c:
            return _lot((a, HALF), (b, QUARTER), (c, QUARTER))
        return _lot((b, HALF), (y, HALF))
    # x outside {a, b}
    return _lot((x, HALF), (y, HALF))


def star_mechanism(outcomes: Sequence[str], labels: StarLabels,
                   agents: Sequence[str] = ("i1", "i2"),
                   players: Sequence[str] | None = None) -> Mechanism:
    missing = {labels.a, labels.b, labels.c} - set(outcomes)
    if missing:
        raise LabelClash(f"labels {sorted(missing)} are not outcomes")
    if len(outcomes) < 3:
        raise ValidationError("the construction needs at least three outcomes")
    players = tuple(players or agents[:2])
    return _two_player_mechanism(outcomes, agents, players,
                                 lambda x, y: star_cell(x, y, labels))


def mechanism_differences(m1: Mechanism, m2: Mechanism) -> list[tuple[tuple[str, ...], Lottery, Lottery]]:
    """Cells where two mechanisms over the same strategy sets disagree."""
    if m1.strategies != m2.strategies:
        raise ValidationError("mechanisms have different strategy sets")
    return [(p, m1.g(p), m2.g(p)) for p in m1.profiles() if m1.g(p) != m2.g(p)]


# --------------------------------------------------------------------------
# the announcement mechanism with an integer coordinate


def tops(theta: OrdinalState) -> dict[str, str]:
    out = {}
    for agent, pref in theta.prefs:
        if len(pref.top) != 1:
            raise NotStrict(f"{agent} has a tied top at {theta}")
        out[agent] = next(iter(pref.top))
    return out


def _check_nondictatorial(theta_bar: OrdinalState, target: str) -> dict[str, str]:
    if not theta_bar.is_strict:
        raise NotStrict(f"{theta_bar} has ties")
    if theta_bar.is_unanimous:
        raise DictatorialCase("the base state is a unanimity state")
    tau = tops(theta_bar)
    for agent, t in tau.items():
        if t == target:
            raise DictatorialCase(f"the target {target!r} is the top of {agent}")
    return tau


def sigma(agent: str, z: str, theta_bar: OrdinalState, target: str) -> frozenset[str]:
    """``{z}``, or ``{z, top of agent}`` when ``z`` is the target."""
    t = tops(theta_bar)[agent]
    if t == target:
        raise DictatorialCase(f"the target {target!r} is the top of {agent}")
    return frozenset({z, t}) if z == target else frozenset({z})


def _sigma_products(theta_bar, target, outcomes):
    tau = _check_nondictatorial(theta_bar, target)
    cells = {}
    for z in outcomes:
        cells[z] = [sigma(a, z, theta_bar, target) for a in theta_bar.agents]
    for z, w in itertools.combinations(outcomes, 2):
        if all(cz & cw for cz, cw in zip(cells[z], cells[w])):
            raise ValidationError(f"announcement cells for {z} and {w} overlap")
    return tau, cells


def gamma(announcements: Mapping[str, str], theta_bar: OrdinalState, target: str,
          outcomes: Sequence[str] | None = None) -> Lottery:
    """``z`` when the announcements lie in the product of ``sigma(., z)``,
    otherwise the uniform lottery."""
    outcomes = tuple(outcomes or sorted(theta_bar.outcomes))
    _, cells = _sigma_products(theta_bar, target, outcomes)
    return _gamma_from_cells(tuple(announcements[a] for a in theta_bar.agents), cells, outcomes)


def _gamma_from_cells(profile, cells, outcomes) -> Lottery:
    for z in outcomes:
        if all(x in c for x, c in zip(profile, cells[z])):
            return Lottery.point(z)
    return Lottery.uniform(outcomes)


@dataclass(frozen=True)
class TruncationParams:
    n_cap: int

    def __post_init__(self):
        if self.n_cap < 2:
            raise ValidationError("the integer cap must be at least 2")


def truncated_label(z: str, n: int, zhat: str) -> str:
    return f"{z}|{n}|{zhat}"


def parse_truncated_label(label: str) -> tuple[str, int, str]:
    z, n, zhat = label.split("|")
    return z, int(n), zhat


def truncated_cell(profile: Sequence[tuple[str, int, str]], cells, outcomes) -> Lottery:
    g = _gamma_from_cells(tuple(z for z, _, _ in profile), cells, outcomes)
    if all(n == 1 for _, n, _ in profile):
        return g
    unif = Lottery.uniform(outcomes)
    k = Fraction(1, len(profile))
    coeffs, lots = [], []
    for _, n, zhat in profile:
        coeffs += [k / (2 * n), k / (2 * n), k * Fraction(n - 1, n)]
        lots += [g, unif, Lottery.point(zhat)]
    return mix(coeffs, lots)


def truncated_infinite_mechanism(theta_bar: OrdinalState, target: str,
                                 outcomes: Sequence[str], agents: Sequence[str] | None,
                                 params: TruncationParams) -> Mechanism:
    """Strategies ``(z, n, zhat)`` with ``1 <= n <= N``; labels ``"z|n|zhat"``."""
    outcomes = tuple(outcomes)
    agents = tuple(agents or theta_bar.agents)
    if agents != theta_bar.agents:
        raise ValidationError("agents must match the base state")
    _, cells = _sigma_products(theta_bar, target, outcomes)
    raw = [(z, n, zh) for z in outcomes for n in range(1, params.n_cap + 1) for zh in outcomes]
    labels = [truncated_label(*s) for s in raw]
    table = {}
    for combo in itertools.product(range(len(raw)), repeat=len(agents)):
        table[tuple(labels[k] for k in combo)] = truncated_cell(
            [raw[k] for k in combo], cells, outcomes)
    return Mechanism(agents, outcomes, [labels] * len(agents), table)


def n_threshold(u_i: Mapping[str, Fraction], pref: Preference) -> int:
    """Smallest ``n`` with ``min_z U[(1/n) z + ((n-1)/n) top] > max(U over
    non-top outcomes and the uniform lottery)``."""
    if not pref.is_strict:
        raise NotStrict("threshold needs a strict preference")
    ranking = pref.ranking()
    t = ranking[0]
    u = {z: Fraction(u_i[z]) for z in ranking}
    worst = min(u.values())
    unif = sum(u.values(), Fraction(0)) / len(u)
    rival = max(max(u[z] for z in ranking[1:]), unif)
    gap = u[t] - rival
    if gap <= 0:
        raise ValidationError("utilities do not represent the preference")
    # (1/n) worst + ((n-1)/n) u_t > rival  <=>  n > (u_t - worst) / gap
    ratio = (u[t] - worst) / gap
    return max(1, ratio.numerator // ratio.denominator + 1)


# --------------------------------------------------------------------------
# canonical problems


def base_state(outcomes: Sequence[str], labels: StarLabels,
               agents: Sequence[str] = ("i1", "i2"),
               players: Sequence[str] | None = None) -> OrdinalState:
    """A state where ``a`` is second-best for both players, whose tops are ``b``
    and ``c``; remaining outcomes follow in label order. Non-players share
    the first player's ranking."""
    players = tuple(players or agents[:2])
    rest = [z for z in outcomes if z not in (labels.a, labels.b, labels.c)]
    prefs = []
    for agent in agents:
        if agent == players[0]:
            order = [labels.b, labels.a, labels.c] + rest
        elif agent == players[1]:
            order = [labels.c, labels.a, labels.b] + rest
        else:
            order = [labels.b, labels.a, labels.c] + rest
        prefs.append((agent, Preference.strict(order)))
    return OrdinalState(tuple(prefs))


def unanimity_plus_problem(theta_bar: OrdinalState, target: str,
                           outcomes: Sequence[str],
                           omega: Mapping[OrdinalState, Sequence[CardinalState]] | None = None,
                           ) -> ImplementationProblem:
    """Unanimity strict states (choose the shared top) plus ``theta_bar`` (choose ``target``)."""
    def f(theta):
        if theta == theta_bar:
            return target
        return theta.prefs[0][1].ranking()[0]
    kind = DomainKind(DomainTag.UNANIMITY_STRICT, (theta_bar,))
    return build_problem(kind, theta_bar.agents, outcomes, f,
                         unanimity_respecting=True, omega=omega)


def hat_problem(agents: Sequence[str] = ("i1", "i2")) -> tuple[Mechanism, ImplementationProblem]:
    """The three-outcome example: the mechanism and its seven-state ordinal problem."""
    labels = StarLabels("a", "b", "c")
    theta_hat = base_state(("a", "b", "c"), labels, agents)
    return hat_mechanism(agents=agents), unanimity_plus_problem(theta_hat, "a", ("a", "b", "c"))


def star_problem(outcomes: Sequence[str], agents: Sequence[str] = ("i1", "i2"),
                 labels: StarLabels | None = None) -> tuple[Mechanism, ImplementationProblem]:
    labels = labels or StarLabels(*outcomes[:3])
    theta_bar = base_state(outcomes, labels, agents)
    return (star_mechanism(outcomes, labels, agents),
            unanimity_plus_problem(theta_bar, labels.a, outcomes))
