"""Exact-rational value types: lotteries, preferences, states, mechanisms.

Everything here is immutable after construction. Rationals are
:class:`fractions.Fraction` throughout; no floating point is ever used for a
decision.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    NonUnitMass,
    ParseError,
    ScfPartial,
    UnknownOutcome,
    UnknownStrategy,
    ValidationError,
)

Rational = Fraction
Profile = tuple  # tuple of strategy labels, one per agent in agent order


# --------------------------------------------------------------------------
# configuration caps


@dataclass(frozen=True)
class Caps:
    """Enumeration and work caps. Override with ``DOMLAB_CAPS="outcomes=7,agents=5"``."""

    outcomes: int = 6
    agents: int = 4
    choices: int = 10**6
    lp_variables: int = 12
    lp_rows: int = 200_000
    scfs: int = 10**7
    mechanisms: int = 10**8


def current_caps() -> Caps:
    raw = os.environ.get("DOMLAB_CAPS", "").strip()
    if not raw:
        return Caps()
    overrides = {}
    for item in raw.split(","):
        if not item.strip():
            continue
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in Caps.__dataclass_fields__:
            raise ValidationError(f"unknown cap {key!r} in DOMLAB_CAPS")
        overrides[key] = int(value)
    return Caps(**overrides)


# --------------------------------------------------------------------------
# rationals


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` or an integer string into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"expected a rational string, got {type(text).__name__}")
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        if sep:
            q = int(den)
            if q <= 0:
                raise ParseError(f"non-positive denominator in {text!r}")
            return Fraction(int(num), q)
        return Fraction(int(num))
    except ValueError:
        raise ParseError(f"not an exact rational: {text!r}") from None


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# --------------------------------------------------------------------------
# lotteries


class Lottery:
    """A probability distribution over outcome labels with exact masses.

    Zero-mass keys may be present (table construction is simpler that way) but
    are ignored by equality and hashing.
    """

    __slots__ = ("_mass", "_key")

    def __init__(self, mass: Mapping[str, Fraction]):
        self._mass = dict(mass)
        self._key = tuple(sorted((z, p) for z, p in self._mass.items() if p != 0))

    @classmethod
    def point(cls, z: str) -> "Lottery":
        return cls({z: Fraction(1)})

    @classmethod
    def uniform(cls, outcomes: Sequence[str]) -> "Lottery":
        w = Fraction(1, len(outcomes))
        return cls({z: w for z in outcomes})

    def prob(self, z: str) -> Fraction:
        return self._mass.get(z, Fraction(0))

    def items(self) -> Iterator[tuple[str, Fraction]]:
        return iter(self._key)

    @property
    def support(self) -> frozenset[str]:
        return frozenset(z for z, _ in self._key)

    @property
    def is_degenerate(self) -> bool:
        return len(self._key) == 1

    @property
    def outcome(self) -> str | None:
        """The outcome carrying all mass, or None for a non-degenerate lottery."""
        return self._key[0][0] if len(self._key) == 1 else None

    def is_point(self, z: str) -> bool:
        return len(self._key) == 1 and self._key[0][0] == z

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Lottery):
            return NotImplemented
        return self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def to_json(self, outcomes: Sequence[str] | None = None) -> dict[str, str]:
        order = outcomes if outcomes is not None else [z for z, _ in self._key]
        return {z: format_rational(self.prob(z)) for z in order if self.prob(z) != 0}

    def __str__(self) -> str:
        if self.is_degenerate:
            return self._key[0][0]
        return " + ".join(f"{p}{z}" for z, p in self._key)

    def __repr__(self) -> str:
        return f"Lottery({{{', '.join(f'{z!r}: {p}' for z, p in self._key)}}})"


def make_lottery(pairs: Iterable[tuple[str, Fraction | int | str]],
                 outcomes: Sequence[str] | None = None) -> Lottery:
    """Build a lottery from ``(outcome, mass)`` pairs.

    Repeated outcomes are merged. Raises :class:`NonUnitMass` unless the
    masses sum to exactly one and :class:`UnknownOutcome` for labels outside
    ``outcomes`` (when given).
    """
    mass: dict[str, Fraction] = {}
    allowed = set(outcomes) if outcomes is not None else None
    for z, p in pairs:
        if allowed is not None and z not in allowed:
            raise UnknownOutcome(f"outcome {z!r} is not in the outcome space")
        q = parse_rational(p) if isinstance(p, str) else Fraction(p)
        if q < 0:
            raise NonUnitMass(f"negative mass {q} on {z!r}")
        mass[z] = mass.get(z, Fraction(0)) + q
    total = sum(mass.values(), Fraction(0))
    if total != 1:
        raise NonUnitMass(f"masses sum to {total}, not 1")
    return Lottery(mass)


def mix(coeffs: Sequence[Fraction | int], lotteries: Sequence[Lottery]) -> Lottery:
    """Convex combination ``sum_k coeffs[k] * lotteries[k]``."""
    if len(coeffs) != len(lotteries):
        raise ValidationError("coefficient and lottery lists differ in length")
    cs = [Fraction(c) for c in coeffs]
    if any(c < 0 for c in cs):
        raise NonUnitMass("negative mixture weight")
    if sum(cs, Fraction(0)) != 1:
        raise NonUnitMass(f"mixture weights sum to {sum(cs, Fraction(0))}, not 1")
    mass: dict[str, Fraction] = {}
    for c, lot in zip(cs, lotteries):
        if c == 0:
            continue
        for z, p in lot.items():
            mass[z] = mass.get(z, Fraction(0)) + c * p
    return Lottery(mass)


def lottery_equal(x: Lottery, y: Lottery) -> bool:
    return x == y


# --------------------------------------------------------------------------
# preferences and states


@dataclass(frozen=True)
class Preference:
    """A weak order as indifference classes, best class first."""

    classes: tuple[frozenset[str], ...]

    def __post_init__(self):
        seen: set[str] = set()
        for cls in self.classes:
            if not cls:
                raise ValidationError("empty indifference class")
            if seen & cls:
                raise ValidationError("indifference classes overlap")
            seen |= cls
        object.__setattr__(self, "classes", tuple(frozenset(c) for c in self.classes))

    @classmethod
    def strict(cls, ranking: Sequence[str]) -> "Preference":
        return cls(tuple(frozenset([z]) for z in ranking))

    @classmethod
    def parse(cls, text: str) -> "Preference":
        """Parse ``"b>a>c"``; ties are written ``"a=b>c"``."""
        parts = text.strip().split(">")
        classes = []
        for part in parts:
            labels = [x.strip() for x in part.split("=")]
            if any(not x for x in labels):
                raise ParseError(f"empty outcome label in preference {text!r}")
            if len(set(labels)) != len(labels):
                raise ParseError(f"repeated label in preference {text!r}")
            classes.append(frozenset(labels))
        try:
            return cls(tuple(classes))
        except ValidationError as exc:
            raise ParseError(f"{exc} in preference {text!r}") from None

    @property
    def outcomes(self) -> frozenset[str]:
        return frozenset().union(*self.classes)

    @property
    def is_strict(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    @property
    def top(self) -> frozenset[str]:
        return self.classes[0]

    def ranking(self) -> tuple[str, ...]:
        """Outcomes best first (ties in sorted order)."""
        return tuple(z for c in self.classes for z in sorted(c))

    def rank(self, z: str) -> int:
        """0-based index of the indifference class containing ``z``."""
        for k, c in enumerate(self.classes):
            if z in c:
                return k
        raise UnknownOutcome(f"{z!r} is not ranked")

    def weakly_prefers(self, z: str, z2: str) -> bool:
        return self.rank(z) <= self.rank(z2)

    def upper_contours(self) -> list[frozenset[str]]:
        """Proper upper contour sets: unions of the top k classes, k = 1..K-1."""
        out, acc = [], frozenset()
        for c in self.classes[:-1]:
            acc = acc | c
            out.append(acc)
        return out

    def __str__(self) -> str:
        return ">".join("=".join(sorted(c)) for c in self.classes)


@dataclass(frozen=True)
class OrdinalState:
    """A preference profile: one :class:`Preference` per agent, agent order kept."""

    prefs: tuple[tuple[str, Preference], ...]

    def __post_init__(self):
        agents = [a for a, _ in self.prefs]
        if len(set(agents)) != len(agents):
            raise ValidationError("repeated agent in ordinal state")
        spaces = {p.outcomes for _, p in self.prefs}
        if len(spaces) > 1:
            raise ValidationError("preferences range over different outcome sets")

    @classmethod
    def of(cls, prefs: Mapping[str, Preference] | Iterable[tuple[str, Preference]]) -> "OrdinalState":
        items = prefs.items() if isinstance(prefs, Mapping) else prefs
        return cls(tuple((a, p) for a, p in items))

    @classmethod
    def parse(cls, text: str) -> "OrdinalState":
        """Parse ``"i1:b>a>c;i2:c>a>b"``."""
        items = []
        col = 1
        for chunk in text.strip().split(";"):
            agent, sep, pref = chunk.partition(":")
            if not sep or not agent.strip():
                raise ParseError(f"expected 'agent:ranking' in {chunk!r}", 1, col)
            try:
                items.append((agent.strip(), Preference.parse(pref)))
            except ParseError as exc:
                raise ParseError(str(exc).split(" (line")[0], 1, col + len(agent) + 1) from None
            col += len(chunk) + 1
        try:
            return cls(tuple(items))
        except ValidationError as exc:
            raise ParseError(str(exc), 1, 1) from None

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.prefs)

    @property
    def outcomes(self) -> frozenset[str]:
        return self.prefs[0][1].outcomes

    def __getitem__(self, agent: str) -> Preference:
        for a, p in self.prefs:
            if a == agent:
                return p
        raise KeyError(agent)

    @property
    def is_strict(self) -> bool:
        return all(p.is_strict for _, p in self.prefs)

    @property
    def is_unanimous(self) -> bool:
        return len({p for _, p in self.prefs}) == 1

    def __str__(self) -> str:
        return ";".join(f"{a}:{p}" for a, p in self.prefs)


@dataclass(frozen=True)
class CardinalState:
    """Rational utility functions, one per agent."""

    utils: tuple[tuple[str, tuple[tuple[str, Fraction], ...]], ...]

    @classmethod
    def of(cls, utils: Mapping[str, Mapping[str, Fraction | int | str]]) -> "CardinalState":
        return cls(tuple(
            (a, tuple(sorted((z, parse_rational(v) if isinstance(v, str) else Fraction(v))
                             for z, v in u.items())))
            for a, u in utils.items()))

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.utils)

    def __getitem__(self, agent: str) -> dict[str, Fraction]:
        for a, u in self.utils:
            if a == agent:
                return dict(u)
        raise KeyError(agent)

    def replace(self, agent: str, u_i: Mapping[str, Fraction]) -> "CardinalState":
        return CardinalState(tuple(
            (a, tuple(sorted(u_i.items())) if a == agent else u) for a, u in self.utils))

    def represents(self, theta: OrdinalState) -> bool:
        """Exact check of ``z >= z' <=> u(z) >= u(z')`` over all pairs."""
        if set(self.agents) != set(theta.agents):
            return False
        for agent, pref in theta.prefs:
            u = self[agent]
            if set(u) != pref.outcomes:
                return False
            for z, z2 in itertools.product(pref.outcomes, repeat=2):
                if pref.weakly_prefers(z, z2) != (u[z] >= u[z2]):
                    return False
        return True

    def __str__(self) -> str:
        return ";".join(
            f"{a}:" + ",".join(f"{z}={v}" for z, v in u) for a, u in self.utils)


# --------------------------------------------------------------------------
# mechanisms


class Mechanism:
    """A finite stochastic mechanism ``<S, g>``.

    ``table`` maps every strategy profile (a tuple with one label per agent,
    agents in ``agents`` order) to a :class:`Lottery` over ``outcomes``.
    """

    def __init__(self, agents: Sequence[str], outcomes: Sequence[str],
                 strategies: Sequence[Sequence[str]],
                 table: Mapping[Profile, Lottery]):
        self.agents = tuple(agents)
        self.outcomes = tuple(outcomes)
        self.strategies = tuple(tuple(s) for s in strategies)
        if len(self.strategies) != len(self.agents):
            raise ValidationError("one strategy list per agent is required")
        if len(set(self.agents)) != len(self.agents):
            raise ValidationError("agent labels must be distinct")
        if len(set(self.outcomes)) != len(self.outcomes) or len(self.outcomes) < 2:
            raise ValidationError("need at least two distinct outcomes")
        for labels in self.strategies:
            if not labels or len(set(labels)) != len(labels):
                raise ValidationError("strategy lists must be nonempty and distinct")
        allowed = set(self.outcomes)
        self._table: dict[Profile, Lottery] = {}
        for prof in itertools.product(*self.strategies):
            try:
                lot = table[prof]
            except KeyError:
                raise ValidationError(f"outcome map undefined at profile {prof}") from None
            if not lot.support <= allowed:
                raise UnknownOutcome(f"lottery at {prof} leaves the outcome space")
            self._table[prof] = lot
        if len(table) != len(self._table):
            raise ValidationError("outcome map has profiles outside the strategy product")
        self._cache: dict = {}

    def g(self, profile: Sequence[str]) -> Lottery:
        try:
            return self._table[tuple(profile)]
        except KeyError:
            raise UnknownStrategy(f"no such strategy profile {tuple(profile)}") from None

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*self.strategies)

    def items(self) -> Iterator[tuple[Profile, Lottery]]:
        return ((p, self._table[p]) for p in self.profiles())

    def strategy_set(self, agent: str) -> tuple[str, ...]:
        return self.strategies[self.agent_index(agent)]

    def agent_index(self, agent: str) -> int:
        try:
            return self.agents.index(agent)
        except ValueError:
            raise ValidationError(f"unknown agent {agent!r}") from None

    def strategy_index(self, agent_idx: int, label: str) -> int:
        try:
            return self.strategies[agent_idx].index(label)
        except ValueError:
            raise UnknownStrategy(
                f"{label!r} is not a strategy of {self.agents[agent_idx]!r}") from None

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategies)

    @property
    def is_deterministic(self) -> bool:
        return all(lot.is_degenerate for lot in self._table.values())

    @cached_property
    def mass_array(self) -> tuple[np.ndarray, int]:
        """Integer numerators ``A[s_1, ..., s_n, z]`` over a common denominator."""
        denom = 1
        for lot in self._table.values():
            for _, p in lot.items():
                denom = math.lcm(denom, p.denominator)
        arr = np.zeros(self.shape + (len(self.outcomes),), dtype=np.int64)
        index = [{s: k for k, s in enumerate(labels)} for labels in self.strategies]
        zpos = {z: k for k, z in enumerate(self.outcomes)}
        for prof, lot in self._table.items():
            pos = tuple(index[j][s] for j, s in enumerate(prof))
            for z, p in lot.items():
                arr[pos + (zpos[z],)] = p.numerator * (denom // p.denominator)
        arr.setflags(write=False)
        return arr, denom

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mechanism):
            return NotImplemented
        return (self.agents == other.agents and self.outcomes == other.outcomes
                and self.strategies == other.strategies and self._table == other._table)

    def __hash__(self) -> int:
        return hash((self.agents, self.outcomes, self.strategies,
                     tuple(self._table[p] for p in self.profiles())))

    def __repr__(self) -> str:
        return (f"Mechanism(agents={self.agents}, outcomes={self.outcomes}, "
                f"shape={self.shape})")


@dataclass(frozen=True)
class Restriction:
    """A product subset of strategy profiles: one nonempty label tuple per agent."""

    agents: tuple[str, ...]
    sets: tuple[tuple[str, ...], ...]

    @classmethod
    def full(cls, mech: Mechanism) -> "Restriction":
        return cls(mech.agents, mech.strategies)

    @classmethod
    def of(cls, mech: Mechanism, sets: Mapping[str, Iterable[str]]) -> "Restriction":
        out = []
        for i, agent in enumerate(mech.agents):
            chosen = set(sets[agent])
            for s in chosen:
                mech.strategy_index(i, s)
            out.append(tuple(s for s in mech.strategies[i] if s in chosen))
        r = cls(mech.agents, tuple(out))
        r.check()
        return r

    def check(self) -> None:
        if any(not s for s in self.sets):
            raise ValidationError("restriction has an empty strategy set")

    def __getitem__(self, agent: str) -> tuple[str, ...]:
        return self.sets[self.agents.index(agent)]

    def as_dict(self) -> dict[str, frozenset[str]]:
        return {a: frozenset(s) for a, s in zip(self.agents, self.sets)}

    def profiles(self) -> Iterator[Profile]:
        return itertools.product(*self.sets)

    def issubset(self, other: "Restriction") -> bool:
        return all(set(a) <= set(b) for a, b in zip(self.sets, other.sets))

    def __str__(self) -> str:
        return " x ".join("{" + ",".join(s) + "}" for s in self.sets)


# --------------------------------------------------------------------------
# problems, traces and verdicts


@dataclass(frozen=True)
class SCF:
    """A social choice function on a finite set of ordinal states."""

    domain: tuple[OrdinalState, ...]
    choice: Mapping[OrdinalState, str] = field(compare=False, hash=False)

    def __post_init__(self):
        missing = [t for t in self.domain if t not in self.choice]
        if missing:
            raise ScfPartial(f"choice undefined at {len(missing)} state(s), e.g. {missing[0]}")

    @classmethod
    def from_table(cls, table: Mapping[OrdinalState, str]) -> "SCF":
        return cls(tuple(table), dict(table))

    def __call__(self, theta: OrdinalState) -> str:
        return self.choice[theta]

    def range(self) -> frozenset[str]:
        return frozenset(self.choice[t] for t in self.domain)


class OmegaMode(enum.Enum):
    ALL = "ALL"
    EXPLICIT = "EXPLICIT"


@dataclass(frozen=True)
class ImplementationProblem:
    """``[Theta, Omega, f]``: ordinal states, admitted utilities, target choice."""

    theta_set: tuple[OrdinalState, ...]
    scf: SCF
    omega: Mapping[OrdinalState, tuple[CardinalState, ...]] | None = field(
        default=None, compare=False, hash=False)

    def __post_init__(self):
        missing = [t for t in self.theta_set if t not in self.scf.choice]
        if missing:
            raise ScfPartial(f"choice undefined at {missing[0]}")
        if self.omega is not None:
            for theta in self.theta_set:
                reps = self.omega.get(theta, ())
                if not reps:
                    raise ValidationError(f"no cardinal state admitted at {theta}")
                for u in reps:
                    if not u.represents(theta):
                        raise ValidationError(f"utility profile does not represent {theta}")

    @property
    def mode(self) -> OmegaMode:
        return OmegaMode.ALL if self.omega is None else OmegaMode.EXPLICIT

    @property
    def outcomes(self) -> frozenset[str]:
        return self.theta_set[0].outcomes

    @property
    def agents(self) -> tuple[str, ...]:
        return self.theta_set[0].agents


@dataclass(frozen=True)
class Deletion:
    agent: str
    strategy: str
    dominator: str


@dataclass(frozen=True)
class Round:
    """Survivors after one synchronous deletion round and the deletions made in it."""

    survivors: Restriction
    deletions: tuple[Deletion, ...]


@dataclass(frozen=True)
class DeletionTrace:
    initial: Restriction
    rounds: tuple[Round, ...]

    @property
    def final(self) -> Restriction:
        return self.rounds[-1].survivors if self.rounds else self.initial

    def survivors_after(self, k: int) -> Restriction:
        """``UD^k``; ``k`` beyond the fixed point returns the fixed point."""
        if k <= 0:
            return self.initial
        return self.rounds[min(k, len(self.rounds)) - 1].survivors

    @property
    def deletions(self) -> list[Deletion]:
        return [d for r in self.rounds for d in r.deletions]


class Status(enum.Enum):
    VERIFIED = "verified"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Witness:
    """A concrete refutation: at ``cardinal`` the surviving ``profile`` yields ``lottery``."""

    state: OrdinalState
    cardinal: CardinalState
    profile: Profile
    lottery: Lottery


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Witness | None = None
    note: str = ""

    def __post_init__(self):
        if self.status is Status.REFUTED and self.witness is None:
            raise ValidationError("a refuted verdict needs a witness")
