"""Exhaustive search over small grid-discretised mechanism spaces.

Each cell of a mechanism ranges over the lotteries whose masses are
multiples of ``1/q``. Mechanisms are indexed by a mixed-radix cursor (first
profile most significant), so a space splits into shards by cursor range and
a run can resume from any cursor.

A mechanism implements at most one choice function on a given domain: at
every state the certified survivors all map to one point mass, and that
point is forced. The miner therefore never enumerates choice functions. It
computes, per state, the forced outcome (or a refutation) and checks the
induced function against the qualifying flags. For the ``SANDWICH`` family
(every domain between the unanimity strict states and all strict states),
only the largest domain the mechanism certifies matters: surjectivity and
non-dictatorship both survive enlarging the domain.

Per-state verdicts come from a batched integer kernel (robust deletion over
many mechanisms at once). States the kernel cannot settle fall back to the
general engine one mechanism at a time.
"""

from __future__ import annotations

import dataclasses
import functools
import hashlib
import itertools
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .core import (
    Lottery,
    Mechanism,
    OrdinalState,
    Restriction,
    SCF,
    Status,
    current_caps,
)
from .dominance import possibly_undominated, robust_udinf, ud1_at, udinf_at, utility_vector
from .domains import (
    DomainKind,
    DomainTag,
    build_problem,
    canonical_cardinal,
    extreme_cardinal,
    domain_states,
    strict_states,
    unanimity_strict_states,
)
from .errors import SizeLimit, Timeout, ValidationError
from .formats import mechanism_to_dict, report_to_dict
from .verify import DEFAULT_SEED, representations, verify_ud, verify_udinf

OUTCOME_LABELS = "abcdefghijklmnopqrstuvwxyz"


class Notion:
    UD = "UD"
    UDINF = "UDINF"


@dataclass(frozen=True)
class SearchSpace:
    n_agents: int = 2
    n_outcomes: int = 2
    strategy_counts: tuple[int, ...] = (2, 2)
    q: int = 2
    deterministic_only: bool = False
    notion: str = Notion.UD
    domain: DomainKind = DomainKind(DomainTag.SANDWICH)
    require_surjective: bool = True
    require_nondictatorial: bool = True
    require_unanimity_respecting: bool = False
    samples: int = 50
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.q < 1:
            raise ValidationError("grid denominator q must be at least 1")
        if len(self.strategy_counts) != self.n_agents or min(self.strategy_counts) < 1:
            raise ValidationError("one positive strategy count per agent")
        if self.notion not in (Notion.UD, Notion.UDINF):
            raise ValidationError(f"unknown notion {self.notion!r}")
        caps = current_caps()
        if self.n_outcomes > caps.outcomes or self.n_agents > caps.agents:
            raise SizeLimit("space exceeds the agent/outcome caps")
        if self.size > caps.mechanisms * 10**3:
            raise SizeLimit(f"space has {self.size} mechanisms")

    @property
    def agents(self) -> tuple[str, ...]:
        return tuple(f"i{k + 1}" for k in range(self.n_agents))

    @property
    def outcomes(self) -> tuple[str, ...]:
        return tuple(OUTCOME_LABELS[: self.n_outcomes])

    @property
    def strategies(self) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(f"s{k + 1}" for k in range(n)) for n in self.strategy_counts)

    @property
    def grid(self) -> np.ndarray:
        """Cell values as integer mass vectors (numerators over ``q``)."""
        return grid_lotteries(self.n_outcomes, 1 if self.deterministic_only else self.q)

    @property
    def denominator(self) -> int:
        return 1 if self.deterministic_only else self.q

    @property
    def n_cells(self) -> int:
        return math.prod(self.strategy_counts)

    @property
    def size(self) -> int:
        return len(self.grid) ** self.n_cells

    def descriptor(self) -> dict:
        d = dataclasses.asdict(self)
        d["domain"] = {"kind": self.domain.tag.value,
                       "extra_states": [str(t) for t in self.domain.extra_states]}
        d["strategy_counts"] = list(self.strategy_counts)
        if self.deterministic_only:
            d["q"] = 1
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.descriptor(), sort_keys=True).encode()).hexdigest()[:16]


@functools.lru_cache(maxsize=None)
def grid_lotteries(n_outcomes: int, q: int) -> np.ndarray:
    """Compositions of ``q`` into ``n_outcomes`` parts, lexicographically descending."""
    comps = [c for c in itertools.product(range(q, -1, -1), repeat=n_outcomes) if sum(c) == q]
    arr = np.array(comps, dtype=np.int64).reshape(-1, n_outcomes)
    arr.setflags(write=False)
    return arr


# --------------------------------------------------------------------------
# enumeration


def _digits(space: SearchSpace, cursors: np.ndarray) -> np.ndarray:
    base = len(space.grid)
    out = np.empty((len(cursors), space.n_cells), dtype=np.int64)
    rest = cursors.astype(np.int64).copy()
    for k in range(space.n_cells - 1, -1, -1):
        out[:, k] = rest % base
        rest //= base
    return out


def batch_masses(space: SearchSpace, start: int, stop: int) -> np.ndarray:
    """Mass numerators ``A[b, s_1, ..., s_n, z]`` for cursors ``start..stop-1``."""
    digits = _digits(space, np.arange(start, stop, dtype=np.int64))
    masses = space.grid[digits]
    return masses.reshape((stop - start,) + tuple(space.strategy_counts) + (space.n_outcomes,))


def _mechanism_from_masses(space: SearchSpace, masses: np.ndarray) -> Mechanism:
    den = space.denominator
    table = {}
    for pos in itertools.product(*(range(n) for n in space.strategy_counts)):
        vec = masses[pos]
        prof = tuple(space.strategies[j][x] for j, x in enumerate(pos))
        table[prof] = Lottery({z: Fraction(int(m), den) for z, m in zip(space.outcomes, vec) if m})
    return Mechanism(space.agents, space.outcomes, space.strategies, table)


def mechanism_at(space: SearchSpace, cursor: int) -> Mechanism:
    if not 0 <= cursor < space.size:
        raise ValidationError(f"cursor {cursor} outside the space")
    return _mechanism_from_masses(space, batch_masses(space, cursor, cursor + 1)[0])


def enumerate_mechanisms(space: SearchSpace, start: int = 0, stop: int | None = None,
                         chunk: int = 4096) -> Iterator[Mechanism]:
    """Every mechanism of the space in cursor order, from ``start`` up to ``stop``."""
    stop = space.size if stop is None else min(stop, space.size)
    for lo in range(start, stop, chunk):
        hi = min(lo + chunk, stop)
        for masses in batch_masses(space, lo, hi):
            yield _mechanism_from_masses(space, masses)


def cursor_of(space: SearchSpace, mech: Mechanism) -> int:
    """Position of ``mech`` in the space, matching agents, outcomes and strategies by position.

    Raises ValidationError when the mechanism is not on the grid.
    """
    if (len(mech.agents) != space.n_agents or len(mech.outcomes) != space.n_outcomes
            or mech.shape != tuple(space.strategy_counts)):
        raise ValidationError("mechanism shape does not match the space")
    lookup = {tuple(int(x) for x in row): k for k, row in enumerate(space.grid)}
    base = len(space.grid)
    cursor = 0
    for prof in mech.profiles():
        lot = mech.g(prof)
        vec = []
        for z in mech.outcomes:
            m = lot.prob(z) * space.denominator
            if m.denominator != 1:
                raise ValidationError(f"cell {prof} is off the 1/{space.denominator} grid")
            vec.append(int(m))
        cursor = cursor * base + lookup[tuple(vec)]
    return cursor


# --------------------------------------------------------------------------
# choice functions


def _dictators(states: Sequence[OrdinalState], choice: dict[OrdinalState, str]) -> list[str]:
    agents = states[0].agents
    return [a for a in agents
            if all(t[a].top == frozenset({choice[t]}) for t in states)]


def _qualifies(states, choice, outcomes, *, surjective, nondictatorial, unanimity) -> bool:
    if surjective and set(choice[t] for t in states) != set(outcomes):
        return False
    if nondictatorial and _dictators(states, choice):
        return False
    if unanimity:
        for t in states:
            if t.is_unanimous and choice[t] != t.prefs[0][1].ranking()[0]:
                return False
    return True


def enumerate_scfs(states: Sequence[OrdinalState], outcomes: Sequence[str], *,
                   require_surjective: bool = False, require_nondictatorial: bool = False,
                   require_unanimity_respecting: bool = False) -> list[SCF]:
    """Every map from ``states`` to ``outcomes`` passing the flags."""
    states = tuple(states)
    if len(outcomes) ** len(states) > current_caps().scfs:
        raise SizeLimit(f"{len(outcomes)}^{len(states)} choice functions exceed the cap")
    out = []
    for combo in itertools.product(outcomes, repeat=len(states)):
        choice = dict(zip(states, combo))
        if _qualifies(states, choice, outcomes, surjective=require_surjective,
                      nondictatorial=require_nondictatorial, unanimity=require_unanimity_respecting):
            out.append(SCF(states, choice))
    return out


# --------------------------------------------------------------------------
# batched kernel


def _contour_matrix(outcomes: Sequence[str], pref) -> np.ndarray:
    contours = pref.upper_contours()
    sel = np.zeros((len(outcomes), len(contours)), dtype=np.int64)
    for k, c in enumerate(contours):
        for z in c:
            sel[outcomes.index(z), k] = 1
    return sel


class _Batch:
    """Robust-dominance data for a block of mechanisms of one space."""

    def __init__(self, space: SearchSpace, masses: np.ndarray):
        self.space = space
        self.masses = masses
        self.n = space.n_agents
        q = space.denominator
        peak = masses.max(axis=-1)
        self.degen = np.where(peak == q, masses.argmax(axis=-1), -1)
        self._gt: dict = {}
        self._ge: dict = {}

    def _pair_arrays(self, i: int, pref):
        key = (i, pref)
        if key not in self._gt:
            cum = self.masses @ _contour_matrix(self.space.outcomes, pref)
            cum = np.moveaxis(cum, i + 1, 1)
            B, ni = cum.shape[:2]
            cum = cum.reshape(B, ni, -1, cum.shape[-1])
            a, b = cum[:, :, None], cum[:, None, :]
            ge = (a >= b).all(axis=-1)
            self._gt[key] = ge & (a > b).any(axis=-1)   # [b, s', s, c]
            self._ge[key] = ge
        return self._gt[key], self._ge[key]

    def _columns_alive(self, alive: list[np.ndarray], i: int) -> np.ndarray:
        others = [alive[j] for j in range(self.n) if j != i]
        B = alive[0].shape[0]
        col = np.ones((B, 1), dtype=bool)
        for a in others:
            col = (col[:, :, None] & a[:, None, :]).reshape(B, -1)
        return col

    def _profiles_alive(self, alive: list[np.ndarray]) -> np.ndarray:
        B = alive[0].shape[0]
        prof = np.ones((B,), dtype=bool)
        for a in alive:
            prof = prof[..., None] & a.reshape((B,) + (1,) * (prof.ndim - 1) + (-1,))
        return prof

    def robust_survivors(self, theta: OrdinalState, one_round: bool) -> list[np.ndarray]:
        """Per-agent alive masks after robust deletion (one round or to the fixed point)."""
        prefs = [theta[a] for a in self.space.agents]
        gts = [self._pair_arrays(i, p)[0] for i, p in enumerate(prefs)]
        B = self.masses.shape[0]
        alive = [np.ones((B, n), dtype=bool) for n in self.space.strategy_counts]
        for _ in range(sum(self.space.strategy_counts)):
            new = []
            for i in range(self.n):
                col = self._columns_alive(alive, i)
                beats = (gts[i] | ~col[:, None, None, :]).all(axis=-1)   # [b, s', s]
                new.append(alive[i] & ~beats.any(axis=1))
            changed = any((x != y).any() for x, y in zip(new, alive))
            alive = new
            if one_round or not changed:
                break
        return alive

    def cardinal_survivors(self, uvecs: Sequence[Sequence[int]], one_round: bool) -> list[np.ndarray]:
        """Per-agent alive masks of exact deletion at one integer utility profile."""
        B = self.masses.shape[0]
        pays = []
        for i, uvec in enumerate(uvecs):
            pay = np.moveaxis(self.masses @ np.asarray(uvec, dtype=np.int64), i + 1, 1)
            pays.append(pay.reshape(B, pay.shape[1], -1))
        alive = [np.ones((B, n), dtype=bool) for n in self.space.strategy_counts]
        for _ in range(sum(self.space.strategy_counts)):
            new = []
            for i in range(self.n):
                col = self._columns_alive(alive, i)
                gt = pays[i][:, :, None, :] > pays[i][:, None, :, :]
                beats = (gt | ~col[:, None, None, :]).all(axis=-1)
                new.append(alive[i] & ~beats.any(axis=1))
            changed = any((x != y).any() for x, y in zip(new, alive))
            alive = new
            if one_round or not changed:
                break
        return alive

    def certain_in(self, theta: OrdinalState) -> list[np.ndarray]:
        """Strategies undominated on the full set at every representation:
        against every rival some column is weakly FOSD-better."""
        out = []
        for i, a in enumerate(self.space.agents):
            _, ge = self._pair_arrays(i, theta[a])
            safe = ge.any(axis=-1)   # [b, s, s'] : s weakly beats s' somewhere
            n = safe.shape[1]
            safe = safe | np.eye(n, dtype=bool)[None]
            out.append(safe.all(axis=2))
        return out

    def image_point(self, alive: list[np.ndarray]) -> np.ndarray:
        """Outcome index when every alive profile maps to one point mass; else -1."""
        prof = self._profiles_alive(alive)
        B = prof.shape[0]
        d = self.degen.reshape(B, -1)
        p = prof.reshape(B, -1)
        lo = np.where(p, d, 10**6).min(axis=1)
        hi = np.where(p, d, -2).max(axis=1)
        return np.where((lo == hi) & (lo >= 0), lo, -1)

    def image_has_bad(self, alive: list[np.ndarray]) -> np.ndarray:
        """Some alive profile maps to a non-point lottery, or two points differ."""
        prof = self._profiles_alive(alive)
        B = prof.shape[0]
        d = self.degen.reshape(B, -1)
        p = prof.reshape(B, -1)
        nonpoint = (p & (d < 0)).any(axis=1)
        lo = np.where(p, d, 10**6).min(axis=1)
        hi = np.where(p, d, -2).max(axis=1)
        return nonpoint | ((hi >= 0) & (lo != hi) & (lo < 10**6))


CERT_NONE = -1


def _exact_robust(theta: OrdinalState) -> bool:
    """Robust deletion is exact when utility is affine in one mass per agent."""
    return all(len(p.classes) <= 2 for _, p in theta.prefs)


def _integer_utilities(space: SearchSpace, theta: OrdinalState):
    """Canonical plus every corner of the near-degenerate representations."""
    reps = [canonical_cardinal(theta)]
    reps += [extreme_cardinal(theta, c) for c in itertools.product((False, True), repeat=space.n_agents)]
    return [[utility_vector(space.outcomes, u[a]) for a in space.agents] for u in reps]


def batch_state_verdicts(batch: _Batch, theta: OrdinalState, notion: str):
    """``(certified, refuted)`` arrays; entries that are neither need the general engine.

    Certification comes from robust deletion. Refutation is exact when robust
    deletion is; otherwise a few fixed representations are probed, and a
    probe whose survivors map outside a single point (or two probes forcing
    different points) refutes every target at once.
    """
    one_round = notion == Notion.UD
    robust = batch.robust_survivors(theta, one_round=one_round)
    cert = batch.image_point(robust)
    if _exact_robust(theta):
        return cert, cert < 0
    refuted = np.zeros(cert.shape, dtype=bool)
    if one_round:
        refuted |= batch.image_has_bad(batch.certain_in(theta))
    seen = np.full(cert.shape, -1, dtype=np.int64)
    for uvecs in _integer_utilities(batch.space, theta):
        alive = batch.cardinal_survivors(uvecs, one_round)
        point = batch.image_point(alive)
        refuted |= point < 0
        refuted |= (seen >= 0) & (point >= 0) & (point != seen)
        seen = np.where(seen >= 0, seen, point)
    return cert, refuted & (cert < 0)


# --------------------------------------------------------------------------
# general-engine fallback for one (mechanism, state)


@dataclass(frozen=True)
class StateOutcome:
    kind: str            # "cert", "inc" or "ref"
    outcome: str | None = None


def _single_point(mech: Mechanism, r: Restriction) -> str | None:
    z = None
    for prof in r.profiles():
        lot = mech.g(prof)
        w = lot.outcome
        if w is None or (z is not None and w != z):
            return None
        z = w
    return z


def state_outcome(mech: Mechanism, theta: OrdinalState, notion: str,
                  samples: int = 50, seed: int = DEFAULT_SEED) -> StateOutcome:
    """Forced outcome at ``theta`` over every representation, by the general engine."""
    if notion == Notion.UD:
        full = Restriction.full(mech)
        try:
            sets = tuple(possibly_undominated(mech, full, a, theta[a]) for a in mech.agents)
            z = _single_point(mech, Restriction(mech.agents, sets))
            return StateOutcome("cert", z) if z else StateOutcome("ref")
        except Timeout:
            pass
    else:
        z = _single_point(mech, robust_udinf(mech, theta)[0])
        if z is not None:
            return StateOutcome("cert", z)
    seen = None
    for u in representations(theta, samples, seed, str(theta)):
        surv = ud1_at(mech, u) if notion == Notion.UD else udinf_at(mech, u)[0]
        z = _single_point(mech, surv)
        if z is None or (seen is not None and z != seen):
            return StateOutcome("ref")
        seen = z
    return StateOutcome("inc", seen)


# --------------------------------------------------------------------------
# reports and checkpoints


@dataclass
class SearchReport:
    spaces: list[dict] = field(default_factory=list)
    mechanisms_tested: int = 0
    scfs_tested: int = 0
    implementations: int = 0
    dictatorial: int = 0
    unresolved: int = 0
    inconclusive_states: int = 0
    counterexamples: list[dict] = field(default_factory=list)
    wall_clock: float = 0.0
    cursor: int = 0
    start: int = 0
    stop: int = 0

    TALLIES = ("mechanisms_tested", "scfs_tested", "implementations", "dictatorial",
               "unresolved", "inconclusive_states")

    def to_dict(self, with_timing: bool = True) -> dict:
        d = dataclasses.asdict(self)
        if not with_timing:
            d.pop("wall_clock")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchReport":
        return cls(**d)

    def summary(self) -> str:
        rows = [("mechanisms tested", self.mechanisms_tested),
                ("choice functions tested", self.scfs_tested),
                ("certified implementations", self.implementations),
                ("  of which dictatorial", self.dictatorial),
                ("counterexamples", len(self.counterexamples)),
                ("unresolved", self.unresolved),
                ("inconclusive state verdicts", self.inconclusive_states),
                ("cursor range", f"[{self.start}, {self.stop}) reached {self.cursor}"),
                ("wall clock (s)", f"{self.wall_clock:.2f}")]
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def merge_reports(a: SearchReport, b: SearchReport) -> SearchReport:
    """Associative, commutative union of two shard reports."""
    out = SearchReport()
    out.spaces = [json.loads(s) for s in sorted({json.dumps(x, sort_keys=True) for x in a.spaces + b.spaces})]
    for k in SearchReport.TALLIES:
        setattr(out, k, getattr(a, k) + getattr(b, k))
    seen = {}
    for c in a.counterexamples + b.counterexamples:
        seen[(c["space"], c["cursor"])] = c
    out.counterexamples = [seen[k] for k in sorted(seen)]
    out.wall_clock = a.wall_clock + b.wall_clock
    out.start = min(a.start, b.start)
    out.stop = max(a.stop, b.stop)
    out.cursor = max(a.cursor, b.cursor)
    return out


def shard_range(space: SearchSpace, k: int, n: int) -> tuple[int, int]:
    if not (n >= 1 and 0 <= k < n):
        raise ValidationError("shard must be k/n with 0 <= k < n")
    return k * space.size // n, (k + 1) * space.size // n


def save_checkpoint(path: str | Path, space: SearchSpace, report: SearchReport) -> None:
    data = {"space": space.descriptor(), "space_hash": space.digest(), "report": report.to_dict()}
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def load_checkpoint(path: str | Path, space: SearchSpace) -> SearchReport:
    data = json.loads(Path(path).read_text())
    if data.get("space_hash") != space.digest():
        raise ValidationError("checkpoint belongs to a different space")
    return SearchReport.from_dict(data["report"])


# --------------------------------------------------------------------------
# mining


def _states_for(space: SearchSpace) -> tuple[list[OrdinalState], int]:
    """Domain states in evaluation order and how many of them are mandatory."""
    tag = space.domain.tag
    if tag is DomainTag.SANDWICH:
        una = unanimity_strict_states(space.agents, space.outcomes)
        return strict_states(space.agents, space.outcomes), len(una)
    states = domain_states(space.domain, space.agents, space.outcomes)
    una = [t for t in states if t.is_unanimous]
    rest = [t for t in states if not t.is_unanimous]
    return una + rest, len(states)


def _classify(space, states, n_required, outcomes_at) -> dict | None:
    """Decide one mechanism from its per-state outcomes.

    Returns None when a mandatory state is refuted. Otherwise a dict with
    ``certified`` (every mandatory state certified), ``dictatorial``, ``hit``
    and ``unresolved`` flags plus the domain and choice of the hit.
    """
    if any(outcomes_at[t].kind == "ref" for t in states[:n_required]):
        return None
    flags = dict(surjective=space.require_surjective, nondictatorial=space.require_nondictatorial,
                 unanimity=space.require_unanimity_respecting)
    cert = [t for t in states if outcomes_at[t].kind == "cert"]
    out = {"certified": False, "dictatorial": False, "hit": False, "unresolved": False,
           "domain": None, "choice": None}
    if all(outcomes_at[t].kind == "cert" for t in states[:n_required]):
        out["certified"] = True
        choice = {t: outcomes_at[t].outcome for t in cert}
        if _qualifies(cert, choice, space.outcomes, **flags):
            out.update(hit=True, domain=cert, choice=choice)
            return out
        out["dictatorial"] = (set(choice.values()) == set(space.outcomes)
                              and bool(_dictators(cert, choice)))
    wide = [t for t in states if outcomes_at[t].kind in ("cert", "inc")]
    if len(wide) > len(cert):
        choice = {t: outcomes_at[t].outcome for t in wide}
        out["unresolved"] = _qualifies(wide, choice, space.outcomes, **flags)
    return out


def _record_hit(space, cursor, mech, domain, choice) -> dict:
    kind = DomainKind(DomainTag.CUSTOM, tuple(domain))
    problem = build_problem(kind, space.agents, space.outcomes, choice)
    if space.notion == Notion.UD:
        report = verify_ud(mech, problem, seed=space.seed)
    else:
        report = verify_udinf(mech, problem, seed=space.seed, gap_diagnostics=False)
    if report.status is not Status.VERIFIED:
        raise AssertionError(f"mined implementation at cursor {cursor} failed re-verification")
    return {"space": space.digest(), "cursor": cursor, "mechanism": mechanism_to_dict(mech),
            "scf": {str(t): choice[t] for t in domain},
            "verification": report_to_dict(report, space.outcomes)}


def _subset(batch: _Batch, keep: np.ndarray) -> _Batch:
    sub = _Batch.__new__(_Batch)
    sub.space, sub.n = batch.space, batch.n
    sub.masses, sub.degen = batch.masses[keep], batch.degen[keep]
    sub._gt = {k: v[keep] for k, v in batch._gt.items()}
    sub._ge = {k: v[keep] for k, v in batch._ge.items()}
    return sub


def _mine_block(space, states, n_required, lo, hi, report: SearchReport) -> None:
    masses = batch_masses(space, lo, hi)
    batch = _Batch(space, masses)
    live = np.arange(hi - lo)
    cert_all = np.full((len(states), hi - lo), CERT_NONE, dtype=np.int64)
    pending = np.zeros((len(states), hi - lo), dtype=bool)
    for k, theta in enumerate(states):
        if len(live) == 0:
            return
        cert, refuted = batch_state_verdicts(batch, theta, space.notion)
        cert_all[k, live] = cert
        pending[k, live] = (cert < 0) & ~refuted
        if k < n_required:
            keep = ~((cert < 0) & refuted)
            if not keep.all():
                batch = _subset(batch, keep)
                live = live[keep]
    for b in live:
        cursor = lo + int(b)
        mech = None
        outcomes_at = {}
        for k, theta in enumerate(states):
            c = cert_all[k, b]
            if c >= 0:
                outcomes_at[theta] = StateOutcome("cert", space.outcomes[c])
            elif pending[k, b]:
                mech = mech or _mechanism_from_masses(space, masses[b])
                res = state_outcome(mech, theta, space.notion, space.samples, space.seed)
                outcomes_at[theta] = res
                if res.kind == "inc":
                    report.inconclusive_states += 1
                if res.kind == "ref" and k < n_required:
                    break
            else:
                outcomes_at[theta] = StateOutcome("ref")
        else:
            verdict = _classify(space, states, n_required, outcomes_at)
            if verdict is None:
                continue
            report.scfs_tested += 1
            report.implementations += verdict["certified"]
            report.dictatorial += verdict["dictatorial"]
            report.unresolved += verdict["unresolved"]
            if verdict["hit"]:
                mech = mech or _mechanism_from_masses(space, masses[b])
                report.counterexamples.append(
                    _record_hit(space, cursor, mech, verdict["domain"], verdict["choice"]))


def mine(space: SearchSpace, start: int = 0, stop: int | None = None, *,
         batch: int = 8192, checkpoint: str | Path | None = None,
         resume: SearchReport | None = None, checkpoint_every: int = 16,
         max_hits: int | None = None) -> SearchReport:
    """Scan cursors ``[start, stop)``; optionally continue a previous partial report.

    With ``max_hits`` the scan stops after the block where that many
    counterexamples have accumulated; ``cursor`` then marks where it stopped.
    """
    stop = space.size if stop is None else min(stop, space.size)
    states, n_required = _states_for(space)
    if resume is not None:
        report = resume
        start = report.cursor
    else:
        report = SearchReport(spaces=[space.descriptor()], start=start, stop=stop, cursor=start)
    t0 = time.perf_counter()
    blocks = 0
    for lo in range(start, stop, batch):
        hi = min(lo + batch, stop)
        _mine_block(space, states, n_required, lo, hi, report)
        report.mechanisms_tested += hi - lo
        report.cursor = hi
        blocks += 1
        if checkpoint is not None and blocks % checkpoint_every == 0:
            report.wall_clock += time.perf_counter() - t0
            t0 = time.perf_counter()
            save_checkpoint(checkpoint, space, report)
        if max_hits is not None and len(report.counterexamples) >= max_hits:
            break
    report.wall_clock += time.perf_counter() - t0
    if checkpoint is not None:
        save_checkpoint(checkpoint, space, report)
    return report
