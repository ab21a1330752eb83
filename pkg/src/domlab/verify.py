"""Deciding UD- and UD-infinity-implementation, plus lemma diagnostics.

Ordinal problems (every representation admitted) are decided as follows.

*UD*, exactly: an agent's first-round survivors depend on her own utility
only, so the union over representations of ``UD(M, u)`` is the product of
per-agent :func:`~domlab.dominance.possibly_undominated` sets. A bad profile
in that product comes with per-agent LP witnesses that assemble into one
refuting cardinal state.

*UD-infinity*, soundly: robust deletion yields a superset of every
``UD^inf(M, u)``. A superset mapping onto the target certifies the state.
Otherwise seeded representations are tried; a refuting one is reported, and
if none turns up the verdict is inconclusive.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .core import (
    CardinalState,
    DeletionTrace,
    ImplementationProblem,
    Mechanism,
    OmegaMode,
    OrdinalState,
    Restriction,
    SCF,
    Status,
    Verdict,
    Witness,
)
from .dominance import (
    possibly_undominated_witnesses,
    robust_deletion_gap,
    robust_udinf,
    ud1_at,
    udinf_at,
)
from .domains import canonical_cardinal, sample_cardinal
from .errors import EmptyWitness, Timeout, ValidationError, WrongArity

DEFAULT_SAMPLES = 200
DEFAULT_SEED = 20240601


# --------------------------------------------------------------------------
# S_i^z and the lemma checks


def s_z_sets(mech: Mechanism) -> dict[tuple[str, str], tuple[str, ...]]:
    """``(agent, z) -> strategies of agent that can force the degenerate lottery z``."""
    found: dict[tuple[str, str], set[str]] = {
        (a, z): set() for a in mech.agents for z in mech.outcomes}
    for prof, lot in mech.items():
        z = lot.outcome
        if z is None:
            continue
        for a, s in zip(mech.agents, prof):
            found[(a, z)].add(s)
    return {key: tuple(s for s in mech.strategy_set(key[0]) if s in v)
            for key, v in found.items()}


def is_surjective(scf: SCF, outcomes: Sequence[str]) -> bool:
    return scf.range() == frozenset(outcomes)


def is_dictator(problem: ImplementationProblem, agent: str) -> bool:
    """``f(theta)`` is the agent's unique top at every state of the domain."""
    for theta in problem.theta_set:
        pref = theta[agent]
        if pref.top != frozenset({problem.scf(theta)}):
            return False
    return True


def dictators(problem: ImplementationProblem) -> list[str]:
    return [a for a in problem.agents if is_dictator(problem, a)]


def _require_surjective(mech: Mechanism, problem: ImplementationProblem) -> None:
    if not is_surjective(problem.scf, mech.outcomes):
        raise ValidationError("the lemma assumes a surjective choice function")


def check_lemma1(mech: Mechanism, problem: ImplementationProblem) -> dict[str, bool]:
    """Per outcome: does ``g`` map the product of the ``S_i^z`` onto exactly ``{z}``?"""
    _require_surjective(mech, problem)
    sz = s_z_sets(mech)
    out = {}
    for z in mech.outcomes:
        sets = [sz[(a, z)] for a in mech.agents]
        if any(not s for s in sets):
            empty = [a for a, s in zip(mech.agents, sets) if not s]
            raise EmptyWitness(f"S_i^{z} is empty for {empty}")
        out[z] = all(mech.g(p).is_point(z) for p in itertools.product(*sets))
    return out


def check_lemma3(mech: Mechanism) -> dict[str, bool]:
    """Same product test as :func:`check_lemma1` without the surjectivity
    precondition; outcomes with an empty ``S_i^z`` report False."""
    sz = s_z_sets(mech)
    out = {}
    for z in mech.outcomes:
        sets = [sz[(a, z)] for a in mech.agents]
        out[z] = all(sets) and all(mech.g(p).is_point(z) for p in itertools.product(*sets))
    return out


def check_lemma2(mech: Mechanism) -> list[tuple[str, str, str]]:
    """Triples ``(i, z, z')`` with ``S_i^z`` inside ``S_i^z'`` but not both equal to ``S_i``."""
    sz = s_z_sets(mech)
    bad = []
    for a in mech.agents:
        full = set(mech.strategy_set(a))
        for z, z2 in itertools.permutations(mech.outcomes, 2):
            x, y = set(sz[(a, z)]), set(sz[(a, z2)])
            if x <= y and not (x == y == full):
                bad.append((a, z, z2))
    return bad


def check_lemma4(mech: Mechanism, problem: ImplementationProblem, agent: str) -> bool:
    """Two outcomes only: is the intersection of ``S_i^z`` over ``z`` nonempty?"""
    if len(mech.outcomes) != 2:
        raise WrongArity("the check applies to exactly two outcomes")
    _require_surjective(mech, problem)
    sz = s_z_sets(mech)
    common = set(mech.strategy_set(agent))
    for z in mech.outcomes:
        common &= set(sz[(agent, z)])
    return bool(common)


# --------------------------------------------------------------------------
# reports


@dataclass
class StateResult:
    state: OrdinalState
    target: str
    verdict: Verdict
    survivors: Restriction | None = None
    traces: list[DeletionTrace] = field(default_factory=list)
    samples_tried: int = 0


@dataclass
class VerificationReport:
    notion: str
    mode: OmegaMode
    states: list[StateResult]
    diagnostics: dict = field(default_factory=dict)

    @property
    def status(self) -> Status:
        kinds = {r.verdict.status for r in self.states}
        if Status.REFUTED in kinds:
            return Status.REFUTED
        if kinds <= {Status.VERIFIED}:
            return Status.VERIFIED
        return Status.INCONCLUSIVE

    def result(self, theta: OrdinalState) -> StateResult:
        for r in self.states:
            if r.state == theta:
                return r
        raise KeyError(str(theta))

    @property
    def witnesses(self) -> list[Witness]:
        return [r.verdict.witness for r in self.states if r.verdict.witness is not None]


def derive_seed(root: int, *parts: object) -> int:
    digest = hashlib.sha256(":".join(map(str, (root,) + parts)).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def representations(theta: OrdinalState, samples: int, seed: int, salt: object = "") -> Iterator[CardinalState]:
    """The canonical representation followed by ``samples - 1`` seeded ones (lazily)."""
    if samples >= 1:
        yield canonical_cardinal(theta)
    for k in range(1, samples):
        yield sample_cardinal(theta, derive_seed(seed, salt, k))


def _bad_profile(mech: Mechanism, survivors: Restriction, target: str):
    """The surviving profile whose lottery puts least mass on the target
    (first in profile order on ties), or None when every survivor yields it."""
    best = None
    for prof in survivors.profiles():
        lot = mech.g(prof)
        if not lot.is_point(target):
            if best is None or lot.prob(target) < best[1].prob(target):
                best = (prof, lot)
    return best


def _normalised(u_i: Mapping[str, object]) -> dict:
    lo, hi = min(u_i.values()), max(u_i.values())
    if hi == lo:
        return {z: v - lo for z, v in u_i.items()}
    return {z: (v - lo) / (hi - lo) for z, v in u_i.items()}


def replay_witness(mech: Mechanism, witness: Witness, target: str, notion: str) -> bool:
    """Recompute survivors at the witness utilities and confirm the bad profile survives."""
    if not witness.cardinal.represents(witness.state):
        return False
    if notion == "UD":
        survivors = ud1_at(mech, witness.cardinal)
    else:
        survivors = udinf_at(mech, witness.cardinal)[0]
    in_set = all(s in survivors.sets[k] for k, s in enumerate(witness.profile))
    lot = mech.g(witness.profile)
    return in_set and lot == witness.lottery and not lot.is_point(target)


def _refuted(mech, theta, u, prof, lot, target, notion, note="") -> Verdict:
    w = Witness(theta, u, tuple(prof), lot)
    if not replay_witness(mech, w, target, notion):
        raise AssertionError(f"witness failed replay at {theta}")
    return Verdict(Status.REFUTED, w, note)


def _explicit_state(mech, theta, target, reps, notion) -> StateResult:
    traces = []
    for u in reps:
        if notion == "UD":
            survivors = ud1_at(mech, u)
        else:
            survivors, trace = udinf_at(mech, u)
            traces.append(trace)
        bad = _bad_profile(mech, survivors, target)
        if bad is not None:
            return StateResult(theta, target,
                               _refuted(mech, theta, u, *bad, target, notion), survivors, traces)
    return StateResult(theta, target, Verdict(Status.VERIFIED), None, traces)


def _sample_refutation(mech, theta, target, notion, samples, seed, salt):
    """Search seeded representations for a refutation; also return how many were tried."""
    for k, u in enumerate(representations(theta, samples, seed, salt), start=1):
        survivors = ud1_at(mech, u) if notion == "UD" else udinf_at(mech, u)[0]
        bad = _bad_profile(mech, survivors, target)
        if bad is not None:
            return (u, *bad), k
    return None, samples


def _ud_state_all(mech, theta, target, cache, samples, seed, salt) -> StateResult:
    witnesses = {}
    try:
        for a in mech.agents:
            key = (a, theta[a])
            if key not in cache:
                cache[key] = possibly_undominated_witnesses(mech, Restriction.full(mech), a, theta[a])
            witnesses[a] = cache[key]
    except Timeout as exc:
        found, tried = _sample_refutation(mech, theta, target, "UD", samples, seed, salt)
        if found is not None:
            return StateResult(theta, target, _refuted(mech, theta, *found, target, "UD",
                                                       note="sampling fallback"), samples_tried=tried)
        return StateResult(theta, target, Verdict(Status.INCONCLUSIVE, note=f"{exc}; sampling found no refutation"),
                           samples_tried=tried)
    possible = Restriction(mech.agents, tuple(tuple(witnesses[a]) for a in mech.agents))
    bad = _bad_profile(mech, possible, target)
    if bad is None:
        return StateResult(theta, target, Verdict(Status.VERIFIED), possible)
    prof, lot = bad
    u = CardinalState.of({a: _normalised(witnesses[a][s]) for a, s in zip(mech.agents, prof)})
    return StateResult(theta, target, _refuted(mech, theta, u, prof, lot, target, "UD"), possible)


def _udinf_state_all(mech, theta, target, samples, seed, salt) -> StateResult:
    survivors, trace = robust_udinf(mech, theta)
    if _bad_profile(mech, survivors, target) is None:
        return StateResult(theta, target, Verdict(Status.VERIFIED), survivors, [trace])
    found, tried = _sample_refutation(mech, theta, target, "UDINF", samples, seed, salt)
    if found is not None:
        return StateResult(theta, target, _refuted(mech, theta, *found, target, "UDINF"),
                           survivors, [trace], tried)
    return StateResult(theta, target, Verdict(
        Status.INCONCLUSIVE,
        note=f"robust superset maps outside the target; {tried} representations found no refutation"),
        survivors, [trace], tried)


def _check_problem(mech: Mechanism, problem: ImplementationProblem) -> None:
    if problem.agents != mech.agents:
        raise ValidationError("problem and mechanism list different agents")
    if problem.outcomes != frozenset(mech.outcomes):
        raise ValidationError("problem and mechanism use different outcome spaces")


def _diagnostics(mech, problem, report, notion):
    diag = {}
    if report.status is Status.VERIFIED:
        diag["lemma3_products"] = check_lemma3(mech)
        diag["dictators"] = dictators(problem)
        diag["surjective"] = is_surjective(problem.scf, mech.outcomes)
        una_and_strict = all(t.is_strict for t in problem.theta_set)
        diag["qualifying_domain"] = una_and_strict and _contains_unanimity(problem)
    diag["lemma2_violations"] = check_lemma2(mech)
    return diag


def _contains_unanimity(problem: ImplementationProblem) -> bool:
    from .domains import unanimity_strict_states

    have = set(problem.theta_set)
    return all(t in have for t in unanimity_strict_states(problem.agents, sorted(problem.outcomes)))


def verify_ud(mech: Mechanism, problem: ImplementationProblem, *,
              samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
              force_all: bool = False) -> VerificationReport:
    """Is ``g[UD(M, u)] = {f(theta)}`` for every admitted ``u`` of every state?"""
    _check_problem(mech, problem)
    mode = OmegaMode.ALL if force_all else problem.mode
    cache: dict = {}
    results = []
    for k, theta in enumerate(problem.theta_set):
        target = problem.scf(theta)
        if mode is OmegaMode.EXPLICIT:
            results.append(_explicit_state(mech, theta, target, problem.omega[theta], "UD"))
        else:
            results.append(_ud_state_all(mech, theta, target, cache, samples, seed, k))
    report = VerificationReport("UD", mode, results)
    report.diagnostics = _diagnostics(mech, problem, report, "UD")
    if (report.status is Status.VERIFIED and mode is OmegaMode.ALL
            and report.diagnostics["surjective"] and report.diagnostics["qualifying_domain"]
            and not report.diagnostics["dictators"]):
        raise AssertionError("certified a non-dictatorial UD implementation on a qualifying problem")
    return report


def verify_udinf(mech: Mechanism, problem: ImplementationProblem, *,
                 samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                 force_all: bool = False, gap_diagnostics: bool = True) -> VerificationReport:
    """Is ``g[UD^inf(M, u)] = {f(theta)}`` for every admitted ``u`` of every state?"""
    _check_problem(mech, problem)
    mode = OmegaMode.ALL if force_all else problem.mode
    results = []
    for k, theta in enumerate(problem.theta_set):
        target = problem.scf(theta)
        if mode is OmegaMode.EXPLICIT:
            results.append(_explicit_state(mech, theta, target, problem.omega[theta], "UDINF"))
        else:
            results.append(_udinf_state_all(mech, theta, target, samples, seed, k))
    report = VerificationReport("UDINF", mode, results)
    report.diagnostics = _diagnostics(mech, problem, report, "UDINF")
    if gap_diagnostics and mode is OmegaMode.ALL:
        gaps = {}
        full = Restriction.full(mech)
        for theta in problem.theta_set:
            try:
                gaps[str(theta)] = {a: robust_deletion_gap(mech, full, a, theta[a]) for a in mech.agents}
            except Timeout:
                gaps[str(theta)] = None
        report.diagnostics["first_round_gap"] = gaps
    return report


def verify(mech: Mechanism, problem: ImplementationProblem, notion: str, **kw) -> VerificationReport:
    notion = notion.upper()
    if notion == "UD":
        return verify_ud(mech, problem, **kw)
    if notion in ("UDINF", "UD_INF", "UDINFTY"):
        return verify_udinf(mech, problem, **kw)
    raise ValidationError(f"unknown notion {notion!r}")
