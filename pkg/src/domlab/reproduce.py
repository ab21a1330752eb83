"""Regenerate the deletion tables of the three-outcome and star constructions,
and check the dominance steps of the truncated announcement mechanism.

Expected tables are embedded as data and guarded by a checksum so that an
accidental edit is caught before any comparison runs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constructions import (
    StarLabels,
    base_state,
    hat_problem,
    n_threshold,
    parse_truncated_label,
    sigma,
    star_problem,
    tops,
    truncated_infinite_mechanism,
    truncated_label,
    TruncationParams,
)
from .core import OrdinalState, Status
from .dominance import payoff_matrix, robust_udinf, ud1_at
from .domains import unanimity_strict_states
from .errors import ValidationError
from .formats import fmt_set, render_grid, render_trace_table
from .verify import DEFAULT_SEED, representations, verify_udinf

# Three-outcome table: state -> [[round-1 sets per agent], [round-2 sets per agent]].
LEMMA5_GOLDEN = {
    "i1:b>a>c;i2:c>a>b": [["a,b", "a,c"], ["a", "a"]],
    "i1:a>b>c;i2:a>b>c": [["a", "a,b"], ["a", "a"]],
    "i1:a>c>b;i2:a>c>b": [["a,c", "a"], ["a", "a"]],
    "i1:b>a>c;i2:b>a>c": [["a,b", "b"], ["b", "b"]],
    "i1:b>c>a;i2:b>c>a": [["b,c", "b"], ["b", "b"]],
    "i1:c>a>b;i2:c>a>b": [["c", "a,c"], ["c", "c"]],
    "i1:c>b>a;i2:c>b>a": [["c", "b,c"], ["c", "c"]],
}
LEMMA5_CHECKSUM = "2f3acdb93c29f857"

# Star table: group -> upper bounds per round ([i1, i2] per round); "Z" is the
# whole outcome set and "z" the shared top of the state.
THEOREM4_GOLDEN = {
    "base": [["a,b", "a,c"], ["a", "a"]],
    "a>b>c": [["a", "Z"], ["a", "a"]],
    "a>c>b": [["Z", "a"], ["a", "a"]],
    "b top": [["Z", "b"], ["b", "b"]],
    "c top": [["c", "Z"], ["c", "c"]],
    "z>b>c": [["Z", "a,z"], ["a,z", "a,z"], ["z", "z"]],
    "z>c>b": [["a,z", "Z"], ["a,z", "a,z"], ["z", "z"]],
}
THEOREM4_CHECKSUM = "9bdd4b61584d1ddc"


def golden_checksum(table: dict) -> str:
    return hashlib.sha256(json.dumps(table, sort_keys=True).encode()).hexdigest()[:16]


def _check_golden(table: dict, expected: str, name: str) -> None:
    got = golden_checksum(table)
    if got != expected:
        raise AssertionError(f"embedded {name} table is corrupted (checksum {got})")


@dataclass
class ReproResult:
    name: str
    passed: bool
    table: str
    diffs: list[str] = field(default_factory=list)

    def render(self) -> str:
        out = self.table
        for d in self.diffs:
            out += f"MISMATCH {d}\n"
        return out + f"{self.name}: {'PASS' if self.passed else 'FAIL'}\n"


def _label(theta: OrdinalState, base: OrdinalState) -> str:
    if theta == base:
        return "base " + str(theta)
    return "[" + ">".join(theta.prefs[0][1].ranking()) + "]"


# --------------------------------------------------------------------------
# three outcomes


def reproduce_lemma5() -> ReproResult:
    _check_golden(LEMMA5_GOLDEN, LEMMA5_CHECKSUM, "three-outcome")
    mech, problem = hat_problem()
    base = problem.theta_set[-1]
    order = [base] + list(problem.theta_set[:-1])
    columns, diffs = [], []
    for theta in order:
        _, trace = robust_udinf(mech, theta)
        columns.append((_label(theta, base), trace))
        want = LEMMA5_GOLDEN[str(theta)]
        for k, row in enumerate(want, start=1):
            got = trace.survivors_after(k)
            for a, w in zip(mech.agents, row):
                if set(got[a]) != set(w.split(",")):
                    diffs.append(f"{theta} round {k} {a}: got {fmt_set(got[a])}, expected {{{w}}}")
        if len(trace.rounds) != len(want) + 1:
            diffs.append(f"{theta}: fixed point after {len(trace.rounds) - 1} rounds, expected {len(want)}")
    table = render_trace_table(columns, mech.agents)
    return ReproResult("lemma5", not diffs, table, diffs)


# --------------------------------------------------------------------------
# four or more outcomes


def theorem4_group(theta: OrdinalState, base: OrdinalState, labels: StarLabels) -> tuple[str, str]:
    """``(group, z)`` where ``z`` is the shared top (used to instantiate bounds)."""
    if theta == base:
        return "base", labels.a
    ranking = theta.prefs[0][1].ranking()
    t = ranking[0]
    b_before_c = ranking.index(labels.b) < ranking.index(labels.c)
    if t == labels.a:
        return ("a>b>c" if b_before_c else "a>c>b"), t
    if t == labels.b:
        return "b top", t
    if t == labels.c:
        return "c top", t
    return ("z>b>c" if b_before_c else "z>c>b"), t


def _bound(spec: str, z: str, outcomes: Sequence[str]) -> set[str]:
    if spec == "Z":
        return set(outcomes)
    return {z if x == "z" else x for x in spec.split(",")}


def reproduce_theorem4(n_outcomes: int, seed: int = DEFAULT_SEED) -> ReproResult:
    _check_golden(THEOREM4_GOLDEN, THEOREM4_CHECKSUM, "star")
    if n_outcomes < 4:
        raise ValidationError("the star table needs at least four outcomes")
    outcomes = tuple("abcdefghijklmnopqrstuvwxyz"[:n_outcomes])
    labels = StarLabels(*outcomes[:3])
    mech, problem = star_problem(outcomes)
    base = base_state(outcomes, labels)
    diffs, rows = [], []
    for theta in problem.theta_set:
        group, z = theorem4_group(theta, base, labels)
        survivors, trace = robust_udinf(mech, theta)
        bounds = THEOREM4_GOLDEN[group]
        cells = []
        for k in range(1, 4):
            got = trace.survivors_after(k)
            cells.append(" ".join(fmt_set(got[a]) for a in mech.agents))
            if k <= len(bounds):
                for a, spec in zip(mech.agents, bounds[k - 1]):
                    if not set(got[a]) <= _bound(spec, z, outcomes):
                        diffs.append(f"{theta} round {k} {a}: {fmt_set(got[a])} not within {{{spec}}}")
        target = problem.scf(theta)
        third = trace.survivors_after(3)
        if any(set(third[a]) != {target} for a in mech.agents):
            diffs.append(f"{theta}: third-round survivors are not {{{target}}}")
        rows.append([str(theta), group] + cells + [target])
    report = verify_udinf(mech, problem, seed=seed, gap_diagnostics=False)
    if report.status is not Status.VERIFIED:
        diffs.append(f"verification returned {report.status.value}")
    table = render_grid(["state", "group", "UD^1", "UD^2", "UD^3", "f"], rows)
    return ReproResult(f"theorem4:{n_outcomes}", not diffs, table, diffs)


# --------------------------------------------------------------------------
# truncated announcement mechanism


@dataclass
class TruncationCheck:
    state: OrdinalState
    representations: int = 0
    step_failures: int = 0
    threshold_failures: int = 0
    threshold_skipped: int = 0
    projection_failures: int = 0
    first_failure: str = ""

    @property
    def passed(self) -> bool:
        return not (self.step_failures or self.threshold_failures or self.projection_failures)

    def note(self, msg: str) -> None:
        if not self.first_failure:
            self.first_failure = msg


def truncation_setup(n_cap: int):
    labels = StarLabels("a", "b", "c")
    outcomes = ("a", "b", "c")
    base = base_state(outcomes, labels)
    mech = truncated_infinite_mechanism(base, "a", outcomes, None, TruncationParams(n_cap))
    states = [base] + unanimity_strict_states(base.agents, outcomes)
    return mech, base, states


def _dominates(pay: np.ndarray, row: dict, better: str, worse: str) -> bool:
    return bool((pay[row[better]] > pay[row[worse]]).all())


def check_truncation_state(mech, base: OrdinalState, theta: OrdinalState, n_cap: int,
                           reps, target: str = "a") -> TruncationCheck:
    out = TruncationCheck(theta)
    outcomes = mech.outcomes
    tau = tops(theta)
    for u in reps:
        out.representations += 1
        survivors = ud1_at(mech, u)
        for agent in mech.agents:
            pref = theta[agent]
            top = tau[agent]
            allowed = ({tops(base)[agent]} if theta == base
                       else set(sigma(agent, top, base, target)))
            pay = payoff_matrix(mech, agent, u[agent])
            row = {s: k for k, s in enumerate(mech.strategy_set(agent))}
            for z in outcomes:
                for n in range(2, n_cap):
                    better = truncated_label(z, n + 1, top)
                    for zh in outcomes:
                        if not _dominates(pay, row, better, truncated_label(z, n, zh)):
                            out.step_failures += 1
                            out.note(f"{agent} at {u}: {better} fails to beat {truncated_label(z, n, zh)}")
            n_star = n_threshold(u[agent], pref)
            if n_star > n_cap:
                out.threshold_skipped += 1
            else:
                for z in outcomes:
                    if z in allowed:
                        continue
                    better = truncated_label(z, n_star, top)
                    for zh in outcomes:
                        if not _dominates(pay, row, better, truncated_label(z, 1, zh)):
                            out.threshold_failures += 1
                            out.note(f"{agent} at {u}: {better} fails to beat {truncated_label(z, 1, zh)}")
            kept = set()
            for s in survivors[agent]:
                z, n, zh = parse_truncated_label(s)
                if n < n_cap:
                    kept.add((z, n, zh))
            want = {(z, 1, zh) for z in allowed for zh in outcomes}
            if n_star <= n_cap and kept != want:
                out.projection_failures += 1
                extra = sorted(truncated_label(*s) for s in kept - want)
                out.note(f"{agent} at {u}: unexpected survivors {extra[:6]}")
    return out


def reproduce_theorem5(n_cap: int, samples: int = 0, seed: int = DEFAULT_SEED) -> ReproResult:
    """Canonical representation plus ``samples`` seeded ones at every state."""
    mech, base, states = truncation_setup(n_cap)
    rows, diffs = [], []
    for k, theta in enumerate(states):
        reps = representations(theta, samples + 1, seed, f"trunc{k}")
        res = check_truncation_state(mech, base, theta, n_cap, reps)
        rows.append([str(theta), str(res.representations), str(res.step_failures),
                     str(res.threshold_failures), str(res.threshold_skipped),
                     str(res.projection_failures)])
        if not res.passed:
            diffs.append(f"{theta}: {res.first_failure}")
    table = render_grid(["state", "reps", "step fails", "threshold fails", "threshold > N",
                         "projection fails"], rows)
    return ReproResult(f"theorem5:{n_cap}", not diffs, table, diffs)


def reproduce(target: str, samples: int = 0, seed: int = DEFAULT_SEED) -> ReproResult:
    name, _, arg = target.partition(":")
    try:
        if name == "lemma5" and not arg:
            return reproduce_lemma5()
        if name == "theorem4":
            return reproduce_theorem4(int(arg), seed)
        if name == "theorem5":
            return reproduce_theorem5(int(arg), samples, seed)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad reproduction target {target!r}") from None
    raise ValidationError(f"unknown reproduction target {target!r}")
