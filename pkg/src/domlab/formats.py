"""JSON file formats and plain-text tables.

Rationals always travel as ``"p/q"`` strings. Every ``dump_*`` emits a
canonical form (fixed key order, cells in profile order, zero masses
dropped), so parse followed by dump is a fixed point.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Mapping, Sequence

from .core import (
    CardinalState,
    DeletionTrace,
    ImplementationProblem,
    Lottery,
    Mechanism,
    OmegaMode,
    OrdinalState,
    Restriction,
    Witness,
    format_rational,
    make_lottery,
    parse_rational,
)
from .domains import DomainKind, DomainTag, build_problem
from .errors import ParseError, ValidationError

# --------------------------------------------------------------------------
# helpers


def _locate(text: str, needle: str) -> tuple[int | None, int | None]:
    pos = text.find(needle)
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _rational(text: str, raw: Any) -> Fraction:
    if not isinstance(raw, str):
        line, col = _locate(text, json.dumps(raw))
        raise ParseError(f"expected a \"p/q\" string, got {raw!r}", line, col)
    try:
        return parse_rational(raw)
    except (ValueError, ZeroDivisionError):
        line, col = _locate(text, json.dumps(raw))
        raise ParseError(f"bad rational {raw!r}", line, col) from None


def _state(text: str, raw: str) -> OrdinalState:
    try:
        return OrdinalState.parse(raw)
    except ParseError as exc:
        line, col = _locate(text, raw)
        if line is not None and exc.column is not None:
            col = col + exc.column - 1
        raise ParseError(exc.message, line, col) from None


def _need(obj: Mapping, key: str, kind: type, what: str):
    if not isinstance(obj, Mapping) or key not in obj:
        raise ValidationError(f"{what}: missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind):
        raise ValidationError(f"{what}: field {key!r} has the wrong type")
    return val


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------
# lotteries and mechanisms


def lottery_to_dict(lot: Lottery, outcomes: Sequence[str]) -> dict[str, str]:
    return {z: format_rational(lot.prob(z)) for z in outcomes if lot.prob(z) != 0}


def mechanism_to_dict(mech: Mechanism) -> dict:
    for labels in mech.strategies:
        for s in labels:
            if "," in s:
                raise ValidationError(f"strategy label {s!r} contains a comma")
    return {
        "agents": list(mech.agents),
        "outcomes": list(mech.outcomes),
        "strategies": {a: list(ss) for a, ss in zip(mech.agents, mech.strategies)},
        "cells": {",".join(p): lottery_to_dict(lot, mech.outcomes) for p, lot in mech.items()},
    }


def dump_mechanism(mech: Mechanism) -> str:
    return dumps(mechanism_to_dict(mech))


def mechanism_from_dict(data: Mapping, text: str = "") -> Mechanism:
    agents = _need(data, "agents", list, "mechanism")
    outcomes = _need(data, "outcomes", list, "mechanism")
    strategies = _need(data, "strategies", dict, "mechanism")
    cells = _need(data, "cells", dict, "mechanism")
    missing = [a for a in agents if a not in strategies]
    if missing:
        raise ValidationError(f"no strategy list for {missing}")
    table = {}
    for key, raw in cells.items():
        prof = tuple(key.split(","))
        if not isinstance(raw, Mapping):
            raise ValidationError(f"cell {key!r} is not a lottery map")
        pairs = [(z, _rational(text, p)) for z, p in raw.items()]
        table[prof] = make_lottery(pairs, outcomes)
    return Mechanism(agents, outcomes, [strategies[a] for a in agents], table)


def load_mechanism(text: str) -> Mechanism:
    return mechanism_from_dict(_load_json(text), text)


# --------------------------------------------------------------------------
# cardinal states


def cardinal_to_dict(u: CardinalState, outcomes: Sequence[str]) -> dict:
    return {a: {z: format_rational(u[a][z]) for z in outcomes} for a in u.agents}


def cardinal_from_dict(data: Mapping, text: str = "") -> CardinalState:
    if not isinstance(data, Mapping):
        raise ValidationError("a cardinal state is a map agent -> utilities")
    return CardinalState.of({a: {z: _rational(text, v) for z, v in row.items()}
                             for a, row in data.items()})


def parse_cardinal(text: str) -> CardinalState:
    """Inline syntax ``i1:a=1,b=1/2,c=0;i2:...``."""
    utils: dict[str, dict[str, Fraction]] = {}
    offset = 0
    for chunk in text.split(";"):
        agent, sep, body = chunk.partition(":")
        if not sep or not agent.strip():
            raise ParseError("expected agent:utilities", 1, offset + 1)
        row = {}
        pos = offset + len(agent) + 1
        for item in body.split(","):
            z, eq, val = item.partition("=")
            if not eq:
                raise ParseError("expected outcome=value", 1, pos + 1)
            try:
                row[z.strip()] = parse_rational(val.strip())
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad rational {val!r}", 1, pos + len(z) + 2) from None
            pos += len(item) + 1
        utils[agent.strip()] = row
        offset += len(chunk) + 1
    return CardinalState.of(utils)


# --------------------------------------------------------------------------
# problems


def problem_to_dict(problem: ImplementationProblem, kind: DomainKind | None = None) -> dict:
    outcomes = sorted(problem.outcomes)
    if kind is None:
        kind = DomainKind(DomainTag.CUSTOM, problem.theta_set)
    out = {
        "agents": list(problem.agents),
        "outcomes": outcomes,
        "domain": {"kind": kind.tag.value, "extra_states": [str(t) for t in kind.extra_states]},
        "scf": {str(t): problem.scf(t) for t in problem.theta_set},
    }
    if problem.mode is OmegaMode.ALL:
        out["omega"] = "ALL"
    else:
        out["omega"] = {str(t): [cardinal_to_dict(u, outcomes) for u in problem.omega[t]]
                        for t in problem.theta_set}
    return out


def dump_problem(problem: ImplementationProblem, kind: DomainKind | None = None) -> str:
    return dumps(problem_to_dict(problem, kind))


def problem_from_dict(data: Mapping, text: str = "") -> ImplementationProblem:
    agents = _need(data, "agents", list, "problem")
    outcomes = _need(data, "outcomes", list, "problem")
    dom = _need(data, "domain", dict, "problem")
    try:
        tag = DomainTag(_need(dom, "kind", str, "domain"))
    except ValueError:
        raise ValidationError(f"unknown domain kind {dom.get('kind')!r}") from None
    if tag is DomainTag.SANDWICH:
        raise ValidationError("a problem needs one concrete domain")
    extra = tuple(_state(text, s) for s in dom.get("extra_states", []))
    kind = DomainKind(tag, extra)
    scf_raw = _need(data, "scf", dict, "problem")
    table = {_state(text, k): v for k, v in scf_raw.items()}
    rule = data.get("scf_default")

    def lookup(theta):
        if theta in table:
            return table[theta]
        if rule == "shared_top" and theta.is_unanimous:
            return theta.prefs[0][1].ranking()[0]
        if isinstance(rule, str) and rule.startswith("top_of:"):
            return theta[rule.split(":", 1)[1]].ranking()[0]
        raise KeyError(theta)

    omega_raw = data.get("omega", "ALL")
    omega = None
    if omega_raw != "ALL":
        if not isinstance(omega_raw, Mapping):
            raise ValidationError("omega is \"ALL\" or a map state -> list of cardinal states")
        omega = {_state(text, k): [cardinal_from_dict(u, text) for u in v] for k, v in omega_raw.items()}
    return build_problem(kind, agents, outcomes, lookup, omega=omega)


def load_problem(text: str) -> ImplementationProblem:
    return problem_from_dict(_load_json(text), text)


# --------------------------------------------------------------------------
# traces and reports


def fmt_set(labels) -> str:
    return "{" + ",".join(labels) + "}"


def restriction_to_dict(r: Restriction) -> dict[str, list[str]]:
    return {a: list(ss) for a, ss in zip(r.agents, r.sets)}


def trace_to_dict(trace: DeletionTrace) -> list[dict]:
    return [{"round": k,
             "survivors": restriction_to_dict(rd.survivors),
             "deletions": [[d.agent, d.strategy, d.dominator] for d in rd.deletions]}
            for k, rd in enumerate(trace.rounds, start=1)]


def witness_to_dict(w: Witness, outcomes: Sequence[str]) -> dict:
    return {"state": str(w.state), "utilities": cardinal_to_dict(w.cardinal, outcomes),
            "profile": list(w.profile), "lottery": lottery_to_dict(w.lottery, outcomes)}


def _jsonable(x: Any) -> Any:
    if isinstance(x, Mapping):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return format_rational(x)
    return x


def report_to_dict(report, outcomes: Sequence[str]) -> dict:
    states = []
    for r in report.states:
        entry = {"state": str(r.state), "target": r.target, "status": r.verdict.status.value}
        if r.verdict.note:
            entry["note"] = r.verdict.note
        if r.survivors is not None:
            entry["survivors"] = restriction_to_dict(r.survivors)
        if r.verdict.witness is not None:
            entry["witness"] = witness_to_dict(r.verdict.witness, outcomes)
        if r.samples_tried:
            entry["samples_tried"] = r.samples_tried
        if r.traces:
            entry["trace"] = trace_to_dict(r.traces[0])
        states.append(entry)
    return {"notion": report.notion, "mode": report.mode.value, "status": report.status.value,
            "states": states, "diagnostics": _jsonable(report.diagnostics)}


def render_grid(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Pipe-separated text grid with padded columns."""
    table = [list(header)] + [list(r) for r in rows]
    widths = [max(len(row[c]) for row in table) for c in range(len(header))]
    lines = []
    for k, row in enumerate(table):
        lines.append("| " + " | ".join(cell.ljust(w) for cell, w in zip(row, widths)) + " |")
        if k == 0:
            lines.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    return "\n".join(lines) + "\n"


def trace_rows(traces: Sequence[DeletionTrace], agents: Sequence[str],
               merge_equal: bool = True) -> list[list[str]]:
    """One row per round per agent; a round whose sets agree across agents in
    every column collapses to a single row when ``merge_equal``."""
    depth = max(max(len(t.rounds) - 1, 1) for t in traces)
    rows = []
    for k in range(1, depth + 1):
        sets = [[fmt_set(t.survivors_after(k)[a]) for a in agents] for t in traces]
        if merge_equal and all(len(set(col)) == 1 for col in sets):
            rows.append([f"UD^{k} (all agents)"] + [col[0] for col in sets])
        else:
            for j, a in enumerate(agents):
                rows.append([f"UD^{k} {a}"] + [col[j] for col in sets])
    return rows


def render_trace_table(columns: Sequence[tuple[str, DeletionTrace]], agents: Sequence[str]) -> str:
    header = ["theta"] + [name for name, _ in columns]
    return render_grid(header, trace_rows([t for _, t in columns], agents))


def render_report(report, outcomes: Sequence[str]) -> str:
    rows = []
    for r in report.states:
        surv = "" if r.survivors is None else " x ".join(fmt_set(s) for s in r.survivors.sets)
        w = r.verdict.witness
        wtxt = "" if w is None else f"{','.join(w.profile)} -> {w.lottery}"
        rows.append([str(r.state), r.target, r.verdict.status.value, surv, wtxt])
    head = f"{report.notion} {report.mode.value}: {report.status.value}\n"
    return head + render_grid(["state", "f", "verdict", "survivors", "witness"], rows)
