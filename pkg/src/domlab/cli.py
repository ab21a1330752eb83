"""Command-line entry point: ``domlab {trace,reproduce,verify,search,construct}``.

Exit codes: 0 success, 1 refuted or table mismatch, 2 malformed input,
3 invalid input or flags, 4 inconclusive, 5 counterexamples found.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import constructions as C
from .core import OrdinalState, Status
from .dominance import robust_udinf, udinf_at
from .domains import DomainKind, DomainTag
from .errors import DomlabError, ParseError, SizeLimit, Timeout, ValidationError
from .formats import (
    dump_mechanism,
    dumps,
    load_mechanism,
    load_problem,
    parse_cardinal,
    render_report,
    render_trace_table,
    report_to_dict,
    witness_to_dict,
)
from .reproduce import reproduce
from .search import (
    SearchSpace,
    load_checkpoint,
    mine,
    shard_range,
)
from .verify import DEFAULT_SAMPLES, DEFAULT_SEED, verify_ud, verify_udinf

EXIT_OK, EXIT_REFUTED, EXIT_PARSE, EXIT_INVALID, EXIT_INCONCLUSIVE, EXIT_FOUND = range(6)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


# --------------------------------------------------------------------------
# commands


def cmd_trace(args) -> int:
    mech = load_mechanism(_read(args.mechanism))
    theta = OrdinalState.parse(args.state)
    if args.mode == "robust":
        _, trace = robust_udinf(mech, theta)
    elif args.mode.startswith("cardinal:"):
        u = parse_cardinal(args.mode.split(":", 1)[1])
        if not u.represents(theta):
            raise ValidationError("the utilities do not represent the state")
        _, trace = udinf_at(mech, u)
    else:
        raise ValidationError("mode is 'robust' or 'cardinal:<utilities>'")
    _emit(render_trace_table([(str(theta), trace)], mech.agents), args.out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    result = reproduce(args.target, samples=args.samples, seed=args.seed)
    _emit(result.render(), args.out)
    return EXIT_OK if result.passed else EXIT_REFUTED


def cmd_verify(args) -> int:
    mech = load_mechanism(_read(args.mechanism))
    problem = load_problem(_read(args.problem))
    force_all = args.mode == "all"
    if args.mode == "explicit" and problem.omega is None:
        raise ValidationError("explicit mode needs cardinal tables in the problem file")
    kw = dict(samples=args.samples, seed=args.seed, force_all=force_all)
    report = verify_ud(mech, problem, **kw) if args.notion == "ud" else verify_udinf(mech, problem, **kw)
    if args.json:
        text = dumps(report_to_dict(report, mech.outcomes))
    else:
        text = render_report(report, mech.outcomes)
        for w in report.witnesses:
            text += "witness " + json.dumps(witness_to_dict(w, mech.outcomes), sort_keys=True) + "\n"
    _emit(text, args.out)
    return {Status.VERIFIED: EXIT_OK, Status.REFUTED: EXIT_REFUTED,
            Status.INCONCLUSIVE: EXIT_INCONCLUSIVE}[report.status]


_DOMAINS = {"sandwich": DomainTag.SANDWICH, "strict": DomainTag.STRICT_ALL,
            "unanimity": DomainTag.UNANIMITY_STRICT}


def _space_from_args(args) -> SearchSpace:
    counts = tuple(int(x) for x in _csv(args.strategies))
    return SearchSpace(
        n_agents=args.agents, n_outcomes=args.outcomes, strategy_counts=counts,
        q=args.grid, deterministic_only=args.deterministic, notion=args.notion.upper(),
        domain=DomainKind(_DOMAINS[args.domain]),
        require_unanimity_respecting=args.unanimity_respecting,
        samples=args.samples, seed=args.seed)


def cmd_search(args) -> int:
    try:
        space = _space_from_args(args)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    start, stop = 0, space.size
    if args.shard:
        k, _, n = args.shard.partition("/")
        start, stop = shard_range(space, int(k), int(n))
    if args.start is not None:
        start = max(start, args.start)
    if args.stop is not None:
        stop = min(stop, args.stop)
    resume = load_checkpoint(args.resume, space) if args.resume else None
    ckpt = args.checkpoint or args.resume or f"search-{space.digest()}-{start}-{stop}.json"
    report = mine(space, start, stop, checkpoint=ckpt, resume=resume, max_hits=args.max_hits)
    text = report.summary()
    for c in report.counterexamples:
        text += f"counterexample at cursor {c['cursor']}\n"
        text += dump_mechanism_dict(c["mechanism"])
        text += "choice " + json.dumps(c["scf"], sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(dumps(report.to_dict()))
    sys.stdout.write(text)
    return EXIT_FOUND if report.counterexamples else EXIT_OK


def dump_mechanism_dict(d: dict) -> str:
    rows = [f"  {k}: " + ", ".join(f"{z}={p}" for z, p in v.items()) for k, v in d["cells"].items()]
    return "\n".join(rows) + "\n"


def cmd_construct(args) -> int:
    kind, _, arg = args.type.partition(":")
    agents = _csv(args.agents)
    if kind == "dictatorial":
        outcomes = _csv(args.outcomes or "a,b,c")
        mech = C.dictatorial_mechanism(arg or agents[0], outcomes, agents)
    elif kind == "hat":
        labels = _csv(arg or "a,b,c")
        if len(labels) != 3:
            raise ValidationError("hat takes three labels")
        mech = C.hat_mechanism(*labels, agents=agents)
    elif kind == "star":
        labels = _csv(arg or "a,b,c")
        if len(labels) != 3:
            raise ValidationError("star takes three labels a,b,c")
        outcomes = _csv(args.outcomes or "a,b,c,d")
        mech = C.star_mechanism(outcomes, C.StarLabels(*labels), agents)
    elif kind == "infinite":
        if not arg.isdigit():
            raise ValidationError("infinite takes the integer cap, e.g. infinite:4")
        if args.state:
            theta = OrdinalState.parse(args.state)
        else:
            theta = C.base_state(("a", "b", "c"), C.StarLabels("a", "b", "c"), agents)
        outcomes = _csv(args.outcomes) if args.outcomes else sorted(theta.outcomes)
        mech = C.truncated_infinite_mechanism(theta, args.target or "a", outcomes, None,
                                              C.TruncationParams(int(arg)))
    else:
        raise ValidationError(f"unknown construction {args.type!r}")
    _emit(dump_mechanism(mech), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="domlab", description="Dominance-solvable implementation toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("trace", help="round-by-round deletion table at one state")
    t.add_argument("mechanism")
    t.add_argument("state", help='e.g. "i1:b>a>c;i2:c>a>b"')
    t.add_argument("--mode", default="robust", help="robust | cardinal:i1:a=1,b=0;i2:...")
    t.add_argument("--out")
    t.set_defaults(func=cmd_trace)

    r = sub.add_parser("reproduce", help="regenerate a reference table")
    r.add_argument("target", help="lemma5 | theorem4:<|Z|> | theorem5:<N>")
    r.add_argument("--samples", type=int, default=0, help="extra seeded representations (theorem5)")
    r.add_argument("--seed", type=int, default=DEFAULT_SEED)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reproduce)

    v = sub.add_parser("verify", help="decide implementation of a problem by a mechanism")
    v.add_argument("mechanism")
    v.add_argument("problem")
    v.add_argument("--notion", choices=["ud", "udinf"], default="udinf")
    v.add_argument("--mode", choices=["auto", "all", "explicit"], default="auto")
    v.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--json", action="store_true", help="structured report instead of a table")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", help="mine a grid mechanism space")
    s.add_argument("--agents", type=int, default=2)
    s.add_argument("--outcomes", type=int, required=True)
    s.add_argument("--strategies", required=True, help="per-agent counts, e.g. 2,2")
    s.add_argument("--grid", type=int, default=2, help="lottery masses are multiples of 1/grid")
    s.add_argument("--notion", choices=["ud", "udinf"], default="ud")
    s.add_argument("--deterministic", action="store_true")
    s.add_argument("--domain", choices=sorted(_DOMAINS), default="sandwich")
    s.add_argument("--unanimity-respecting", action="store_true")
    s.add_argument("--shard", help="k/n, 0-based")
    s.add_argument("--start", type=int)
    s.add_argument("--stop", type=int)
    s.add_argument("--max-hits", type=int)
    s.add_argument("--checkpoint")
    s.add_argument("--resume")
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    c = sub.add_parser("construct", help="emit a mechanism file")
    c.add_argument("type", help="dictatorial:<agent> | hat:<a,b,c> | star:<a,b,c> | infinite:<N>")
    c.add_argument("--agents", default="i1,i2")
    c.add_argument("--outcomes")
    c.add_argument("--state")
    c.add_argument("--target")
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, SizeLimit) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Timeout as exc:
        print(f"gave up: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except DomlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
