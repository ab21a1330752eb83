"""Exact feasibility of mixed strict/weak linear inequality systems.

Fourier-Motzkin elimination over :class:`~fractions.Fraction`, with
back-substitution to recover a rational witness point. Desk scale only: the
systems produced by the dominance engine have at most a handful of variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import current_caps
from .errors import Timeout, ValidationError

_Row = tuple[tuple[Fraction, ...], Fraction, bool]  # coeffs . x >= rhs  (> if strict)


@dataclass(frozen=True)
class LinearSystem:
    """``c . x >= r`` (weak rows) and ``c . x > r`` (strict rows) over ``variables``."""

    variables: tuple[str, ...]
    weak_rows: tuple[tuple[tuple[Fraction, ...], Fraction], ...] = ()
    strict_rows: tuple[tuple[tuple[Fraction, ...], Fraction], ...] = ()

    def __post_init__(self):
        n = len(self.variables)
        for coeffs, _ in self.weak_rows + self.strict_rows:
            if len(coeffs) != n:
                raise ValidationError("coefficient vector length does not match variable count")

    def rows(self) -> list[_Row]:
        out = [(tuple(Fraction(c) for c in cs), Fraction(r), False) for cs, r in self.weak_rows]
        out += [(tuple(Fraction(c) for c in cs), Fraction(r), True) for cs, r in self.strict_rows]
        return out

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        for cs, r, strict in self.rows():
            lhs = sum((c * v for c, v in zip(cs, x)), Fraction(0))
            if lhs < r or (strict and lhs == r):
                return False
        return True


def _normalise(row: _Row) -> _Row | None | bool:
    """Scale so the first nonzero coefficient has magnitude 1.

    Returns True/False for constant rows (satisfied or not).
    """
    cs, r, strict = row
    lead = next((c for c in cs if c != 0), None)
    if lead is None:
        return (0 > r) if strict else (0 >= r)
    s = abs(lead)
    if s != 1:
        cs = tuple(c / s for c in cs)
        r = r / s
    return cs, r, strict


def _dedupe(rows: list[_Row]) -> list[_Row] | None:
    best: dict[tuple, tuple[Fraction, bool]] = {}
    for row in rows:
        norm = _normalise(row)
        if norm is True:
            continue
        if norm is False:
            return None
        cs, r, strict = norm
        prev = best.get(cs)
        # keep the tightest rhs; on equal rhs strict beats weak
        if prev is None or r > prev[0] or (r == prev[0] and strict and not prev[1]):
            best[cs] = (r, strict)
    return [(cs, r, st) for cs, (r, st) in best.items()]


@dataclass
class _Stage:
    var: int
    rows: list[_Row] = field(default_factory=list)


def _eliminate(system: LinearSystem) -> tuple[bool, list[_Stage]]:
    caps = current_caps()
    n = len(system.variables)
    if n > caps.lp_variables:
        raise Timeout(f"{n} variables exceeds the cap {caps.lp_variables}")
    rows = _dedupe(system.rows())
    stages: list[_Stage] = []
    if rows is None:
        return False, stages
    remaining = set(range(n))
    while remaining:
        def cost(k):
            pos = sum(1 for cs, _, _ in rows if cs[k] > 0)
            neg = sum(1 for cs, _, _ in rows if cs[k] < 0)
            return pos * neg - pos - neg
        k = min(sorted(remaining), key=cost)
        remaining.discard(k)
        pos = [row for row in rows if row[0][k] > 0]
        neg = [row for row in rows if row[0][k] < 0]
        keep = [row for row in rows if row[0][k] == 0]
        stages.append(_Stage(k, pos + neg))
        if len(keep) + len(pos) * len(neg) > caps.lp_rows:
            raise Timeout("Fourier-Motzkin row count exceeds the cap")
        for cp, rp, sp in pos:
            for cn, rn, sn in neg:
                a, b = -cn[k], cp[k]  # both positive
                cs = tuple(a * x + b * y for x, y in zip(cp, cn))
                keep.append((cs, a * rp + b * rn, sp or sn))
        rows = _dedupe(keep)
        if rows is None:
            return False, stages
    return True, stages


def lp_feasible(system: LinearSystem) -> bool:
    """Exact decision: does some rational ``x`` satisfy every row?"""
    ok, _ = _eliminate(system)
    return ok


def lp_witness(system: LinearSystem) -> list[Fraction] | None:
    """A rational point satisfying the system, or None when infeasible."""
    ok, stages = _eliminate(system)
    if not ok:
        return None
    x: list[Fraction | None] = [None] * len(system.variables)
    for stage in reversed(stages):
        k = stage.var
        lo, lo_strict, hi, hi_strict = None, False, None, False
        for cs, r, strict in stage.rows:
            rest = sum((c * x[j] for j, c in enumerate(cs) if j != k and c != 0), Fraction(0))
            bound = (r - rest) / cs[k]
            if cs[k] > 0:
                if lo is None or bound > lo or (bound == lo and strict):
                    lo, lo_strict = bound, strict
            else:
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_strict = bound, strict
        if lo is None and hi is None:
            val = Fraction(0)
        elif hi is None:
            val = lo + 1 if lo_strict else lo
        elif lo is None:
            val = hi - 1 if hi_strict else hi
        elif lo < hi:
            val = (lo + hi) / 2
        else:
            val = lo
        x[k] = val
    point = [v if v is not None else Fraction(0) for v in x]
    assert system.satisfied_by(point), "back-substitution produced an infeasible point"
    return point
