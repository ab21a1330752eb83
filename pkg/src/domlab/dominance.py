"""Strict dominance at a cardinal state and robustly over all representations.

Two layers live here. The single-pair predicates (:func:`dominates_at`,
:func:`robustly_dominates`, :func:`robust_gt`) work directly on
:class:`~fractions.Fraction` values and read like the definitions. The
deletion routines work on integer arrays: every lottery of a mechanism is
scaled to a common denominator and every utility function to integers, which
preserves all comparisons exactly while letting numpy do the column scans.

Dominators always range over the agent's full strategy set, even when the
dominated strategy and the opponents are restricted.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import (
    CardinalState,
    Deletion,
    DeletionTrace,
    Lottery,
    Mechanism,
    OrdinalState,
    Preference,
    Restriction,
    Round,
    current_caps,
)
from .errors import Timeout, UnknownStrategy, ValidationError
from .linear import LinearSystem, lp_feasible, lp_witness

__all__ = [
    "expected_utility",
    "dominates_at",
    "ud1_at",
    "udk_at",
    "udinf_at",
    "robust_geq",
    "robust_gt",
    "robustly_dominates",
    "robust_udinf",
    "possibly_undominated",
    "possibly_undominated_witnesses",
    "has_non_domination_property",
    "robust_deletion_gap",
    "lp_feasible",
]

_INT64_SAFE = 2**62


# --------------------------------------------------------------------------
# scalar predicates


def expected_utility(u_i: Mapping[str, Fraction], y: Lottery) -> Fraction:
    return sum((p * Fraction(u_i[z]) for z, p in y.items()), Fraction(0))


def _profile(mech: Mechanism, i: int, s: str, others: Sequence[str]) -> tuple[str, ...]:
    prof = list(others)
    prof.insert(i, s)
    return tuple(prof)


def _opponent_profiles(r: Restriction, i: int) -> Iterable[tuple[str, ...]]:
    return itertools.product(*(s for j, s in enumerate(r.sets) if j != i))


def _check_pair(mech: Mechanism, r: Restriction, i: int, s_prime: str, s: str) -> None:
    mech.strategy_index(i, s_prime)
    mech.strategy_index(i, s)
    if s not in r.sets[i]:
        raise UnknownStrategy(f"{s!r} is not in the restriction for {mech.agents[i]!r}")


def dominates_at(mech: Mechanism, r: Restriction, agent: str, s_prime: str, s: str,
                 u_i: Mapping[str, Fraction]) -> bool:
    """Does ``s_prime`` give ``agent`` strictly more expected utility than ``s``
    against every opponent profile in ``r``?"""
    i = mech.agent_index(agent)
    _check_pair(mech, r, i, s_prime, s)
    return all(
        expected_utility(u_i, mech.g(_profile(mech, i, s_prime, o)))
        > expected_utility(u_i, mech.g(_profile(mech, i, s, o)))
        for o in _opponent_profiles(r, i))


def _class_masses(pref: Preference, y: Lottery) -> list[Fraction]:
    return [sum((y.prob(z) for z in c), Fraction(0)) for c in pref.upper_contours()]


def robust_geq(pref: Preference, y: Lottery, y2: Lottery) -> bool:
    """``U(y) >= U(y2)`` for every utility representation of ``pref``.

    Equivalent to first-order stochastic dominance: every upper contour set
    receives at least as much mass under ``y``.
    """
    return all(a >= b for a, b in zip(_class_masses(pref, y), _class_masses(pref, y2)))


def robust_gt(pref: Preference, y: Lottery, y2: Lottery) -> bool:
    """``U(y) > U(y2)`` for every representation: FOSD with one strict contour."""
    a, b = _class_masses(pref, y), _class_masses(pref, y2)
    return all(p >= q for p, q in zip(a, b)) and any(p > q for p, q in zip(a, b))


def robustly_dominates(mech: Mechanism, r: Restriction, agent: str, s_prime: str, s: str,
                       pref: Preference) -> bool:
    i = mech.agent_index(agent)
    _check_pair(mech, r, i, s_prime, s)
    return all(
        robust_gt(pref, mech.g(_profile(mech, i, s_prime, o)), mech.g(_profile(mech, i, s, o)))
        for o in _opponent_profiles(r, i))


# --------------------------------------------------------------------------
# integer kernels


def utility_vector(outcomes: Sequence[str], u_i: Mapping[str, Fraction]) -> list[int]:
    """Scale ``u_i`` to integers with a common positive factor (order preserved)."""
    vals = [Fraction(u_i[z]) for z in outcomes]
    scale = 1
    for v in vals:
        scale = math.lcm(scale, v.denominator)
    return [int(v * scale) for v in vals]


def _payoff_array(mech: Mechanism, i: int, uvec: Sequence[int]) -> np.ndarray:
    """``P[s_i, s_-i...]``: scaled expected utility of agent ``i`` (agent axis first)."""
    key = ("pay", i, tuple(uvec))
    cached = mech._cache.get(key)
    if cached is not None:
        return cached
    arr, _ = mech.mass_array
    bound = int(arr.max(initial=0)) * max((abs(x) for x in uvec), default=0) * len(uvec)
    if bound < _INT64_SAFE:
        pay = arr @ np.asarray(uvec, dtype=np.int64)
    else:
        pay = arr.astype(object) @ np.asarray(uvec, dtype=object)
    pay = np.moveaxis(pay, i, 0)
    mech._cache[key] = pay
    return pay


def _contour_array(mech: Mechanism, i: int, pref: Preference) -> np.ndarray:
    """``C[s_i, s_-i..., k]``: mass on the top ``k + 1`` classes of ``pref``."""
    key = ("cum", i, pref)
    cached = mech._cache.get(key)
    if cached is not None:
        return cached
    arr, _ = mech.mass_array
    contours = pref.upper_contours()
    sel = np.zeros((len(mech.outcomes), len(contours)), dtype=np.int64)
    for k, c in enumerate(contours):
        for z in c:
            sel[mech.outcomes.index(z), k] = 1
    cum = np.moveaxis(arr @ sel, i, 0)
    mech._cache[key] = cum
    return cum


def payoff_matrix(mech: Mechanism, agent: str, u_i: Mapping[str, Fraction]) -> np.ndarray:
    """``P[s_i, column]``: agent's scaled expected utility against each opponent
    profile on the full strategy space; row order follows the strategy labels."""
    i = mech.agent_index(agent)
    pay = _payoff_array(mech, i, utility_vector(mech.outcomes, u_i))
    return pay.reshape(pay.shape[0], -1)


def _restrict_columns(view: np.ndarray, idx: Sequence[Sequence[int]], i: int) -> np.ndarray:
    """Keep opponents' restricted strategies; flatten them into one column axis."""
    n_agents = len(idx)
    keys = [np.arange(view.shape[0])] + [np.asarray(idx[j]) for j in range(n_agents) if j != i]
    sub = view[np.ix_(*keys)] if n_agents > 1 else view
    tail = view.shape[n_agents:]
    return sub.reshape((view.shape[0], -1) + tail)


def _dominance_matrix_cardinal(pay: np.ndarray) -> np.ndarray:
    """``D[s', s]``: s' strictly beats s in every column."""
    return (pay[:, None, :] > pay[None, :, :]).all(axis=2)


def _dominance_matrix_robust(cum: np.ndarray) -> np.ndarray:
    a, b = cum[:, None], cum[None, :]
    gt = (a >= b).all(axis=-1) & (a > b).any(axis=-1)
    return gt.all(axis=2)


def _first_dominators(dom: np.ndarray, candidates: Sequence[int]) -> dict[int, int]:
    out = {}
    for s in candidates:
        col = dom[:, s]
        if col.any():
            out[s] = int(np.argmax(col))
    return out


def _iterate(mech: Mechanism, matrix_for, start: Restriction | None = None,
             max_rounds: int | None = None) -> DeletionTrace:
    """Synchronous rounds: each round deletes every strategy dominated on the
    restriction the round started from, until nothing changes."""
    n = len(mech.agents)
    init = start or Restriction.full(mech)
    idx = [[mech.strategy_index(j, s) for s in init.sets[j]] for j in range(n)]
    rounds = []
    while max_rounds is None or len(rounds) < max_rounds:
        deleted: list[tuple[int, int, int]] = []
        for i in range(n):
            dom = matrix_for(i, idx)
            for s, d in _first_dominators(dom, idx[i]).items():
                deleted.append((i, s, d))
        for i, s, _ in deleted:
            idx[i] = [x for x in idx[i] if x != s]
        survivors = Restriction(mech.agents, tuple(
            tuple(mech.strategies[j][x] for x in idx[j]) for j in range(n)))
        rounds.append(Round(survivors, tuple(
            Deletion(mech.agents[i], mech.strategies[i][s], mech.strategies[i][d])
            for i, s, d in sorted(deleted))))
        if not deleted:
            break
    return DeletionTrace(init, tuple(rounds))


def _cardinal_matrix_fn(mech: Mechanism, u: CardinalState):
    pays = [_payoff_array(mech, i, utility_vector(mech.outcomes, u[a]))
            for i, a in enumerate(mech.agents)]

    def matrix_for(i, idx):
        return _dominance_matrix_cardinal(_restrict_columns(pays[i], idx, i))
    return matrix_for


def _robust_matrix_fn(mech: Mechanism, theta: OrdinalState):
    cums = [_contour_array(mech, i, theta[a]) for i, a in enumerate(mech.agents)]

    def matrix_for(i, idx):
        return _dominance_matrix_robust(_restrict_columns(cums[i], idx, i))
    return matrix_for


# --------------------------------------------------------------------------
# deletion at a cardinal state


def ud1_at(mech: Mechanism, u: CardinalState) -> Restriction:
    """Strategies not strictly dominated on the full profile set."""
    return _iterate(mech, _cardinal_matrix_fn(mech, u), max_rounds=1).rounds[0].survivors


def udk_at(mech: Mechanism, u: CardinalState, k: int) -> Restriction:
    return udinf_at(mech, u)[1].survivors_after(k)


def udinf_at(mech: Mechanism, u: CardinalState) -> tuple[Restriction, DeletionTrace]:
    trace = _iterate(mech, _cardinal_matrix_fn(mech, u))
    return trace.final, trace


def has_non_domination_property(mech: Mechanism, subset: Restriction, u: CardinalState) -> bool:
    """No member of ``subset`` is strictly dominated on ``subset`` (dominators from full S_i)."""
    subset.check()
    fn = _cardinal_matrix_fn(mech, u)
    idx = [[mech.strategy_index(j, s) for s in subset.sets[j]] for j in range(len(mech.agents))]
    return all(not _first_dominators(fn(i, idx), idx[i]) for i in range(len(mech.agents)))


# --------------------------------------------------------------------------
# robust deletion


def robust_udinf(mech: Mechanism, theta: OrdinalState,
                 start: Restriction | None = None) -> tuple[Restriction, DeletionTrace]:
    """Iterate deletion of strategies that one fixed dominator beats under every
    representation of ``theta``. The fixed point contains ``UD^inf(M, u)`` for
    every representation ``u``."""
    trace = _iterate(mech, _robust_matrix_fn(mech, theta), start=start)
    return trace.final, trace


def _weak_row(mech: Mechanism, i: int, s: int, s_prime: int, col: tuple[int, ...]) -> list[int]:
    arr, _ = mech.mass_array
    pos_s = list(col)
    pos_s.insert(i, s)
    pos_p = list(col)
    pos_p.insert(i, s_prime)
    return [int(a) - int(b) for a, b in zip(arr[tuple(pos_s)], arr[tuple(pos_p)])]


def _order_rows(outcomes: Sequence[str], pref: Preference):
    """Rows forcing ``u`` to represent ``pref``: strict between classes, equal within."""
    n = len(outcomes)
    pos = {z: k for k, z in enumerate(outcomes)}
    weak, strict = [], []
    reps = [sorted(c) for c in pref.classes]
    for c in reps:
        for z in c[1:]:
            row = [Fraction(0)] * n
            row[pos[c[0]]], row[pos[z]] = Fraction(1), Fraction(-1)
            weak.append((tuple(row), Fraction(0)))
            weak.append((tuple(-x for x in row), Fraction(0)))
    for c, d in zip(reps, reps[1:]):
        row = [Fraction(0)] * n
        row[pos[c[0]]], row[pos[d[0]]] = Fraction(1), Fraction(-1)
        strict.append((tuple(row), Fraction(0)))
    return weak, strict


def _undominated_witness(mech: Mechanism, r: Restriction, i: int, s: int,
                         pref: Preference, cum_dom_robust: np.ndarray,
                         geq: np.ndarray, gt: np.ndarray) -> dict[str, Fraction] | None:
    """A representation of ``pref`` at which strategy ``s`` is not dominated on
    ``r``, or None when no such representation exists.

    For each potential dominator ``s'`` we must pick an opponent column where
    ``s`` does at least as well as ``s'``. A column where ``s`` wins under every
    representation (FOSD-weakly) settles ``s'`` for free; a column where ``s'``
    wins under every representation can never be picked. The remaining picks
    are searched depth-first, pruning infeasible partial systems.
    """
    n_i = len(mech.strategies[i])
    if cum_dom_robust[:, s].any():
        return None
    outcomes = mech.outcomes
    order_weak, order_strict = _order_rows(outcomes, pref)
    cols = list(_opponent_index_profiles(mech, r, i))
    pending = []
    total = 1
    for sp in range(n_i):
        if sp == s:
            continue
        if geq[s, sp].any():
            continue
        options = [c for k, c in enumerate(cols) if not gt[sp, s, k]]
        rows = []
        seen = set()
        for c in options:
            row = tuple(_weak_row(mech, i, s, sp, c))
            if row not in seen:
                seen.add(row)
                rows.append(row)
        pending.append(rows)
        total *= len(rows)
    if total > current_caps().choices:
        raise Timeout(f"{total} choice functions exceed the cap {current_caps().choices}")
    pending.sort(key=len)

    def system(chosen):
        weak = list(order_weak) + [(tuple(Fraction(x) for x in row), Fraction(0)) for row in chosen]
        return LinearSystem(outcomes, tuple(weak), tuple(order_strict))

    def search(k, chosen):
        if not lp_feasible(system(chosen)):
            return None
        if k == len(pending):
            return chosen
        for row in pending[k]:
            found = search(k + 1, chosen + [row])
            if found is not None:
                return found
        return None

    chosen = search(0, [])
    if chosen is None:
        return None
    point = lp_witness(system(chosen))
    return dict(zip(outcomes, point))


def _opponent_index_profiles(mech: Mechanism, r: Restriction, i: int):
    idx = [[mech.strategy_index(j, s) for s in r.sets[j]] for j in range(len(mech.agents))]
    return itertools.product(*(idx[j] for j in range(len(mech.agents)) if j != i))


def possibly_undominated_witnesses(mech: Mechanism, r: Restriction, agent: str,
                                   pref: Preference) -> dict[str, dict[str, Fraction]]:
    """Map each strategy of ``r`` that is undominated on ``r`` under *some*
    representation of ``pref`` to one such representation."""
    r.check()
    i = mech.agent_index(agent)
    if pref.outcomes != frozenset(mech.outcomes):
        raise ValidationError("preference and mechanism have different outcome spaces")
    idx = [[mech.strategy_index(j, s) for s in r.sets[j]] for j in range(len(mech.agents))]
    cum = _restrict_columns(_contour_array(mech, i, pref), idx, i)
    a, b = cum[:, None], cum[None, :]
    geq = (a >= b).all(axis=-1)
    gt = geq & (a > b).any(axis=-1)
    dom = gt.all(axis=2)
    out = {}
    for s in idx[i]:
        w = _undominated_witness(mech, r, i, s, pref, dom, geq, gt)
        if w is not None:
            out[mech.strategies[i][s]] = w
    return out


def possibly_undominated(mech: Mechanism, r: Restriction, agent: str,
                         pref: Preference) -> tuple[str, ...]:
    """Exactly the strategies of ``r`` undominated on ``r`` at some representation."""
    return tuple(possibly_undominated_witnesses(mech, r, agent, pref))


def robust_deletion_gap(mech: Mechanism, r: Restriction, agent: str,
                        pref: Preference) -> tuple[int, int]:
    """``(existential, universal)`` deletion counts for one agent on ``r``.

    *existential*: strategies some single dominator beats at every
    representation. *universal*: strategies dominated at every representation,
    possibly by different dominators. The first never exceeds the second.
    """
    i = mech.agent_index(agent)
    idx = [[mech.strategy_index(j, s) for s in r.sets[j]] for j in range(len(mech.agents))]
    dom = _dominance_matrix_robust(_restrict_columns(_contour_array(mech, i, pref), idx, i))
    existential = len(_first_dominators(dom, idx[i]))
    universal = len(r.sets[i]) - len(possibly_undominated(mech, r, agent, pref))
    return existential, universal
