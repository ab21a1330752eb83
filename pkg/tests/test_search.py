import itertools
import json

import numpy as np
import pytest

from domlab.constructions import hat_mechanism
from domlab.core import Status
from domlab.domains import DomainKind, DomainTag, build_problem, strict_states, unanimity_strict_states
from domlab.errors import SizeLimit, ValidationError
from domlab.search import (
    SearchSpace,
    _Batch,
    batch_masses,
    batch_state_verdicts,
    cursor_of,
    enumerate_mechanisms,
    enumerate_scfs,
    grid_lotteries,
    load_checkpoint,
    mechanism_at,
    merge_reports,
    mine,
    shard_range,
    state_outcome,
)
from domlab.verify import verify_ud, verify_udinf

STRICT = DomainKind(DomainTag.STRICT_ALL)


def test_grid_counts():
    assert len(grid_lotteries(2, 2)) == 3
    assert len(grid_lotteries(3, 4)) == 15
    assert tuple(grid_lotteries(2, 2)[0]) == (2, 0)


def test_space_sizes():
    assert SearchSpace(n_outcomes=2, q=2).size == 81
    assert SearchSpace(n_outcomes=2, q=7, deterministic_only=True).size == 16
    assert len(list(enumerate_mechanisms(SearchSpace(n_outcomes=2, q=2)))) == 81


def test_space_validation():
    with pytest.raises(ValidationError):
        SearchSpace(q=0)
    with pytest.raises(ValidationError):
        SearchSpace(strategy_counts=(2,))
    with pytest.raises(ValidationError):
        SearchSpace(notion="NASH")
    with pytest.raises(SizeLimit):
        SearchSpace(n_outcomes=3, strategy_counts=(6, 6), q=6)


def test_enumerate_scfs():
    states = strict_states(["i1", "i2"], "ab")
    assert len(enumerate_scfs(states, "ab")) == 16
    flagged = enumerate_scfs(states, "ab", require_surjective=True, require_nondictatorial=True,
                             require_unanimity_respecting=True)
    assert len(flagged) == 2
    for f in flagged:
        assert all(f(t) == t["i1"].ranking()[0] for t in states if t.is_unanimous)


def test_enumerate_scfs_cap(monkeypatch):
    monkeypatch.setenv("DOMLAB_CAPS", "scfs=100")
    with pytest.raises(SizeLimit):
        enumerate_scfs(strict_states(["i1", "i2"], "abc"), "abc")


def test_cursor_roundtrip_and_resume():
    space = SearchSpace(n_outcomes=3, strategy_counts=(2, 2), q=2)
    full = list(enumerate_mechanisms(space))
    assert full[100:] == list(enumerate_mechanisms(space, 100))
    for k in (0, 1, 77, space.size - 1):
        assert cursor_of(space, full[k]) == k
        assert mechanism_at(space, k) == full[k]
    with pytest.raises(ValidationError):
        mechanism_at(space, space.size)


def test_hat_lies_in_the_quarter_grid():
    space = SearchSpace(n_outcomes=3, strategy_counts=(3, 3), q=4, notion="UDINF")
    c = cursor_of(space, hat_mechanism())
    assert 0 <= c < space.size
    m = mechanism_at(space, c)
    assert [m.g(p) for p in m.profiles()] == [hat_mechanism().g(p) for p in hat_mechanism().profiles()]
    with pytest.raises(ValidationError):
        cursor_of(SearchSpace(n_outcomes=3, strategy_counts=(3, 3), q=3), hat_mechanism())


def test_shards_partition_the_space():
    space = SearchSpace(n_outcomes=2, strategy_counts=(2, 2), q=3)
    ranges = [shard_range(space, k, 5) for k in range(5)]
    assert ranges[0][0] == 0 and ranges[-1][1] == space.size
    assert all(a[1] == b[0] for a, b in zip(ranges, ranges[1:]))
    with pytest.raises(ValidationError):
        shard_range(space, 5, 5)


def _comparable(report):
    d = report.to_dict(with_timing=False)
    d.pop("start"), d.pop("stop"), d.pop("cursor")
    for c in d["counterexamples"]:
        c.pop("verification", None)
    return d


def test_shard_merge_equals_monolithic():
    space = SearchSpace(n_outcomes=2, strategy_counts=(2, 2), q=2, domain=STRICT,
                        require_surjective=False, require_nondictatorial=False)
    whole = mine(space, batch=16)
    parts = [mine(space, *shard_range(space, k, 3), batch=16) for k in range(3)]
    merged = merge_reports(merge_reports(parts[0], parts[1]), parts[2])
    swapped = merge_reports(parts[2], merge_reports(parts[1], parts[0]))
    assert _comparable(merged) == _comparable(whole) == _comparable(swapped)
    assert whole.counterexamples


def test_checkpoint_resume_matches(tmp_path):
    space = SearchSpace(n_outcomes=2, strategy_counts=(2, 2), q=3, notion="UDINF")
    whole = mine(space, batch=32)
    ck = tmp_path / "ck.json"
    partial = mine(space, 0, 128, batch=32, checkpoint=ck)
    partial.stop = space.size
    from domlab.search import save_checkpoint
    save_checkpoint(ck, space, partial)
    resumed = mine(space, resume=load_checkpoint(ck, space), batch=32)
    assert _comparable(resumed) == _comparable(whole)
    other = SearchSpace(n_outcomes=2, strategy_counts=(2, 2), q=2)
    with pytest.raises(ValidationError):
        load_checkpoint(ck, other)
    assert json.loads(ck.read_text())["space_hash"] == space.digest()


def test_runs_are_deterministic():
    space = SearchSpace(n_outcomes=3, strategy_counts=(2, 2), q=2, notion="UDINF")
    assert _comparable(mine(space)) == _comparable(mine(space))


@pytest.mark.parametrize("notion", ["UD", "UDINF"])
def test_miner_matches_brute_force(notion):
    """Every (mechanism, choice function) pair on the two-outcome strict domain,
    checked directly by the verifier, against the miner with all filters off."""
    space = SearchSpace(n_outcomes=2, strategy_counts=(2, 2), q=2, notion=notion, domain=STRICT,
                        require_surjective=False, require_nondictatorial=False)
    states = strict_states(space.agents, space.outcomes)
    check = verify_ud if notion == "UD" else verify_udinf
    brute = {}
    for cursor, mech in enumerate(enumerate_mechanisms(space)):
        for choice in itertools.product(space.outcomes, repeat=len(states)):
            table = dict(zip(states, choice))
            p = build_problem(STRICT, space.agents, space.outcomes, table)
            if notion == "UD":
                rep = check(mech, p)
            else:
                rep = check(mech, p, gap_diagnostics=False)
            assert rep.status is not Status.INCONCLUSIVE
            if rep.status is Status.VERIFIED:
                assert cursor not in brute  # at most one choice per mechanism
                brute[cursor] = {str(t): z for t, z in table.items()}
    report = mine(space)
    mined = {c["cursor"]: c["scf"] for c in report.counterexamples}
    assert mined == brute
    assert report.implementations == len(brute)


@pytest.mark.parametrize("n_outcomes,shape,q,notion", [
    (2, (2, 2), 4, "UD"), (2, (3, 2), 2, "UDINF"), (3, (2, 2), 2, "UD"),
    (3, (2, 2), 3, "UDINF"), (3, (2, 3), 1, "UDINF"),
])
def test_batch_kernel_agrees_with_engine(n_outcomes, shape, q, notion):
    space = SearchSpace(n_outcomes=n_outcomes, strategy_counts=shape, q=q, notion=notion)
    rng = np.random.default_rng(0)
    cursors = sorted(set(rng.integers(0, space.size, size=min(60, space.size)).tolist()))
    states = strict_states(space.agents, space.outcomes)
    for c in cursors:
        batch = _Batch(space, batch_masses(space, c, c + 1))
        mech = mechanism_at(space, c)
        for theta in states:
            cert, refuted = batch_state_verdicts(batch, theta, notion)
            res = state_outcome(mech, theta, notion, samples=30)
            if cert[0] >= 0:
                assert res.kind == "cert" and res.outcome == space.outcomes[cert[0]]
            elif refuted[0]:
                assert res.kind == "ref"


def test_two_outcome_deterministic_ud():
    space = SearchSpace(n_outcomes=2, deterministic_only=True, notion="UD")
    rep = mine(space)
    assert rep.mechanisms_tested == 16
    assert not rep.counterexamples
    assert rep.implementations == 6 and rep.dictatorial == 4


def test_hits_are_reverified():
    space = SearchSpace(n_outcomes=3, strategy_counts=(3, 3), q=4, notion="UDINF")
    c = cursor_of(space, hat_mechanism())
    rep = mine(space, c, c + 1)
    assert len(rep.counterexamples) == 1
    hit = rep.counterexamples[0]
    assert hit["verification"]["status"] == "verified"
    assert hit["scf"]["i1:b>a>c;i2:c>a>b"] == "a"
    una = {str(t) for t in unanimity_strict_states(space.agents, space.outcomes)}
    assert una <= set(hit["scf"])


def test_max_hits_stops_early():
    space = SearchSpace(n_outcomes=2, strategy_counts=(2, 2), q=2, domain=STRICT,
                        require_surjective=False, require_nondictatorial=False)
    rep = mine(space, batch=4, max_hits=1)
    assert len(rep.counterexamples) >= 1
    assert rep.cursor < space.size
