import json

import pytest

from domlab.constructions import hat_mechanism, hat_problem, star_mechanism, StarLabels
from domlab.dominance import robust_udinf
from domlab.errors import ParseError, ValidationError
from domlab.formats import (
    dump_mechanism,
    dump_problem,
    load_mechanism,
    load_problem,
    parse_cardinal,
    render_grid,
    render_report,
    render_trace_table,
    report_to_dict,
)
from domlab.verify import verify_ud


def test_mechanism_roundtrip_is_fixed_point():
    for m in (hat_mechanism(), star_mechanism("abcd", StarLabels("a", "b", "c"))):
        text = dump_mechanism(m)
        again = load_mechanism(text)
        assert again == m
        assert dump_mechanism(again) == text


def test_mechanism_cell_format():
    data = json.loads(dump_mechanism(hat_mechanism()))
    assert data["cells"]["a,b"] == {"a": "1/4", "b": "3/4"}
    assert data["cells"]["a,a"] == {"a": "1/1"}


def test_mechanism_parse_errors_carry_position():
    text = dump_mechanism(hat_mechanism()).replace('"3/4"', '"3/x"', 1)
    with pytest.raises(ParseError) as err:
        load_mechanism(text)
    assert err.value.line is not None and err.value.line > 1
    with pytest.raises(ParseError) as err:
        load_mechanism('{"agents": [\n  "i1",\n')
    assert err.value.line is not None


def test_mechanism_semantic_errors():
    data = json.loads(dump_mechanism(hat_mechanism()))
    data["cells"]["a,b"] = {"a": "1/4", "b": "1/4"}
    with pytest.raises(ValidationError):
        load_mechanism(json.dumps(data))
    data = json.loads(dump_mechanism(hat_mechanism()))
    del data["cells"]["c,c"]
    with pytest.raises(ValidationError):
        load_mechanism(json.dumps(data))


def test_problem_roundtrip():
    _, p = hat_problem()
    text = dump_problem(p)
    again = load_problem(text)
    assert again.theta_set == p.theta_set
    assert all(again.scf(t) == p.scf(t) for t in p.theta_set)
    assert dump_problem(again) == text


def test_problem_default_rules():
    doc = {"agents": ["i1", "i2"], "outcomes": ["a", "b"],
           "domain": {"kind": "STRICT_ALL"}, "scf": {}, "scf_default": "top_of:i1"}
    p = load_problem(json.dumps(doc))
    assert len(p.theta_set) == 4
    doc = {"agents": ["i1", "i2"], "outcomes": ["a", "b", "c"],
           "domain": {"kind": "UNANIMITY_STRICT", "extra_states": ["i1:b>a>c;i2:c>a>b"]},
           "scf": {"i1:b>a>c;i2:c>a>b": "a"}, "scf_default": "shared_top"}
    p = load_problem(json.dumps(doc))
    assert len(p.theta_set) == 7


def test_problem_explicit_omega():
    theta = "i1:a>b;i2:b>a"
    doc = {"agents": ["i1", "i2"], "outcomes": ["a", "b"],
           "domain": {"kind": "CUSTOM", "extra_states": [theta]},
           "scf": {theta: "a"},
           "omega": {theta: [{"i1": {"a": "1", "b": "0"}, "i2": {"a": "0", "b": "3/2"}}]}}
    p = load_problem(json.dumps(doc))
    assert p.mode.value == "EXPLICIT"
    doc["omega"][theta][0]["i1"] = {"a": "0", "b": "1"}
    with pytest.raises(ValidationError):
        load_problem(json.dumps(doc))


def test_problem_bad_state_text():
    doc = '{"agents": ["i1"], "outcomes": ["a", "b"],\n "domain": {"kind": "CUSTOM", "extra_states": ["i1 a>b"]}, "scf": {}}'
    with pytest.raises(ParseError) as err:
        load_problem(doc)
    assert err.value.line == 2


def test_parse_cardinal():
    u = parse_cardinal("i1:a=1,b=1/2,c=0;i2:a=0,b=1,c=2")
    assert u["i1"]["b"] == 0.5 and u["i2"]["c"] == 2
    with pytest.raises(ParseError):
        parse_cardinal("i1:a=1,b")
    with pytest.raises(ParseError):
        parse_cardinal("i1:a=1/0")


def test_trace_table_layout(theta_hat):
    m = hat_mechanism()
    _, trace = robust_udinf(m, theta_hat)
    text = render_trace_table([(str(theta_hat), trace)], m.agents)
    assert "{a,b}" in text and "{a,c}" in text
    assert text == render_trace_table([(str(theta_hat), trace)], m.agents)


def test_render_grid():
    out = render_grid(["x", "yy"], [["1", "2"], ["333", "4"]])
    lines = out.splitlines()
    assert len({len(l) for l in lines}) == 1


def test_report_serialises(hat):
    mech, problem = hat
    rep = verify_ud(mech, problem)
    d = report_to_dict(rep, mech.outcomes)
    json.dumps(d)
    assert d["status"] == "refuted"
    assert "refuted" in render_report(rep, mech.outcomes)
