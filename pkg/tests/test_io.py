import json

import numpy as np
import pytest

import nctorus.algebra as alg
from nctorus import io as nio
from nctorus.flow import FlowConfig, flow
from nctorus.verify import verify_endo_bound


def test_element_round_trip(tmp_path):
    a = alg.random_element(0.1 + 0.2, 4, radius=2, seed=0)
    path = nio.save_element(tmp_path / "a.json", a)
    data = json.loads(path.read_text())
    assert data["theta"] == "0.30000000000000004"
    b = nio.load_element(path)
    assert b.theta == a.theta and b.bandwidth == 4
    assert np.array_equal(a.coeffs, b.coeffs)


def test_element_theta_conflict():
    with pytest.raises(ValueError):
        nio.element_from_dict({"theta": 0.3, "entries": []}, theta=0.31)
    with pytest.raises(ValueError):
        nio.element_from_dict({"entries": [[1, 0, 1.0]]}, theta=0.3)
    with pytest.raises(ValueError):
        nio.element_from_dict([1, 2, 3])


def test_element_default_bandwidth():
    a = nio.element_from_dict({"theta": 0.3, "entries": [[20, 1, 1.0, 0.0]]})
    assert a.bandwidth == 20


def test_trace_jsonl(tmp_path):
    trace = flow(alg.random_unitary(0.3, 8, 0.1, seed=1), FlowConfig(max_iters=20))
    path = nio.save_trace(tmp_path / "t.jsonl", trace, {"theta": "0.3"})
    lines = nio.read_jsonl(path)
    assert lines[0]["type"] == "config" and lines[0]["theta"] == "0.3"
    assert lines[-1]["type"] == "summary" and lines[-1]["iterations"] == 20
    assert [x["iter"] for x in lines[1:-1]] == [r.iter for r in trace.records]


def test_report_with_csv_twin(tmp_path):
    rep = verify_endo_bound(0.3, 1)
    json_path, csv_path = nio.save_report(tmp_path / "sub" / "endo.json", rep)
    data = json.loads(json_path.read_text())
    assert data["passed"] and data["slacks"]
    header = csv_path.read_text().splitlines()[0]
    assert header == "a,b,c,d,det,L"
    assert not list(tmp_path.joinpath("sub").glob(".*"))


def test_nonfinite_values_become_null():
    assert json.loads(nio.dumps({"x": float("nan"), "z": 1 + 2j})) == {"x": None, "z": [1.0, 2.0]}
