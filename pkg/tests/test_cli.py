import json

import pytest

from nctorus.cli import main, parse_theta


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_energy_monomials(capsys):
    code, out, _ = run(capsys, "energy", "--theta", "0.3", "--monomial", "1", "1", "--monomial", "0", "0")
    assert code == 0
    assert "39.4784176044" in out
    assert "energy 0.0000000000" in out


def test_energy_from_file(tmp_path, capsys):
    f = tmp_path / "el.json"
    f.write_text(json.dumps({"theta": 0.3, "bandwidth": 4, "entries": [[2, 1, 1.0, 0.0]]}))
    code, out, _ = run(capsys, "energy", "--theta", "0.3", "--file", str(f), "--out", str(tmp_path / "r.json"))
    assert code == 0 and "98.6960440109" in out
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["config"]["theta_text"] == "0.29999999999999999"
    assert (tmp_path / "r.csv").exists()


@pytest.mark.parametrize("content", [None, "{bad json"])
def test_energy_bad_file(tmp_path, capsys, content):
    f = tmp_path / "el.json"
    if content is not None:
        f.write_text(content)
    code, _, err = run(capsys, "energy", "--theta", "0.3", "--file", str(f))
    assert code == 2 and "error" in err


def test_bad_flags(capsys):
    assert run(capsys, "energy", "--theta", "abc", "--monomial", "1", "1")[0] == 2
    assert run(capsys, "energy", "--theta", "0.3")[0] == 2
    assert run(capsys, "energy", "--theta", "0.3", "--bandwidth", "1", "--monomial", "1", "1")[0] == 2
    assert run(capsys, "nonsense")[0] == 2


def test_verify_scalar(capsys):
    code, out, _ = run(capsys, "verify", "scalar", "--grid", "0.001")
    assert code == 0 and "0.7640" in out and "PASS" in out


def test_verify_oracle(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "oracle", "--q", "5", "--q", "8", "--q", "13",
                       "--out", str(tmp_path / "o.json"))
    assert code == 0 and "PASS" in out
    report = json.loads((tmp_path / "o.json").read_text())
    assert report["config"]["params"]["q"] == [5, 8, 13]
    assert report["stats"]["max_product_dev"] <= 1e-10


def test_verify_endo(capsys):
    code, out, _ = run(capsys, "verify", "endo", "--theta", "0.5", "--bound", "3")
    assert code == 0 and "78.9568" in out
    assert run(capsys, "verify", "endo", "--theta", "1.5")[0] == 2


def test_verify_lemma(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "lemma", "--theta", "0.3", "--trials", "6", "--seed", "3",
                       "--out", str(tmp_path / "l.json"))
    assert code == 0 and "PASS" in out
    report = json.loads((tmp_path / "l.json").read_text())
    assert report["config"]["seed"] == 3 and len(report["rows"]) == 6


def test_verify_theorem_failure_exit(capsys):
    code, out, _ = run(capsys, "verify", "theorem", "--theta", "0.3", "--trials", "1", "--max-iters", "3")
    assert code == 1 and "FAIL" in out


def test_flow_command(tmp_path, capsys):
    code, out, _ = run(capsys, "flow", "--theta", "0.3", "--class", "1", "0", "--h", "0.1",
                       "--out", str(tmp_path / "t.jsonl"), "--save-final", str(tmp_path / "final.json"))
    assert code == 0 and "converged" in out
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert json.loads(lines[-1])["status"] == "converged"
    code, out, _ = run(capsys, "energy", "--theta", "0.3", "--file", str(tmp_path / "final.json"))
    assert code == 0 and "19.739208" in out


def test_flow_bandwidth_too_small(capsys):
    assert run(capsys, "flow", "--theta", "0.3", "--class", "3", "0", "--bandwidth", "4")[0] == 2


def test_sweep(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--theta", "0.3", "--theta", "1/2", "--class", "0", "0",
                       "--seed", "1", "--trials", "1", "--out", str(tmp_path / "s.json"))
    assert code == 0
    report = json.loads((tmp_path / "s.json").read_text())
    assert [r["theta"] for r in report["rows"]] == ["0.29999999999999999", "0.5"]


def test_parse_theta():
    assert parse_theta("0.7071067811") == 0.7071067811
    assert parse_theta("2/3") == 2 / 3
