import json
from pathlib import Path

import pytest

from prodnet import cli
from prodnet.cli import main
from prodnet.report import dumps_csv
from prodnet.scenario import ScenarioError, load_scenario, parse_scenario

EXAMPLES = Path(__file__).resolve().parents[1] / "docs" / "examples"
INST_B = {
    "name": "INST-B",
    "categories": [1, 2],
    "consumption_shares": [0.5, 0.5],
    "requirements": [[0.5, 0.2, 0.3], [0.5, 0.3, 0.2]],
}


def _write(tmp_path, data, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def _run(tmp_path, command, scenario, *extra):
    out = tmp_path / "out"
    code = main([command, "--scenario", scenario, "--out", str(out), *extra])
    return code, out


def test_load_valid():
    sc = load_scenario(EXAMPLES / "inst_b.json")
    assert sc.econ.num_categories == 2
    assert list(sc.econ.consumption_shares) == [0.5, 0.5]
    assert sc.options.tol == 1e-9 and sc.options.epsilon == 1e-3
    assert sc.options.tie_policy == "keep_current" and sc.options.seed == 0


def test_share_sum_error():
    with pytest.raises(ScenarioError, match="consumption_shares"):
        parse_scenario({**INST_B, "consumption_shares": [0.5, 0.4]})


def test_unknown_key_suggestion():
    with pytest.raises(ScenarioError, match="lamda: unknown key.*productivity"):
        parse_scenario({**INST_B, "lamda": 1.0})
    with pytest.raises(ScenarioError, match="options.sead: unknown key.*'seed'"):
        parse_scenario({**INST_B, "options": {"sead": 1}})


def test_model_invariant_reported():
    with pytest.raises(ScenarioError, match="sum to"):
        parse_scenario({**INST_B, "requirements": [[0.9, 0.2, 0.3], [0.5, 0.3, 0.2]]})


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario(tmp_path / "nope.json")
    code, _ = _run(tmp_path, "solve", str(tmp_path / "nope.json"))
    assert code == 2


def test_solve_inst_b(tmp_path):
    code, out = _run(tmp_path, "solve", str(EXAMPLES / "inst_b.json"))
    assert code == 0
    rep = json.loads((out / "solve.json").read_text())
    assert rep["revenues"] == pytest.approx([1.0, 1.0])
    assert rep["welfare"] == pytest.approx(-2.05930, abs=1e-5)
    csv_text = (out / "solve.csv").read_text()
    assert "welfare,-2.05930602813\n" in csv_text
    assert not list(out.glob(".*tmp"))


def test_solve_inst_a(tmp_path):
    code, out = _run(tmp_path, "solve", str(EXAMPLES / "inst_a.json"), "--format", "json")
    assert code == 0
    rep = json.loads((out / "solve.json").read_text())
    assert rep["revenues"][0] == pytest.approx(5 / 3)
    assert rep["assumptions"]["intermediate_input"] is False
    assert not (out / "solve.csv").exists()


def test_poa_inst_b2(tmp_path):
    code, out = _run(tmp_path, "poa", str(EXAMPLES / "inst_b2.json"))
    assert code == 0
    rep = json.loads((out / "poa.json").read_text())
    assert rep["islands_minus_full"] == pytest.approx(0.41589, abs=1e-5)
    assert rep["anarchy_constant"] == pytest.approx(0.6)


def test_unknown_command(tmp_path):
    code, _ = _run(tmp_path, "frobnicate", str(EXAMPLES / "inst_b.json"))
    assert code == 2


@pytest.mark.parametrize(
    "command", ["solve", "welfare", "nash", "dynamics", "replicate-scan", "poa", "risk", "policy-filter"]
)
def test_commands_deterministic(tmp_path, command):
    scenario = str(EXAMPLES / "inst_b2.json")
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main([command, "--scenario", scenario, "--out", str(out)]) == 0
        stem = command.replace("-", "_")
        outs.append(((out / f"{stem}.json").read_bytes(), (out / f"{stem}.csv").read_bytes()))
    assert outs[0] == outs[1]


def test_command_needs_block(tmp_path):
    code, _ = _run(tmp_path, "poa", str(EXAMPLES / "inst_b.json"))
    assert code == 2
    code, _ = _run(tmp_path, "risk", str(EXAMPLES / "inst_b.json"))
    assert code == 2


def test_cap_exit_code(tmp_path, capsys):
    code, _ = _run(tmp_path, "poa", str(EXAMPLES / "inst_b2.json"), "--n-cap", "1")
    assert code == 1
    assert "partition cap" in capsys.readouterr().err


def test_infeasible_policy(tmp_path):
    data = json.loads((EXAMPLES / "inst_b2.json").read_text())
    data["policy"] = {"level": "firm", "prevented": [], "catalyzed": [[1, 2]]}
    code, out = _run(tmp_path, "policy-filter", _write(tmp_path, data))
    assert code == 1
    rep = json.loads((out / "policy_filter.json").read_text())
    assert rep["feasible"] is False and rep["compatible"] == []


def test_overrides(tmp_path):
    code, out = _run(tmp_path, "nash", str(EXAMPLES / "inst_b2.json"), "--epsilon", "0.01", "--tie-break", "lowest_index")
    assert code == 0
    assert json.loads((out / "nash.json").read_text())["nash"]["is_nash"] is True


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    from prodnet.verify import Suite

    def failing(sc):
        s = Suite()
        s.below("forced", 1.0, 0.0)
        return s

    monkeypatch.setattr(cli, "run_suite", failing)
    code, out = _run(tmp_path, "verify", str(EXAMPLES / "inst_b.json"))
    assert code == 3
    assert json.loads((out / "verify.json").read_text())["failed"] == ["forced"]


def test_verify_passes_on_fixtures(tmp_path):
    for name in ("inst_a", "inst_b", "inst_b2"):
        code, _ = _run(tmp_path, "verify", str(EXAMPLES / f"{name}.json"))
        assert code == 0


def test_csv_format():
    text = dumps_csv({"b": [1 / 3, True], "a": {"x": float("nan")}})
    assert text.splitlines() == ["field,value", "a.x,nan", "b[0],0.333333333333", "b[1],true"]
