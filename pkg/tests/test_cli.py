import json

from gwquintic.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_instantons_json(capsys):
    code, out = run_cli(capsys, "instantons", "--dq", "2")
    assert code == 0
    body = json.loads(out)
    assert body["N"]["1"] == "2875/1"
    assert body["n"]["2"] == "609250/1"


def test_instantons_csv(capsys):
    code, out = run_cli(capsys, "instantons", "--dq", "2", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "degree,count,reduced_count"
    assert lines[1] == "1,2875/1,2875/1"


def test_correlator_value(capsys):
    code, out = run_cli(capsys, "correlator",
                        "--insertions", "tau_0(P),tau_0(P),tau_0(S)",
                        "--genus", "0", "--dq", "2")
    assert code == 0
    assert json.loads(out)["value"] == "1/1"


def test_verify_exit_zero_and_determinism(capsys, tmp_path):
    args = ["verify", "--suite", "mirror", "--dq", "3"]
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_config_error_exit_two(capsys):
    code, _ = run_cli(capsys, "verify", "--suite", "bogus", "--dq", "2")
    assert code == 2
    code, _ = run_cli(capsys, "correlator", "--insertions", "tau_0(Z)",
                      "--dq", "2")
    assert code == 2


def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv("GWQ_SEED", "321")
    code, out = run_cli(capsys, "free-energy", "--genus", "1",
                        "--dq", "2", "--ndesc", "2", "--dt", "3",
                        "--pad", "1", "--genus-max", "1")
    assert code == 0
    assert json.loads(out)["config"]["seed"] == 321


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dq": 2, "dt": 4, "pad": 2}))
    code, out = run_cli(capsys, "order-params", "--config", str(cfg))
    assert code == 0
    body = json.loads(out)
    assert body["config"]["dq"] == 2 and body["config"]["dt"] == 4
