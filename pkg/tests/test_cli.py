import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from gwdual.cli import main

LF = '{"family": "linear_fractional", "params": {"p": 0.6, "q": 0.8}}'


def schema(name):
    text = resources.files("gwdual").joinpath(f"schemas/{name}.schema.json").read_text()
    return json.loads(text)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_identity_and_determinism(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", "--law", '{"family": "identity"}',
                       "--width", "4", "--window", "0", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["rows"] == [[1, 1, 1, 1]] * 3
    jsonschema.validate(doc, schema("grid"))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["simulate", "--law", LF, "--seed", "4", "--width", "16",
                     "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_overrides(tmp_path, capsys):
    law = tmp_path / "law.json"
    law.write_text(LF)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"law": str(law), "window": [2, 5], "width": 6, "seed": 3}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "8")
    doc = json.loads(out)
    assert code == 0 and doc["seed"] == 8 and doc["t_start"] == 2 and doc["width"] == 6


@pytest.mark.parametrize("argv", [
    ["simulate", "--law", "/nonexistent/law.json"],
    ["simulate"],
    ["simulate", "--law", '{"family": "bogus"}'],
    ["simulate", "--law", LF, "--window", "3", "3"],
    ["simulate", "--law", "{not json"],
    ["verify", "/nonexistent/grid.json"],
])
def test_config_errors_exit_2(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_verify_grid_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    main(["simulate", "--law", LF, "--width", "10", "--window", "0", "5", "--out", str(path)])
    capsys.readouterr()
    code, out, _ = run(capsys, "verify", str(path))
    doc = json.loads(out)
    assert code == 0 and doc["pass"]
    jsonschema.validate(doc, schema("verify"))
    assert [c["check"] for c in doc["checks"]] == [
        "siegmund", "twofold_shift", "noncrossing", "flip_correspondence"]


def test_verify_identity_and_sweep(capsys):
    code, out, _ = run(capsys, "verify", "--law", '{"family": "identity"}', "--width", "5")
    assert code == 0
    code, out, _ = run(capsys, "verify", "--law", LF, "--seeds", "30", "--width", "12",
                       "--window", "0", "4")
    doc = json.loads(out)
    assert code == 0 and doc["grids"] == 30


def test_tampered_grid(tmp_path, capsys):
    path = tmp_path / "g.json"
    main(["simulate", "--law", LF, "--width", "6", "--window", "0", "3", "--out", str(path)])
    doc = json.loads(path.read_text())
    # an edited row is still a mapping system: the checks still pass
    doc["rows"][1][2] += 3
    path.write_text(json.dumps(doc))
    assert main(["verify", str(path)]) == 0
    # a negative offspring number makes the row non-monotone
    doc["rows"][0][1] = -1
    path.write_text(json.dumps(doc))
    assert main(["verify", str(path)]) == 2


def test_dual_subcommand(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"t_start": -1, "t_end": 0, "width": 3, "seed": 0,
                                "law": None, "rows": [[2, 0, 1]]}))
    code, out, _ = run(capsys, "dual", str(path))
    doc = json.loads(out)
    assert code == 0 and doc["kind"] == "dual" and doc["rows"] == [[1, 0, 2]]
    assert doc["t_start"] == 0
    jsonschema.validate(doc, schema("grid"))
    code, out, _ = run(capsys, "dual", str(path), "--twofold")
    # determined only up to V(U(W)) = 3
    assert json.loads(out)["rows"] == [[1, 2, 0]]


def test_analyze_qhat(capsys):
    code, out, _ = run(capsys, "analyze", "qhat", "--probs", "0.5", "0.25",
                       "--tail-ratio", "0.5", "--max-rank", "4")
    doc = json.loads(out)
    assert code == 0 and doc["qhat"] == pytest.approx([1, 0.5, 0.5, 0.5])
    jsonschema.validate(doc, schema("analyze"))
    code, out, _ = run(capsys, "analyze", "qhat", "--law", LF, "--max-rank", "3")
    assert json.loads(out)["qhat"] == pytest.approx([1, 0.6, 0.6])


def test_analyze_reports_validate(capsys):
    code, out, _ = run(capsys, "analyze", "dual-dist", "--probs", "0.3", "0.4", "0.3",
                       "--samples", "20000", "--max-rank", "3")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("analyze"))
    assert code == (0 if doc["pass"] else 1)
    code, out, _ = run(capsys, "analyze", "bd-cases", "--probs", "0", "0.4", "0.6",
                       "--samples", "20000")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("analyze"))
    assert code == 0 and doc["pass"]
    code, out, _ = run(capsys, "analyze", "theorem2", "--pq", "0.3", "1", "--samples", "20000")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("analyze"))
    assert code == 0


def test_negative_control_exits_1(capsys):
    code, out, _ = run(capsys, "analyze", "dual-dist", "--probs", "0", "0.5", "0.5",
                       "--samples", "100000", "--max-rank", "4")
    assert code == 1 and not json.loads(out)["pass"]


def test_embed(capsys):
    code, out, _ = run(capsys, "embed", "--lambda", "0:0.8", "--mu", "0:0.8", "--t0", "0",
                       "--t1", "2")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("embed"))
    assert code == 0 and doc["rho"] == 0
    assert abs(doc["q"] - 1 / 2.6) < 1e-10 and doc["mc_comparison"] is None
    code, out, _ = run(capsys, "embed", "--lambda", "0:1,0.5:0.2", "--mu", "0.4",
                       "--samples", "20000")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("embed"))
    assert code == 0 and doc["mc_comparison"]["pass"]


def test_forest_export(tmp_path, capsys):
    code, out, _ = run(capsys, "forest", "--law", '{"family": "identity"}', "--width", "3",
                       "--window", "0", "2")
    assert code == 0 and out.startswith("<?xml") and "seed=0" in out
    code, out, _ = run(capsys, "forest", "--law", LF, "--format", "dot", "--kind", "dual")
    assert code == 0 and out.startswith("digraph") and "color=black" not in out


def test_subcommands_idempotent(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"v{i}.json"
        assert main(["verify", "--law", LF, "--seeds", "5", "--width", "8",
                     "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "gwdual.cli", "analyze", "qhat", "--probs",
                          "0.5", "0.5", "--max-rank", "3"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["qhat"] == [1.0, 1.0, 1.0]
