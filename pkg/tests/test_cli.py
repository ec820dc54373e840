import json

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from sraembed.cli import main
from sraembed.maps import embedding_from_csv
from sraembed.metric_core import load_space, save_space, validate_metric


def _gen(tmp_path, spec, name="space.json"):
    spec_path = tmp_path / (name + ".spec")
    spec_path.write_text(json.dumps(spec))
    out = tmp_path / name
    assert main(["gen", str(spec_path), "-o", str(out)]) == 0
    return out


@pytest.fixture
def line5(tmp_path):
    return _gen(tmp_path, {"family": "line", "n": 5})


def test_validate(line5, capsys):
    assert main(["validate", str(line5)]) == 0
    assert capsys.readouterr().out.startswith("valid: 5 points")


def test_validate_rejects_triangle_violation(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,c\n0,1,3\n1,0,1\n3,1,0\n")
    assert main(["validate", str(bad)]) == 1
    assert "(0, 2, 1)" in capsys.readouterr().err


def test_usage_errors(line5, tmp_path):
    assert main(["validate", str(tmp_path / "missing.json")]) == 2
    assert main(["analyze", str(line5), "--alpha", "2"]) == 2
    assert main(["embed", str(line5)]) == 2
    assert main(["nonsense"]) == 2


def test_analyze_line(line5, capsys):
    capsys.readouterr()
    assert main(["analyze", str(line5), "--alpha", "0.5"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["sra_free_k"] == 3 and out["n"] == 5
    assert len(out["largest_sra_subset"]) == 2
    assert main(["analyze", str(line5), "--alpha", "0.5", "--k", "4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["core"] == ["p0", "p1", "p2", "p3", "p4"]


def test_embed_and_audit(line5, tmp_path, capsys):
    out = tmp_path / "emb.csv"
    assert main(["embed", str(line5), "--k", "3", "--alpha", "0.5", "-o", str(out)]) == 0
    labels, values = embedding_from_csv(out.read_text())
    assert labels == ["p0", "p1", "p2", "p3", "p4"] and len(values) == 5
    ledger = tmp_path / "emb.csv.ledger.json"
    assert json.loads(ledger.read_text())["k"] == 3
    capsys.readouterr()
    assert main(["audit", str(line5), str(out), "--ledger", str(ledger)]) == 0
    assert json.loads(capsys.readouterr().out)["passed"]


def test_embed_refuses_sra_subset(tmp_path, capsys):
    flake = _gen(tmp_path, {"family": "snowflake_line", "n": 5, "exponent": 0.5})
    assert main(["embed", str(flake), "--k", "4", "--alpha", "0.5", "-o", str(tmp_path / "e.csv")]) == 1
    assert "NotSraFree" in capsys.readouterr().err


def test_audit_fails_on_a_bad_bound(line5, tmp_path):
    emb = tmp_path / "emb.csv"
    emb.write_text("label,c0\np0,0\np1,1\np2,3\np3,4\np4,5\n")
    ledger = tmp_path / "ledger.json"
    ledger.write_text(json.dumps({"theoretical_bound": 1.5, "scale": 1.0}))
    assert main(["audit", str(line5), str(emb), "--ledger", str(ledger)]) == 1
    assert main(["audit", str(line5), str(emb)]) == 0


@pytest.mark.parametrize("command", ["extend", "assouad"])
def test_extension_commands(tmp_path, capsys, command):
    space = _gen(tmp_path, {"family": "euclidean_cloud", "n": 14, "seed": 3})
    capsys.readouterr()
    out, dump = tmp_path / "map.csv", tmp_path / "dump.json"
    argv = [command, str(space), "--subset", "p0,p5", "--theta", "0.5", "-o", str(out), "--dump", str(dump)]
    assert main(argv) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] and all(c["passed"] for c in report["checks"])
    assert report["subset"] == ["p0", "p5"]
    labels, values = embedding_from_csv(out.read_text())
    assert len(labels) == 14 and values.shape[1] == report["dimension"]
    assert json.loads(dump.read_text())["dim"] >= 0
    if command == "extend":
        assert report["agrees_on_subset"]


def test_extend_with_phi_file(tmp_path, capsys):
    space_path = _gen(tmp_path, {"family": "euclidean_cloud", "n": 10, "seed": 8})
    capsys.readouterr()
    phi = tmp_path / "phi.csv"
    phi.write_text("label,c0\np1,0\np2,2\n")
    argv = ["extend", str(space_path), "--subset", "p1,p2", "--theta", "1", "--phi", str(phi)]
    assert main(argv) == 0
    assert json.loads(capsys.readouterr().out)["passed"]
    assert main(argv[:-1] + [str(tmp_path / "none.csv")]) == 2
    assert main(["extend", str(space_path), "--subset", "zz", "--theta", "1"]) == 2


def test_gen_csv_and_seed_override(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"family": "euclidean_cloud", "n": 6}))
    a, b = tmp_path / "a.csv", tmp_path / "b.json"
    assert main(["gen", str(spec), "-o", str(a), "--seed", "9"]) == 0
    assert main(["gen", str(spec), "-o", str(b), "--seed", "9"]) == 0
    assert load_space(a) == load_space(b)
    spec.write_text(json.dumps({"family": "nope", "n": 6}))
    assert main(["gen", str(spec), "-o", str(a)]) == 1


@settings(max_examples=10, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    st.sampled_from(["line", "snowflake_line", "euclidean_cloud", "grid_l1"]),
    st.integers(1, 9),
    st.integers(0, 1000),
)
def test_gen_then_validate(tmp_path, family, n, seed):
    spec = {"family": family, "n": min(n, 3) if family == "grid_l1" else n, "seed": seed}
    if family == "snowflake_line":
        spec["exponent"] = 0.5
    path = _gen(tmp_path, spec, f"{family}-{n}-{seed}.json")
    assert main(["validate", str(path)]) == 0


def test_thread_setting(line5, monkeypatch, capsys):
    monkeypatch.setenv("SRA_EMBED_THREADS", "0")
    assert main(["analyze", str(line5), "--alpha", "0.5", "--k", "4"]) == 0
    monkeypatch.setenv("SRA_EMBED_THREADS", "x")
    assert main(["analyze", str(line5), "--alpha", "0.5", "--k", "4"]) == 2


def test_labels_survive_round_trip(tmp_path, capsys):
    space = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]], ["x", "y", "z"])
    path = tmp_path / "s.json"
    save_space(space, path)
    out = tmp_path / "e.csv"
    assert main(["embed", str(path), "--k", "3", "--alpha", "0.3", "-o", str(out)]) == 0
    assert embedding_from_csv(out.read_text())[0] == ["x", "y", "z"]
