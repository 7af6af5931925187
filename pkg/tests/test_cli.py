import json
import subprocess
import sys

import pytest

from fairtree import Dendrogram, fixture_path
from fairtree.cli import main

FIXTURE_FLAGS = [
    "--input", str(fixture_path()),
    "--numeric-cols", "f0,f1",
    "--color-col", "color",
    "--color-map", "blue=1,red=2",
]


def run_cli(args):
    return main(args)


def strip_timings(payload):
    if "reports" in payload:
        for r in payload["reports"]:
            r.pop("timings_ms", None)
    else:
        payload.pop("timings_ms", None)
    return payload


def test_run_on_fixture(tmp_path):
    out = tmp_path / "report.json"
    code = run_cli(["run", *FIXTURE_FLAGS, "--h", "4", "--k", "2",
                    "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["ratio_cost"] >= 0.0
    assert payload["audit"]["ok"] is True
    assert payload["params"]["h"] == 4
    assert sum(payload["histogram"]["counts"]) >= 1
    hist_csv = out.with_suffix(".hist.csv")
    assert hist_csv.exists()
    assert hist_csv.read_text().startswith("bin_midpoint,count")


def test_run_deterministic_modulo_timings(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run_cli(["run", *FIXTURE_FLAGS, "--seed", "5",
                        "--out", str(path)]) == 0
    pa = strip_timings(json.loads(a.read_text()))
    pb = strip_timings(json.loads(b.read_text()))
    assert json.dumps(pa, sort_keys=True) == json.dumps(pb, sort_keys=True)


def test_run_replications_aggregate(tmp_path, synth_csv):
    out = tmp_path / "report.json"
    code = run_cli(["run", "--input", synth_csv,
                    "--numeric-cols", "f0,f1,f2,f3",
                    "--color-col", "color", "--color-map", "blue=1,red=2",
                    "--n", "64", "--seed", "0", "--replications", "3",
                    "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload["reports"]) == 3
    agg = payload["aggregate"]
    assert agg["replications"] == 3
    assert agg["ratio_cost_mean"] > 0.0
    assert "ratio_cost_stderr" in agg
    seeds = [r["params"]["seed"] for r in payload["reports"]]
    assert seeds == [0, 1, 2]


def test_audit_on_run_output(tmp_path):
    tree_path = tmp_path / "fair.json"
    assert run_cli(["run", *FIXTURE_FLAGS, "--emit-tree", str(tree_path),
                    "--out", str(tmp_path / "r.json")]) == 0
    code = run_cli(["audit", *FIXTURE_FLAGS, "--tree", str(tree_path)])
    assert code == 0


def test_audit_detects_moved_leaf(tmp_path, capsys):
    tree_path = tmp_path / "fair.json"
    assert run_cli(["run", *FIXTURE_FLAGS, "--emit-tree", str(tree_path),
                    "--out", str(tmp_path / "r.json")]) == 0
    payload = json.loads(tree_path.read_text())
    for node in payload["nodes"]:
        if node.get("leaf") == 0:
            node["leaf"] = 99      # point id no longer matches the dataset
            break
    tree_path.write_text(json.dumps(payload))
    code = run_cli(["audit", *FIXTURE_FLAGS, "--tree", str(tree_path)])
    assert code == 3
    out = json.loads(capsys.readouterr().out)
    assert out["conservation_ok"] is False


def test_audit_vanilla_tree_reports_fairness_violations(tmp_path, synth_csv, capsys):
    # build the unfair baseline tree by hand and audit it with tight bounds
    from fairtree import IngestConfig, average_linkage, build_similarity, load_csv, subsample
    ds = load_csv(IngestConfig(path=synth_csv,
                               numeric_cols=["f0", "f1", "f2", "f3"],
                               color_col="color",
                               color_map={"blue": 1, "red": 2}))
    sample = subsample(ds, 64, seed=0)
    vanilla = average_linkage(build_similarity(sample))
    tree_path = tmp_path / "vanilla.json"
    tree_path.write_text(vanilla.to_json())
    code = run_cli(["audit", "--input", synth_csv,
                    "--numeric-cols", "f0,f1,f2,f3",
                    "--color-col", "color", "--color-map", "blue=1,red=2",
                    "--n", "64", "--seed", "0", "--tree", str(tree_path),
                    "--alpha", "0.06,0.5", "--beta", "0.25,0.94"])
    assert code == 3
    out = json.loads(capsys.readouterr().out)
    assert out["fairness_ok"] is False
    assert out["fairness_violations"]


def test_malformed_tree_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = run_cli(["audit", *FIXTURE_FLAGS, "--tree", str(bad)])
    assert code == 2


def test_missing_input_is_data_error(tmp_path):
    code = run_cli(["run", "--input", str(tmp_path / "nope.csv"),
                    "--numeric-cols", "x", "--color-col", "c",
                    "--color-map", "b=1"])
    assert code == 2


def test_usage_error():
    assert run_cli(["run", "--numeric-cols", "x"]) == 1


def test_console_script_runs(tmp_path):
    out = tmp_path / "report.json"
    proc = subprocess.run(
        [sys.executable, "-m", "fairtree.cli", "run", *FIXTURE_FLAGS,
         "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()


def test_cli_does_not_mutate_input(tmp_path):
    src = fixture_path().read_text()
    assert run_cli(["run", *FIXTURE_FLAGS, "--out", str(tmp_path / "r.json")]) == 0
    assert fixture_path().read_text() == src


def test_emitted_tree_round_trips(tmp_path):
    tree_path = tmp_path / "fair.json"
    assert run_cli(["run", *FIXTURE_FLAGS, "--emit-tree", str(tree_path),
                    "--out", str(tmp_path / "r.json")]) == 0
    tree = Dendrogram.from_json(tree_path.read_text())
    assert tree.n_leaves == 16
