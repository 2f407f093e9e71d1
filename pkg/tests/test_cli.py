import csv
import hashlib
from pathlib import Path

import numpy as np
import pytest

from netsim.cli import main
from netsim.data import save_activation_set, write_attack_csv, AttackRecord
from netsim.dbs import read_pair_scores

from conftest import make_set


def build_data_dir(root: Path, n_nets=4, rows=16):
    rng = np.random.default_rng(2024)
    shared = rng.normal(size=(rows, 6))
    layer_plans = [[4, 6], [5, 3, 4], [6, 2, 5, 3], [4, 4, 4], [3, 7], [5, 5, 5]]
    mixes = [0.9, 0.75, 0.6, 0.45, 0.3, 0.85]
    types = [["DataParallel", "Conv2d"], ["DataParallel", "Conv2d", "Linear"],
             ["DataParallel", "Conv2d", "ReLU", "Linear"],
             ["DataParallel", "Conv2d", "Linear"], ["DataParallel", "Linear"],
             ["DataParallel", "Conv2d", "Linear"]]
    names = []
    for i in range(n_nets):
        name = f"net{chr(ord('a') + i)}"
        aset = make_set(name, layer_plans[i], rows=rows, seed=100 + i,
                        layer_types=types[i][:len(layer_plans[i])],
                        shared=shared, mix=mixes[i])
        save_activation_set(aset, root / name)
        names.append(name)
    return names


def build_attacks(root: Path, out_dir: Path, planted="linear"):
    """Attack CSV derived from the actual pair scores."""
    scores = read_pair_scores(out_dir / "pair_scores.csv")
    lookup = {}
    for s in scores:
        lookup[(s.net_a, s.net_b)] = s.cka_mean
        lookup[(s.net_b, s.net_a)] = s.cka_mean
    nets = sorted({s.net_a for s in scores} | {s.net_b for s in scores})
    records = []
    rng = np.random.default_rng(7)
    for s in nets:
        for t in nets:
            if s == t:
                continue
            sim = lookup[(s, t)]
            records.append(AttackRecord("Lin", False, "black", "multi", s, t,
                                        round(0.5 + 0.4 * sim, 6)))
            records.append(AttackRecord("Lin", True, "black", "multi", s, t,
                                        round(0.45 + 0.4 * sim, 6)))
            records.append(AttackRecord("Const", False, "white", "single", s, t,
                                        0.7))
            records.append(AttackRecord("Wild", True, "white", "multi", s, t,
                                        float(rng.uniform(0.1, 0.9))))
    path = root / "attacks.csv"
    write_attack_csv(records, path)
    return path


def tree_hash(directory: Path) -> dict:
    out = {}
    for path in sorted(directory.rglob("*")):
        if path.is_file():
            out[path.relative_to(directory)] = hashlib.sha256(
                path.read_bytes()).hexdigest()
    return out


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data"
    data.mkdir()
    build_data_dir(data)
    out = root / "out"
    args = ["--data-dir", str(data), "--out-dir", str(out), "--radii", "1,2,5"]
    assert main(["sim"] + args) == 0
    build_attacks(data, out)
    return data, out, args


def test_sim_outputs(workspace):
    data, out, args = workspace
    matrices = sorted(p.name for p in out.glob("sim_*.csv"))
    assert len(matrices) == 6  # C(4,2) unordered pairs
    assert matrices[0] == "sim_neta__netb.csv"
    scores = read_pair_scores(out / "pair_scores.csv")
    assert len(scores) == 6
    assert all(set(s.dbs) == {1, 2, 5} for s in scores)
    assert all(0.0 <= s.cka_mean <= 1.0 for s in scores)
    # canonical orientation: net_a < net_b
    assert all(s.net_a < s.net_b for s in scores)


def test_sim_rerun_is_byte_identical(workspace, tmp_path):
    data, out, _ = workspace
    again = tmp_path / "out2"
    assert main(["sim", "--data-dir", str(data), "--out-dir", str(again),
                 "--radii", "1,2,5"]) == 0
    first = {k: v for k, v in tree_hash(out).items()
             if str(k).startswith(("sim_", "pair_scores"))}
    second = tree_hash(again)
    assert first == second


def test_sim_needs_two_networks(tmp_path, capsys):
    lonely = tmp_path / "data"
    lonely.mkdir()
    build_data_dir(lonely, n_nets=1)
    code = main(["sim", "--data-dir", str(lonely), "--out-dir",
                 str(tmp_path / "out")])
    assert code == 1
    err = capsys.readouterr().err
    assert err.startswith("error: ") and err.count("\n") == 1


def test_sim_rejects_mismatched_example_counts(tmp_path, capsys):
    data = tmp_path / "data"
    data.mkdir()
    save_activation_set(make_set("a", [3], rows=10, seed=1), data / "a")
    save_activation_set(make_set("b", [3], rows=12, seed=2), data / "b")
    assert main(["sim", "--data-dir", str(data), "--out-dir",
                 str(tmp_path / "out")]) == 1
    assert "example counts" in capsys.readouterr().err


def test_aggregate_outputs(workspace):
    data, out, args = workspace
    assert main(["aggregate"] + args) == 0
    for name in ["summary_stats.csv", "position_curve.csv", "position_grid.csv",
                 "layer_types.csv", "size_delta.csv", "extremal_pairs.csv"]:
        assert (out / name).is_file(), name
    with open(out / "summary_stats.csv") as fh:
        rows = {r["kind"]: r for r in csv.DictReader(fh)}
    assert set(rows) == {"layer_scores", "network_pair_scores"}
    assert 0.0 <= float(rows["layer_scores"]["mean"]) <= 1.0
    with open(out / "extremal_pairs.csv") as fh:
        extremes = list(csv.DictReader(fh))
    assert [r["kind"] for r in extremes] == ["max", "min"]
    assert float(extremes[0]["score"]) >= float(extremes[1]["score"])


def test_aggregate_without_sim_fails(tmp_path, capsys):
    assert main(["aggregate", "--data-dir", str(tmp_path), "--out-dir",
                 str(tmp_path / "nope")]) == 1
    assert "sim" in capsys.readouterr().err


def test_correlate_planted_linear(workspace):
    data, out, args = workspace
    assert main(["correlate"] + args) == 0
    with open(out / "correlation_scan.csv") as fh:
        rows = list(csv.DictReader(fh))
    lin = [r for r in rows if r["attack"] == "Lin" and r["method"] == "pearson"]
    assert len(lin) == 8  # 4 sources x (targeted, non-targeted)
    for r in lin:
        assert abs(float(r["coefficient"]) - 1.0) < 1e-6
        assert r["n"] == "3"
    # constant-success attack lands in diagnostics for every method
    with open(out / "correlation_diagnostics.csv") as fh:
        diags = list(csv.DictReader(fh))
    const = [r for r in diags if r["attack"] == "Const"]
    assert len(const) == 16  # 4 sources x 4 methods
    # sorted output: source, attack, targeted, method
    keys = [(r["source_network"], r["attack"], r["targeted"], r["method"])
            for r in rows]
    assert keys == sorted(keys)


def test_tree_battery_and_subsets(workspace):
    data, out, args = workspace
    assert main(["tree"] + args) == 0
    with open(out / "tree_metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 12  # 6 subsets x targeted true/false
    by_key = {(r["subset"], r["targeted"]): r for r in rows}
    # black subset contains only the planted linear attack: near-perfect fit
    black = by_key[("black", "false")]
    assert float(black["mse_improvement_pct"]) > 50.0
    # single-step subset is the constant attack when non-targeted: baseline 0
    single = by_key[("single", "false")]
    assert single["mse_improvement_pct"] == "nan"
    # targeted single-step subset is empty -> error row
    assert by_key[("single", "true")]["mse"] == "nan"
    dumps = list(out.glob("tree_*.txt"))
    assert dumps, "expected tree dump files"


def test_tree_single_subset_and_depth0(workspace, tmp_path):
    data, out, args = workspace
    solo = tmp_path / "solo"
    base = ["tree", "--data-dir", str(data), "--out-dir", str(out),
            "--radii", "1,2,5"]
    assert main(base + ["--box", "black", "--targeted", "false",
                        "--max-depth", "0"]) == 0
    with open(out / "tree_metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert abs(float(rows[0]["mse_improvement_pct"])) < 5.0  # mean model


def test_tree_empty_single_subset_fails(workspace, capsys):
    data, out, args = workspace
    assert main(["tree"] + args + ["--steps", "single", "--targeted",
                                   "true"]) == 1
    assert "error: " in capsys.readouterr().err


def test_report_outputs(workspace):
    data, out, args = workspace
    assert main(["aggregate"] + args) == 0
    assert main(["report"] + args + ["--score-kind", "dbs:5",
                                     "--pair", "neta,netb"]) == 0
    assert (out / "heatmap_cka.svg").is_file()
    assert (out / "heatmap_dbs_r5.svg").is_file()
    assert (out / "heatmap_attack_Lin_false.svg").is_file()
    assert (out / "heatmap_layers_neta__netb.svg").is_file()
    # the aggregate CSVs feed heatmaps too
    assert (out / "heatmap_position_grid.svg").is_file()
    assert (out / "heatmap_layer_types.svg").is_file()
    svg = (out / "heatmap_cka.svg").read_text()
    assert svg.startswith("<svg") and "neta" in svg


def test_report_rejects_bad_range(workspace, capsys):
    data, out, args = workspace
    assert main(["report"] + args + ["--vmin", "0.9", "--vmax", "0.2"]) == 1
    assert "vmin" in capsys.readouterr().err


def test_config_file_flags_win(workspace, tmp_path):
    data, out, args = workspace
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        f"data_dir = {data}\n"
        f"out_dir = {tmp_path / 'from_file'}\n"
        "radii = 1,2,5\n"
        "# comment line\n"
        "threads = 2\n")
    override = tmp_path / "override"
    assert main(["sim", "--config", str(cfg), "--out-dir", str(override)]) == 0
    assert not (tmp_path / "from_file").exists()
    assert (override / "pair_scores.csv").is_file()
    scores = read_pair_scores(override / "pair_scores.csv")
    assert set(scores[0].dbs) == {1, 2, 5}  # radii came from the file


def test_bad_score_kind_fails(workspace, capsys):
    data, out, args = workspace
    assert main(["report"] + args + ["--score-kind", "rbf"]) == 1
    assert "score kind" in capsys.readouterr().err
