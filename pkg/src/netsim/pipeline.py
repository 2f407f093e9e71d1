"""Batch pipeline: similarity, aggregation, correlation, tree, report stages.

Every stage is deterministic: unordered network pairs are canonicalized by
lexicographic name order, merges happen in sorted order, and outputs are
byte-identical for any thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import aggregate as agg
from .cka import layer_similarity_matrix, read_similarity_csv, write_similarity_csv
from .correlation import METHODS, correlation_scan, write_diagnostics_csv, write_scan_csv
from .data import (PairScore, load_activation_set, load_manifest, read_attack_csv)
from .dbs import SWEEP_RADII, pair_score, read_pair_scores, write_pair_scores
from .errors import DataError
from .heatmap import write_heatmap
from .tree import (SubsetCriteria, assemble_features, evaluate, fit,
                   train_test_split, write_metrics_csv)

PAIR_SCORES_FILE = "pair_scores.csv"


@dataclass
class RunConfig:
    data_dir: str = "."
    out_dir: str = "out"
    radii: tuple[int, ...] = SWEEP_RADII
    score_kind: str = "cka"
    bins: int = 10
    vmin: float = 0.0
    vmax: float = 1.0
    seed: int = 42
    threads: int = 1
    attack_csv: str | None = None
    max_depth: int | None = None
    criteria: SubsetCriteria = field(default_factory=SubsetCriteria)
    pair: tuple[str, str] | None = None

    def validate(self) -> "RunConfig":
        if not self.radii:
            raise ValueError("radii must be non-empty")
        if any(r < 0 for r in self.radii):
            raise ValueError("radii must be non-negative")
        if self.vmin >= self.vmax:
            raise ValueError(f"vmin must be < vmax, got {self.vmin} >= {self.vmax}")
        if self.threads < 1:
            raise ValueError("thread count must be >= 1")
        if self.bins < 1:
            raise ValueError("bins must be >= 1")
        if self.score_kind != "cka":
            if not self.score_kind.startswith("dbs:"):
                raise ValueError(f"score kind must be 'cka' or 'dbs:<radius>', "
                                 f"got {self.score_kind!r}")
            radius = int(self.score_kind.split(":", 1)[1])
            if radius not in self.radii:
                raise ValueError(f"score kind {self.score_kind!r} needs radius "
                                 f"{radius} in --radii")
        return self

    def attack_table_path(self) -> str:
        return self.attack_csv or os.path.join(self.data_dir, "attacks.csv")


def _matrix_csv_name(net_a: str, net_b: str) -> str:
    return f"sim_{net_a}__{net_b}.csv"


def discover_networks(data_dir: str) -> list[str]:
    """Subdirectories holding a manifest.json, sorted by name."""
    if not os.path.isdir(data_dir):
        raise DataError(f"data directory {data_dir!r} does not exist")
    found = []
    for name in sorted(os.listdir(data_dir)):
        if os.path.isfile(os.path.join(data_dir, name, "manifest.json")):
            found.append(name)
    return found


def cmd_sim(config: RunConfig) -> list[PairScore]:
    """Compute one similarity matrix per unordered network pair plus pair scores."""
    config.validate()
    dirs = discover_networks(config.data_dir)
    if len(dirs) < 2:
        raise DataError(f"need at least 2 activation sets in {config.data_dir!r}, "
                        f"found {len(dirs)}")
    sets = {}
    for d in dirs:
        aset = load_activation_set(os.path.join(config.data_dir, d))
        if aset.name in sets:
            raise DataError(f"duplicate network name {aset.name!r}")
        sets[aset.name] = aset
    names = sorted(sets)
    counts = {sets[n].num_examples for n in names}
    if len(counts) > 1:
        raise DataError(f"example counts differ across networks: {sorted(counts)}")
    pairs = list(combinations(names, 2))

    def compute(pair):
        a, b = pair
        matrix = layer_similarity_matrix(sets[a], sets[b])
        return matrix, pair_score(matrix, config.radii)

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(p) for p in pairs]

    os.makedirs(config.out_dir, exist_ok=True)
    scores = []
    for matrix, score in results:
        write_similarity_csv(matrix, os.path.join(
            config.out_dir, _matrix_csv_name(matrix.net_a, matrix.net_b)))
        scores.append(score)
        print(f"sim {matrix.net_a} {matrix.net_b} cka_mean={score.cka_mean:.6f} "
              f"degenerate_pairs={matrix.degenerate_pairs}")
    write_pair_scores(scores, os.path.join(config.out_dir, PAIR_SCORES_FILE),
                      config.radii)
    return scores


def _load_sim_outputs(config: RunConfig):
    path = os.path.join(config.out_dir, PAIR_SCORES_FILE)
    if not os.path.isfile(path):
        raise DataError(f"{path} not found; run the sim command first")
    scores = read_pair_scores(path)
    matrices = []
    for s in scores:
        csv_path = os.path.join(config.out_dir, _matrix_csv_name(s.net_a, s.net_b))
        if not os.path.isfile(csv_path):
            raise DataError(f"missing similarity matrix {csv_path}")
        matrices.append(read_similarity_csv(csv_path, s.net_a, s.net_b))
    return scores, matrices


def _load_manifests(config: RunConfig, names):
    manifests = {}
    for name in names:
        manifests[name] = load_manifest(os.path.join(config.data_dir, name))
    return manifests


def cmd_aggregate(config: RunConfig) -> dict:
    """Write the stats, curve, grid, type, size-delta, and extremal CSVs."""
    config.validate()
    scores, matrices = _load_sim_outputs(config)
    names = sorted({s.net_a for s in scores} | {s.net_b for s in scores})
    manifests = _load_manifests(config, names)

    # layer-level scores pool each unordered pair once
    layer_values = np.concatenate([m.values.ravel() for m in matrices])
    stats = {
        "layer_scores": agg.summary_stats(layer_values),
        "network_pair_scores": agg.summary_stats(
            [s.value(config.score_kind) for s in scores]),
    }

    # position analyses see both orientations so every network's layers count
    def oriented():
        for m in matrices:
            yield m, manifests[m.net_a], manifests[m.net_b]
            transposed = type(m)(net_a=m.net_b, net_b=m.net_a, values=m.values.T)
            yield transposed, manifests[m.net_b], manifests[m.net_a]

    curve = agg.position_curve((m, ma) for m, ma, _ in oriented())
    grid = agg.position_grid(oriented(), config.bins)
    types = agg.type_matrix(
        (m, manifests[m.net_a], manifests[m.net_b]) for m in matrices)
    deltas = agg.size_delta_series(scores, config.score_kind)
    best, worst = agg.extremal_pairs(scores, config.score_kind)

    os.makedirs(config.out_dir, exist_ok=True)
    agg.write_summary_csv(stats, os.path.join(config.out_dir, "summary_stats.csv"))
    agg.write_curve_csv(curve, os.path.join(config.out_dir, "position_curve.csv"))
    agg.write_grid_csv(grid, os.path.join(config.out_dir, "position_grid.csv"))
    agg.write_type_csv(types, os.path.join(config.out_dir, "layer_types.csv"))
    agg.write_size_delta_csv(scores, deltas,
                             os.path.join(config.out_dir, "size_delta.csv"))
    with open(os.path.join(config.out_dir, "extremal_pairs.csv"), "w",
              encoding="utf-8", newline="") as fh:
        fh.write("kind,net_a,net_b,score\n")
        fh.write(f"max,{best.net_a},{best.net_b},{best.value(config.score_kind)!r}\n")
        fh.write(f"min,{worst.net_a},{worst.net_b},{worst.value(config.score_kind)!r}\n")
    s = stats["network_pair_scores"]
    print(f"aggregate {len(scores)} pairs: mean={s.mean:.4f} median={s.median:.4f} "
          f"std={s.std:.4f} min={s.min:.4f} max={s.max:.4f}")
    print(f"most similar: {best.net_a} / {best.net_b}; "
          f"least similar: {worst.net_a} / {worst.net_b}")
    return {"stats": stats, "curve": curve, "grid": grid, "types": types,
            "deltas": deltas, "extremal": (best, worst)}


def cmd_correlate(config: RunConfig):
    """Per-source correlation scan for all four methods."""
    config.validate()
    scores, _ = _load_sim_outputs(config)
    table = read_attack_csv(config.attack_table_path())
    reports, diagnostics = [], []
    for method in sorted(METHODS):
        r, d = correlation_scan(scores, table, method, config.score_kind)
        reports.extend(r)
        diagnostics.extend(d)
    reports.sort(key=lambda r: (r.source_network, r.attack_name, r.targeted, r.method))
    diagnostics.sort(key=lambda d: (d.source_network, d.attack_name, d.targeted,
                                    d.method))
    os.makedirs(config.out_dir, exist_ok=True)
    write_scan_csv(reports, os.path.join(config.out_dir, "correlation_scan.csv"))
    write_diagnostics_csv(diagnostics,
                          os.path.join(config.out_dir, "correlation_diagnostics.csv"))
    print(f"correlate: {len(reports)} reports, {len(diagnostics)} diagnostics")
    return reports, diagnostics


def _default_battery() -> list[tuple[str, bool, SubsetCriteria]]:
    battery = []
    for targeted in (False, True):
        for label, crit in [
            ("all", SubsetCriteria(targeted=targeted)),
            ("white", SubsetCriteria(targeted=targeted, box="white")),
            ("black", SubsetCriteria(targeted=targeted, box="black")),
            ("single", SubsetCriteria(targeted=targeted, steps="single")),
            ("multi", SubsetCriteria(targeted=targeted, steps="multi")),
            ("low_std<0.1", SubsetCriteria(targeted=targeted, low_std=0.10)),
        ]:
            battery.append((label, targeted, crit))
    return battery


def cmd_tree(config: RunConfig):
    """Fit and evaluate a regression tree per subset; emit metrics + dumps."""
    config.validate()
    scores, _ = _load_sim_outputs(config)
    table = read_attack_csv(config.attack_table_path())
    single = config.criteria != SubsetCriteria()
    if single:
        subsets = [(config.criteria.label(), config.criteria.targeted,
                    config.criteria)]
    else:
        subsets = _default_battery()
    rows = []
    os.makedirs(config.out_dir, exist_ok=True)
    for label, targeted, criteria in subsets:
        dataset = assemble_features(scores, table, criteria, config.score_kind)
        if dataset.n_rows < 2:
            if single:
                raise DataError(f"subset {label!r} has {dataset.n_rows} rows, "
                                f"need at least 2")
            rows.append((label, targeted, None))
            continue
        train, test = train_test_split(dataset, 0.8, config.seed)
        model = fit(train, config.max_depth)
        metrics = evaluate(model, test, threshold=0.01,
                           baseline_mean=float(train.y.mean()))
        rows.append((label, targeted, metrics))
        flag = "any" if targeted is None else ("true" if targeted else "false")
        dump_path = os.path.join(config.out_dir,
                                 f"tree_{_safe(label)}_{flag}.txt")
        with open(dump_path, "w", encoding="utf-8") as fh:
            fh.write(model.dump())
        imp = metrics.improvement_pct
        print(f"tree {label} targeted={flag} rows={dataset.n_rows} "
              f"mse={metrics.mse:.6g} "
              f"improvement={'undefined' if imp is None else f'{imp:.2f}%'} "
              f"accuracy={metrics.threshold_accuracy:.4f}")
    write_metrics_csv(rows, os.path.join(config.out_dir, "tree_metrics.csv"))
    return rows


def cmd_report(config: RunConfig) -> list[str]:
    """Render SVG heatmaps for network scores, attacks, and layer matrices."""
    config.validate()
    scores, _ = _load_sim_outputs(config)
    names = sorted({s.net_a for s in scores} | {s.net_b for s in scores})
    index = {n: i for i, n in enumerate(names)}
    os.makedirs(config.out_dir, exist_ok=True)
    written = []

    def network_grid(kind: str) -> np.ndarray:
        grid = np.ones((len(names), len(names)), dtype=np.float64)
        for s in scores:
            value = s.value(kind)
            grid[index[s.net_a], index[s.net_b]] = value
            grid[index[s.net_b], index[s.net_a]] = value
        return grid

    kinds = ["cka"]
    if config.score_kind != "cka":
        kinds.append(config.score_kind)
    for kind in kinds:
        tag = kind.replace(":", "_r") if kind.startswith("dbs:") else kind
        path = os.path.join(config.out_dir, f"heatmap_{tag}.svg")
        write_heatmap(network_grid(kind), names, names, config.vmin, config.vmax,
                      path, title=f"network similarity ({kind})")
        written.append(path)

    attack_path = config.attack_table_path()
    if os.path.isfile(attack_path):
        table = read_attack_csv(attack_path)
        keys = sorted({(r.attack_name, r.targeted) for r in table})
        for attack, targeted in keys:
            grid = np.full((len(names), len(names)),
                           (config.vmin + config.vmax) / 2.0)
            for r in table:
                if (r.attack_name, r.targeted) != (attack, targeted):
                    continue
                if r.source_network in index and r.target_network in index:
                    grid[index[r.source_network], index[r.target_network]] = \
                        r.success_rate
            flag = "true" if targeted else "false"
            path = os.path.join(config.out_dir,
                                f"heatmap_attack_{_safe(attack)}_{flag}.svg")
            write_heatmap(grid, names, names, config.vmin, config.vmax, path,
                          title=f"{attack} targeted={flag} success rate")
            written.append(path)

    if config.pair is not None:
        a, b = sorted(config.pair)
        csv_path = os.path.join(config.out_dir, _matrix_csv_name(a, b))
        if not os.path.isfile(csv_path):
            raise DataError(f"missing similarity matrix {csv_path}")
        matrix = read_similarity_csv(csv_path, a, b)
        path = os.path.join(config.out_dir, f"heatmap_layers_{_safe(a)}__{_safe(b)}.svg")
        write_heatmap(matrix.values, [str(i) for i in range(matrix.n)],
                      [str(j) for j in range(matrix.m)], config.vmin, config.vmax,
                      path, title=f"layer similarity {a} vs {b}")
        written.append(path)

    written.extend(_render_aggregate_heatmaps(config))
    for path in written:
        print(f"report wrote {path}")
    return written


def _render_aggregate_heatmaps(config: RunConfig) -> list[str]:
    """Heatmaps for the aggregate stage's CSVs, when they exist."""
    import csv as csvmod

    written = []
    middle = (config.vmin + config.vmax) / 2.0  # empty cells render white
    grid_csv = os.path.join(config.out_dir, "position_grid.csv")
    if os.path.isfile(grid_csv):
        with open(grid_csv, newline="") as fh:
            rows = list(csvmod.DictReader(fh))
        size = max([config.bins] + [max(int(r["bin_a"]), int(r["bin_b"])) + 1
                                    for r in rows])
        values = np.full((size, size), middle)
        for r in rows:
            values[int(r["bin_a"]), int(r["bin_b"])] = float(r["mean_score"])
        labels = [f"{i / size:.2f}" for i in range(size)]
        path = os.path.join(config.out_dir, "heatmap_position_grid.svg")
        write_heatmap(values, labels, labels, config.vmin, config.vmax, path,
                      title="mean similarity by normalized layer position")
        written.append(path)

    types_csv = os.path.join(config.out_dir, "layer_types.csv")
    if os.path.isfile(types_csv):
        with open(types_csv, newline="") as fh:
            rows = list(csvmod.DictReader(fh))
        names = sorted({r["type_a"] for r in rows} | {r["type_b"] for r in rows})
        idx = {n: i for i, n in enumerate(names)}
        values = np.full((len(names), len(names)), middle)
        for r in rows:
            i, j = idx[r["type_a"]], idx[r["type_b"]]
            values[i, j] = values[j, i] = float(r["mean_score"])
        path = os.path.join(config.out_dir, "heatmap_layer_types.svg")
        write_heatmap(values, names, names, config.vmin, config.vmax, path,
                      title="mean similarity by layer type")
        written.append(path)
    return written


def _safe(token: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in token)
