"""Descriptive aggregations over similarity matrices and pair scores.

Covers the summary statistics, per-position curves and grids, layer-type
matrices, size-delta series, and extremal-pair lookup that feed the report
tables. All statistics here are population statistics.
"""

import csv
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .data import NetworkManifest, PairScore, SimilarityMatrix


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    median: float
    std: float
    min: float
    max: float
    count: int


@dataclass
class PositionGrid:
    """B x B grid over normalized positions; empty bins hold NaN means."""
    bins: int
    mean: np.ndarray
    count: np.ndarray


def summary_stats(values) -> SummaryStats:
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        raise ValueError("summary_stats needs at least one value")
    return SummaryStats(mean=float(values.mean()), median=float(np.median(values)),
                        std=float(values.std()), min=float(values.min()),
                        max=float(values.max()), count=int(values.size))


def position_curve(items) -> list[tuple[float, float]]:
    """Mean score per distinct normalized row-layer position.

    ``items`` yields (matrix, manifest of the row network); each row layer
    contributes all its scores against the partner's layers. Feed both
    orientations of every pair to cover every network's layers.
    """
    sums: dict[float, float] = defaultdict(float)
    counts: dict[float, int] = defaultdict(int)
    for matrix, manifest in items:
        _check_manifest(manifest, matrix.n, matrix.net_a)
        for i, pos in enumerate(manifest.positions()):
            sums[pos] += float(matrix.values[i].sum())
            counts[pos] += matrix.m
    return [(pos, sums[pos] / counts[pos]) for pos in sorted(sums)]


def position_grid(items, bins: int = 10) -> PositionGrid:
    """Bin every layer-pair score by the two layers' normalized positions.

    Position 1.0 clamps into the last bin; empty bins stay NaN rather than
    being zero-filled.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    total = np.zeros((bins, bins), dtype=np.float64)
    count = np.zeros((bins, bins), dtype=np.int64)
    for matrix, manifest_a, manifest_b in items:
        _check_manifest(manifest_a, matrix.n, matrix.net_a)
        _check_manifest(manifest_b, matrix.m, matrix.net_b)
        rows = _bin_indices(manifest_a.positions(), bins)
        cols = _bin_indices(manifest_b.positions(), bins)
        for i, bi in enumerate(rows):
            for j, bj in enumerate(cols):
                total[bi, bj] += matrix.values[i, j]
                count[bi, bj] += 1
    with np.errstate(invalid="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return PositionGrid(bins=bins, mean=mean, count=count)


def type_matrix(items) -> dict[tuple[str, str], tuple[float, float]]:
    """Mean score and count per unordered layer-type pair.

    Only types present in more than one network architecture are kept, per
    the report's restriction. ``items`` yields each unordered network pair
    once as (matrix, manifest_a, manifest_b).
    """
    networks_with_type: dict[str, set[str]] = defaultdict(set)
    manifests_seen: dict[str, NetworkManifest] = {}
    entries = []
    for matrix, manifest_a, manifest_b in items:
        _check_manifest(manifest_a, matrix.n, matrix.net_a)
        _check_manifest(manifest_b, matrix.m, matrix.net_b)
        manifests_seen[manifest_a.network_name] = manifest_a
        manifests_seen[manifest_b.network_name] = manifest_b
        entries.append((matrix, manifest_a, manifest_b))
    for manifest in manifests_seen.values():
        for meta in manifest.layers:
            networks_with_type[meta.layer_type].add(manifest.network_name)
    shared = {t for t, nets in networks_with_type.items() if len(nets) > 1}
    sums: dict[tuple[str, str], float] = defaultdict(float)
    counts: dict[tuple[str, str], int] = defaultdict(int)
    for matrix, manifest_a, manifest_b in entries:
        types_a = [m.layer_type for m in manifest_a.layers]
        types_b = [m.layer_type for m in manifest_b.layers]
        for i, ta in enumerate(types_a):
            if ta not in shared:
                continue
            for j, tb in enumerate(types_b):
                if tb not in shared:
                    continue
                key = (ta, tb) if ta <= tb else (tb, ta)
                sums[key] += float(matrix.values[i, j])
                counts[key] += 1
    return {key: (sums[key] / counts[key], counts[key]) for key in sorted(sums)}


def size_delta_series(scores, score_kind: str = "cka") -> list[tuple[int, float]]:
    """One (|n_a - n_b|, score) point per unordered pair, no averaging."""
    return [(abs(s.n_layers_a - s.n_layers_b), s.value(score_kind)) for s in scores]


def extremal_pairs(scores, score_kind: str = "cka") -> tuple[PairScore, PairScore]:
    """(most similar, least similar) pair; ties break on lexicographic names."""
    by_name = sorted(scores, key=lambda s: (s.net_a, s.net_b))
    if not by_name:
        raise ValueError("extremal_pairs needs at least one pair score")
    best = worst = by_name[0]
    for s in by_name[1:]:
        value = s.value(score_kind)
        if value > best.value(score_kind):
            best = s
        if value < worst.value(score_kind):
            worst = s
    return best, worst


def _check_manifest(manifest: NetworkManifest, layer_count: int, net: str) -> None:
    if manifest.num_layers != layer_count:
        raise ValueError(f"manifest for {manifest.network_name!r} has "
                         f"{manifest.num_layers} layers but matrix side {net!r} "
                         f"has {layer_count}")


def _bin_indices(positions, bins: int) -> list[int]:
    return [min(int(p * bins), bins - 1) for p in positions]


def write_summary_csv(stats_by_kind: dict[str, SummaryStats], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "mean", "median", "std", "min", "max", "count"])
        for kind in sorted(stats_by_kind):
            s = stats_by_kind[kind]
            writer.writerow([kind, repr(s.mean), repr(s.median), repr(s.std),
                             repr(s.min), repr(s.max), s.count])


def write_curve_csv(curve, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position", "mean_score"])
        for pos, mean in curve:
            writer.writerow([repr(pos), repr(mean)])


def write_grid_csv(grid: PositionGrid, path) -> None:
    """Populated bins only; a missing row is the empty-bin flag."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_a", "bin_b", "mean_score", "count"])
        for i in range(grid.bins):
            for j in range(grid.bins):
                if grid.count[i, j] > 0:
                    writer.writerow([i, j, repr(float(grid.mean[i, j])),
                                     int(grid.count[i, j])])


def write_type_csv(matrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["type_a", "type_b", "mean_score", "count"])
        for (ta, tb), (mean, count) in matrix.items():
            writer.writerow([ta, tb, repr(mean), count])


def write_size_delta_csv(scores, series, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["net_a", "net_b", "layer_delta", "score"])
        for s, (delta, value) in zip(scores, series):
            writer.writerow([s.net_a, s.net_b, delta, repr(value)])
