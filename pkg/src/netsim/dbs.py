"""Diagonal Box Similarity: Bresenham diagonal trace, box union, mean |CKA|.

The score walks the integer diagonal of a layer-pair similarity matrix from
cell (0, 0) to (n-1, m-1), unions a clipped (2r+1)-sized box around every
trace point, and averages the absolute similarity entries over the unique
covered cells. Large radii converge to the plain full-matrix mean.
"""

import csv
import math

import numpy as np

from .data import PairScore, SimilarityMatrix
from .errors import DataError

# Box-size sweep used throughout the reports.
SWEEP_RADII = (1, 2, 3, 5, 7, 9, 11, 13, 15, 30, 45, 60, 75, 90,
               105, 120, 150, 200, 300)


def bresenham_trace(n: int, m: int) -> list[tuple[int, int]]:
    """Integer rasterization of the segment (0,0)-(n-1,m-1).

    The longer dimension drives, yielding exactly max(n, m) points with both
    coordinates non-decreasing. Half-step ties round up.
    """
    if n < 1 or m < 1:
        raise ValueError(f"matrix dimensions must be positive, got ({n}, {m})")
    rows_drive = n > m
    major, minor = (n - 1, m - 1) if rows_drive else (m - 1, n - 1)
    points = []
    short = 0
    err = 2 * minor - major
    for k in range(major + 1):
        points.append((k, short) if rows_drive else (short, k))
        if err >= 0:
            short += 1
            err -= 2 * major
        err += 2 * minor
    return points


def box_union_mask(n: int, m: int, radius: int) -> np.ndarray:
    """Boolean n x m mask of the union of clipped boxes around the trace."""
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    mask = np.zeros((n, m), dtype=bool)
    for i, j in bresenham_trace(n, m):
        mask[max(0, i - radius):min(n, i + radius + 1),
             max(0, j - radius):min(m, j + radius + 1)] = True
    return mask


def dbs(matrix: SimilarityMatrix, radius: int) -> float:
    """Mean of |S_ij| over the union of diagonal boxes of the given radius.

    math.fsum keeps the result independent of the cell enumeration order, so
    square matrices score identically to their transpose.
    """
    mask = box_union_mask(matrix.n, matrix.m, radius)
    covered = np.abs(matrix.values)[mask]
    return math.fsum(covered) / covered.size


def dbs_sweep(matrix: SimilarityMatrix, radii=SWEEP_RADII) -> dict[int, float]:
    """DBS score per radius; increasing radii converge to network_cka_score."""
    radii = list(radii)
    if not radii:
        raise ValueError("radii must be non-empty")
    return {r: dbs(matrix, r) for r in radii}


def network_cka_score(matrix: SimilarityMatrix) -> float:
    """Network-level aggregate: mean of |S_ij| over the full matrix."""
    flat = np.abs(matrix.values).ravel()
    return math.fsum(flat) / flat.size


def pair_score(matrix: SimilarityMatrix, radii=SWEEP_RADII) -> PairScore:
    """Bundle the network score and a DBS sweep into one pair record."""
    return PairScore(net_a=matrix.net_a, net_b=matrix.net_b,
                     n_layers_a=matrix.n, n_layers_b=matrix.m,
                     cka_mean=network_cka_score(matrix),
                     dbs=dbs_sweep(matrix, radii))


def write_pair_scores(scores: list[PairScore], path, radii=SWEEP_RADII) -> None:
    radii = list(radii)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["net_a", "net_b", "n_layers_a", "n_layers_b", "cka_mean"]
                        + [f"dbs_r{r}" for r in radii])
        for s in scores:
            writer.writerow([s.net_a, s.net_b, s.n_layers_a, s.n_layers_b,
                             f"{s.cka_mean:.17g}"]
                            + [f"{s.dbs[r]:.17g}" for r in radii])


def read_pair_scores(path) -> list[PairScore]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:5] != ["net_a", "net_b", "n_layers_a", "n_layers_b", "cka_mean"]:
        raise DataError(f"{path}: not a pair-score CSV")
    radii = []
    for column in rows[0][5:]:
        if not column.startswith("dbs_r"):
            raise DataError(f"{path}: unexpected column {column!r}")
        radii.append(int(column[len("dbs_r"):]))
    scores = []
    for row in rows[1:]:
        scores.append(PairScore(
            net_a=row[0], net_b=row[1], n_layers_a=int(row[2]), n_layers_b=int(row[3]),
            cka_mean=float(row[4]),
            dbs={r: float(tok) for r, tok in zip(radii, row[5:])}))
    return scores
