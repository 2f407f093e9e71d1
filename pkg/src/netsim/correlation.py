"""Correlation measures and the per-source-network correlation scan.

Pearson, Spearman (average ranks), Kendall tau-b, and distance correlation,
applied per source network to (similarity to target, transferred success
rate) samples. Absolute coefficients are reported alongside signed ones so
anti-proportional relationships count as correlation.
"""

import csv
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .data import AttackTable, PairScore
from .errors import DataError, UndefinedCorrelationError


@dataclass(frozen=True)
class CorrelationReport:
    source_network: str
    attack_name: str
    targeted: bool
    method: str
    score_kind: str
    coefficient: float
    abs_coefficient: float
    n: int


@dataclass(frozen=True)
class ScanDiagnostic:
    source_network: str
    attack_name: str
    targeted: bool
    method: str
    reason: str


def _as_vectors(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D vectors of equal length")
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("correlation undefined on a constant vector")
    return x, y


def pearson(x, y) -> float:
    """Linear correlation coefficient in [-1, 1]."""
    x, y = _as_vectors(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    return float(np.dot(dx, dy) / np.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))


def rank_average(x) -> np.ndarray:
    """Ranks starting at 1; tied values receive the mean of their ranks."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Rank correlation: pearson of average-ranked data."""
    x, y = _as_vectors(x, y)
    return pearson(rank_average(x), rank_average(y))


def kendall_tau_b(x, y) -> float:
    """Ordinal association with tie correction.

    tau_b = (C - D) / sqrt((C + D + T_x) (C + D + T_y)) over all sample pairs,
    where T_x counts pairs tied only in x and T_y pairs tied only in y.
    """
    x, y = _as_vectors(x, y)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    upper = np.triu_indices(x.size, k=1)
    sx = dx[upper]
    sy = dy[upper]
    concordant = int(np.sum((sx * sy) > 0))
    discordant = int(np.sum((sx * sy) < 0))
    ties_x = int(np.sum((sx == 0) & (sy != 0)))
    ties_y = int(np.sum((sy == 0) & (sx != 0)))
    denom = np.sqrt(float(concordant + discordant + ties_x)
                    * float(concordant + discordant + ties_y))
    if denom == 0.0:
        raise UndefinedCorrelationError("all pairs tied: tau-b undefined")
    return float((concordant - discordant) / denom)


def _centered_distances(x: np.ndarray) -> np.ndarray:
    d = np.abs(x[:, None] - x[None, :])
    return d - d.mean(axis=0, keepdims=True) - d.mean(axis=1, keepdims=True) + d.mean()


def distance_correlation(x, y) -> float:
    """Distance correlation in [0, 1]; detects non-linear association too.

    Uses the biased V-statistic on doubly-centered pairwise distance
    matrices: dCor^2 = dCov^2 / sqrt(dVar_x^2 * dVar_y^2).
    """
    x, y = _as_vectors(x, y)
    a = _centered_distances(x)
    b = _centered_distances(y)
    dcov2 = max(float((a * b).mean()), 0.0)
    dvar_x2 = float((a * a).mean())
    dvar_y2 = float((b * b).mean())
    denom2 = dvar_x2 * dvar_y2
    if denom2 <= 0.0:
        return 0.0
    return float(np.sqrt(dcov2 / np.sqrt(denom2)))


METHODS = {
    "pearson": pearson,
    "spearman": spearman,
    "kendall": kendall_tau_b,
    "dcor": distance_correlation,
}


def correlation_scan(scores: list[PairScore], table: AttackTable, method: str,
                     score_kind: str = "cka"):
    """Correlate similarity with transferred success per (source, attack).

    For every source network and (attack, targeted) key, x holds the source's
    similarity to each target and y the success rate transferred onto that
    target, paired by target name. Returns (reports, diagnostics); groups
    with fewer than 2 targets or constant inputs land in diagnostics.
    """
    if method not in METHODS:
        raise ValueError(f"unknown correlation method {method!r}")
    func = METHODS[method]
    lookup = {}
    for s in scores:
        lookup[(s.net_a, s.net_b)] = s
        lookup[(s.net_b, s.net_a)] = s
    groups = defaultdict(dict)
    for record in table:
        if not record.transferred:
            continue
        key = (record.source_network, record.attack_name, record.targeted)
        groups[key][record.target_network] = record.success_rate
    reports, diagnostics = [], []
    for source, attack, targeted in sorted(groups, key=lambda k: (k[0], k[1], k[2])):
        by_target = groups[(source, attack, targeted)]
        xs, ys = [], []
        for target in sorted(by_target):
            pair = lookup.get((source, target))
            if pair is None:
                raise DataError(f"no pair score for ({source}, {target})")
            xs.append(pair.value(score_kind))
            ys.append(by_target[target])
        if len(xs) < 2:
            diagnostics.append(ScanDiagnostic(source, attack, targeted, method,
                                              "fewer than 2 targets"))
            continue
        try:
            coef = func(xs, ys)
        except UndefinedCorrelationError as exc:
            diagnostics.append(ScanDiagnostic(source, attack, targeted, method,
                                              str(exc)))
            continue
        reports.append(CorrelationReport(
            source_network=source, attack_name=attack, targeted=targeted,
            method=method, score_kind=score_kind, coefficient=coef,
            abs_coefficient=abs(coef), n=len(xs)))
    return reports, diagnostics


def write_scan_csv(reports, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_network", "attack", "targeted", "method",
                         "score_kind", "coefficient", "abs_coefficient", "n"])
        for r in reports:
            writer.writerow([r.source_network, r.attack_name,
                             "true" if r.targeted else "false", r.method,
                             r.score_kind, repr(r.coefficient),
                             repr(r.abs_coefficient), r.n])


def write_diagnostics_csv(diagnostics, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source_network", "attack", "targeted", "method", "reason"])
        for d in diagnostics:
            writer.writerow([d.source_network, d.attack_name,
                             "true" if d.targeted else "false", d.method, d.reason])
