#!/usr/bin/env python3
"""Four ways to ask "does similarity predict attack transfer?".

Pearson sees linear trends, Spearman and Kendall see monotone ones,
distance correlation sees any dependence at all. The per-source scan then
applies one method per source network across an attack table.
"""

import numpy as np

from netsim import (correlation_scan, distance_correlation, kendall_tau_b,
                    pearson, spearman)
from netsim.data import AttackRecord, PairScore

rng = np.random.default_rng(3)

print("== the four coefficients on shaped data ==")
x = np.linspace(-2.0, 2.0, 21)
cases = {
    "linear   y = 2x+1": 2 * x + 1,
    "monotone y = x^3 ": x ** 3,
    "U-shape  y = x^2 ": x ** 2,
    "noise            ": rng.normal(size=x.size),
}
print(f"{'relationship':<22} {'pearson':>8} {'spearman':>9} {'kendall':>8} {'dcor':>7}")
for label, y in cases.items():
    print(f"{label:<22} {pearson(x, y):>8.3f} {spearman(x, y):>9.3f} "
          f"{kendall_tau_b(x, y):>8.3f} {distance_correlation(x, y):>7.3f}")
print("note: the U-shape hides from the first three but not from dcor.")

print()
print("== per-source scan over an attack table ==")
nets = ["alex", "dense", "reg", "squeeze", "vgg"]
scores = []
for i, a in enumerate(nets):
    for b in nets[i + 1:]:
        scores.append(PairScore(a, b, 10 + 5 * i, 12, float(rng.uniform(0.3, 0.6))))
lookup = {}
for s in scores:
    lookup[(s.net_a, s.net_b)] = s.cka_mean
    lookup[(s.net_b, s.net_a)] = s.cka_mean

records = []
for src in nets:
    for dst in nets:
        if src == dst:
            continue
        sim = lookup[(src, dst)]
        # "tracks": success follows similarity; "flat": it does not
        records.append(AttackRecord("tracks", False, "black", "multi", src, dst,
                                    round(0.4 + 0.5 * sim, 4)))
        records.append(AttackRecord("flat", False, "white", "single", src, dst,
                                    round(float(rng.uniform(0.85, 0.95)), 4)))

for method in ("pearson", "spearman", "kendall", "dcor"):
    reports, diagnostics = correlation_scan(scores, records, method)
    tracked = [r.abs_coefficient for r in reports if r.attack_name == "tracks"]
    flat = [r.abs_coefficient for r in reports if r.attack_name == "flat"]
    print(f"  {method:>8}: |coef| tracks={np.mean(tracked):.3f} "
          f"flat={np.mean(flat):.3f}  ({len(diagnostics)} diagnostics)")
print("the planted attack correlates ~1 for every source; the flat one does not.")
