#!/usr/bin/env python3
"""Descriptive aggregations: where in a network do layers look alike?

Builds a few synthetic networks whose early layers share more signal than
their late layers, then reproduces the standard report views: summary
statistics, the mean-score-per-position curve, the position grid, the
layer-type matrix, and size-delta / extremal-pair lookups.
"""

import numpy as np

from netsim import (extremal_pairs, layer_similarity_matrix, pair_score,
                    position_curve, position_grid, size_delta_series,
                    summary_stats, type_matrix)
from netsim.data import ActivationSet, LayerMeta, NetworkManifest

rng = np.random.default_rng(1)
shared = rng.normal(size=(64, 6))

TYPES = ["DataParallel", "Conv2d", "ReLU", "Conv2d", "Linear"]


def network(name, n_layers, base_mix):
    # early layers share more with other networks than late ones
    layers = tuple(LayerMeta(i, f"l{i}", TYPES[i % len(TYPES)])
                   for i in range(n_layers))
    mats = []
    for i in range(n_layers):
        mix = base_mix * (1.0 - 0.7 * i / max(n_layers - 1, 1))
        w = int(rng.integers(6, 14))
        mats.append(mix * (shared @ rng.normal(size=(6, w)))
                    + (1 - mix) * rng.normal(size=(64, w)))
    return ActivationSet(NetworkManifest(name, n_layers, 64, layers), mats)


nets = {name: network(name, n, mix)
        for name, n, mix in [("alpha", 5, 0.9), ("beta", 4, 0.8),
                             ("gamma", 6, 0.7), ("delta", 3, 0.6)]}
names = sorted(nets)
matrices, scores = [], []
for i, a in enumerate(names):
    for b in names[i + 1:]:
        m = layer_similarity_matrix(nets[a], nets[b])
        matrices.append(m)
        scores.append(pair_score(m, radii=(1, 5)))

print("== network-pair score statistics ==")
stats = summary_stats([s.cka_mean for s in scores])
print(f"  mean {stats.mean:.3f}  median {stats.median:.3f}  std {stats.std:.3f}"
      f"  min {stats.min:.3f}  max {stats.max:.3f}  ({stats.count} pairs)")

best, worst = extremal_pairs(scores)
print(f"  most similar:  {best.net_a} / {best.net_b} at {best.cka_mean:.3f}")
print(f"  least similar: {worst.net_a} / {worst.net_b} at {worst.cka_mean:.3f}")

print()
print("== mean score per normalized layer position ==")
manifests = {n: nets[n].manifest for n in names}
oriented = []
for m in matrices:
    oriented.append((m, manifests[m.net_a]))
    flipped = type(m)(net_a=m.net_b, net_b=m.net_a, values=m.values.T)
    oriented.append((flipped, manifests[m.net_b]))
for pos, mean in position_curve(oriented):
    bar = "#" * int(mean * 40)
    print(f"  {pos:.2f}  {mean:.3f}  {bar}")

print()
print("== position grid (3 x 3 bins, row = net A position) ==")
grid = position_grid(((m, manifests[m.net_a], manifests[m.net_b])
                      for m in matrices), bins=3)
for i in range(3):
    cells = []
    for j in range(3):
        if grid.count[i, j]:
            cells.append(f"{grid.mean[i, j]:.3f}({grid.count[i, j]:>2})")
        else:
            cells.append("  empty  ")
    print("  " + "  ".join(cells))

print()
print("== mean score per layer-type pair ==")
for (ta, tb), (mean, count) in type_matrix(
        (m, manifests[m.net_a], manifests[m.net_b]) for m in matrices).items():
    print(f"  {ta:>12} x {tb:<12} {mean:.3f}  (n={count})")

print()
print("== layer-count delta vs similarity ==")
for delta, score in size_delta_series(scores):
    print(f"  delta {delta}: score {score:.3f}")
