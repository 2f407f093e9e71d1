#!/usr/bin/env python3
"""Linear CKA between activation matrices, step by step.

Two networks are "representationally similar" when their layers respond to
the same inputs with the same geometry. CKA scores that in [0, 1] and does
not care about orthogonal rotations or isotropic rescaling of the features.
"""

import numpy as np

from netsim import linear_cka, layer_similarity_matrix
from netsim.data import ActivationSet, LayerMeta, NetworkManifest

rng = np.random.default_rng(0)

print("== invariances ==")
x = rng.normal(size=(64, 12))          # 64 inputs, 12 features
q, _ = np.linalg.qr(rng.normal(size=(12, 12)))
print(f"CKA(X, X)          = {linear_cka(x, x):.12f}   (self similarity)")
print(f"CKA(X, 3.5 * X Q)  = {linear_cka(x, 3.5 * (x @ q)):.12f}   "
      "(rotation + scale change nothing)")
y = rng.normal(size=(64, 20))
print(f"CKA(X, random Y)   = {linear_cka(x, y):.12f}   (unrelated features)")

print()
print("== a shared signal raises the score ==")
shared = rng.normal(size=(64, 6))
for mix in (0.0, 0.3, 0.6, 0.9):
    a = mix * (shared @ rng.normal(size=(6, 10))) + (1 - mix) * rng.normal(size=(64, 10))
    b = mix * (shared @ rng.normal(size=(6, 14))) + (1 - mix) * rng.normal(size=(64, 14))
    print(f"  shared fraction {mix:.1f} -> CKA = {linear_cka(a, b):.4f}")


def tiny_network(name, widths, mix):
    layers = tuple(LayerMeta(i, f"layer{i}", "Conv2d") for i in range(len(widths)))
    manifest = NetworkManifest(name, len(widths), 64, layers)
    mats = [mix * (shared @ rng.normal(size=(6, w)))
            + (1 - mix) * rng.normal(size=(64, w)) for w in widths]
    return ActivationSet(manifest, mats)


print()
print("== layer-pair similarity matrix ==")
net_a = tiny_network("A", [8, 12, 10], mix=0.8)
net_b = tiny_network("B", [10, 6, 6, 9], mix=0.7)
matrix = layer_similarity_matrix(net_a, net_b)
print(f"S is {matrix.n} x {matrix.m}; S[i, j] = CKA(layer i of A, layer j of B)")
for row in matrix.values:
    print("  " + "  ".join(f"{v:.3f}" for v in row))
