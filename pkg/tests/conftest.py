import numpy as np
import pytest

from netsim.data import ActivationSet, LayerMeta, NetworkManifest


def make_set(name, layer_cols, rows=16, seed=0, layer_types=None,
             shared=None, mix=0.0):
    """Synthetic activation set; `shared` + `mix` blend in a common latent
    signal so different networks get controllable CKA similarity."""
    rng = np.random.default_rng(seed)
    matrices = []
    for cols in layer_cols:
        noise = rng.normal(size=(rows, cols))
        if shared is not None and mix > 0.0:
            lift = rng.normal(size=(shared.shape[1], cols))
            matrices.append(mix * (shared @ lift) + (1.0 - mix) * noise)
        else:
            matrices.append(noise)
    if layer_types is None:
        layer_types = ["Conv2d"] * len(layer_cols)
    layers = tuple(LayerMeta(index=i, name=f"layer{i}", layer_type=t)
                   for i, t in enumerate(layer_types))
    manifest = NetworkManifest(network_name=name, num_layers=len(layer_cols),
                               num_examples=rows, layers=layers)
    return ActivationSet(manifest=manifest, matrices=matrices)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
