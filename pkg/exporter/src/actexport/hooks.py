"""Forward-hook activation export in the pipeline's on-disk layout.

Every hooked module contributes one layer_###.npy file (float32) in
forward-execution order, plus a manifest.json naming the module and its
class. Container and wrapper modules (Sequential, DataParallel, ...) fire
after their children, so they appear late in the manifest.
"""

import json
import os
import warnings
from dataclasses import dataclass

import numpy as np
import torch

from .models import build_model


@dataclass
class ExportJob:
    model_name: str
    n_examples: int
    out_dir: str
    hook_policy: str = "all_modules"   # or "leaf_modules"
    input_dir: str | None = None       # image folder; None = synthetic noise
    image_size: int = 32
    seed: int = 0
    data_parallel: bool = False
    pretrained: bool = False
    network_name: str | None = None    # manifest name; defaults to model_name

    def validate(self):
        if self.n_examples < 2:
            raise ValueError("need at least 2 examples")
        if self.hook_policy not in ("all_modules", "leaf_modules"):
            raise ValueError(f"unknown hook policy {self.hook_policy!r}")
        return self


def synthetic_batch(n: int, image_size: int, seed: int) -> torch.Tensor:
    gen = torch.Generator().manual_seed(seed)
    return torch.randn(n, 3, image_size, image_size, generator=gen)


_IMAGENET_MEAN = np.array([0.485, 0.456, 0.406], dtype=np.float32)
_IMAGENET_STD = np.array([0.229, 0.224, 0.225], dtype=np.float32)


def folder_batch(directory: str, n: int, image_size: int) -> torch.Tensor:
    """Load up to n images (sorted order), resize, imagenet-normalize."""
    from PIL import Image

    paths = sorted(
        os.path.join(root, f)
        for root, _, files in os.walk(directory)
        for f in files if f.lower().endswith((".png", ".jpg", ".jpeg", ".bmp")))
    if len(paths) < n:
        raise ValueError(f"{directory}: found {len(paths)} images, need {n}")
    arrays = []
    for path in paths[:n]:
        img = Image.open(path).convert("RGB").resize((image_size, image_size))
        arr = (np.asarray(img, dtype=np.float32) / 255.0 - _IMAGENET_MEAN) / _IMAGENET_STD
        arrays.append(arr.transpose(2, 0, 1))
    return torch.from_numpy(np.stack(arrays))


def _load_inputs(job: ExportJob) -> torch.Tensor:
    if job.input_dir is None:
        return synthetic_batch(job.n_examples, job.image_size, job.seed)
    return folder_batch(job.input_dir, job.n_examples, job.image_size)


def collect_activations(model, inputs: torch.Tensor, hook_policy: str):
    """Run one forward pass; returns ([(name, class_name, array)], skipped)."""
    fired: list[tuple[str, str, object]] = []
    handles = []
    for name, module in model.named_modules():
        if hook_policy == "leaf_modules" and any(module.children()):
            continue

        def hook(mod, _args, output, mod_name=name):
            fired.append((mod_name, type(mod).__name__, output))

        handles.append(module.register_forward_hook(hook))
    try:
        with torch.no_grad():
            model(inputs)
    finally:
        for h in handles:
            h.remove()
    n = inputs.shape[0]
    layers, skipped = [], []
    for name, class_name, output in fired:
        if not isinstance(output, torch.Tensor):
            skipped.append({"name": name, "layer_type": class_name,
                            "reason": "non-tensor output"})
            continue
        arr = output.detach().cpu().numpy()
        if arr.ndim < 2 or arr.shape[0] != n:
            skipped.append({"name": name, "layer_type": class_name,
                            "reason": f"unusable shape {arr.shape}"})
            continue
        arr = arr.reshape(n, -1)   # row-major channel/spatial flatten
        if arr.shape[1] == 0:
            skipped.append({"name": name, "layer_type": class_name,
                            "reason": "zero features"})
            continue
        layers.append((name, class_name, arr.astype(np.float32)))
    return layers, skipped


def export_activations(job: ExportJob, model=None) -> dict:
    """Export one network's activations; returns the manifest payload.

    ``model`` overrides name resolution (used for embedding and tests).
    """
    job.validate()
    if model is None:
        # seed weight init too, so the same job always emits identical files
        torch.manual_seed(job.seed)
        model = build_model(job.model_name, job.image_size, job.pretrained)
    if job.data_parallel:
        model = torch.nn.DataParallel(model)
    inputs = _load_inputs(job)
    layers, skipped = collect_activations(model, inputs, job.hook_policy)
    if not layers:
        raise RuntimeError("no usable module outputs were captured")
    for entry in skipped:
        warnings.warn(f"skipping module {entry['name']!r}: {entry['reason']}")
    os.makedirs(job.out_dir, exist_ok=True)
    manifest = {
        "network_name": job.network_name or job.model_name,
        "num_layers": len(layers),
        "num_examples": job.n_examples,
        "layers": [{"index": i, "name": name or "<root>", "layer_type": class_name}
                   for i, (name, class_name, _) in enumerate(layers)],
        "skipped_modules": skipped,
    }
    with open(os.path.join(job.out_dir, "manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for i, (_, _, arr) in enumerate(layers):
        np.save(os.path.join(job.out_dir, f"layer_{i:03d}.npy"), arr)
    return manifest
