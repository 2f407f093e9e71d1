"""Console entry points: export-activations and export-attacks."""

import argparse
import sys

from .attacks import export_attack_results, write_rows
from .hooks import ExportJob, export_activations


def main_activations(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="export-activations",
        description="Dump per-layer activations of a model as NPY files "
                    "plus a manifest")
    parser.add_argument("--model", required=True,
                        help="builtin (toy, toy3) or torchvision model name")
    parser.add_argument("--n", type=int, required=True, help="example count")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--synthetic", action="store_true",
                        help="use seeded noise inputs (default when no "
                             "--input-dir is given)")
    parser.add_argument("--input-dir", help="image folder to feed instead")
    parser.add_argument("--name", help="network name for the manifest")
    parser.add_argument("--hook-policy", choices=["all_modules", "leaf_modules"],
                        default="all_modules")
    parser.add_argument("--image-size", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--data-parallel", action="store_true",
                        help="wrap the model in DataParallel before hooking")
    parser.add_argument("--pretrained", action="store_true",
                        help="load zoo weights (needs network access)")
    ns = parser.parse_args(argv)
    job = ExportJob(model_name=ns.model, n_examples=ns.n, out_dir=ns.out,
                    hook_policy=ns.hook_policy, input_dir=ns.input_dir,
                    image_size=ns.image_size, seed=ns.seed,
                    data_parallel=ns.data_parallel, pretrained=ns.pretrained,
                    network_name=ns.name)
    try:
        manifest = export_activations(job)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"exported {manifest['num_layers']} layers x "
          f"{manifest['num_examples']} examples to {ns.out}")
    return 0


def main_attacks(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="export-attacks",
        description="Generate adversarial examples per source model and "
                    "record transferred success rates")
    parser.add_argument("--models", required=True,
                        help="comma-separated model names")
    parser.add_argument("--attacks", required=True,
                        help="comma-separated attack names")
    parser.add_argument("--n", type=int, required=True, help="image count")
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--targeted", action="store_true")
    parser.add_argument("--image-size", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--pretrained", action="store_true")
    ns = parser.parse_args(argv)
    try:
        rows = export_attack_results(
            [m.strip() for m in ns.models.split(",") if m.strip()],
            [a.strip() for a in ns.attacks.split(",") if a.strip()],
            ns.n, targeted=ns.targeted, image_size=ns.image_size,
            seed=ns.seed, pretrained=ns.pretrained)
        write_rows(rows, ns.out)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {len(rows)} rows to {ns.out}")
    return 0
