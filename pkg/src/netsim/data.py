"""Persistent data types: manifests, activation sets, attack tables, pair scores."""

import csv
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .npyio import read_array, write_array

_LAYER_FILE = "layer_{:03d}.npy"
_LAYER_FILE_RE = re.compile(r"^layer_(\d{3,})\.npy$")

ATTACK_CSV_HEADER = ["attack", "targeted", "box", "steps",
                     "source_network", "target_network", "success_rate"]


@dataclass(frozen=True)
class LayerMeta:
    index: int
    name: str
    layer_type: str

    def normalized_position(self, num_layers: int) -> float:
        """Layer position mapped to [0, 1]; a single-layer network sits at 0."""
        if num_layers <= 1:
            return 0.0
        return self.index / (num_layers - 1)


@dataclass(frozen=True)
class NetworkManifest:
    network_name: str
    num_layers: int
    num_examples: int
    layers: tuple[LayerMeta, ...]

    def positions(self) -> list[float]:
        return [m.normalized_position(self.num_layers) for m in self.layers]


@dataclass
class ActivationSet:
    """A network's per-layer activation matrices plus metadata, layer order fixed."""
    manifest: NetworkManifest
    matrices: list[np.ndarray]

    @property
    def name(self) -> str:
        return self.manifest.network_name

    @property
    def num_layers(self) -> int:
        return self.manifest.num_layers

    @property
    def num_examples(self) -> int:
        return self.manifest.num_examples


@dataclass(frozen=True)
class AttackRecord:
    attack_name: str
    targeted: bool
    box_class: str      # "white" | "black"
    step_class: str     # "single" | "multi"
    source_network: str
    target_network: str
    success_rate: float

    @property
    def transferred(self) -> bool:
        return self.source_network != self.target_network


# An attack table is simply the ordered list of records from one CSV.
AttackTable = list[AttackRecord]


@dataclass
class SimilarityMatrix:
    """Layer-pair CKA grid for one network pair: values[i, j] = CKA(a layer i, b layer j)."""
    net_a: str
    net_b: str
    values: np.ndarray
    degenerate_pairs: int = 0

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass
class PairScore:
    """Aggregate similarity record for one unordered network pair (names sorted)."""
    net_a: str
    net_b: str
    n_layers_a: int
    n_layers_b: int
    cka_mean: float
    dbs: dict[int, float] = field(default_factory=dict)

    def value(self, score_kind: str) -> float:
        """Resolve a score-kind tag: "cka" or "dbs:<radius>"."""
        if score_kind == "cka":
            return self.cka_mean
        if score_kind.startswith("dbs:"):
            radius = int(score_kind.split(":", 1)[1])
            if radius not in self.dbs:
                raise DataError(f"pair ({self.net_a}, {self.net_b}) has no DBS score "
                                f"for radius {radius}")
            return self.dbs[radius]
        raise ValueError(f"unknown score kind {score_kind!r}")

    def layers_of(self, network: str) -> int:
        if network == self.net_a:
            return self.n_layers_a
        if network == self.net_b:
            return self.n_layers_b
        raise DataError(f"network {network!r} is not part of pair "
                        f"({self.net_a}, {self.net_b})")


def parse_manifest(payload: dict, source: str = "manifest") -> NetworkManifest:
    """Build a NetworkManifest from JSON data; unknown fields are ignored."""
    try:
        name = payload["network_name"]
        num_layers = payload["num_layers"]
        num_examples = payload["num_examples"]
        raw_layers = payload["layers"]
    except KeyError as exc:
        raise DataError(f"{source}: missing manifest field {exc}") from exc
    layers = []
    for entry in raw_layers:
        try:
            layers.append(LayerMeta(index=int(entry["index"]), name=str(entry["name"]),
                                    layer_type=str(entry["layer_type"])))
        except KeyError as exc:
            raise DataError(f"{source}: layer entry missing field {exc}") from exc
    layers.sort(key=lambda m: m.index)
    if num_layers != len(layers):
        raise DataError(f"{source}: num_layers={num_layers} but {len(layers)} layer entries")
    if [m.index for m in layers] != list(range(len(layers))):
        raise DataError(f"{source}: layer indices must be contiguous from 0")
    if num_examples < 2:
        raise DataError(f"{source}: num_examples must be >= 2, got {num_examples}")
    return NetworkManifest(network_name=str(name), num_layers=num_layers,
                           num_examples=num_examples, layers=tuple(layers))


def load_manifest(directory) -> NetworkManifest:
    path = f"{directory}/manifest.json"
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"{directory}: manifest.json not found") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from exc
    return parse_manifest(payload, source=path)


def load_activation_set(directory) -> ActivationSet:
    """Load manifest.json plus layer_###.npy files, validating every invariant."""
    import os

    manifest = load_manifest(directory)
    present = {m.group(0) for name in os.listdir(directory)
               if (m := _LAYER_FILE_RE.match(name))}
    expected = {_LAYER_FILE.format(i) for i in range(manifest.num_layers)}
    if present - expected:
        extras = ", ".join(sorted(present - expected))
        raise DataError(f"{directory}: layer files not in manifest: {extras}")
    matrices = []
    for meta in manifest.layers:
        path = os.path.join(directory, _LAYER_FILE.format(meta.index))
        if not os.path.exists(path):
            raise DataError(f"{directory}: missing layer file {_LAYER_FILE.format(meta.index)}")
        matrix = read_array(path)
        if matrix.shape[0] != manifest.num_examples:
            raise DataError(f"{path}: has {matrix.shape[0]} rows, manifest says "
                            f"{manifest.num_examples} examples")
        matrices.append(matrix)
    return ActivationSet(manifest=manifest, matrices=matrices)


def save_activation_set(aset: ActivationSet, directory, precision: str = "f64") -> None:
    """Write an activation set in the on-disk layout load_activation_set expects."""
    import os

    os.makedirs(directory, exist_ok=True)
    manifest = aset.manifest
    payload = {
        "network_name": manifest.network_name,
        "num_layers": manifest.num_layers,
        "num_examples": manifest.num_examples,
        "layers": [{"index": m.index, "name": m.name, "layer_type": m.layer_type}
                   for m in manifest.layers],
    }
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    for meta, matrix in zip(manifest.layers, aset.matrices):
        write_array(matrix, os.path.join(directory, _LAYER_FILE.format(meta.index)), precision)


def _parse_bool(token: str, path, line: int) -> bool:
    if token == "true":
        return True
    if token == "false":
        return False
    raise DataError(f"{path}:{line}: expected 'true' or 'false', got {token!r}")


def read_attack_csv(path) -> AttackTable:
    """Parse an attack-results CSV, preserving row order.

    Rejects unknown enum tokens, out-of-range success rates, and duplicate
    (attack, targeted, source, target) keys.
    """
    records: AttackTable = []
    seen: set[tuple] = set()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != ATTACK_CSV_HEADER:
            raise DataError(f"{path}: bad header {header!r}, expected {ATTACK_CSV_HEADER!r}")
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 7:
                raise DataError(f"{path}:{line}: expected 7 columns, got {len(row)}")
            attack, targeted_tok, box, steps, source, target, rate_tok = row
            targeted = _parse_bool(targeted_tok, path, line)
            if box not in ("white", "black"):
                raise DataError(f"{path}:{line}: unknown box class {box!r}")
            if steps not in ("single", "multi"):
                raise DataError(f"{path}:{line}: unknown step class {steps!r}")
            try:
                rate = float(rate_tok)
            except ValueError:
                raise DataError(f"{path}:{line}: bad success_rate {rate_tok!r}") from None
            if not np.isfinite(rate) or not 0.0 <= rate <= 1.0:
                raise DataError(f"{path}:{line}: success_rate {rate} outside [0, 1]")
            key = (attack, targeted, source, target)
            if key in seen:
                raise DataError(f"{path}:{line}: duplicate record for {key}")
            seen.add(key)
            records.append(AttackRecord(attack_name=attack, targeted=targeted,
                                        box_class=box, step_class=steps,
                                        source_network=source, target_network=target,
                                        success_rate=rate))
    return records


def write_attack_csv(records: AttackTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ATTACK_CSV_HEADER)
        for r in records:
            writer.writerow([r.attack_name, "true" if r.targeted else "false",
                             r.box_class, r.step_class, r.source_network,
                             r.target_network, repr(r.success_rate)])
