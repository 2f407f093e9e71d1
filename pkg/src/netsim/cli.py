"""Command-line front end: sim, aggregate, correlate, tree, report."""

import argparse
import sys

from .dbs import SWEEP_RADII
from .pipeline import (RunConfig, cmd_aggregate, cmd_correlate, cmd_report,
                       cmd_sim, cmd_tree)
from .tree import SubsetCriteria

_COMMANDS = {
    "sim": cmd_sim,
    "aggregate": cmd_aggregate,
    "correlate": cmd_correlate,
    "tree": cmd_tree,
    "report": cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="key=value config file; flags win")
    shared.add_argument("--data-dir", help="directory of activation-set subdirectories")
    shared.add_argument("--out-dir", help="output directory")
    shared.add_argument("--radii", help="comma-separated DBS radii")
    shared.add_argument("--score-kind", help="cka or dbs:<radius>")
    shared.add_argument("--bins", type=int, help="position-grid bin count")
    shared.add_argument("--vmin", type=float, help="heatmap color floor")
    shared.add_argument("--vmax", type=float, help="heatmap color ceiling")
    shared.add_argument("--seed", type=int, help="train/test split seed")
    shared.add_argument("--threads", type=int, help="worker thread count")
    shared.add_argument("--attack-csv", help="attack-results CSV path")
    shared.add_argument("--targeted", choices=["true", "false"])
    shared.add_argument("--box", choices=["white", "black"])
    shared.add_argument("--steps", choices=["single", "multi"])
    shared.add_argument("--attacks", help="comma-separated attack names to keep")
    shared.add_argument("--low-std", type=float,
                        help="keep attacks with transferred-success std below this")
    shared.add_argument("--layer-class", choices=["small", "large"],
                        help="target-network layer-count class (boundary: 200)")
    shared.add_argument("--max-depth", type=int, help="tree depth cap (0 = mean model)")
    shared.add_argument("--pair", help="net_a,net_b layer heatmap to render")

    parser = argparse.ArgumentParser(
        prog="netsim",
        description="Layer-wise CKA similarity, DBS scores, and "
                    "transferred-attack prediction pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sim", parents=[shared],
                   help="similarity matrices + pair scores")
    sub.add_parser("aggregate", parents=[shared],
                   help="descriptive statistics CSVs")
    sub.add_parser("correlate", parents=[shared],
                   help="similarity vs success-rate correlation scan")
    sub.add_parser("tree", parents=[shared],
                   help="regression-tree prediction metrics")
    sub.add_parser("report", parents=[shared], help="SVG heatmaps")
    return parser


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip().strip("\"'")
    return values


def _pick(ns: argparse.Namespace, filecfg: dict, key: str, default=None,
          convert=None):
    value = getattr(ns, key, None)
    if value is None and key in filecfg:
        value = filecfg[key]
    if value is None:
        return default
    if convert is not None and isinstance(value, str):
        return convert(value)
    return value


def _parse_radii(token: str) -> tuple[int, ...]:
    return tuple(int(x) for x in token.split(",") if x.strip())


def _parse_bool(token: str) -> bool:
    if token not in ("true", "false"):
        raise ValueError(f"expected true or false, got {token!r}")
    return token == "true"


def build_config(ns: argparse.Namespace) -> RunConfig:
    filecfg = _read_config_file(ns.config) if ns.config else {}
    targeted = _pick(ns, filecfg, "targeted", convert=_parse_bool)
    attacks = _pick(ns, filecfg, "attacks",
                    convert=lambda s: tuple(x.strip() for x in s.split(",") if x.strip()))
    criteria = SubsetCriteria(
        targeted=targeted,
        box=_pick(ns, filecfg, "box"),
        steps=_pick(ns, filecfg, "steps"),
        attacks=attacks,
        layer_class=_pick(ns, filecfg, "layer_class"),
        low_std=_pick(ns, filecfg, "low_std", convert=float),
    )
    pair = _pick(ns, filecfg, "pair",
                 convert=lambda s: tuple(x.strip() for x in s.split(",")))
    if pair is not None and len(pair) != 2:
        raise ValueError("--pair expects exactly two comma-separated names")
    return RunConfig(
        data_dir=_pick(ns, filecfg, "data_dir", default="."),
        out_dir=_pick(ns, filecfg, "out_dir", default="out"),
        radii=_pick(ns, filecfg, "radii", default=SWEEP_RADII, convert=_parse_radii),
        score_kind=_pick(ns, filecfg, "score_kind", default="cka"),
        bins=_pick(ns, filecfg, "bins", default=10, convert=int),
        vmin=_pick(ns, filecfg, "vmin", default=0.0, convert=float),
        vmax=_pick(ns, filecfg, "vmax", default=1.0, convert=float),
        seed=_pick(ns, filecfg, "seed", default=42, convert=int),
        threads=_pick(ns, filecfg, "threads", default=1, convert=int),
        attack_csv=_pick(ns, filecfg, "attack_csv"),
        max_depth=_pick(ns, filecfg, "max_depth", convert=int),
        criteria=criteria,
        pair=pair,
    ).validate()


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        config = build_config(ns)
        _COMMANDS[ns.command](config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
