"""Command-line front end.

Subcommands::

    tdmasim run     --config exp.json [--seed N] [--clean-start]
                    [--trace out.ndjson[.gz]] [--metrics out.json]
    tdmasim sweep   --configs 'exps/*.json' --out sweep.csv
    tdmasim verify  --trace out.ndjson[.gz]
    tdmasim oracle  --topology topo.json [--names "p=name,..."]

Every subcommand exits 0 exactly when its validators pass.
"""
from __future__ import annotations

import argparse
import glob
import json
import sys
from typing import List, Optional

from . import harness, validators
from .harness import ExperimentConfig
from .topology import Topology


def _cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_json_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.clean_start:
        config.clean_start = True
    if args.superframes is not None:
        config.superframes = args.superframes
    if args.trace:
        config.trace_path = args.trace
    if args.metrics:
        config.metrics_path = args.metrics
    metrics = harness.run(config)
    print(json.dumps(metrics.to_dict(), indent=2, sort_keys=True))
    ok, reasons = metrics.passes()
    for reason in reasons:
        print(f"FAIL {reason}", file=sys.stderr)
    return 0 if ok else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    paths = sorted(glob.glob(args.configs))
    if not paths:
        print(f"no config files match {args.configs!r}", file=sys.stderr)
        return 2
    configs = []
    for path in paths:
        base = ExperimentConfig.from_json_file(path)
        for seed in range(args.seeds):
            cfg = ExperimentConfig.from_dict(base.to_dict())
            cfg.seed = base.seed + seed
            configs.append(cfg)
    rows = harness.sweep(configs, out_csv=args.out)
    bad = [r for r in rows if str(r["status"]).startswith(("error", "not-converged"))]
    for r in rows:
        print(
            f"n={r['n']} seed={r['seed']} {r['status']}"
            f" global={r['global_time']} median_local={r['median_local']}"
        )
    if args.out:
        print(f"wrote {args.out}")
    return 1 if bad else 0


def _cmd_verify(args: argparse.Namespace) -> int:
    metrics = None
    if args.metrics:
        with open(args.metrics, "r", encoding="utf-8") as fh:
            metrics = json.load(fh)
    problems = harness.verify_trace(args.trace, metrics)
    for msg in problems:
        print(f"FAIL {msg}", file=sys.stderr)
    if not problems:
        print("trace ok")
    return 1 if problems else 0


def _parse_names(spec: Optional[str], topology: Topology) -> Optional[dict]:
    if not spec:
        return None
    names = {}
    for part in spec.split(","):
        key, _, val = part.partition("=")
        names[int(key)] = int(val)
    missing = [p for p in topology.nodes if p not in names]
    if missing:
        raise SystemExit(f"names missing for nodes {missing}")
    return names


def _cmd_oracle(args: argparse.Namespace) -> int:
    topology = Topology.load(args.topology)
    n = len(topology.nodes)
    out = {"n": n, "delta": topology.delta}
    if n <= args.max_nodes:
        sets = validators.brute_force_mis(topology, max_nodes=args.max_nodes)
        out["maximal_independent_sets"] = sorted(sorted(s) for s in sets)
        out["min_d2_colors"] = validators.brute_force_min_d2_coloring(
            topology, max_nodes=args.max_nodes
        )
    else:
        out["note"] = f"{n} nodes exceed --max-nodes {args.max_nodes}; skipped brute force"
    names = _parse_names(args.names, topology)
    if names is not None:
        oracle = validators.fixed_point_oracle(topology, names)
        out["fixed_point"] = {
            "leaders": sorted(p for p in topology.nodes if oracle.leaders[p]),
            "colors": {str(p): oracle.colors[p] for p in topology.nodes},
            "bases": {str(p): oracle.bases[p] for p in topology.nodes},
            "intervals": {
                str(p): oracle.itvls[p].to_json() for p in topology.nodes
            },
        }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tdmasim", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("--config", required=True, help="experiment JSON file")
    p_run.add_argument("--seed", type=int, default=None, help="override the seed")
    p_run.add_argument("--superframes", type=int, default=None, help="override run length")
    p_run.add_argument(
        "--clean-start", action="store_true",
        help="start from zeroed state instead of arbitrary initial values",
    )
    p_run.add_argument("--trace", default=None, help="write NDJSON trace here (.gz ok)")
    p_run.add_argument("--metrics", default=None, help="write metrics JSON here")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run many configs, aggregate to CSV")
    p_sweep.add_argument("--configs", required=True, help="glob of config JSON files")
    p_sweep.add_argument("--seeds", type=int, default=1, help="seeds per config")
    p_sweep.add_argument("--out", default=None, help="CSV output path")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="re-check a recorded trace")
    p_verify.add_argument("--trace", required=True, help="NDJSON trace path")
    p_verify.add_argument(
        "--metrics", help="metrics JSON to cross-check against the replay"
    )
    p_verify.set_defaults(fn=_cmd_verify)

    p_oracle = sub.add_parser("oracle", help="brute-force ground truth for a topology")
    p_oracle.add_argument("--topology", required=True, help="topology JSON file")
    p_oracle.add_argument(
        "--max-nodes", type=int, default=13,
        help="largest size the exponential searches will attempt",
    )
    p_oracle.add_argument(
        "--names", default=None,
        help="comma-separated p=name pairs; adds the predicted fixed point",
    )
    p_oracle.set_defaults(fn=_cmd_oracle)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
