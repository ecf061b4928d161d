"""Sweep network size and compare local convergence times.

Convergence here is *local*: each node's stamp is the superframe after
which its own 3-hop neighborhood never changes again. On geometric
networks with bounded degree, the per-node median should barely move as
the network grows — a node's settling time depends on its neighborhood,
not on the diameter.

Usage: python3 demos/04_scaling_sweep.py [--sizes 25 100] [--seeds 6]
"""

import argparse
import math
import statistics

from tdmasim import ExperimentConfig, GeometricSpec, SuperframeConfig, sweep

SUPERFRAME = SuperframeConfig(
    tdma_slots=32, contention_minislots=32, kappa=64, beta_max=32, max_age=24
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[25, 100])
    parser.add_argument("--seeds", type=int, default=6)
    parser.add_argument("--csv", default=None, help="optional output CSV path")
    args = parser.parse_args()

    configs = []
    for n in args.sizes:
        radius = math.sqrt(6.0 / (math.pi * n))  # mean degree about 6
        for seed in range(args.seeds):
            configs.append(
                ExperimentConfig(
                    topology=GeometricSpec(n=n, radius=radius, delta=8, seed=seed),
                    superframe=SUPERFRAME,
                    superframes=3000,
                    seed=seed,
                    tdma_load="off",
                )
            )

    rows = sweep(configs, out_csv=args.csv)

    print(f"{'n':>5s} {'seed':>5s} {'status':>10s} {'global':>7s} "
          f"{'median-local':>12s} {'sf-run':>7s} {'wall-s':>7s}")
    per_n = {}
    for row in rows:
        if row["seed"] == "aggregate":
            continue
        wall = f"{float(row['wall_seconds']):.2f}" if row["wall_seconds"] != "" else "-"
        print(f"{str(row['n']):>5} {str(row['seed']):>5} {row['status']:>13} "
              f"{str(row['global_time']):>7} {str(row['median_local']):>12} "
              f"{str(row['superframes_run']):>7} {wall:>7}")
        if row["status"] == "converged" and row["median_local"] != "":
            per_n.setdefault(int(row["n"]), []).append(float(row["median_local"]))

    print()
    for n in sorted(per_n):
        med = statistics.median(per_n[n])
        print(f"n={n:<4d} median of per-run median local convergence: {med:g} sf")
    if len(per_n) >= 2:
        ns = sorted(per_n)
        lo, hi = ns[0], ns[-1]
        ratio = statistics.median(per_n[hi]) / statistics.median(per_n[lo])
        print(f"growth factor {hi}/{lo}: {ratio:.2f}x "
              f"(locality predicts close to 1.0, far below the size ratio "
              f"{hi / lo:.0f}x)")
    if args.csv:
        print(f"rows written to {args.csv}")


if __name__ == "__main__":
    main()
