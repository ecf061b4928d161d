"""Record a run to a trace, verify it, then tamper with it and get caught.

Every run can stream NDJSON events (gzip when the path ends in .gz):
one meta header, initial snapshots, then per-superframe TDMA outcomes,
overhead-channel wins, state snapshots, and faults. The verifier replays
the schedule from the recorded interval sets, recomputes collisions with
the same hidden-terminal rules, and re-runs the validators on the final
state — so a forged trace or a forged metrics file disagrees somewhere.

Usage: python3 demos/05_trace_verify.py [--seed N] [--dir PATH]
"""

import argparse
import json
import tempfile
from pathlib import Path

from tdmasim import ExperimentConfig, Simulation, SuperframeConfig, star_chain_topology, verify_trace


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--dir", default=None, help="where to write the trace")
    args = parser.parse_args()

    outdir = Path(args.dir) if args.dir else Path(tempfile.mkdtemp(prefix="tdmasim-"))
    outdir.mkdir(parents=True, exist_ok=True)
    trace_path = outdir / "run.ndjson"

    config = ExperimentConfig(
        topology=star_chain_topology(),
        superframe=SuperframeConfig(max_age=24),
        superframes=1200,
        seed=args.seed,
        trace_path=str(trace_path),
    )
    metrics = Simulation(config).run()
    size = trace_path.stat().st_size
    print(f"recorded {trace_path} ({size} bytes), converged={metrics.converged}")

    problems = verify_trace(str(trace_path), metrics)
    print(f"verification of the honest trace: "
          f"{'ok' if not problems else problems}")
    print()

    # forge the final color of node 12 to collide (distance-two) with node 11
    lines = trace_path.read_text().splitlines()
    forged = []
    target_color = None
    for line in lines:
        ev = json.loads(line)
        if ev.get("t") == "state" and ev.get("node") == 11:
            target_color = ev["shared"]["color"]
        forged.append(line)
    out = []
    for line in reversed(forged):
        ev = json.loads(line)
        if ev.get("t") == "state" and ev.get("node") == 12 and target_color is not None:
            ev["shared"]["color"] = target_color
            line = json.dumps(ev, sort_keys=True, separators=(",", ":"))
            target_color = None  # only the last snapshot
        out.append(line)
    tampered = outdir / "tampered.ndjson"
    tampered.write_text("\n".join(reversed(out)) + "\n")

    problems = verify_trace(str(tampered))
    print(f"verification of the tampered trace "
          f"(node 12's final color forged to node 11's):")
    for p in problems[:6]:
        print(f"  {p}")
    if not problems:
        print("  NOT caught — this should never happen")


if __name__ == "__main__":
    main()
