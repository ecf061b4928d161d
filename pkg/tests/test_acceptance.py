"""Acceptance gate: eight product-level criteria, one verdict line each.

Every test prints a single ``criterion N ... PASS/FAIL`` line with the
measured numbers and fails the test when a pinned tolerance is missed.
Expensive artifacts are computed once per module and shared:

* ``corpus_summary`` — 500 random graphs (<= 8 nodes) x 10 arbitrary-init
  seeds, feeding criteria 2, 3, 5 and 7.
* ``scaling_summary`` — geometric networks at n in {25, 100, 400}, 50 seeds
  each, feeding criteria 4, 5 and 7.

The full module takes on the order of fifteen minutes on one CPU; all other
test modules stay fast.
"""

from __future__ import annotations

import math
import statistics
import time
from fractions import Fraction

import pytest

from conftest import RIGHT_BASES_CHAIN, RIGHT_COLORING, RUN_SUPERFRAME, er_corpus
from tdmasim import (
    ExperimentConfig,
    FaultEvent,
    GeometricSpec,
    NamingParams,
    Simulation,
    SuperframeConfig,
    Topology,
    brute_force_min_d2_coloring,
    brute_force_mis,
    coloring_locally_minimal,
    coloring_valid,
    longest_increasing_path,
    path_topology,
    star_chain_topology,
)
from tdmasim.slots import compute_base

CORPUS_GRAPHS = 500
CORPUS_SEEDS = 10
CORPUS_BUDGET = 5000  # superframe budget a run must converge within

SCALING_NS = (25, 100, 400)
SCALING_SEEDS = 50
SCALING_SUPERFRAME = SuperframeConfig(
    tdma_slots=32, contention_minislots=32, kappa=64, beta_max=32, max_age=24
)


def _verdict(num: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {num} ({title}): {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    if not ok:
        pytest.fail(line, pytrace=False)


def _geometric_radius(n: int) -> float:
    # Mean degree ~6 on the unit square keeps the graph connected with high
    # probability while staying under the delta=8 cap.
    return math.sqrt(6.0 / (math.pi * n))


def _n3_name_clashes(topo: Topology, names) -> int:
    within3 = topo.hop_distances(3)
    return sum(
        1
        for p in topo.nodes
        for q in within3[p]
        if q != p and names[p] == names[q]
    )


@pytest.fixture(scope="module")
def star_chain_module():
    return star_chain_topology()


@pytest.fixture(scope="module")
def fixture_run(star_chain_module):
    """The reference run criterion 1 grades and criterion 5 pools."""
    started = time.monotonic()
    sim = Simulation(
        ExperimentConfig(
            topology=star_chain_module,
            superframe=RUN_SUPERFRAME,
            superframes=1500,
            seed=5,
        )
    )
    metrics = sim.run()
    return sim, metrics, time.monotonic() - started


@pytest.fixture(scope="module")
def corpus_summary():
    """500 graphs x 10 arbitrary-init seeds; per-clause tallies."""
    tally = {
        "runs": 0,
        "fixed_point": 0,
        "mis_ok": 0,
        "valid": 0,
        "minimal": 0,
        "slots_ok": 0,
        "final_100_clean": 0,
        "lip_ok": 0,
        "names_ok": 0,
        "flaps": 0,
        "witnesses": [],
    }

    def note(clause: str, graph: int, seed: int, detail: str) -> None:
        if len(tally["witnesses"]) < 12:
            tally["witnesses"].append(f"{clause} graph {graph} seed {seed}: {detail}")

    for gi, topo in enumerate(er_corpus(CORPUS_GRAPHS, tag="acceptance")):
        mis_sets = brute_force_mis(topo)
        namespace = NamingParams(topo.delta).namespace
        for seed in range(CORPUS_SEEDS):
            sim = Simulation(
                ExperimentConfig(
                    topology=topo,
                    superframe=RUN_SUPERFRAME,
                    superframes=CORPUS_BUDGET,
                    seed=seed,
                )
            )
            m = sim.run()
            shared = {p: sim.states[p].shared for p in topo.nodes}
            colors = {p: sv.color for p, sv in shared.items()}
            names = {p: sv.name for p, sv in shared.items()}
            leaders = frozenset(p for p, sv in shared.items() if sv.leader)

            tally["runs"] += 1
            if m.converged:
                tally["fixed_point"] += 1
            else:
                note("fixed-point", gi, seed, f"no fixed point in {m.superframes_run} sf")
            if leaders in mis_sets:
                tally["mis_ok"] += 1
            else:
                note("mis", gi, seed, f"leaders {sorted(leaders)} not a maximal independent set")
            if coloring_valid(topo, colors):
                tally["valid"] += 1
            else:
                note("coloring-valid", gi, seed, f"colors {colors}")
            if coloring_locally_minimal(topo, shared):
                tally["minimal"] += 1
            else:
                note("locally-minimal", gi, seed, f"colors {colors}")
            shares_exact = all(
                sv.base is not None and sv.itvl.total() == Fraction(1, sv.base)
                for sv in shared.values()
            )
            if shares_exact and not m.final_problems["slots"]:
                tally["slots_ok"] += 1
            else:
                note("slots", gi, seed, "; ".join(m.final_problems["slots"][:2]) or "share != 1/base")
            cutoff = m.superframes_run - 100
            if not any(sf >= cutoff for sf, _ in m.tdma_collisions_by_sf):
                tally["final_100_clean"] += 1
            else:
                late = [e for e in m.tdma_collisions_by_sf if e[0] >= cutoff]
                note("final-100", gi, seed, f"collisions {late[:3]}")
            if longest_increasing_path(topo, names) <= namespace:
                tally["lip_ok"] += 1
            else:
                note("increasing-path", gi, seed, f"names {names}")
            clashes = _n3_name_clashes(topo, names)
            if clashes == 0:
                tally["names_ok"] += 1
            else:
                note("n3-names", gi, seed, f"{clashes} duplicate pairs within 3 hops")
            tally["flaps"] += len(m.uniq_flaps)
    return tally


@pytest.fixture(scope="module")
def scaling_summary():
    """Geometric sweep: pooled per-node local convergence stamps by size."""
    out = {
        n: {"stamps": [], "unconverged": 0, "runs": 0} for n in SCALING_NS
    }
    flaps = 0
    name_clashes = 0
    lip_violations = 0
    for n in SCALING_NS:
        radius = _geometric_radius(n)
        for seed in range(SCALING_SEEDS):
            sim = Simulation(
                ExperimentConfig(
                    topology=GeometricSpec(n=n, radius=radius, delta=8, seed=seed),
                    superframe=SCALING_SUPERFRAME,
                    superframes=3000,
                    seed=seed,
                    tdma_load="off",
                )
            )
            m = sim.run()
            out[n]["runs"] += 1
            out[n]["stamps"].extend(v for v in m.overall.values() if v is not None)
            if not m.converged:
                out[n]["unconverged"] += 1
            flaps += len(m.uniq_flaps)
            topo = sim.topology
            names = {p: sim.states[p].shared.name for p in topo.nodes}
            name_clashes += _n3_name_clashes(topo, names)
            if longest_increasing_path(topo, names) > NamingParams(topo.delta).namespace:
                lip_violations += 1
    return {
        "by_n": out,
        "flaps": flaps,
        "name_clashes": name_clashes,
        "lip_violations": lip_violations,
    }


def test_criterion_1_fixture_fidelity(star_chain_module, fixture_run):
    topo = star_chain_module
    sim, m, elapsed = fixture_run
    colors = {p: sim.states[p].shared.color for p in topo.nodes}
    bases = {p: sim.states[p].shared.base for p in topo.nodes}
    problems = []
    if not m.converged:
        problems.append("run did not converge")
    if not coloring_valid(topo, colors):
        problems.append("final coloring is not a valid distance-two coloring")
    minimum = brute_force_min_d2_coloring(topo, max_nodes=13)
    if minimum != 9:
        problems.append(f"brute-force minimum {minimum} != 9")
    if m.color_count != 9:
        problems.append(f"run used {m.color_count} colors, want 9")
    star_bad = sorted(p for p in range(9) if bases[p] != 9)
    if star_bad:
        problems.append(f"star bases wrong at {star_bad}")
    static = {
        p: compute_base(
            RIGHT_COLORING[p],
            [RIGHT_COLORING[q] for q in topo.neighborhood(p, 2) if q != p],
        )
        for p in topo.nodes
    }
    if any(static[p] != 9 for p in range(9)):
        problems.append("right-hand coloring star bases != 9")
    chain_static = {p: static[p] for p in RIGHT_BASES_CHAIN}
    if chain_static != RIGHT_BASES_CHAIN:
        problems.append(f"right-hand chain bases {chain_static} != {RIGHT_BASES_CHAIN}")
    if elapsed >= 30.0:
        problems.append(f"runtime {elapsed:.1f}s >= 30s")
    _verdict(
        1,
        "fixture fidelity",
        not problems,
        "; ".join(problems)
        or f"9-color schedule, brute-force minimum 9, star bases 9, "
        f"chain bases {sorted(chain_static.items())}, {elapsed:.1f}s",
    )


def test_criterion_2_oracle_equivalence_small_scale(corpus_summary):
    t = corpus_summary
    runs = t["runs"]
    clauses = {
        "fixed point within 5000 sf": t["fixed_point"],
        "leader set is a maximal independent set": t["mis_ok"],
        "coloring valid": t["valid"],
        "coloring locally minimal": t["minimal"],
        "slot shares exactly 1/base and disjoint": t["slots_ok"],
    }
    failing = {k: v for k, v in clauses.items() if v != runs}
    detail = ", ".join(f"{k}: {v}/{runs}" for k, v in clauses.items())
    if failing and t["witnesses"]:
        detail += " | e.g. " + " | ".join(t["witnesses"][:4])
    _verdict(2, "small-scale oracle equivalence", not failing, detail)


def test_criterion_3_collision_freedom(corpus_summary):
    t = corpus_summary
    ok = t["final_100_clean"] == t["runs"]
    detail = (
        f"{t['final_100_clean']}/{t['runs']} runs had zero TDMA collisions in "
        f"their final 100 superframes under maximal load"
    )
    _verdict(3, "collision freedom after stabilization", ok, detail)


def test_criterion_4_scaling(scaling_summary):
    by_n = scaling_summary["by_n"]
    medians = {n: statistics.median(by_n[n]["stamps"]) for n in SCALING_NS}
    unconverged = {n: by_n[n]["unconverged"] for n in SCALING_NS}
    ratio = medians[400] / medians[25] if medians[25] else float("inf")
    ok = medians[400] <= 2 * medians[25] and not any(unconverged.values())
    detail = (
        f"median per-node local convergence (sf): "
        + ", ".join(f"n={n}: {medians[n]:g}" for n in SCALING_NS)
        + f"; ratio n400/n25 = {ratio:.2f} (need <= 2.0)"
        + f"; unconverged runs {sum(unconverged.values())}/{3 * SCALING_SEEDS}"
    )
    _verdict(4, "local convergence scaling", ok, detail)


def test_criterion_5_uniq_stability(corpus_summary, scaling_summary, fixture_run):
    _, fixture_metrics, _ = fixture_run
    flaps = (
        corpus_summary["flaps"]
        + scaling_summary["flaps"]
        + len(fixture_metrics.uniq_flaps)
    )
    pool = corpus_summary["runs"] + 3 * SCALING_SEEDS + 1
    _verdict(
        5,
        "uniq never flaps while fault-free",
        flaps == 0,
        f"{flaps} true-to-false uniq transitions across {pool} fault-free runs",
    )


def _grid_topology(rows: int, cols: int) -> Topology:
    adj = {i: set() for i in range(rows * cols)}
    pos = {}
    for r in range(rows):
        for c in range(cols):
            i = r * cols + c
            pos[i] = (float(c), float(r))
            if c + 1 < cols:
                adj[i].add(i + 1)
                adj[i + 1].add(i)
            if r + 1 < rows:
                adj[i].add(i + cols)
                adj[i + cols].add(i)
    return Topology(4, adj, pos)


def test_criterion_6_fault_containment():
    cases = []
    path12 = path_topology(12)
    grid = _grid_topology(5, 5)
    star = star_chain_topology()
    for seed in range(7):
        cases.append(("path12", path12, 6, seed))
    for seed in range(7):
        cases.append(("grid5x5", grid, 12, seed))
    for seed in range(6):
        cases.append(("star_chain", star, 2, seed))

    problems = []
    leaked = 0
    for tag, topo, victim, seed in cases:
        twin = Simulation(
            ExperimentConfig(
                topology=topo,
                superframe=RUN_SUPERFRAME,
                superframes=1500,
                seed=seed,
            )
        ).run()
        if twin.global_time is None:
            problems.append(f"{tag} seed {seed}: never stabilized, crash skipped")
            continue
        crash_sf = twin.global_time + 100
        m = Simulation(
            ExperimentConfig(
                topology=topo,
                superframe=RUN_SUPERFRAME,
                superframes=crash_sf + 700,
                seed=seed,
                faults=(FaultEvent(superframe=crash_sf, kind="crash", nodes=(victim,)),),
                stability_window=600,
            )
        ).run()
        post = m.superframes_run - crash_sf
        if post < 500:
            problems.append(f"{tag} seed {seed}: only {post} post-crash superframes")
        if m.containment_violations:
            leaked += 1
            first = m.containment_violations[0]
            problems.append(
                f"{tag} seed {seed}: {len(m.containment_violations)} collisions "
                f"outside the crashed 3-ball, first at sf {first[0]} receiver {first[2]}"
            )
    detail = (
        f"{leaked}/{len(cases)} runs leaked TDMA collisions outside the crashed "
        f"node's 3-ball within >=500 post-crash superframes"
    )
    if problems:
        detail += " | " + " | ".join(problems[:5])
    _verdict(6, "fault containment", not problems, detail)


def test_criterion_7_naming_bounds(corpus_summary, scaling_summary):
    t = corpus_summary
    s = scaling_summary
    lip_bad = (t["runs"] - t["lip_ok"]) + s["lip_violations"]
    clash_bad = (t["runs"] - t["names_ok"]) + s["name_clashes"]
    ok = lip_bad == 0 and clash_bad == 0
    detail = (
        f"{lip_bad} increasing-path bound violations and {clash_bad} duplicate-"
        f"name violations within 3 hops across {t['runs'] + 3 * SCALING_SEEDS} runs"
    )
    _verdict(7, "naming bounds", ok, detail)


def test_criterion_8_determinism(star_chain_module, tmp_path):
    blobs = {}
    for suffix in ("ndjson", "ndjson.gz"):
        pair = []
        for attempt in range(2):
            path = tmp_path / f"run{attempt}.{suffix}"
            Simulation(
                ExperimentConfig(
                    topology=star_chain_module,
                    superframe=RUN_SUPERFRAME,
                    superframes=600,
                    seed=7,
                    trace_path=str(path),
                )
            ).run()
            pair.append(path.read_bytes())
        blobs[suffix] = pair
    same_plain = blobs["ndjson"][0] == blobs["ndjson"][1]
    same_gz = blobs["ndjson.gz"][0] == blobs["ndjson.gz"][1]
    ok = same_plain and same_gz
    detail = (
        f"plain traces {'identical' if same_plain else 'DIFFER'} "
        f"({len(blobs['ndjson'][0])} bytes), gzip archives "
        f"{'identical' if same_gz else 'DIFFER'} ({len(blobs['ndjson.gz'][0])} bytes)"
    )
    _verdict(8, "byte-identical reruns", ok, detail)
