"""Experiment runner: seeded simulations, fault injection, traces, metrics.

A run is deterministic given (config, seed): node RNG streams, the medium's
contention draws, arbitrary initial states, and fault corruption all derive
from the seed by purpose-tagged stream names. Initial states default to
arbitrary type-valid draws (the self-stabilization contract); ``clean_start``
zeroes everything instead.

Traces are newline-delimited JSON with canonical key order, gzip when the
path ends in ``.gz``: one meta event, then per superframe the TDMA schedule
summary (which encodes every application transmission under maximal load),
every overhead transmission record, per-node state snapshots, and fault
events as they fire.
"""
from __future__ import annotations

import csv
import gzip
import io
import json
import random
import statistics
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from . import coloring, medium, mis, naming, runtime, slots, validators
from .medium import Frame, SuperframeConfig
from .naming import NamingParams
from .runtime import ProtocolParams
from .state import (
    NameRef,
    NodeCache,
    NodeState,
    SharedVars,
    canon_spectrum,
    node_rng,
    shared_from_json,
    shared_problems,
    shared_to_json,
)
from .slots import EMPTY, IntervalSet
from .topology import GeometricSpec, NodeId, Topology, generate_geometric

FAULT_KINDS = ("crash", "corrupt", "add_node", "move_node")


@dataclass(frozen=True)
class FaultEvent:
    """One scripted fault. ``nodes`` are targets; corruption draws type-valid
    arbitrary values for the named variable groups from a fault-local stream."""

    superframe: int
    kind: str
    nodes: Tuple[NodeId, ...] = ()
    groups: Tuple[str, ...] = ("shared", "cache")
    position: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if self.kind not in FAULT_KINDS:
            raise ValueError(f"unknown fault kind {self.kind!r}")
        if self.superframe < 0:
            raise ValueError("fault time must be >= 0")
        if self.kind in ("add_node", "move_node"):
            if len(self.nodes) != 1 or self.position is None:
                raise ValueError(f"{self.kind} needs exactly one node and a position")
        elif not self.nodes:
            raise ValueError(f"{self.kind} needs target nodes")
        bad = set(self.groups) - {"shared", "cache"}
        if bad:
            raise ValueError(f"unknown corruption groups {sorted(bad)}")

    def to_dict(self) -> dict:
        d: dict = {"superframe": self.superframe, "kind": self.kind, "nodes": list(self.nodes)}
        if self.kind == "corrupt":
            d["groups"] = list(self.groups)
        if self.position is not None:
            d["position"] = [self.position[0], self.position[1]]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FaultEvent":
        return cls(
            superframe=int(d["superframe"]),
            kind=d["kind"],
            nodes=tuple(int(x) for x in d.get("nodes", ())),
            groups=tuple(d.get("groups", ("shared", "cache"))),
            position=tuple(d["position"]) if d.get("position") else None,
        )


@dataclass
class ExperimentConfig:
    topology: Union[Topology, GeometricSpec, str]
    superframe: SuperframeConfig = SuperframeConfig()
    t: int = 6
    superframes: int = 2000
    seed: int = 0
    clean_start: bool = False
    faults: Tuple[FaultEvent, ...] = ()
    stability_window: int = 120
    guard_band: int = validators.GUARD_BAND
    tdma_load: str = "max"
    trace_path: Optional[str] = None
    metrics_path: Optional[str] = None
    brute_max_nodes: int = 0

    def __post_init__(self) -> None:
        if self.superframes < 1:
            raise ValueError("run length must be >= 1 superframe")
        if self.tdma_load not in ("max", "off"):
            raise ValueError("tdma_load must be 'max' or 'off'")
        for ev in self.faults:
            if ev.superframe >= self.superframes:
                raise ValueError("fault time beyond run length")

    def resolve_topology(self) -> Topology:
        if isinstance(self.topology, Topology):
            return self.topology
        if isinstance(self.topology, GeometricSpec):
            return generate_geometric(self.topology)
        return Topology.load(self.topology)

    def to_dict(self) -> dict:
        if isinstance(self.topology, Topology):
            topo: object = {"inline": self.topology.to_dict()}
        elif isinstance(self.topology, GeometricSpec):
            topo = {
                "geometric": {
                    "n": self.topology.n,
                    "radius": self.topology.radius,
                    "delta": self.topology.delta,
                    "seed": self.topology.seed,
                }
            }
        else:
            topo = {"file": self.topology}
        return {
            "topology": topo,
            "superframe": {
                "tdma_slots": self.superframe.tdma_slots,
                "contention_minislots": self.superframe.contention_minislots,
                "kappa": self.superframe.kappa,
                "beta_max": self.superframe.beta_max,
                "max_age": self.superframe.max_age,
            },
            "t": self.t,
            "superframes": self.superframes,
            "seed": self.seed,
            "clean_start": self.clean_start,
            "faults": [ev.to_dict() for ev in self.faults],
            "stability_window": self.stability_window,
            "guard_band": self.guard_band,
            "tdma_load": self.tdma_load,
            "brute_max_nodes": self.brute_max_nodes,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        src = d["topology"]
        topology: Union[Topology, GeometricSpec, str]
        if "file" in src:
            topology = src["file"]
        elif "geometric" in src:
            g = src["geometric"]
            topology = GeometricSpec(
                n=int(g["n"]), radius=float(g["radius"]), delta=int(g["delta"]),
                seed=int(g.get("seed", 0)),
            )
        elif "inline" in src:
            topology = Topology.from_dict(src["inline"])
        elif "builtin" in src:
            from .topology import path_topology, star_chain_topology

            if src["builtin"] == "star_chain":
                topology = star_chain_topology()
            elif src["builtin"] == "path":
                topology = path_topology(int(src.get("n", 8)), int(src.get("delta", 2)))
            else:
                raise ValueError(f"unknown builtin topology {src['builtin']!r}")
        else:
            raise ValueError("topology source must be file/geometric/inline/builtin")
        sf = d.get("superframe", {})
        return cls(
            topology=topology,
            superframe=SuperframeConfig(
                tdma_slots=int(sf.get("tdma_slots", 32)),
                contention_minislots=int(sf.get("contention_minislots", 16)),
                kappa=int(sf.get("kappa", 32)),
                beta_max=int(sf.get("beta_max", 16)),
                max_age=int(sf.get("max_age", 8)),
            ),
            t=int(d.get("t", 6)),
            superframes=int(d.get("superframes", 2000)),
            seed=int(d.get("seed", 0)),
            clean_start=bool(d.get("clean_start", False)),
            faults=tuple(FaultEvent.from_dict(f) for f in d.get("faults", ())),
            stability_window=int(d.get("stability_window", 120)),
            guard_band=int(d.get("guard_band", validators.GUARD_BAND)),
            tdma_load=d.get("tdma_load", "max"),
            trace_path=d.get("trace_path"),
            metrics_path=d.get("metrics_path"),
            brute_max_nodes=int(d.get("brute_max_nodes", 0)),
        )

    @classmethod
    def from_json_file(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class MetricsReport:
    """Everything a run measured; ``global_time`` is the max overall stamp.

    Structural checks (``final_problems``) are evaluated on the alive
    subgraph: a crashed node's frozen registers are unobservable and judged
    instead through collision containment around its 3-ball.
    """

    n: int
    seed: int
    superframes_run: int
    wall_seconds: float
    stamps: Dict[str, Dict[NodeId, Optional[int]]]
    overall: Dict[NodeId, Optional[int]]
    global_time: Optional[int]
    converged: bool
    uniq_flaps: List[Tuple[int, NodeId]]
    tdma_collision_count: int
    tdma_collisions_by_sf: List[Tuple[int, int]]
    overhead_collision_count: int
    final_problems: Dict[str, List[str]]
    color_count: Optional[int]
    oracle_min_colors: Optional[int]
    shares: Dict[NodeId, Dict[str, object]]
    claimed_truncated: int
    frames_dropped: int
    crashed: List[NodeId]
    first_crash_sf: Optional[int]
    containment_violations: List[Tuple[int, int, NodeId]]

    def passes(self) -> Tuple[bool, List[str]]:
        """Did the run's validators pass? Returns (verdict, reasons)."""
        reasons = []
        for layer, probs in self.final_problems.items():
            for msg in probs[:5]:
                reasons.append(f"{layer}: {msg}")
        if self.crashed:
            for sf, slot, r in self.containment_violations[:5]:
                reasons.append(
                    f"containment: sf {sf} slot {slot} collision at node {r}"
                )
        elif not self.converged:
            reasons.append("run did not converge within the recorded superframes")
        return (not reasons, reasons)

    def to_dict(self) -> dict:
        ok, reasons = self.passes()
        return {
            "n": self.n,
            "seed": self.seed,
            "superframes_run": self.superframes_run,
            "wall_seconds": round(self.wall_seconds, 3),
            "stamps": {
                layer: {str(p): v for p, v in per.items()}
                for layer, per in self.stamps.items()
            },
            "overall": {str(p): v for p, v in self.overall.items()},
            "global_time": self.global_time,
            "converged": self.converged,
            "uniq_flaps": [[sf, p] for sf, p in self.uniq_flaps],
            "tdma_collision_count": self.tdma_collision_count,
            "tdma_collisions_by_sf": [[sf, c] for sf, c in self.tdma_collisions_by_sf],
            "overhead_collision_count": self.overhead_collision_count,
            "final_problems": self.final_problems,
            "color_count": self.color_count,
            "oracle_min_colors": self.oracle_min_colors,
            "shares": {str(p): d for p, d in self.shares.items()},
            "claimed_truncated": self.claimed_truncated,
            "frames_dropped": self.frames_dropped,
            "crashed": list(self.crashed),
            "first_crash_sf": self.first_crash_sf,
            "containment_violations": [
                [sf, slot, r] for sf, slot, r in self.containment_violations
            ],
            "passes": ok,
            "fail_reasons": reasons,
        }


def _dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class _TraceWriter:
    def __init__(self, path: str):
        self.path = path
        self._raw = None
        if path.endswith(".gz"):
            # anonymous header (no name, zero mtime) so identical runs yield
            # byte-identical archives regardless of output path
            self._raw = open(path, "wb")
            gz = gzip.GzipFile(filename="", mode="wb", fileobj=self._raw, mtime=0)
            self._fh: io.TextIOBase = io.TextIOWrapper(
                gz, encoding="utf-8", newline="\n"
            )
        else:
            self._fh = open(path, "w", encoding="utf-8", newline="\n")

    def emit(self, obj: dict) -> None:
        self._fh.write(_dumps(obj))
        self._fh.write("\n")

    def close(self) -> None:
        self._fh.close()
        if self._raw is not None:
            self._raw.close()


def open_trace(path: str):
    """Iterate parsed events of an NDJSON trace (gzip by suffix)."""
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


# -- arbitrary initial states ------------------------------------------------------


def _arbitrary_itvl(rng: random.Random, delta: int) -> IntervalSet:
    d = rng.randint(1, delta * delta + 1)
    pieces = rng.randint(0, 2)
    if not pieces:
        return EMPTY
    take = min(2 * pieces, d + 1)
    cuts = sorted(rng.sample(range(d + 1), take))
    pairs = []
    for i in range(0, len(cuts) - 1, 2):
        if cuts[i] < cuts[i + 1]:
            pairs.append((Fraction(cuts[i], d), Fraction(cuts[i + 1], d)))
    return IntervalSet(pairs)


def _arbitrary_shared(
    rng: random.Random, node: NodeId, ids: Sequence[NodeId], delta: int, namespace: int
) -> SharedVars:
    others = [i for i in ids if i != node]
    claimed = tuple(
        sorted(rng.sample(others, rng.randint(0, min(delta, len(others)))))
    )
    leader = rng.random() < 0.5
    color_cap = delta * delta + 2
    setcol: Tuple[Tuple[int, int], ...] = ()
    if leader and rng.random() < 0.7 and ids:
        k = rng.randint(1, min(3, len(ids)))
        targets = sorted(rng.sample(list(ids), k))
        cols = rng.sample(range(color_cap), k)
        setcol = tuple(zip(targets, cols))
    entries = []
    for _ in range(rng.randint(0, 3)):
        assigner = None
        if rng.random() >= 0.3:
            assigner = NameRef(rng.randrange(namespace), rng.choice(list(ids)))
        entries.append((rng.randrange(color_cap), assigner))
    return SharedVars(
        node=node,
        claimed=claimed,
        name=rng.randrange(namespace),
        leader=leader,
        min_leader=(
            None
            if rng.random() < 0.3
            else NameRef(rng.randrange(namespace), rng.choice(list(ids)))
        ),
        color=None if rng.random() < 0.3 else rng.randrange(color_cap),
        setcol=setcol,
        spectrum=canon_spectrum(entries),
        base=None if rng.random() < 0.3 else rng.randint(1, color_cap),
        itvl=_arbitrary_itvl(rng, delta),
    )


def _populate_arbitrary_cache(
    rng: random.Random,
    state: NodeState,
    ids: Sequence[NodeId],
    delta: int,
    namespace: int,
    max_age: int,
) -> None:
    others = [i for i in ids if i != state.node]
    count = rng.randint(0, min(len(others), 2 * delta))
    for origin in rng.sample(others, count):
        snap = _arbitrary_shared(rng, origin, ids, delta, namespace)
        hops = rng.randint(1, 3)
        refreshed = -rng.randint(0, max_age)
        state.cache.upsert(origin, snap, hops, refreshed)


# -- the simulation ---------------------------------------------------------------


class Simulation:
    """One deterministic run. Build, then call :meth:`run` exactly once."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.topology = config.resolve_topology()
        self.params = ProtocolParams(
            delta=self.topology.delta,
            naming=NamingParams(self.topology.delta, config.t),
            config=config.superframe,
        )
        self.holders: Dict[NodeId, set] = {}
        self.states: Dict[NodeId, NodeState] = {}
        phantoms = []
        if not config.clean_start:
            top = max(self.topology.nodes, default=-1)
            phantoms = [top + 1 + i for i in range(3)]
        self._id_universe: List[NodeId] = list(self.topology.nodes) + phantoms
        for p in self.topology.nodes:
            self.states[p] = self._fresh_state(p, clean=config.clean_start)
        self.medium_rng = random.Random(f"medium:{config.seed}")
        self.tracker = validators.ConvergenceTracker(self.topology, self.holders)
        self.tdma_log: List[Tuple[int, int, NodeId]] = []
        self.tdma_by_sf: List[Tuple[int, int]] = []
        self.overhead_collisions = 0
        self._slot_memo: Dict[NodeId, Tuple[IntervalSet, frozenset]] = {}
        self._last_schedule: Dict[int, List[NodeId]] = {}
        self._last_collisions: List[Tuple[int, NodeId]] = []
        self._schedule_dirty = True
        self._force_track = True
        self._pending_faults = sorted(config.faults, key=lambda e: e.superframe)
        self.first_crash_sf: Optional[int] = None
        self.superframes_run = 0

    # -- state construction --

    def _fresh_state(self, p: NodeId, clean: bool) -> NodeState:
        cache = NodeCache(p, self.params.cache_capacity, self.holders)
        rng = node_rng(self.config.seed, p)
        if clean:
            shared = SharedVars(node=p)
            state = NodeState(node=p, shared=shared, cache=cache, rng=rng)
        else:
            init_rng = random.Random(f"init:{self.config.seed}:{p}")
            shared = _arbitrary_shared(
                init_rng, p, self._id_universe, self.params.delta,
                self.params.naming.namespace,
            )
            state = NodeState(node=p, shared=shared, cache=cache, rng=rng)
            _populate_arbitrary_cache(
                init_rng, state, self._id_universe, self.params.delta,
                self.params.naming.namespace, self.config.superframe.max_age,
            )
            state.next_round = init_rng.randint(0, 2)
        return state

    # -- fault application --

    def _apply_fault(self, ev: FaultEvent, sf: int, changed: Set[NodeId]) -> None:
        if ev.kind == "crash":
            for p in ev.nodes:
                if p in self.states:
                    self.states[p].alive = False
            if self.first_crash_sf is None:
                self.first_crash_sf = sf
        elif ev.kind == "corrupt":
            for p in ev.nodes:
                if p not in self.states:
                    continue
                st = self.states[p]
                frng = random.Random(f"fault:{self.config.seed}:{sf}:{p}")
                if "shared" in ev.groups:
                    st.shared = _arbitrary_shared(
                        frng, p, self._id_universe, self.params.delta,
                        self.params.naming.namespace,
                    )
                if "cache" in ev.groups:
                    st.cache.clear()
                    _populate_arbitrary_cache(
                        frng, st, self._id_universe, self.params.delta,
                        self.params.naming.namespace,
                        self.config.superframe.max_age,
                    )
                st.invalidate_memos()
                changed.add(p)
        elif ev.kind == "add_node":
            p = ev.nodes[0]
            x, y = ev.position  # type: ignore[misc]
            self.topology = self.topology.add_node(p, x, y)
            self.states[p] = self._fresh_state(p, clean=True)
            if p not in self._id_universe:
                self._id_universe.append(p)
            self._rebind_topology(sf)
            changed.add(p)
        elif ev.kind == "move_node":
            p = ev.nodes[0]
            x, y = ev.position  # type: ignore[misc]
            self.topology = self.topology.move_node(p, x, y)
            self._rebind_topology(sf)
            changed.add(p)
        self._schedule_dirty = True
        self._force_track = True

    def _rebind_topology(self, sf: int) -> None:
        tracker = self.tracker
        tracker.topology = self.topology
        for p in self.topology.nodes:
            if p not in tracker.ok["naming"]:
                for layer in validators.LAYERS:
                    tracker.ok[layer][p] = False
                    tracker.last_false[layer][p] = sf
        tracker.nodes = self.topology.nodes

    # -- phases --

    def _slots_of(self, p: NodeId) -> frozenset:
        itvl = self.states[p].shared.itvl
        memo = self._slot_memo.get(p)
        if memo is not None and memo[0] == itvl:
            return memo[1]
        owned = slots.discretize(itvl, self.config.superframe.tdma_slots)
        self._slot_memo[p] = (itvl, owned)
        return owned

    def _tdma_phase(self, sf: int, trace: Optional[_TraceWriter]) -> None:
        if self.config.tdma_load != "max":
            return
        if self._schedule_dirty:
            schedule: Dict[int, List[NodeId]] = {}
            for p in sorted(self.states):
                if not self.states[p].alive or p not in self.topology.adjacency:
                    continue
                for slot in self._slots_of(p):
                    schedule.setdefault(slot, []).append(p)
            self._last_schedule = schedule
            # a crashed node's radio is off: collisions are only observable
            # at receivers that are still alive
            self._last_collisions = [
                (slot, r)
                for slot, r in medium.tdma_collisions(self.topology, schedule)
                if self.states[r].alive
            ]
            self._schedule_dirty = False
        colls = self._last_collisions
        if colls:
            self.tdma_by_sf.append((sf, len(colls)))
            for slot, r in colls:
                self.tdma_log.append((sf, slot, r))
        if trace is not None:
            trace.emit(
                {
                    "t": "tdma",
                    "sf": sf,
                    "sched": [
                        [slot, self._last_schedule[slot]]
                        for slot in sorted(self._last_schedule)
                    ],
                    "coll": [[slot, r] for slot, r in colls],
                }
            )

    def _overhead_phase(
        self, sf: int, changed: Set[NodeId], trace: Optional[_TraceWriter]
    ) -> None:
        cfg = self.config.superframe
        pending = [
            p
            for p in sorted(self.states)
            if p in self.topology.adjacency and runtime.wants_step(self.states[p], sf)
        ]
        slot_of = medium.draw_minislots(pending, cfg, self.medium_rng)
        by_slot: Dict[int, List[NodeId]] = {}
        for p in pending:
            by_slot.setdefault(slot_of[p], []).append(p)
        for m in sorted(by_slot):
            senders = sorted(by_slot[m])
            clock = medium.overhead_clock(cfg, sf, m)
            frames: Dict[NodeId, Frame] = {}
            for s in senders:
                frame, fired = runtime.step(self.states[s], clock, self.params)
                frames[s] = frame
                if fired:
                    changed.add(s)
                    self._schedule_dirty = True
            for rec in medium.resolve_slot(self.topology, senders, clock):
                self.overhead_collisions += len(rec.collided_at)
                if trace is not None:
                    trace.emit(
                        {
                            "t": "otx",
                            "sf": sf,
                            "m": m,
                            "sender": rec.sender,
                            "ok": list(rec.receivers_ok),
                            "coll": list(rec.collided_at),
                        }
                    )
                for r in rec.receivers_ok:
                    if runtime.on_receive(self.states[r], frames[rec.sender], sf):
                        changed.add(r)
            for s in senders:
                runtime.schedule_after_tx(self.states[s], cfg, medium.overhead_clock(cfg, sf, m))

    # -- main loop --

    def run(self, trace_path: Optional[str] = None) -> MetricsReport:
        started = time.monotonic()
        config = self.config
        trace = None
        path = trace_path or config.trace_path
        if path:
            trace = _TraceWriter(path)
            trace.emit(
                {
                    "t": "meta",
                    "config": config.to_dict(),
                    "topology": self.topology.to_dict(),
                }
            )
            for p in sorted(self.states):
                trace.emit(
                    {
                        "t": "state",
                        "sf": -1,
                        "node": p,
                        "shared": shared_to_json(self.states[p].shared),
                        "alive": self.states[p].alive,
                    }
                )
        quiet = 0
        try:
            for sf in range(config.superframes):
                changed: Set[NodeId] = set()
                fault_fired = False
                while self._pending_faults and self._pending_faults[0].superframe == sf:
                    ev = self._pending_faults.pop(0)
                    self._apply_fault(ev, sf, changed)
                    fault_fired = True
                    if trace is not None:
                        trace.emit({"t": "fault", "sf": sf, **ev.to_dict()})
                if fault_fired and trace is not None:
                    # re-snapshot touched nodes so trace replay sees the state
                    # the TDMA schedule below was actually built from
                    for p in sorted(changed):
                        trace.emit(
                            {
                                "t": "state",
                                "sf": sf,
                                "node": p,
                                "shared": shared_to_json(self.states[p].shared),
                                "alive": self.states[p].alive,
                            }
                        )

                self._tdma_phase(sf, trace)
                self._overhead_phase(sf, changed, trace)

                for p in sorted(self.states):
                    st = self.states[p]
                    if st.alive and runtime.age_and_expire(st, sf, config.superframe):
                        changed.add(p)

                if trace is not None:
                    for p in sorted(self.states):
                        trace.emit(
                            {
                                "t": "state",
                                "sf": sf,
                                "node": p,
                                "shared": shared_to_json(self.states[p].shared),
                                "alive": self.states[p].alive,
                            }
                        )

                self.tracker.observe(sf, self.states, changed, force_all=self._force_track)
                self._force_track = False
                self.superframes_run = sf + 1

                if changed or fault_fired:
                    quiet = 0
                else:
                    quiet += 1
                if quiet >= config.stability_window and not self._pending_faults:
                    break
        finally:
            if trace is not None:
                trace.close()

        return self._metrics(started)

    def _metrics(self, started: float) -> MetricsReport:
        config = self.config
        report = self.tracker.report(config.guard_band)
        crashed = sorted(p for p, st in self.states.items() if not st.alive)
        check_topo = self.topology
        for c in crashed:
            if c in check_topo.adjacency:
                check_topo = check_topo.remove_node(c)
        nodes = check_topo.nodes
        leaders = {p: self.states[p].shared.leader for p in nodes}
        colors = {p: self.states[p].shared.color for p in nodes}
        bases = {p: self.states[p].shared.base for p in nodes}
        itvls = {p: self.states[p].shared.itvl for p in nodes}
        refs = {p: self.states[p].shared.ref for p in nodes}
        if crashed:
            holders = {
                origin: {o for o in owners if self.states[o].alive}
                for origin, owners in self.holders.items()
            }
            uniq_bad = [
                p for p in nodes
                if not naming.uniq(check_topo, self.states, p, holders)
            ]
        else:
            uniq_bad = [p for p in nodes if not report.final_ok["naming"][p]]
        final_problems = {
            "mis": mis.mis_problems(check_topo, leaders),
            "coloring": coloring.coloring_problems(check_topo, colors),
            "slots": slots.slots_problems(check_topo, bases, colors, itvls, refs),
            "uniq": [f"uniq fails at {p}" for p in uniq_bad],
        }
        color_count = None
        if nodes and all(colors[p] is not None for p in nodes):
            color_count = len({colors[p] for p in nodes})
        oracle_min = None
        if config.brute_max_nodes and len(nodes) <= config.brute_max_nodes:
            oracle_min = validators.brute_force_min_d2_coloring(
                check_topo, config.brute_max_nodes
            )
        shares: Dict[NodeId, Dict[str, object]] = {}
        tslots = config.superframe.tdma_slots
        for p in nodes:
            sv = self.states[p].shared
            owned = slots.discretize(sv.itvl, tslots)
            shares[p] = {
                "interval_share": str(sv.itvl.total()),
                "target_share": str(Fraction(1, sv.base)) if sv.base else None,
                "slots": sorted(owned),
                "slot_share": str(Fraction(len(owned), tslots)),
            }
        metrics = MetricsReport(
            n=len(self.topology.nodes),
            seed=config.seed,
            superframes_run=self.superframes_run,
            wall_seconds=time.monotonic() - started,
            stamps=report.stamps,
            overall=report.overall,
            global_time=report.global_time,
            converged=report.global_time is not None,
            uniq_flaps=report.uniq_flaps,
            tdma_collision_count=len(self.tdma_log),
            tdma_collisions_by_sf=self.tdma_by_sf,
            overhead_collision_count=self.overhead_collisions,
            final_problems=final_problems,
            color_count=color_count,
            oracle_min_colors=oracle_min,
            shares=shares,
            claimed_truncated=sum(st.claimed_truncated for st in self.states.values()),
            frames_dropped=sum(st.frames_dropped for st in self.states.values()),
            crashed=crashed,
            first_crash_sf=self.first_crash_sf,
            containment_violations=(
                validators.containment_violations(
                    self.topology, self.tdma_log, set(crashed), self.first_crash_sf
                )
                if crashed and self.first_crash_sf is not None
                else []
            ),
        )
        if config.metrics_path:
            with open(config.metrics_path, "w", encoding="utf-8") as fh:
                fh.write(_dumps(metrics.to_dict()))
                fh.write("\n")
        return metrics


def run(config: ExperimentConfig) -> MetricsReport:
    """Execute one experiment; deterministic given config + seed."""
    return Simulation(config).run()


def sweep(
    configs: Sequence[ExperimentConfig], out_csv: Optional[str] = None
) -> List[dict]:
    """Run configs sequentially, tolerating individual failures; returns one
    row per run plus per-n aggregate rows, optionally written as CSV."""
    if not configs:
        raise ValueError("sweep needs at least one config")
    rows: List[dict] = []
    by_n: Dict[int, List[int]] = {}
    for config in configs:
        try:
            m = run(config)
        except Exception as exc:  # noqa: BLE001 - sweep must survive bad runs
            rows.append(
                {
                    "n": "?",
                    "seed": config.seed,
                    "status": f"error: {exc}",
                    "global_time": "",
                    "median_local": "",
                    "superframes_run": "",
                    "wall_seconds": "",
                }
            )
            continue
        local = [v for v in m.overall.values() if v is not None]
        median_local = statistics.median(local) if local else ""
        rows.append(
            {
                "n": m.n,
                "seed": m.seed,
                "status": "converged" if m.converged else "not-converged",
                "global_time": m.global_time if m.global_time is not None else "",
                "median_local": median_local,
                "superframes_run": m.superframes_run,
                "wall_seconds": round(m.wall_seconds, 3),
            }
        )
        if m.converged:
            by_n.setdefault(m.n, []).extend(local)
    for n in sorted(by_n):
        rows.append(
            {
                "n": n,
                "seed": "aggregate",
                "status": f"{len(by_n[n])} node samples",
                "global_time": "",
                "median_local": statistics.median(by_n[n]),
                "superframes_run": "",
                "wall_seconds": "",
            }
        )
    if out_csv:
        with open(out_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(
                fh,
                fieldnames=[
                    "n", "seed", "status", "global_time", "median_local",
                    "superframes_run", "wall_seconds",
                ],
            )
            writer.writeheader()
            writer.writerows(rows)
    return rows


# -- trace verification -------------------------------------------------------------


def verify_trace(path: str, metrics: Optional[object] = None) -> List[str]:
    """Re-check a recorded trace against the validators.

    Covers what shared variables expose: snapshot type invariants, TDMA
    schedule/collision consistency with the recorded interval sets, crash
    containment when a crash was scripted, and final-state legitimacy
    (MIS/coloring/slots) on fault-free traces. Cache-level predicates are not
    reconstructable from traces and are checked live by the harness instead.

    ``metrics`` (a MetricsReport or its to_dict/JSON form) enables the replay
    cross-check: every metric recomputable from the trace must match what the
    live run reported.
    """
    problems: List[str] = []
    meta = None
    topology: Optional[Topology] = None
    tdma_slots = 32
    states: Dict[NodeId, SharedVars] = {}
    alive: Dict[NodeId, bool] = {}
    crashed: Set[NodeId] = set()
    crash_sf: Optional[int] = None
    had_fault = False
    last_sf = -1
    collisions: List[Tuple[int, int, NodeId]] = []

    for idx, ev in enumerate(open_trace(path)):
        kind = ev.get("t")
        try:
            if kind == "meta":
                meta = ev
                topology = Topology.from_dict(ev["topology"])
                tdma_slots = int(ev["config"]["superframe"]["tdma_slots"])
            elif kind == "fault":
                had_fault = True
                if ev["kind"] == "crash":
                    for p in ev["nodes"]:
                        crashed.add(int(p))
                        alive[int(p)] = False
                    crash_sf = int(ev["sf"]) if crash_sf is None else crash_sf
                elif ev["kind"] in ("add_node", "move_node"):
                    problems.append(
                        f"sf {ev['sf']}: trace replays of topology faults unsupported"
                    )
            elif kind == "state":
                sv = shared_from_json(ev["shared"])
                p = int(ev["node"])
                bad = shared_problems(sv)
                if bad:
                    problems.append(f"sf {ev['sf']} node {p}: {'; '.join(bad)}")
                states[p] = sv
                alive[p] = bool(ev.get("alive", True))
                last_sf = max(last_sf, int(ev["sf"]))
            elif kind == "tdma":
                if topology is None:
                    problems.append("tdma event before meta")
                    continue
                sf = int(ev["sf"])
                expect: Dict[int, List[int]] = {}
                if states:
                    for p in sorted(states):
                        if not alive.get(p, True) or p not in topology.adjacency:
                            continue
                        for slot in sorted(
                            slots.discretize(states[p].itvl, tdma_slots)
                        ):
                            expect.setdefault(slot, []).append(p)
                    got = {int(s): list(map(int, lst)) for s, lst in ev["sched"]}
                    if got != expect:
                        problems.append(f"sf {sf}: recorded schedule mismatch")
                    recomputed = [
                        (s, r)
                        for s, r in medium.tdma_collisions(topology, got)
                        if alive.get(r, True)
                    ]
                    recorded = [(int(a), int(b)) for a, b in ev["coll"]]
                    if recorded != recomputed:
                        problems.append(f"sf {sf}: recorded collisions mismatch")
                for slot, r in ev["coll"]:
                    collisions.append((sf, int(slot), int(r)))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            problems.append(
                f"event {idx}: malformed {kind or 'event'} ({type(exc).__name__})"
            )

    if meta is None or topology is None:
        return ["trace has no meta event"] + problems
    if not states:
        problems.append("trace has no state snapshots")
        return problems

    containment: List[Tuple[int, int, NodeId]] = []
    if crashed and crash_sf is not None:
        containment = validators.containment_violations(
            topology, collisions, crashed, crash_sf
        )
        for sf, slot, r in containment[:20]:
            problems.append(f"sf {sf}: post-crash collision at {r} outside crashed 3-ball")
    final_structural: Dict[str, List[str]] = {}
    if not had_fault:
        leaders = {p: states[p].leader for p in topology.nodes if p in states}
        colors = {p: states[p].color for p in topology.nodes if p in states}
        bases = {p: states[p].base for p in topology.nodes if p in states}
        itvls = {p: states[p].itvl for p in topology.nodes if p in states}
        refs = {p: states[p].ref for p in topology.nodes if p in states}
        if len(leaders) == len(topology.nodes):
            final_structural = {
                "mis": mis.mis_problems(topology, leaders),
                "coloring": coloring.coloring_problems(topology, colors),
                "slots": slots.slots_problems(topology, bases, colors, itvls, refs),
            }
            for probs in final_structural.values():
                problems.extend(probs)

    if metrics is not None:
        md = metrics.to_dict() if hasattr(metrics, "to_dict") else dict(metrics)
        if md.get("tdma_collision_count") != len(collisions):
            problems.append(
                f"replay: {len(collisions)} tdma collisions in trace, metrics say "
                f"{md.get('tdma_collision_count')}"
            )
        live = [p for p in topology.nodes if p in states and alive.get(p, True)]
        replay_count = (
            len({states[p].color for p in live})
            if live and all(states[p].color is not None for p in live)
            else None
        )
        if md.get("color_count") != replay_count:
            problems.append(
                f"replay: {replay_count} colors in final snapshots, metrics say "
                f"{md.get('color_count')}"
            )
        if crashed and crash_sf is not None:
            reported = [tuple(v) for v in md.get("containment_violations") or []]
            if reported != [tuple(v) for v in containment]:
                problems.append("replay: containment violations differ from metrics")
        if not had_fault and final_structural:
            reported_probs = md.get("final_problems") or {}
            for layer, probs in final_structural.items():
                if list(reported_probs.get(layer, [])) != probs:
                    problems.append(
                        f"replay: final {layer} problems differ from metrics"
                    )
    return problems
