"""Collision-prone broadcast medium with hidden-terminal semantics.

Time is superframes: ``tdma_slots`` application slots followed by
``contention_minislots`` mini-slots of the overhead phase. Reception is
receiver-centric: a transmission lands iff its sender is the receiver's only
transmitting neighbor in that (mini-)slot and the receiver itself is silent.
Two transmitters out of each other's range still jam a common receiver, and a
receiver that is itself transmitting hears nothing. No capture effect, no
partial reception.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

from .state import FramePayload
from .topology import NodeId, Topology


@dataclass(frozen=True)
class SuperframeConfig:
    """Frame layout and protocol timing knobs.

    ``kappa`` (inter-broadcast cooldown) and ``beta_max`` (uniform extra
    backoff bound) are in mini-slot units on the concatenated overhead clock,
    the clock that only ticks during contention phases; both may span
    superframe boundaries. ``max_age`` is in superframes.
    """

    tdma_slots: int = 32
    contention_minislots: int = 16
    kappa: int = 32
    beta_max: int = 16
    max_age: int = 8

    def __post_init__(self) -> None:
        if self.tdma_slots < 1:
            raise ValueError("need at least one TDMA slot")
        if self.contention_minislots < 1:
            raise ValueError("need at least one contention mini-slot")
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.beta_max < 1:
            raise ValueError("beta_max must be >= 1")
        if self.max_age < 1:
            raise ValueError("max_age must be >= 1")

    @property
    def superframe_len(self) -> int:
        return self.tdma_slots + self.contention_minislots


def effective_tau(config: SuperframeConfig, delta: int) -> float:
    """Analytic lower bound on per-frame contention success.

    Against k = delta**2 + 1 potential contenders in a two-hop zone the
    slotted-access success probability is at least (1 - 1/C)**(k-1).
    """
    c = config.contention_minislots
    return (1.0 - 1.0 / c) ** (delta * delta)


@dataclass(frozen=True)
class Frame:
    sender: NodeId
    kind: str
    payload: FramePayload


@dataclass(frozen=True)
class TransmissionRecord:
    """One attempted broadcast: who heard it cleanly, who lost it to overlap."""

    time: int
    sender: NodeId
    receivers_ok: Tuple[NodeId, ...]
    collided_at: Tuple[NodeId, ...]

    @property
    def clean(self) -> bool:
        return not self.collided_at


def resolve_slot(
    topology: Topology, senders: Sequence[NodeId], time: int = 0
) -> List[TransmissionRecord]:
    """Apply receiver-side collision semantics to one slot's transmitters."""
    busy = set(senders)
    heard: Dict[NodeId, int] = {}
    for s in busy:
        for r in topology.neighbors(s):
            heard[r] = heard.get(r, 0) + 1
    records = []
    for s in sorted(busy):
        ok, lost = [], []
        for r in sorted(topology.neighbors(s)):
            if r not in busy and heard[r] == 1:
                ok.append(r)
            else:
                lost.append(r)
        records.append(TransmissionRecord(time, s, tuple(ok), tuple(lost)))
    return records


def draw_minislots(
    senders: Sequence[NodeId], config: SuperframeConfig, rng: random.Random
) -> Dict[NodeId, int]:
    """Independent uniform mini-slot draw per sender, in sorted-id order."""
    return {s: rng.randrange(config.contention_minislots) for s in sorted(senders)}


def overhead_round(
    topology: Topology,
    pending: Mapping[NodeId, Frame],
    config: SuperframeConfig,
    rng: random.Random,
    t0: int = 0,
) -> Tuple[Dict[NodeId, List[Frame]], List[TransmissionRecord]]:
    """Run one contention phase for prebuilt frames.

    Each pending sender draws a uniform mini-slot; per-receiver delivery then
    follows the hidden-terminal rule. Returns frames per receiver in delivery
    order plus one record per sender (time = t0 + mini-slot index).
    """
    slot_of = draw_minislots(list(pending), config, rng)
    by_slot: Dict[int, List[NodeId]] = {}
    for sender in sorted(slot_of):
        by_slot.setdefault(slot_of[sender], []).append(sender)
    delivered: Dict[NodeId, List[Frame]] = {}
    records: List[TransmissionRecord] = []
    for m in sorted(by_slot):
        for rec in resolve_slot(topology, by_slot[m], t0 + m):
            records.append(rec)
            for r in rec.receivers_ok:
                delivered.setdefault(r, []).append(pending[rec.sender])
    return delivered, records


def tdma_round(
    topology: Topology, transmitters: Mapping[int, Sequence[NodeId]], t0: int = 0
) -> List[TransmissionRecord]:
    """Full per-sender outcome records for one TDMA phase."""
    records = []
    for slot in sorted(transmitters):
        records.extend(
            resolve_slot(topology, sorted(set(transmitters[slot])), t0 + slot)
        )
    return records


def tdma_collisions(
    topology: Topology, transmitters: Mapping[int, Sequence[NodeId]]
) -> List[Tuple[int, NodeId]]:
    """(slot, receiver) pairs where >= 2 of the receiver's neighbors
    transmitted in the same application slot. Cheap summary used per
    superframe by the harness."""
    out = []
    for slot in sorted(transmitters):
        senders = set(transmitters[slot])
        heard: Dict[NodeId, int] = {}
        for s in senders:
            for r in topology.neighbors(s):
                heard[r] = heard.get(r, 0) + 1
        for r in sorted(heard):
            if heard[r] > 1:
                out.append((slot, r))
    return out


# -- time bases ----------------------------------------------------------------


def overhead_clock(config: SuperframeConfig, superframe: int, minislot: int) -> int:
    """Position on the concatenated contention-phase clock."""
    return superframe * config.contention_minislots + minislot


def absolute_time(config: SuperframeConfig, superframe: int, offset: int) -> int:
    """Global slot index of ``offset`` slots into ``superframe``."""
    return superframe * config.superframe_len + offset
