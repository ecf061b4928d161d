"""Shared fixtures: the 13-node reference topology, its two hand-built
9-colorings, and a deterministic small-graph corpus generator."""
import random

import pytest

from tdmasim import ExperimentConfig, SuperframeConfig, Topology, star_chain_topology

# Node ids in the reference fixture: 0 is the hub, 1..8 its spokes, and
# 9,10,11,12 a chain hanging off spoke 2 (9 adjacent to the spoke).
LEFT_COLORING = {
    0: 0, 1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 6, 7: 7, 8: 8,
    9: 1, 10: 0, 11: 2, 12: 1,
}
RIGHT_COLORING = {
    0: 0, 1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 6, 7: 7, 8: 8,
    9: 3, 10: 4, 11: 5, 12: 6,
}
# Distinct-color counts in each 2-ball under RIGHT_COLORING, chain part.
RIGHT_BASES_CHAIN = {9: 5, 10: 5, 11: 4, 12: 3}

# Settings every end-to-end test run uses: the library defaults keep the
# published values, but convergence tests need a cache-expiry threshold that
# comfortably survives contention bursts (see README).
RUN_SUPERFRAME = SuperframeConfig(max_age=24)


@pytest.fixture(scope="session")
def star_chain() -> Topology:
    return star_chain_topology()


@pytest.fixture
def quick_config(star_chain):
    def make(**overrides) -> ExperimentConfig:
        base = dict(
            topology=star_chain,
            superframe=RUN_SUPERFRAME,
            superframes=1500,
            seed=5,
        )
        base.update(overrides)
        return ExperimentConfig(**base)

    return make


def er_corpus(count: int, tag: str, max_nodes: int = 8):
    """Deterministic Erdos-Renyi style corpus of small topologies."""
    rng = random.Random(f"corpus:{tag}")
    graphs = []
    for _ in range(count):
        n = rng.randint(1, max_nodes)
        p = rng.uniform(0.2, 0.8)
        adj = {i: set() for i in range(n)}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < p:
                    adj[i].add(j)
                    adj[j].add(i)
        delta = max(1, max((len(v) for v in adj.values()), default=1))
        pos = {i: (float(i), 0.0) for i in range(n)}
        graphs.append(Topology(delta, adj, pos))
    return graphs
