from fractions import Fraction as F

import pytest

from tdmasim import (
    ConvergenceTracker,
    IntervalSet,
    NameRef,
    SharedVars,
    brute_force_min_d2_coloring,
    brute_force_mis,
    collision_containment,
    fixed_point_oracle,
    oracle_mismatches,
    star_chain_topology,
)
from tdmasim.state import NodeCache, NodeState, canon_spectrum, node_rng
from tdmasim.topology import Topology, path_topology
from tdmasim.validators import containment_violations


def star(k):
    adj = {0: set(range(1, k + 1))}
    for q in range(1, k + 1):
        adj[q] = {0}
    return Topology(k, adj, {p: (p, 0) for p in adj})


class TestBruteForceColoring:
    def test_single_node(self):
        topo = Topology(1, {0: set()}, {0: (0, 0)})
        assert brute_force_min_d2_coloring(topo) == 1

    def test_star_needs_degree_plus_one(self):
        assert brute_force_min_d2_coloring(star(4)) == 5

    def test_paths(self):
        assert brute_force_min_d2_coloring(path_topology(3)) == 3
        assert brute_force_min_d2_coloring(path_topology(5)) == 3

    def test_four_cycle_is_one_big_clique_at_distance_two(self):
        adj = {0: {1, 3}, 1: {0, 2}, 2: {1, 3}, 3: {0, 2}}
        topo = Topology(2, adj, {p: (p, 0) for p in adj})
        assert brute_force_min_d2_coloring(topo) == 4

    def test_reference_fixture_needs_nine(self):
        assert brute_force_min_d2_coloring(star_chain_topology(), max_nodes=13) == 9

    def test_size_cap(self):
        with pytest.raises(ValueError):
            brute_force_min_d2_coloring(star_chain_topology())
        with pytest.raises(ValueError):
            brute_force_mis(star_chain_topology())


def two_node_states():
    """Hand-built converged pair: node 0 leads, colors 0/1, split interval."""
    topo = path_topology(2)
    r0 = NameRef(1, 0)
    sv0 = SharedVars(
        node=0, claimed=(1,), name=1, leader=True, min_leader=r0,
        color=0, setcol=((0, 0), (1, 1)),
        spectrum=canon_spectrum([(0, r0), (1, r0)]),
        base=2, itvl=IntervalSet([(0, F(1, 2))]),
    )
    sv1 = SharedVars(
        node=1, claimed=(0,), name=5, leader=False, min_leader=r0,
        color=1, spectrum=canon_spectrum([(0, r0), (1, r0)]),
        base=2, itvl=IntervalSet([(F(1, 2), 1)]),
    )
    states = {}
    for p, sv in ((0, sv0), (1, sv1)):
        states[p] = NodeState(
            node=p, shared=sv, cache=NodeCache(p, 14), rng=node_rng(0, p)
        )
    states[0].cache.upsert(1, sv1, 1, now=0)
    states[1].cache.upsert(0, sv0, 1, now=0)
    return topo, states


class TestFixedPointOracle:
    def test_single_node(self):
        topo = Topology(1, {0: set()}, {0: (0, 0)})
        o = fixed_point_oracle(topo, {0: 7})
        assert o.leaders == {0: True}
        assert o.colors == {0: 0}
        assert o.bases == {0: 1}
        assert o.itvls[0] == IntervalSet([(0, 1)])

    def test_three_path_by_hand(self):
        topo = path_topology(3)
        o = fixed_point_oracle(topo, {0: 1, 1: 5, 2: 3})
        assert o.leaders == {0: True, 1: False, 2: True}
        assert o.min_leaders == {
            0: NameRef(1, 0),
            1: NameRef(1, 0),
            2: NameRef(3, 2),
        }
        assert o.setcols == {0: ((0, 0), (1, 1)), 1: (), 2: ((2, 2),)}
        assert o.colors == {0: 0, 1: 1, 2: 2}
        assert o.bases == {0: 3, 1: 3, 2: 3}
        assert o.itvls == {
            0: IntervalSet([(0, F(1, 3))]),
            1: IntervalSet([(F(1, 3), F(2, 3))]),
            2: IntervalSet([(F(2, 3), 1)]),
        }

    def test_shares_sum_to_one_on_fixture(self):
        topo = star_chain_topology()
        o = fixed_point_oracle(topo, {p: 100 + p for p in topo.nodes})
        # every 2-ball's shares are disjoint, and bases bound the shares
        for p in topo.nodes:
            assert o.itvls[p].total() == F(1, o.bases[p])
            for q in topo.neighborhood(p, 2) - {p}:
                assert not o.itvls[p].intersects(o.itvls[q])

    def test_mis_and_coloring_are_legitimate_on_fixture(self):
        from tdmasim import coloring_valid, mis_valid

        topo = star_chain_topology()
        o = fixed_point_oracle(topo, {p: (7 * p + 3) % 97 for p in topo.nodes})
        assert mis_valid(topo, o.leaders)
        assert coloring_valid(topo, o.colors)

    def test_oracle_matches_hand_built_states(self):
        topo, states = two_node_states()
        o = fixed_point_oracle(topo, {0: 1, 1: 5})
        assert oracle_mismatches(o, states) == []

    def test_mismatches_name_fields(self):
        topo, states = two_node_states()
        o = fixed_point_oracle(topo, {0: 1, 1: 5})
        sv = states[1].shared
        states[1].shared = SharedVars(
            node=1, claimed=sv.claimed, name=sv.name, leader=sv.leader,
            min_leader=sv.min_leader, color=2, setcol=sv.setcol,
            spectrum=sv.spectrum, base=sv.base, itvl=sv.itvl,
        )
        out = oracle_mismatches(o, states)
        assert out == ["1: color 2 != 1"]


class TestConvergenceTracker:
    def test_converged_pair_stamps_at_zero(self):
        topo, states = two_node_states()
        tr = ConvergenceTracker(topo)
        tr.observe(0, states, changed={0, 1})
        for sf in range(1, 5):
            tr.observe(sf, states, changed=set())
        rep = tr.report(guard_band=0)
        assert rep.final_ok["slots"] == {0: True, 1: True}
        assert rep.stamps["slots"] == {0: 0, 1: 0}
        assert rep.overall == {0: 0, 1: 0}
        assert rep.global_time == 0
        assert rep.uniq_flaps == []
        assert rep.recorded_superframes == 5

    def test_guard_band_rejects_short_suffixes(self):
        topo, states = two_node_states()
        tr = ConvergenceTracker(topo)
        tr.observe(0, states, changed={0, 1})
        rep = tr.report(guard_band=50)
        assert rep.stamps["slots"] == {0: None, 1: None}
        assert rep.global_time is None

    def test_layers_gate_cumulatively(self):
        topo, states = two_node_states()
        # poison naming only: neighbor holds a stale belief about node 0
        states[1].cache.upsert(0, SharedVars(node=0, name=99), 1, now=0)
        tr = ConvergenceTracker(topo)
        tr.observe(0, states, changed={0, 1})
        assert tr.ok["naming"][0] is False
        assert tr.ok["mis"][0] is False  # gated, though locally fine
        assert tr.ok["slots"][0] is False

    def test_uniq_flap_is_recorded(self):
        topo, states = two_node_states()
        tr = ConvergenceTracker(topo)
        tr.observe(0, states, changed={0, 1})
        assert tr.ok["naming"][0] is True
        states[1].cache.upsert(0, SharedVars(node=0, name=99), 1, now=1)
        tr.observe(1, states, changed={1})
        assert tr.uniq_flaps == [(1, 0)]
        rep = tr.report(guard_band=0)
        assert rep.stamps["naming"][0] is None  # false at the end

    def test_unevaluated_false_nodes_keep_aging(self):
        topo, states = two_node_states()
        states[1].cache.clear()  # node 0's naming predicate is false
        tr = ConvergenceTracker(topo)
        tr.observe(0, states, changed={0, 1})
        tr.observe(1, states, changed=set())  # nothing re-evaluated
        assert tr.last_false["naming"][0] == 1

    def test_dirty_set_covers_three_ball(self):
        topo, states = two_node_states()
        tr = ConvergenceTracker(topo)
        dirty = tr._dirty(states, {0})
        assert dirty == {0, 1}

    def test_force_all_reevaluates_everything(self):
        topo, states = two_node_states()
        tr = ConvergenceTracker(topo)
        tr.observe(0, states, changed=set(), force_all=True)
        assert tr.ok["slots"] == {0: True, 1: True}


class TestContainment:
    def test_violations_filtered_by_ball_and_time(self):
        topo = path_topology(7)
        collisions = [(5, 0, 6), (10, 0, 3), (10, 0, 4), (12, 1, 6)]
        out = containment_violations(topo, collisions, {0}, after_superframe=8)
        assert out == [(10, 0, 4), (12, 1, 6)]
        assert not collision_containment(topo, collisions, {0}, 8)
        assert collision_containment(topo, [(10, 0, 3)], {0}, 8)

    def test_isolated_crash_allows_only_itself(self):
        topo = Topology(2, {0: set(), 1: {2}, 2: {1}}, {0: (0, 0), 1: (1, 0), 2: (2, 0)})
        out = containment_violations(topo, [(3, 0, 1)], {0}, 0)
        assert out == [(3, 0, 1)]
        assert collision_containment(topo, [], {0}, 0)
