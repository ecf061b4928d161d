from tdmasim import NameRef, brute_force_mis, mis_problems, mis_step, mis_valid
from tdmasim.topology import Topology, path_topology


def ref(name, node=None):
    return NameRef(name, node if node is not None else name)


class TestMisStep:
    def test_local_minimum_joins(self):
        me = ref(3)
        nbrs = [(ref(5), False), (ref(9), True)]
        assert mis_step(me, nbrs, leader=False) is True

    def test_isolated_node_joins(self):
        assert mis_step(ref(3), [], leader=False) is True

    def test_leader_yields_to_smaller_leader(self):
        me = ref(5)
        nbrs = [(ref(3), True)]
        assert mis_step(me, nbrs, leader=True) is False

    def test_leader_keeps_seat_over_smaller_non_leader(self):
        me = ref(5)
        nbrs = [(ref(3), False), (ref(9), True)]
        assert mis_step(me, nbrs, leader=True) is True

    def test_rejoins_when_all_smaller_are_out(self):
        me = ref(5)
        nbrs = [(ref(3), False), (ref(9), True)]
        assert mis_step(me, nbrs, leader=False) is True

    def test_stays_out_while_smaller_leader_exists(self):
        me = ref(5)
        nbrs = [(ref(3), True), (ref(9), False)]
        assert mis_step(me, nbrs, leader=False) is False

    def test_non_leader_with_bigger_leader_neighbor_only(self):
        # not a local minimum is irrelevant: 3 < 5 and 3 is not a leader
        me = ref(5)
        nbrs = [(ref(3), False)]
        assert mis_step(me, nbrs, leader=False) is True

    def test_id_breaks_name_ties(self):
        # equal names: node id orders (4, 1) below (4, 2)
        assert mis_step(NameRef(4, 1), [(NameRef(4, 2), True)], False) is True
        assert mis_step(NameRef(4, 2), [(NameRef(4, 1), True)], False) is False

    def test_fixed_points_do_not_move(self):
        me = ref(5)
        nbrs = [(ref(3), True)]
        assert mis_step(me, nbrs, leader=False) is False
        nbrs = [(ref(9), False)]
        assert mis_step(me, nbrs, leader=True) is True


class TestMisProblems:
    def test_valid_on_path(self):
        topo = path_topology(3)
        assert mis_valid(topo, {0: True, 1: False, 2: True})
        assert mis_valid(topo, {0: False, 1: True, 2: False})

    def test_adjacent_leaders_reported(self):
        topo = path_topology(2)
        probs = mis_problems(topo, {0: True, 1: True})
        assert any("adjacent leaders" in p for p in probs)

    def test_undominated_reported(self):
        topo = path_topology(3)
        probs = mis_problems(topo, {0: True, 1: False, 2: False})
        assert any("undominated" in p for p in probs)

    def test_isolated_node_must_lead(self):
        topo = Topology(1, {0: set()}, {0: (0, 0)})
        assert not mis_valid(topo, {0: False})
        assert mis_valid(topo, {0: True})


class TestBruteForceMis:
    def test_triangle_has_three_singletons(self):
        adj = {0: {1, 2}, 1: {0, 2}, 2: {0, 1}}
        topo = Topology(2, adj, {p: (p, 0) for p in adj})
        assert brute_force_mis(topo) == {
            frozenset({0}),
            frozenset({1}),
            frozenset({2}),
        }

    def test_two_path(self):
        topo = path_topology(2)
        assert brute_force_mis(topo) == {frozenset({0}), frozenset({1})}

    def test_four_cycle_diagonals(self):
        adj = {0: {1, 3}, 1: {0, 2}, 2: {1, 3}, 3: {0, 2}}
        topo = Topology(2, adj, {p: (p, 0) for p in adj})
        assert brute_force_mis(topo) == {frozenset({0, 2}), frozenset({1, 3})}

    def test_every_member_passes_validator(self):
        topo = path_topology(6)
        for mis in brute_force_mis(topo):
            assert mis_valid(topo, {p: p in mis for p in topo.nodes})
