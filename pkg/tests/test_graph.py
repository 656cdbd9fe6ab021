import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import numpy as np

from askdag.graph import (
    Change,
    ChangeKind,
    CycleError,
    Dag,
    GraphError,
    Pdag,
    affected_nodes,
    apply_change,
    canonical_digest,
    dag_to_cpdag,
    revert_change,
    topological_order,
    would_create_cycle,
)
from conftest import all_dags, brute_cpdag, random_dag


class TestDag:
    def test_rejects_self_loop(self):
        with pytest.raises(GraphError):
            Dag(2, [(0, 0)])

    def test_rejects_both_orientations(self):
        with pytest.raises(GraphError):
            Dag(2, [(0, 1), (1, 0)])

    def test_rejects_cycle(self):
        with pytest.raises(GraphError):
            Dag(3, [(0, 1), (1, 2), (2, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(GraphError):
            Dag(2, [(0, 2)])

    def test_rejects_duplicate_arc(self):
        d = Dag(2, [(0, 1)])
        with pytest.raises(GraphError):
            d.add_arc((0, 1))

    def test_copy_is_independent(self):
        d = Dag(3, [(0, 1)])
        c = d.copy()
        c.add_arc((1, 2))
        assert not d.has_arc((1, 2))
        assert c.has_arc((1, 2))

    def test_equality_by_arc_set(self):
        assert Dag(3, [(0, 1), (1, 2)]) == Dag(3, [(1, 2), (0, 1)])
        assert Dag(3, [(0, 1)]) != Dag(3, [(1, 0)])


class TestWouldCreateCycle:
    def test_empty_graph_never_cycles(self):
        assert would_create_cycle(Dag(3), (0, 1)) is False

    def test_closing_a_chain_cycles(self):
        assert would_create_cycle(Dag(3, [(0, 1), (1, 2)]), (2, 0)) is True

    def test_back_arc_into_path(self):
        # path 1 -> 2 exists, so 2 -> 1 closes a loop
        assert would_create_cycle(Dag(3, [(0, 1), (1, 2), (0, 2)]), (2, 1)) is True

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphError):
            would_create_cycle(Dag(2), (0, 5))

    def test_agrees_with_constructor_on_all_small_graphs(self, dags3):
        for dag in dags3:
            for a in range(3):
                for b in range(3):
                    if a == b or dag.has_arc((a, b)) or dag.has_arc((b, a)):
                        continue
                    arcs = list(dag.arcs()) + [(a, b)]
                    try:
                        Dag(3, arcs)
                        legal = True
                    except GraphError:
                        legal = False
                    assert would_create_cycle(dag, (a, b)) == (not legal)


class TestTopologicalOrder:
    def test_unconstrained_is_index_order(self):
        assert topological_order(Dag(3)) == [0, 1, 2]

    def test_single_chain(self):
        assert topological_order(Dag(3, [(2, 0), (0, 1)])) == [2, 0, 1]

    def test_tie_broken_by_index(self):
        assert topological_order(Dag(3, [(0, 2), (1, 2)])) == [0, 1, 2]

    def test_every_arc_goes_forward(self, dags4):
        for dag in dags4[::7]:
            pos = {v: i for i, v in enumerate(topological_order(dag))}
            assert all(pos[a] < pos[b] for a, b in dag.arcs())


class TestCanonicalDigest:
    def test_empty_graphs_match(self):
        assert canonical_digest(Dag(4)) == canonical_digest(Dag(4))

    def test_orientation_matters(self):
        assert canonical_digest(Dag(2, [(0, 1)])) != canonical_digest(Dag(2, [(1, 0)]))

    def test_insertion_order_irrelevant(self):
        a = Dag(3, [(0, 1), (1, 2)])
        b = Dag(3)
        b.add_arc((1, 2))
        b.add_arc((0, 1))
        assert canonical_digest(a) == canonical_digest(b)

    def test_distinct_node_counts_differ(self):
        assert canonical_digest(Dag(2)) != canonical_digest(Dag(3))


class TestDagToCpdag:
    def test_chain_fully_undirected(self):
        p = dag_to_cpdag(Dag(3, [(0, 1), (1, 2)]))
        assert p.directed == set()
        assert p.undirected == {(0, 1), (1, 2)}

    def test_collider_stays_directed(self):
        p = dag_to_cpdag(Dag(3, [(0, 2), (1, 2)]))
        assert p.directed == {(0, 2), (1, 2)}
        assert p.undirected == set()

    def test_shielded_triangle_fully_undirected(self, dags3):
        dag = Dag(3, [(0, 1), (0, 2), (1, 2)])
        assert dag_to_cpdag(dag) == Pdag(3, set(), {(0, 1), (0, 2), (1, 2)})
        # six orderings of a complete triangle share the class
        assert len([d for d in dags3 if dag_to_cpdag(d) == dag_to_cpdag(dag)]) == 6

    def test_matches_brute_force_on_all_3node_dags(self, dags3):
        for dag in dags3:
            assert dag_to_cpdag(dag) == brute_cpdag(dag, dags3)

    def test_constant_on_equivalence_classes(self, dags3):
        from conftest import colliders, skeleton

        groups = {}
        for dag in dags3:
            groups.setdefault((skeleton(dag), colliders(dag)), []).append(dag)
        for members in groups.values():
            first = dag_to_cpdag(members[0])
            assert all(dag_to_cpdag(m) == first for m in members[1:])

    def test_meek_propagation_orients_descendant_edges(self):
        # collider 0 -> 2 <- 1 plus 2 - 3: the 2 -> 3 edge is compelled,
        # otherwise 3 -> 2 would create a new collider at 2
        p = dag_to_cpdag(Dag(4, [(0, 2), (1, 2), (2, 3)]))
        assert (2, 3) in p.directed
        assert p.undirected == set()


class TestPdag:
    def test_rejects_pair_in_both_sets(self):
        with pytest.raises(GraphError):
            Pdag(2, {(0, 1)}, {(0, 1)})

    def test_equality_normalizes_pair_order(self):
        assert Pdag(2, set(), {(1, 0)}) == Pdag(2, set(), {(0, 1)})


class TestChanges:
    def test_affected_nodes(self):
        assert affected_nodes(Change(ChangeKind.ADD, (0, 1))) == (1,)
        assert affected_nodes(Change(ChangeKind.DELETE, (0, 1))) == (1,)
        assert affected_nodes(Change(ChangeKind.REVERSE, (0, 1))) == (0, 1)

    def test_apply_and_revert_roundtrip(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            dag = random_dag(rng, 5)
            before = canonical_digest(dag)
            for change in _legal_changes(dag):
                apply_change(dag, change)
                revert_change(dag, change)
                assert canonical_digest(dag) == before

    def test_apply_add(self):
        d = Dag(2)
        apply_change(d, Change(ChangeKind.ADD, (0, 1)))
        assert d.has_arc((0, 1))

    def test_apply_reverse(self):
        d = Dag(2, [(0, 1)])
        apply_change(d, Change(ChangeKind.REVERSE, (0, 1)))
        assert d.has_arc((1, 0)) and not d.has_arc((0, 1))


def _legal_changes(dag: Dag):
    for a in range(dag.n):
        for b in range(dag.n):
            if a == b:
                continue
            if dag.has_arc((a, b)):
                yield Change(ChangeKind.DELETE, (a, b))
                rev = dag.copy()
                rev.remove_arc((a, b))
                if not would_create_cycle(rev, (b, a)):
                    yield Change(ChangeKind.REVERSE, (a, b))
            elif not dag.adjacent(a, b) and not would_create_cycle(dag, (a, b)):
                yield Change(ChangeKind.ADD, (a, b))


@given(st.integers(2, 5), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_random_dag_topological_consistency(n, seed):
    dag = random_dag(np.random.default_rng(seed), n)
    pos = {v: i for i, v in enumerate(topological_order(dag))}
    assert sorted(pos) == list(range(n))
    assert all(pos[a] < pos[b] for a, b in dag.arcs())


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_cycle_check_matches_reconstruction(seed):
    rng = np.random.default_rng(seed)
    dag = random_dag(rng, 5)
    a, b = rng.integers(0, 5), rng.integers(0, 5)
    if a == b or dag.adjacent(int(a), int(b)):
        return
    arc = (int(a), int(b))
    try:
        Dag(5, list(dag.arcs()) + [arc])
        legal = True
    except GraphError:
        legal = False
    assert would_create_cycle(dag, arc) == (not legal)
