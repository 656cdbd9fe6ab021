import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from askdag.dataset import Dataset, half_ranges
from askdag.graph import Change, ChangeKind, Dag, would_create_cycle
from askdag.scoring import (
    ScoreCache,
    ScoringError,
    bic_dag,
    bic_node,
    delta_for_change,
    rel_close,
    subsample_scores,
)
from conftest import colliders, random_dag, random_dataset, skeleton


def ref_bic_node(d: Dataset, child: int, parents, rows) -> float:
    """Reference score: plain dict counting, no shared code with the library."""
    joint: dict = {}
    parent_totals: dict = {}
    for i in rows:
        cfg = tuple(int(d.cells[i, p]) for p in parents)
        k = int(d.cells[i, child])
        joint[(cfg, k)] = joint.get((cfg, k), 0) + 1
        parent_totals[cfg] = parent_totals.get(cfg, 0) + 1
    loglik = sum(
        c * math.log(c / parent_totals[cfg]) for (cfg, _), c in joint.items()
    )
    q = 1
    for p in parents:
        q *= len(d.states[p])
    r = len(d.states[child])
    return loglik - 0.5 * math.log(len(rows)) * q * (r - 1)


def ref_bic_dag(d: Dataset, dag: Dag, rows) -> float:
    return sum(ref_bic_node(d, v, sorted(dag.parents(v)), rows) for v in range(dag.n))


def binary_col(values) -> Dataset:
    cells = np.array([[v] for v in values], dtype=np.int32)
    return Dataset(["a"], [["x", "y"]], cells)


class TestBicNode:
    def test_constant_binary_column(self):
        d = binary_col([0, 0, 0, 0])
        # likelihood 4*ln(4/4) = 0; penalty (ln 4)/2 * 1 * (2-1)
        assert bic_node(d, 0, (), range(0, 4)) == pytest.approx(-math.log(4) / 2)

    def test_balanced_binary_column(self):
        d = binary_col([0, 0, 1, 1])
        expect = 4 * math.log(0.5) - math.log(4) / 2
        assert bic_node(d, 0, (), range(0, 4)) == pytest.approx(expect)
        assert expect == pytest.approx(-3.4657, abs=1e-4)

    def test_single_valued_child_scores_zero(self):
        cells = np.array([[0, 0], [0, 1], [0, 0]], dtype=np.int32)
        d = Dataset(["a", "b"], [["only"], ["x", "y"]], cells)
        assert bic_node(d, 0, (), range(0, 3)) == 0.0
        assert bic_node(d, 0, (1,), range(0, 3)) == 0.0

    def test_empty_row_range_rejected(self):
        d = binary_col([0, 1])
        with pytest.raises(ScoringError):
            bic_node(d, 0, (), range(0, 0))

    def test_matches_reference_on_random_data(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            d = random_dataset(rng, 4, 60)
            child = int(rng.integers(0, 4))
            parents = tuple(p for p in range(4) if p != child and rng.random() < 0.5)
            got = bic_node(d, child, parents, range(0, 60))
            assert got == pytest.approx(ref_bic_node(d, child, parents, range(0, 60)))

    def test_penalty_grows_with_parents_likelihood_never_drops(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = random_dataset(rng, 3, 80)
            rows = range(0, 80)
            r = len(d.states[0])
            q_small, q_big = 1, len(d.states[1])
            pen_small = 0.5 * math.log(80) * q_small * (r - 1)
            pen_big = 0.5 * math.log(80) * q_big * (r - 1)
            assert pen_big >= pen_small
            lik_small = bic_node(d, 0, (), rows) + pen_small
            lik_big = bic_node(d, 0, (1,), rows) + pen_big
            assert lik_big >= lik_small - 1e-9


class TestBicDag:
    def test_empty_dag_is_sum_of_parentless_terms(self):
        rng = np.random.default_rng(7)
        d = random_dataset(rng, 4, 50)
        total = bic_dag(d, Dag(4), range(0, 50), ScoreCache())
        parts = sum(bic_node(d, v, (), range(0, 50)) for v in range(4))
        assert total == pytest.approx(parts)

    def test_two_node_orientations_tie(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            d = random_dataset(rng, 2, 40)
            a = bic_dag(d, Dag(2, [(0, 1)]), range(0, 40), ScoreCache())
            b = bic_dag(d, Dag(2, [(1, 0)]), range(0, 40), ScoreCache())
            assert rel_close(a, b)

    def test_chain_fork_chain_reversed_tie(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            d = random_dataset(rng, 3, 200)
            rows = range(0, 200)
            chain = bic_dag(d, Dag(3, [(0, 1), (1, 2)]), rows, ScoreCache())
            fork = bic_dag(d, Dag(3, [(1, 0), (1, 2)]), rows, ScoreCache())
            rev = bic_dag(d, Dag(3, [(2, 1), (1, 0)]), rows, ScoreCache())
            assert rel_close(chain, fork) and rel_close(chain, rev)

    def test_node_count_mismatch_rejected(self):
        d = random_dataset(np.random.default_rng(1), 2, 10)
        with pytest.raises(ScoringError):
            bic_dag(d, Dag(3), range(0, 10), ScoreCache())

    def test_score_equivalence_all_3node_classes(self, dags3):
        rng = np.random.default_rng(10)
        for _ in range(3):
            d = random_dataset(rng, 3, 200)
            rows = range(0, 200)
            cache = ScoreCache()
            by_class: dict = {}
            for dag in dags3:
                by_class.setdefault((skeleton(dag), colliders(dag)), []).append(
                    bic_dag(d, dag, rows, cache)
                )
            for values in by_class.values():
                assert all(rel_close(v, values[0]) for v in values)


class TestDelta:
    def test_delete_then_readd_negates(self):
        rng = np.random.default_rng(2)
        d = random_dataset(rng, 3, 50)
        dag = Dag(3, [(0, 1)])
        cache = ScoreCache()
        down = delta_for_change(dag, Change(ChangeKind.DELETE, (0, 1)), d, cache)
        dag.remove_arc((0, 1))
        up = delta_for_change(dag, Change(ChangeKind.ADD, (0, 1)), d, cache)
        assert down == pytest.approx(-up)

    def test_opposite_adds_tie_on_empty_graph(self):
        rng = np.random.default_rng(4)
        d = random_dataset(rng, 2, 60)
        cache = ScoreCache()
        a = delta_for_change(Dag(2), Change(ChangeKind.ADD, (0, 1)), d, cache)
        b = delta_for_change(Dag(2), Change(ChangeKind.ADD, (1, 0)), d, cache)
        assert rel_close(a, b)

    def test_matches_full_rescore_on_random_cases(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 200:
            d = random_dataset(rng, 4, 40)
            dag = random_dag(rng, 4)
            change = _random_legal_change(rng, dag)
            if change is None:
                continue
            cache = ScoreCache()
            rows = range(0, 40)
            before = ref_bic_dag(d, dag, rows)
            got = delta_for_change(dag, change, d, cache)
            after_dag = dag.copy()
            _apply(after_dag, change)
            after = ref_bic_dag(d, after_dag, rows)
            assert got == pytest.approx(after - before, rel=1e-9, abs=1e-9)
            checked += 1

    def test_leaves_dag_unchanged(self):
        d = random_dataset(np.random.default_rng(5), 3, 30)
        dag = Dag(3, [(0, 1)])
        delta_for_change(dag, Change(ChangeKind.REVERSE, (0, 1)), d, ScoreCache())
        assert list(dag.arcs()) == [(0, 1)]


class TestSubsampleScores:
    def test_identical_halves_tie(self):
        rng = np.random.default_rng(6)
        half = rng.integers(0, 2, size=(20, 2)).astype(np.int32)
        d = Dataset(["a", "b"], [["x", "y"], ["x", "y"]], np.vstack([half, half]))
        dag = Dag(2, [(0, 1)])
        s1, s2, _ = subsample_scores(dag, d, ScoreCache())
        assert s1 == pytest.approx(s2)

    def test_full_matches_bic_dag(self):
        d = random_dataset(np.random.default_rng(7), 3, 50)
        dag = Dag(3, [(0, 2)])
        cache = ScoreCache()
        _, _, full = subsample_scores(dag, d, cache)
        assert full == pytest.approx(bic_dag(d, dag, range(0, 50), ScoreCache()))

    def test_two_node_eight_row_hand_oracle(self):
        cells = np.array(
            [[0, 0], [0, 1], [1, 1], [1, 0], [0, 0], [1, 1], [1, 1], [0, 1]],
            dtype=np.int32,
        )
        d = Dataset(["a", "b"], [["x", "y"], ["x", "y"]], cells)
        dag = Dag(2, [(0, 1)])
        s1, s2, full = subsample_scores(dag, d, ScoreCache())
        first, second = half_ranges(d)
        assert s1 == pytest.approx(ref_bic_dag(d, dag, first))
        assert s2 == pytest.approx(ref_bic_dag(d, dag, second))
        assert full == pytest.approx(ref_bic_dag(d, dag, range(0, 8)))
        # each half's penalty uses its own 4-row size: ln(4)/2 per table row
        assert s1 == pytest.approx(_hand_first_half())


class TestCache:
    def test_cold_and_warm_identical(self):
        d = random_dataset(np.random.default_rng(13), 4, 60)
        dag = Dag(4, [(0, 1), (2, 1), (1, 3)])
        cache = ScoreCache()
        cold = bic_dag(d, dag, range(0, 60), cache)
        warm = bic_dag(d, dag, range(0, 60), cache)
        assert cold == warm
        assert cache.hits > 0

    def test_distinct_row_ranges_not_conflated(self):
        d = random_dataset(np.random.default_rng(14), 2, 40)
        cache = ScoreCache()
        full = bic_node(d, 0, (), range(0, 40), cache)
        half = bic_node(d, 0, (), range(0, 20), cache)
        assert full != half


def _hand_first_half() -> float:
    # first half rows: (0,0) (0,1) (1,1) (1,0) — a balanced, b|a balanced
    lik_a = 4 * math.log(0.5)
    lik_b = 4 * math.log(0.5)
    pen = math.log(4) / 2 * (1 * 1) + math.log(4) / 2 * (2 * 1)
    return lik_a + lik_b - pen


def _apply(dag: Dag, change: Change) -> None:
    if change.kind is ChangeKind.ADD:
        dag.add_arc(change.arc)
    elif change.kind is ChangeKind.DELETE:
        dag.remove_arc(change.arc)
    else:
        a, b = change.arc
        dag.remove_arc((a, b))
        dag.add_arc((b, a))


def _random_legal_change(rng, dag: Dag):
    kind = rng.integers(0, 3)
    pairs = [(a, b) for a in range(dag.n) for b in range(dag.n) if a != b]
    rng.shuffle(pairs)
    for a, b in pairs:
        arc = (int(a), int(b))
        if kind == 0 and not dag.adjacent(*arc) and not would_create_cycle(dag, arc):
            return Change(ChangeKind.ADD, arc)
        if kind == 1 and dag.has_arc(arc):
            return Change(ChangeKind.DELETE, arc)
        if kind == 2 and dag.has_arc(arc):
            probe = dag.copy()
            probe.remove_arc(arc)
            if not would_create_cycle(probe, (arc[1], arc[0])):
                return Change(ChangeKind.REVERSE, arc)
    return None


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_decomposability_property(seed):
    rng = np.random.default_rng(seed)
    d = random_dataset(rng, 4, 30)
    dag = random_dag(rng, 4)
    cache = ScoreCache()
    total = bic_dag(d, dag, range(0, 30), cache)
    parts = sum(
        bic_node(d, v, tuple(sorted(dag.parents(v))), range(0, 30)) for v in range(4)
    )
    assert total == pytest.approx(parts)
