"""Shared helpers: exhaustive DAG enumeration and random-instance builders.

The enumeration helpers are independent oracles — they derive equivalence
classes and CPDAGs from first principles (skeleton + collider grouping over
every DAG of a given size) without touching the library's own conversion.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np
import pytest

from askdag.dataset import Dataset
from askdag.graph import Dag, Pdag, apply_change, canonical_digest
from askdag.knowledge import KnowledgeConstraints
from askdag.scoring import ScoreCache, bic_dag
from askdag.search import best_change, enumerate_changes


def all_dags(n: int) -> list[Dag]:
    """Every labeled DAG on n nodes, by exhaustive pair-state assignment."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        arcs = []
        for (a, b), s in zip(pairs, states):
            if s == 1:
                arcs.append((a, b))
            elif s == 2:
                arcs.append((b, a))
        try:
            out.append(Dag(n, arcs))
        except Exception:
            continue
    return out


def skeleton(dag: Dag) -> frozenset:
    return frozenset(frozenset(arc) for arc in dag.arcs())


def colliders(dag: Dag) -> frozenset:
    """Unshielded collider triples (a, b, c) with a -> b <- c, a, c nonadjacent."""
    found = set()
    for b in range(dag.n):
        ps = sorted(dag.parents(b))
        for a, c in itertools.combinations(ps, 2):
            if not dag.adjacent(a, c):
                found.add((a, b, c))
    return frozenset(found)


def equivalence_class(dag: Dag, universe: list[Dag]) -> list[Dag]:
    key = (skeleton(dag), colliders(dag))
    return [d for d in universe if (skeleton(d), colliders(d)) == key]


def brute_cpdag(dag: Dag, universe: list[Dag]) -> Pdag:
    """CPDAG from first principles: an edge is directed iff every member of
    the equivalence class orients it the same way."""
    members = equivalence_class(dag, universe)
    directed, undirected = set(), set()
    for arc in dag.arcs():
        if all(m.has_arc(arc) for m in members):
            directed.add(arc)
        else:
            undirected.add((min(arc), max(arc)))
    return Pdag(dag.n, directed, undirected)


def random_dag(rng: np.random.Generator, n: int, p: float = 0.4) -> Dag:
    order = rng.permutation(n)
    arcs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                arcs.append((int(order[i]), int(order[j])))
    return Dag(n, arcs)


def random_dataset(
    rng: np.random.Generator, cols: int, rows: int, max_card: int = 3
) -> Dataset:
    names = [f"v{i}" for i in range(cols)]
    states, columns = [], []
    for _ in range(cols):
        card = int(rng.integers(2, max_card + 1))
        states.append([f"s{k}" for k in range(card)])
        columns.append(rng.integers(0, card, size=rows))
    cells = np.column_stack(columns).astype(np.int32)
    return Dataset(names, states, cells)


def plain_tabu(dataset: Dataset) -> Dag:
    """Reference search with no oracle plumbing at all: best allowed change
    per iteration, 10-entry visited-list, stop after 10 consecutive applied
    changes that fail to beat the peak score."""
    dag = Dag(dataset.n)
    cache = ScoreCache()
    rows = range(0, dataset.row_count)
    score = bic_dag(dataset, dag, rows, cache)
    best_dag, best_score, peak = dag.copy(), score, score
    tabu: deque = deque(maxlen=10)
    patience = 0
    empty = KnowledgeConstraints()
    while True:
        changes = enumerate_changes(dag, empty, tabu)
        if not changes:
            break
        change, delta = best_change(changes, dag, dataset, cache)
        apply_change(dag, change)
        score += delta
        tabu.append(canonical_digest(dag))
        if score > best_score:
            best_dag, best_score = dag.copy(), score
        improved = score > peak
        peak = max(peak, score)
        patience = 0 if improved else patience + 1
        if patience >= 10:
            break
    return best_dag


@pytest.fixture(scope="session")
def dags3() -> list[Dag]:
    return all_dags(3)


@pytest.fixture(scope="session")
def dags4() -> list[Dag]:
    return all_dags(4)
