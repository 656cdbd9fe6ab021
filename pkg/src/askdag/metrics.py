"""Structural accuracy of a learned graph against the generating one.

Arc-level confusion counts feed F1; SHD is a Hamming distance over node
pairs. A reversed arc costs one fp plus one fn under F1 but only a
single point under SHD.
"""

from __future__ import annotations

from dataclasses import dataclass

from askdag.graph import Dag, Pdag


class MetricsError(Exception):
    pass


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int


def _check(learned_n: int, truth_n: int) -> None:
    if learned_n != truth_n:
        raise MetricsError("node-count mismatch")


def confusion_dag(learned: Dag, truth: Dag) -> Confusion:
    _check(learned.n, truth.n)
    learned_arcs = set(learned.arcs())
    truth_arcs = set(truth.arcs())
    tp = len(learned_arcs & truth_arcs)
    return Confusion(tp, len(learned_arcs) - tp, len(truth_arcs) - tp)


def f1(conf: Confusion) -> float:
    denom = 2 * conf.tp + conf.fp + conf.fn
    if denom == 0:
        # both graphs empty: perfect agreement
        return 1.0
    return 2 * conf.tp / denom


def shd_dag(learned: Dag, truth: Dag) -> int:
    _check(learned.n, truth.n)
    learned_arcs = set(learned.arcs())
    truth_arcs = set(truth.arcs())
    distance = 0
    for a in range(truth.n):
        for b in range(a + 1, truth.n):
            in_learned = (a, b) in learned_arcs or (b, a) in learned_arcs
            in_truth = (a, b) in truth_arcs or (b, a) in truth_arcs
            if in_learned != in_truth:
                distance += 1
            elif in_learned and ((a, b) in learned_arcs) != ((a, b) in truth_arcs):
                distance += 1
    return distance


def confusion_cpdag(learned: Pdag, truth: Pdag) -> Confusion:
    """Exact-match confusion on equivalence-class graphs: an edge counts
    tp only when both graphs agree on type and, if directed, direction."""
    _check(learned.n, truth.n)
    tp = len(learned.directed & truth.directed) + len(
        learned.undirected & truth.undirected
    )
    learned_total = len(learned.directed) + len(learned.undirected)
    truth_total = len(truth.directed) + len(truth.undirected)
    return Confusion(tp, learned_total - tp, truth_total - tp)
