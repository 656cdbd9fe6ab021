"""Human knowledge: oracle answers to search queries and predefined
constraint generation.

A verdict is always relative to the proposed change, not to the arc as
written. CONFIRM means the change is right; OPPOSITE means the pair
belongs in the graph with the other orientation; ABSENT carries the
remaining case, so on a deletion it means the arc stands as named.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Protocol

import numpy as np

from askdag.graph import (
    Arc,
    Change,
    ChangeKind,
    CycleError,
    Dag,
    topological_order,
    would_create_cycle,
)


class ConstraintError(Exception):
    pass


class GenerationError(Exception):
    pass


class Verdict(enum.Enum):
    CONFIRM = "confirm"
    OPPOSITE = "opposite"
    ABSENT = "absent"


@dataclass(frozen=True)
class Query:
    change: Change
    iteration: int
    requests_used: int


class KnowledgeConstraints:
    """Hard structural constraints: arcs that must be present (reqd) and
    arcs that must be absent (stop). Grows monotonically; any update that
    would contradict an existing entry raises."""

    __slots__ = ("reqd", "stop")

    def __init__(self, reqd: Iterable[Arc] = (), stop: Iterable[Arc] = ()):
        self.reqd: set[Arc] = set()
        self.stop: set[Arc] = set(tuple(a) for a in stop)
        for arc in reqd:
            self.require(tuple(arc))
        for arc in self.stop:
            if arc in self.reqd:
                raise ConstraintError(f"arc {arc} both required and prohibited")

    def copy(self) -> "KnowledgeConstraints":
        out = KnowledgeConstraints()
        out.reqd = set(self.reqd)
        out.stop = set(self.stop)
        return out

    def require(self, arc: Arc) -> None:
        a, b = arc
        if arc in self.stop:
            raise ConstraintError(f"cannot require {a}->{b}: it is prohibited")
        if (b, a) in self.reqd:
            raise ConstraintError(f"cannot require {a}->{b}: {b}->{a} already required")
        if arc not in self.reqd:
            self.reqd.add(arc)
            try:
                self.required_dag()
            except CycleError:
                self.reqd.discard(arc)
                raise ConstraintError(
                    f"cannot require {a}->{b}: required arcs would form a cycle"
                ) from None

    def forbid(self, arc: Arc) -> None:
        a, b = arc
        if arc in self.reqd:
            raise ConstraintError(f"cannot prohibit {a}->{b}: it is required")
        self.stop.add(arc)

    def required_dag(self, n: int | None = None) -> Dag:
        """The required arcs as a graph, raising if they form a cycle."""
        if n is None:
            n = 1 + max((max(a, b) for a, b in self.reqd), default=-1)
        dag = Dag(n, sorted(self.reqd))
        topological_order(dag)
        return dag

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeConstraints):
            return NotImplemented
        return self.reqd == other.reqd and self.stop == other.stop


class Oracle(Protocol):
    def accepts(self) -> bool: ...

    def answer(self, query: Query) -> Verdict | None: ...


def _pair_state(true_dag: Dag, arc: Arc) -> str:
    a, b = arc
    if true_dag.has_arc((a, b)):
        return "forward"
    if true_dag.has_arc((b, a)):
        return "backward"
    return "absent"


_TRUTH_TABLE = {
    # change kind -> pair state in the true graph -> truthful verdict
    ChangeKind.ADD: {
        "forward": Verdict.CONFIRM,
        "backward": Verdict.OPPOSITE,
        "absent": Verdict.ABSENT,
    },
    ChangeKind.DELETE: {
        "absent": Verdict.CONFIRM,
        "backward": Verdict.OPPOSITE,
        "forward": Verdict.ABSENT,
    },
    ChangeKind.REVERSE: {
        "backward": Verdict.CONFIRM,
        "forward": Verdict.OPPOSITE,
        "absent": Verdict.ABSENT,
    },
}


def truthful_verdict(true_dag: Dag, change: Change, orientation_only: bool = False) -> Verdict:
    """The verdict a perfectly knowledgeable answerer gives.

    In orientation-only mode the answer space shrinks to {CONFIRM,
    OPPOSITE}; a pair absent from the true graph then draws CONFIRM, the
    non-interfering choice.
    """
    verdict = _TRUTH_TABLE[change.kind][_pair_state(true_dag, change.arc)]
    if orientation_only and verdict is Verdict.ABSENT:
        return Verdict.CONFIRM
    return verdict


class SimulatedExpert:
    """Answers queries from the data-generating graph.

    `limit` is a multiple of the variable count; the budget is
    ceil(limit * n) answered queries, after which every query is
    declined. Each answer is truthful with probability `expertise`,
    otherwise uniform over the remaining verdicts. With
    `precommit_schedule` the correct/incorrect pattern is fixed up front
    (round(expertise * budget) correct answers in shuffled order) instead
    of drawn per query; that needs a finite budget.
    """

    def __init__(
        self,
        true_dag: Dag,
        expertise: float = 1.0,
        limit: float | None = None,
        seed: int = 0,
        orientation_only: bool = False,
        precommit_schedule: bool = False,
    ):
        if not 0.0 <= expertise <= 1.0:
            raise ValueError("expertise must lie in [0, 1]")
        self.true_dag = true_dag
        self.expertise = expertise
        self.orientation_only = orientation_only
        self.budget = None if limit is None else math.ceil(limit * true_dag.n)
        self.requests_used = 0
        self._rng = np.random.default_rng(seed)
        self._schedule: list[bool] | None = None
        if precommit_schedule:
            if self.budget is None:
                raise ValueError("a precommitted schedule needs a finite limit")
            correct = round(expertise * self.budget)
            flags = [True] * correct + [False] * (self.budget - correct)
            self._rng.shuffle(flags)
            self._schedule = flags

    def accepts(self) -> bool:
        return self.budget is None or self.requests_used < self.budget

    def answer(self, query: Query) -> Verdict | None:
        if not self.accepts():
            return None
        if self._schedule is not None:
            correct = self._schedule[self.requests_used]
        else:
            correct = bool(self._rng.random() < self.expertise)
        self.requests_used += 1
        truth = truthful_verdict(self.true_dag, query.change, self.orientation_only)
        if correct:
            return truth
        space = [Verdict.CONFIRM, Verdict.OPPOSITE]
        if not self.orientation_only:
            space.append(Verdict.ABSENT)
        wrong = [v for v in space if v is not truth]
        return wrong[int(self._rng.integers(len(wrong)))]


def _non_edges(true_dag: Dag) -> list[Arc]:
    return [
        (a, b)
        for a in range(true_dag.n)
        for b in range(true_dag.n)
        if a != b and not true_dag.adjacent(a, b)
    ]


def _sample(rng, pool: list, k: int) -> list:
    if k > len(pool):
        raise GenerationError(f"need {k} items from a pool of {len(pool)}")
    if k == 0:
        return []
    picks = rng.choice(len(pool), size=k, replace=False)
    return [pool[int(i)] for i in picks]


def _acyclic(n: int, arcs: list[Arc]) -> bool:
    dag = Dag(n)
    for arc in arcs:
        if would_create_cycle(dag, arc) or dag.adjacent(*arc):
            return False
        dag.add_arc(arc)
    return True


def gen_required_arcs(
    true_dag: Dag, m: int, expertise: float, seed: int
) -> KnowledgeConstraints:
    """Predefined required arcs: round(expertise*m) true arcs, the rest
    pairs absent from the true graph in both orientations; the whole set
    resampled until jointly acyclic."""
    rng = np.random.default_rng(seed)
    true_arcs = sorted(true_dag.arcs())
    absent = _non_edges(true_dag)
    k_true = round(expertise * m)
    if k_true > len(true_arcs) or (m - k_true) > len(absent):
        raise GenerationError("not enough candidate arcs")
    for _ in range(1000):
        arcs = _sample(rng, true_arcs, k_true) + _sample(rng, absent, m - k_true)
        if _acyclic(true_dag.n, arcs):
            return KnowledgeConstraints(reqd=arcs)
    raise GenerationError("could not find an acyclic required set")


def gen_prohibited_arcs(
    true_dag: Dag, m: int, expertise: float, seed: int
) -> KnowledgeConstraints:
    """Predefined prohibited arcs: correct entries are reversals of true
    arcs, incorrect ones prohibit true arcs themselves."""
    rng = np.random.default_rng(seed)
    true_arcs = sorted(true_dag.arcs())
    reversals = [(b, a) for a, b in true_arcs]
    k_correct = round(expertise * m)
    if k_correct > len(reversals) or (m - k_correct) > len(true_arcs):
        raise GenerationError("not enough candidate arcs")
    stop = _sample(rng, reversals, k_correct) + _sample(rng, true_arcs, m - k_correct)
    return KnowledgeConstraints(stop=stop)


def gen_mixed_arcs(
    true_dag: Dag, m: int, expertise: float, seed: int
) -> KnowledgeConstraints:
    """Prohibited and required arcs in a 9:1 ratio."""
    m_stop = round(0.9 * m)
    m_reqd = m - m_stop
    seeds = np.random.SeedSequence(seed).spawn(1000)
    for child in seeds:
        inner = child.spawn(2)
        stop_part = gen_prohibited_arcs(true_dag, m_stop, expertise, inner[0])
        reqd_part = gen_required_arcs(true_dag, m_reqd, expertise, inner[1])
        if stop_part.stop & reqd_part.reqd:
            continue
        merged = reqd_part.copy()
        for arc in stop_part.stop:
            merged.forbid(arc)
        return merged
    raise GenerationError("could not reconcile mixed constraints")


def gen_tiers(true_dag: Dag, k_nodes: int, seed: int) -> KnowledgeConstraints:
    """Tier constraints from the true topological ordering: sample
    k_nodes nodes, give each its rank as a tier, and prohibit every arc
    between sampled nodes that does not go from a lower rank to a
    strictly higher one."""
    if k_nodes > true_dag.n:
        raise GenerationError("more tiered nodes than variables")
    rng = np.random.default_rng(seed)
    rank = {node: i for i, node in enumerate(topological_order(true_dag))}
    chosen = _sample(rng, list(range(true_dag.n)), k_nodes)
    stop = [
        (u, v)
        for u in chosen
        for v in chosen
        if u != v and rank[u] >= rank[v]
    ]
    return KnowledgeConstraints(stop=stop)


def tiers_to_stop_arcs(tiers: dict[int, int]) -> set[Arc]:
    """Expand node->tier assignments to prohibitions: arcs within a tier
    or against the tier order."""
    return {
        (u, v)
        for u in tiers
        for v in tiers
        if u != v and tiers[u] >= tiers[v]
    }


def save_constraints(constraints: KnowledgeConstraints, names: list[str], path) -> None:
    doc = {
        "reqd": [{"from": names[a], "to": names[b]} for a, b in sorted(constraints.reqd)],
        "stop": [{"from": names[a], "to": names[b]} for a, b in sorted(constraints.stop)],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_constraints(path, names: list[str]) -> KnowledgeConstraints:
    index = {name: i for i, name in enumerate(names)}
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)

    def decode(entry) -> Arc:
        try:
            return (index[entry["from"]], index[entry["to"]])
        except KeyError as exc:
            raise ConstraintError(f"unknown variable {exc}") from None

    constraints = KnowledgeConstraints(
        reqd=[decode(e) for e in doc.get("reqd", [])],
        stop=[decode(e) for e in doc.get("stop", [])],
    )
    if "tiers" in doc:
        tiers = {index[name]: int(t) for name, t in doc["tiers"].items()}
        for arc in tiers_to_stop_arcs(tiers):
            constraints.forbid(arc)
    return constraints
