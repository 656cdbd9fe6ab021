"""Score-based structure search with dynamically requested knowledge.

The loop is plain tabu hill climbing over single-arc changes, extended
with a query step: when the chosen change looks doubtful under the
configured criterion, an oracle is asked and its verdict becomes a hard
constraint. Confirmed arcs can never be removed again, rejected ones
never return, so every answer permanently narrows the search space.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field

from askdag.dataset import Dataset, half_ranges
from askdag.graph import (
    Change,
    ChangeKind,
    Dag,
    apply_change,
    canonical_digest,
    revert_change,
    would_create_cycle,
)
from askdag.kernels import count_config
from askdag.knowledge import (
    ConstraintError,
    KnowledgeConstraints,
    Oracle,
    Query,
    Verdict,
)
from askdag.scoring import ScoreCache, bic_dag, bic_node, delta_for_change, rel_close


class SearchError(Exception):
    pass


class CancelSearch(Exception):
    """Raised by an oracle to stop the run and keep the best graph so far."""


class Criterion(enum.Enum):
    EQUIVALENT_ADD = "equivalent_add"
    SMALL_COUNTS = "small_counts"
    UNRELIABLE_SCORE = "unreliable_score"
    SMALL_DELTA = "small_delta"


@dataclass(frozen=True)
class SearchConfig:
    tabu_length: int = 10
    stop_patience: int = 10
    criterion: Criterion | None = None
    threshold: float = 0.0
    orientation_only: bool = False
    # normalize SmallDelta by the first applied delta instead of the
    # largest positive one seen so far
    first_delta_norm: bool = False
    max_iterations: int = 20000

    def __post_init__(self):
        if self.stop_patience < 1:
            raise ValueError("stop_patience must be at least 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    change: Change
    delta: float
    requested: bool
    verdict: Verdict | None
    blocked: bool
    score: float

    def as_dict(self) -> dict:
        a, b = self.change.arc
        return {
            "iteration": self.iteration,
            "kind": self.change.kind.value,
            "from": a,
            "to": b,
            "delta": self.delta,
            "requested": self.requested,
            "verdict": self.verdict.value if self.verdict else None,
            "blocked": self.blocked,
            "score": self.score,
        }


@dataclass
class SearchTrace:
    records: list[IterationRecord] = field(default_factory=list)
    request_total: int = 0
    request_orientation: int = 0
    request_existence: int = 0

    def to_jsonl(self) -> str:
        return "".join(json.dumps(r.as_dict()) + "\n" for r in self.records)


@dataclass
class SearchResult:
    dag: Dag
    score: float
    constraints: KnowledgeConstraints
    trace: SearchTrace


_KIND_ORDER = {ChangeKind.ADD: 0, ChangeKind.DELETE: 1, ChangeKind.REVERSE: 2}


def _change_key(change: Change) -> tuple:
    a, b = change.arc
    return (a, b, _KIND_ORDER[change.kind])


def _reverse_ok(dag: Dag, arc) -> bool:
    a, b = arc
    dag.remove_arc((a, b))
    try:
        return not would_create_cycle(dag, (b, a))
    finally:
        dag.add_arc((a, b))


def _post_digest(dag: Dag, change: Change) -> tuple:
    apply_change(dag, change)
    try:
        return canonical_digest(dag)
    finally:
        revert_change(dag, change)


def enumerate_changes(
    dag: Dag, constraints: KnowledgeConstraints, tabulist
) -> list[Change]:
    """Every legal single-arc change, deterministically ordered by the
    named arc (tail, then head) and then Add < Delete < Reverse. Legal
    means: keeps acyclicity, honors reqd/stop, and does not recreate a
    recently visited graph."""
    tabu = set(tabulist)
    out = []
    for a in range(dag.n):
        for b in range(dag.n):
            if a == b:
                continue
            arc = (a, b)
            if dag.has_arc(arc):
                if arc not in constraints.reqd:
                    out.append(Change(ChangeKind.DELETE, arc))
                    if (b, a) not in constraints.stop and _reverse_ok(dag, arc):
                        out.append(Change(ChangeKind.REVERSE, arc))
            elif not dag.adjacent(a, b):
                if arc not in constraints.stop and not would_create_cycle(dag, arc):
                    out.append(Change(ChangeKind.ADD, arc))
    out.sort(key=_change_key)
    if tabu:
        out = [c for c in out if _post_digest(dag, c) not in tabu]
    return out


def best_change(
    changes: list[Change], dag: Dag, dataset: Dataset, cache: ScoreCache
) -> tuple[Change, float]:
    """The first change attaining the maximum delta. Strict comparison
    keeps the earliest on ties, which is what makes results sensitive to
    the column order of the data."""
    if not changes:
        raise SearchError("no candidate changes")
    best = None
    best_delta = -math.inf
    for change in changes:
        delta = delta_for_change(dag, change, dataset, cache)
        if delta > best_delta:
            best = change
            best_delta = delta
    return best, best_delta


@dataclass
class _CriterionState:
    constraints: KnowledgeConstraints
    tabu: deque
    max_applied_delta: float | None = None
    first_applied_delta: float | None = None

    def note_applied(self, delta: float) -> None:
        if self.first_applied_delta is None:
            self.first_applied_delta = delta
        if delta > 0 and (self.max_applied_delta is None or delta > self.max_applied_delta):
            self.max_applied_delta = delta


def _small_counts_fraction(dag: Dag, change: Change, dataset: Dataset) -> float:
    """Proportion of small cells (count <= 5, zeros included) over the
    tables of the nodes the change touches, each taken over the union of
    the pre- and post-change parent sets — the finer table behind the
    delta."""
    a, b = change.arc
    if change.kind is ChangeKind.ADD:
        tables = [(b, set(dag.parents(b)) | {a})]
    elif change.kind is ChangeKind.DELETE:
        tables = [(b, set(dag.parents(b)))]
    else:
        tables = [(b, set(dag.parents(b))), (a, set(dag.parents(a)) | {b})]
    cards = dataset.cards()
    small = 0
    total = 0
    for child, parents in tables:
        counts = count_config(
            dataset.cells, cards, child, sorted(parents), 0, dataset.row_count
        )
        small += int((counts <= 5).sum())
        total += counts.size
    return small / total


def is_knowledge_required(
    config: SearchConfig,
    change: Change,
    delta: float,
    dag: Dag,
    dataset: Dataset,
    cache: ScoreCache,
    state: _CriterionState,
) -> bool:
    """Whether the chosen change is doubtful enough to spend a question on."""
    criterion = config.criterion
    if criterion is None:
        return False
    if criterion is Criterion.EQUIVALENT_ADD:
        if change.kind is not ChangeKind.ADD:
            return False
        a, b = change.arc
        opposite = Change(ChangeKind.ADD, (b, a))
        if (b, a) in state.constraints.stop or would_create_cycle(dag, (b, a)):
            return False
        if state.tabu and _post_digest(dag, opposite) in set(state.tabu):
            return False
        return rel_close(delta, delta_for_change(dag, opposite, dataset, cache))
    if criterion is Criterion.SMALL_COUNTS:
        return _small_counts_fraction(dag, change, dataset) > config.threshold
    if criterion is Criterion.UNRELIABLE_SCORE:
        first, second = half_ranges(dataset)
        full = range(0, dataset.row_count)
        apply_change(dag, change)
        try:
            s_first = bic_dag(dataset, dag, first, cache)
            s_second = bic_dag(dataset, dag, second, cache)
            s_full = bic_dag(dataset, dag, full, cache)
        finally:
            revert_change(dag, change)
        spread = abs(s_first - s_second)
        ratio = math.inf if s_full == 0 else spread / abs(s_full)
        return ratio > config.threshold
    if criterion is Criterion.SMALL_DELTA:
        ref = (
            state.first_applied_delta
            if config.first_delta_norm
            else state.max_applied_delta
        )
        if ref is None or ref <= 0:
            return False
        return max(delta / ref, 0.0) < config.threshold
    raise SearchError(f"unknown criterion {criterion!r}")


def apply_verdict(
    verdict: Verdict,
    change: Change,
    constraints: KnowledgeConstraints,
    orientation_only: bool = False,
) -> bool:
    """Turn an answer into constraint updates; returns whether the change
    may proceed. Updates are monotone, so a contradictory verdict against
    earlier knowledge raises instead of silently rewriting it."""
    if orientation_only and verdict is Verdict.ABSENT:
        raise ConstraintError("existence verdict in orientation-only mode")
    a, b = change.arc
    if change.kind is ChangeKind.ADD:
        if verdict is Verdict.CONFIRM:
            constraints.require((a, b))
            return True
        if verdict is Verdict.OPPOSITE:
            constraints.require((b, a))
            constraints.forbid((a, b))
            return False
        constraints.forbid((a, b))
        constraints.forbid((b, a))
        return False
    if change.kind is ChangeKind.DELETE:
        if verdict is Verdict.CONFIRM:
            constraints.forbid((a, b))
            constraints.forbid((b, a))
            return True
        if verdict is Verdict.OPPOSITE:
            constraints.require((b, a))
            constraints.forbid((a, b))
            return False
        # the arc stands as named
        constraints.require((a, b))
        return False
    if verdict is Verdict.CONFIRM:
        constraints.require((b, a))
        constraints.forbid((a, b))
        return True
    if verdict is Verdict.OPPOSITE:
        constraints.require((a, b))
        return False
    constraints.forbid((a, b))
    constraints.forbid((b, a))
    return False


def _forced_repair(dag: Dag, constraints: KnowledgeConstraints) -> Change | None:
    """A constraint violation to fix before ordinary search resumes.

    A prohibited arc still present is reversed when its opposite is
    required and legal, otherwise deleted. A required arc still missing
    is added (or the opposing arc reversed) when acyclicity allows;
    otherwise repair is deferred to ordinary search.
    """
    violating = sorted(arc for arc in constraints.stop if dag.has_arc(arc))
    if violating:
        a, b = violating[0]
        if (
            (b, a) in constraints.reqd
            and (b, a) not in constraints.stop
            and _reverse_ok(dag, (a, b))
        ):
            return Change(ChangeKind.REVERSE, (a, b))
        return Change(ChangeKind.DELETE, (a, b))
    missing = sorted(arc for arc in constraints.reqd if not dag.has_arc(arc))
    for a, b in missing:
        if dag.has_arc((b, a)):
            if _reverse_ok(dag, (b, a)):
                return Change(ChangeKind.REVERSE, (b, a))
        elif not would_create_cycle(dag, (a, b)):
            return Change(ChangeKind.ADD, (a, b))
    return None


def _constraints_satisfied(dag: Dag, constraints: KnowledgeConstraints) -> bool:
    return all(dag.has_arc(arc) for arc in constraints.reqd) and not any(
        dag.has_arc(arc) for arc in constraints.stop
    )


def tabu_al(
    dataset: Dataset,
    config: SearchConfig,
    oracle: Oracle | None = None,
    constraints: KnowledgeConstraints | None = None,
    observer=None,
) -> SearchResult:
    """Tabu search over single-arc changes with on-demand knowledge.

    Starts from the graph of required arcs. Each iteration applies the
    best-scoring legal change unless a consulted oracle blocks it; a
    block re-runs the iteration under the tightened constraints and does
    not count toward the stopping patience. Stops after `stop_patience`
    consecutive applied changes without improvement, or when no legal
    change remains. Returns the best-scoring graph visited.

    An oracle may raise CancelSearch from answer() to end the run early
    with the best graph found so far. `observer`, if given, is called
    after every iteration with (dag, score, record) — a read-only
    progress hook.
    """
    constraints = constraints.copy() if constraints is not None else KnowledgeConstraints()
    n = dataset.n
    try:
        dag = constraints.required_dag(n)
    except Exception as exc:
        raise ConstraintError(f"inconsistent starting constraints: {exc}") from exc
    if any(dag.has_arc(arc) for arc in constraints.stop):
        raise ConstraintError("a required arc is also prohibited")

    cache = ScoreCache()
    rows = range(0, dataset.row_count)
    score = bic_dag(dataset, dag, rows, cache)
    best_dag = dag.copy()
    best_score = score
    peak = score
    tabu: deque = deque(maxlen=config.tabu_length)
    state = _CriterionState(constraints=constraints, tabu=tabu)
    trace = SearchTrace()
    patience = 0
    iteration = 0

    while True:
        iteration += 1
        if iteration > config.max_iterations:
            if _constraints_satisfied(dag, constraints):
                break
            raise SearchError("iteration budget exhausted with unmet constraints")

        forced = _forced_repair(dag, constraints)
        if forced is not None:
            delta = delta_for_change(dag, forced, dataset, cache)
            change, requested, verdict, blocked = forced, False, None, False
        else:
            changes = enumerate_changes(dag, constraints, tabu)
            if not changes:
                if _constraints_satisfied(dag, constraints):
                    break
                raise SearchError("no legal change can satisfy the constraints")
            change, delta = best_change(changes, dag, dataset, cache)
            requested = False
            verdict = None
            blocked = False
            if (
                oracle is not None
                and oracle.accepts()
                and not (config.orientation_only and change.kind is ChangeKind.DELETE)
                and is_knowledge_required(
                    config, change, delta, dag, dataset, cache, state
                )
            ):
                try:
                    verdict = oracle.answer(
                        Query(change, iteration, getattr(oracle, "requests_used", 0))
                    )
                except CancelSearch:
                    break
                if verdict is not None:
                    requested = True
                    trace.request_total += 1
                    if config.orientation_only:
                        trace.request_orientation += 1
                    else:
                        trace.request_existence += 1
                    blocked = not apply_verdict(
                        verdict, change, constraints, config.orientation_only
                    )

        if blocked:
            record = IterationRecord(
                iteration, change, delta, requested, verdict, True, score
            )
            trace.records.append(record)
            if observer is not None:
                observer(dag, score, record)
            continue

        apply_change(dag, change)
        score += delta
        tabu.append(canonical_digest(dag))
        state.note_applied(delta)
        record = IterationRecord(
            iteration, change, delta, requested, verdict, False, score
        )
        trace.records.append(record)
        if observer is not None:
            observer(dag, score, record)
        if score > best_score and _constraints_satisfied(dag, constraints):
            best_score = score
            best_dag = dag.copy()

        # a positive delta that merely climbs back toward an earlier
        # high is not progress; only surpassing the peak resets patience
        improved = score > peak
        peak = max(peak, score)
        patience = 0 if improved else patience + 1
        if patience >= config.stop_patience and _constraints_satisfied(dag, constraints):
            break

    if not _constraints_satisfied(best_dag, constraints):
        # the starting graph can predate dynamically learned constraints
        if _constraints_satisfied(dag, constraints):
            best_dag, best_score = dag.copy(), score
    return SearchResult(best_dag, best_score, constraints, trace)
