"""Directed and partially directed graphs over integer node indices.

Nodes are identified by their column index in the dataset being learned
from. `Dag` maintains parent/child adjacency sets and stays acyclic as
long as callers gate additions through `would_create_cycle`.
"""

from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator

Arc = tuple[int, int]


class GraphError(Exception):
    pass


class CycleError(GraphError):
    pass


class Dag:
    """Directed acyclic graph on nodes 0..n-1."""

    __slots__ = ("n", "_parents", "_children")

    def __init__(self, n: int, arcs: Iterable[Arc] = ()):
        if n < 0:
            raise GraphError(f"node count must be nonnegative, got {n}")
        self.n = n
        self._parents: list[set[int]] = [set() for _ in range(n)]
        self._children: list[set[int]] = [set() for _ in range(n)]
        for arc in arcs:
            self.add_arc(arc)
        if self.arc_count() and not _is_acyclic(self):
            raise CycleError(f"arc set {sorted(self.arcs())} contains a cycle")

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise GraphError(f"node index {i} out of range for n={self.n}")

    def has_arc(self, arc: Arc) -> bool:
        a, b = arc
        self._check_node(a)
        self._check_node(b)
        return b in self._children[a]

    def adjacent(self, a: int, b: int) -> bool:
        return self.has_arc((a, b)) or self.has_arc((b, a))

    def add_arc(self, arc: Arc) -> None:
        a, b = arc
        self._check_node(a)
        self._check_node(b)
        if a == b:
            raise GraphError(f"self-loop {a}->{b} not allowed")
        if b in self._children[a]:
            raise GraphError(f"arc {a}->{b} already present")
        if a in self._children[b]:
            raise GraphError(f"arc {b}->{a} already present; cannot add {a}->{b}")
        self._children[a].add(b)
        self._parents[b].add(a)

    def remove_arc(self, arc: Arc) -> None:
        a, b = arc
        if not self.has_arc(arc):
            raise GraphError(f"arc {a}->{b} not present")
        self._children[a].discard(b)
        self._parents[b].discard(a)

    def parents(self, i: int) -> set[int]:
        self._check_node(i)
        return set(self._parents[i])

    def children(self, i: int) -> set[int]:
        self._check_node(i)
        return set(self._children[i])

    def arcs(self) -> Iterator[Arc]:
        for a in range(self.n):
            for b in self._children[a]:
                yield (a, b)

    def arc_count(self) -> int:
        return sum(len(c) for c in self._children)

    def copy(self) -> "Dag":
        d = Dag(self.n)
        d._parents = [set(p) for p in self._parents]
        d._children = [set(c) for c in self._children]
        return d

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self.n == other.n and self._children == other._children

    def __repr__(self) -> str:
        return f"Dag(n={self.n}, arcs={sorted(self.arcs())})"


class Pdag:
    """Partially directed graph: directed arcs plus undirected pairs.

    Undirected pairs are stored as (min, max) tuples so the two edge sets
    stay disjoint over node pairs.
    """

    __slots__ = ("n", "directed", "undirected")

    def __init__(
        self,
        n: int,
        directed: Iterable[Arc] = (),
        undirected: Iterable[tuple[int, int]] = (),
    ):
        self.n = n
        self.directed: set[Arc] = set(directed)
        self.undirected: set[tuple[int, int]] = {
            (min(a, b), max(a, b)) for a, b in undirected
        }
        for a, b in self.directed:
            if (min(a, b), max(a, b)) in self.undirected:
                raise GraphError(f"pair {a},{b} is both directed and undirected")

    def adjacent(self, a: int, b: int) -> bool:
        return (
            (a, b) in self.directed
            or (b, a) in self.directed
            or (min(a, b), max(a, b)) in self.undirected
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Pdag):
            return NotImplemented
        return (
            self.n == other.n
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    def __repr__(self) -> str:
        return (
            f"Pdag(n={self.n}, directed={sorted(self.directed)}, "
            f"undirected={sorted(self.undirected)})"
        )


def _is_acyclic(dag: Dag) -> bool:
    try:
        topological_order(dag)
        return True
    except CycleError:
        return False


def would_create_cycle(dag: Dag, arc: Arc) -> bool:
    """True iff adding `arc` to `dag` closes a directed cycle.

    Equivalent to: a directed path arc.to -> ... -> arc.from already exists.
    """
    a, b = arc
    dag._check_node(a)
    dag._check_node(b)
    if a == b:
        raise GraphError("self-loops are not valid arcs")
    # DFS from b looking for a.
    stack = [b]
    seen = {b}
    while stack:
        node = stack.pop()
        if node == a:
            return True
        for child in dag._children[node]:
            if child not in seen:
                seen.add(child)
                stack.append(child)
    return False


def topological_order(dag: Dag) -> list[int]:
    """Kahn's algorithm, smallest node index first among available roots."""
    indegree = [len(dag._parents[i]) for i in range(dag.n)]
    ready = [i for i in range(dag.n) if indegree[i] == 0]
    heapq.heapify(ready)
    order: list[int] = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for child in sorted(dag._children[node]):
            indegree[child] -= 1
            if indegree[child] == 0:
                heapq.heappush(ready, child)
    if len(order) != dag.n:
        raise CycleError("graph contains a directed cycle")
    return order


def canonical_digest(dag: Dag) -> tuple:
    """Stable identity token for tabu-list membership.

    Two DAGs get equal digests iff they have the same node count and arc
    set; insertion order never matters.
    """
    return (dag.n, tuple(sorted(dag.arcs())))


def _vstructure_arcs(dag: Dag) -> set[Arc]:
    compelled: set[Arc] = set()
    for c in range(dag.n):
        ps = sorted(dag._parents[c])
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                a, b = ps[i], ps[j]
                if not dag.adjacent(a, b):
                    compelled.add((a, c))
                    compelled.add((b, c))
    return compelled


def dag_to_cpdag(dag: Dag) -> Pdag:
    """Equivalence-class representative of `dag`.

    Keeps v-structure arcs directed, undirects everything else, then
    closes under the standard orientation-propagation rules. The first
    three rules are complete when starting from v-structures alone; the
    fourth is kept for symmetry and can only re-derive arcs the others
    already force.
    """
    directed = _vstructure_arcs(dag)
    undirected = {
        (min(a, b), max(a, b)) for a, b in dag.arcs() if (a, b) not in directed
    }

    def orient(x: int, y: int) -> bool:
        pair = (min(x, y), max(x, y))
        if pair not in undirected:
            return False
        undirected.discard(pair)
        directed.add((x, y))
        return True

    def adjacent(x: int, y: int) -> bool:
        return (
            (x, y) in directed
            or (y, x) in directed
            or (min(x, y), max(x, y)) in undirected
        )

    changed = True
    while changed:
        changed = False
        for x, y in [(a, b) for a, b in undirected] + [(b, a) for a, b in undirected]:
            # R1: some w -> x with w, y nonadjacent forces x -> y.
            if any(
                (w, x) in directed and not adjacent(w, y)
                for w in range(dag.n)
                if w not in (x, y)
            ):
                changed |= orient(x, y)
                continue
            # R2: a directed path x -> w -> y forces x -> y.
            if any(
                (x, w) in directed and (w, y) in directed
                for w in range(dag.n)
                if w not in (x, y)
            ):
                changed |= orient(x, y)
                continue
            # R3: x - w1 -> y and x - w2 -> y with w1, w2 nonadjacent.
            neigh = [
                w
                for w in range(dag.n)
                if w not in (x, y)
                and (min(x, w), max(x, w)) in undirected
                and (w, y) in directed
            ]
            if any(
                not adjacent(w1, w2)
                for i, w1 in enumerate(neigh)
                for w2 in neigh[i + 1 :]
            ):
                changed |= orient(x, y)
                continue
            # R4: x - w, w -> z, z -> y, with w, y nonadjacent and x, z adjacent.
            if any(
                (min(x, w), max(x, w)) in undirected
                and not adjacent(w, y)
                and any(
                    (w, z) in directed and (z, y) in directed and adjacent(x, z)
                    for z in range(dag.n)
                    if z not in (x, y, w)
                )
                for w in range(dag.n)
                if w not in (x, y)
            ):
                changed |= orient(x, y)

    return Pdag(dag.n, directed, undirected)


class ChangeKind(enum.Enum):
    ADD = "add"
    DELETE = "delete"
    REVERSE = "reverse"


@dataclass(frozen=True)
class Change:
    """A single-arc edit. `arc` names the arc as it exists before the
    edit, so reversing a->b is Change(REVERSE, (a, b))."""

    kind: ChangeKind
    arc: Arc

    def describe(self) -> str:
        a, b = self.arc
        return f"{self.kind.value} {a}->{b}"


def affected_nodes(change: Change) -> tuple[int, ...]:
    """Nodes whose parent set differs between the pre- and post-edit DAG."""
    a, b = change.arc
    if change.kind is ChangeKind.REVERSE:
        return (a, b)
    return (b,)


def apply_change(dag: Dag, change: Change) -> None:
    a, b = change.arc
    if change.kind is ChangeKind.ADD:
        dag.add_arc((a, b))
    elif change.kind is ChangeKind.DELETE:
        dag.remove_arc((a, b))
    else:
        dag.remove_arc((a, b))
        dag.add_arc((b, a))


def revert_change(dag: Dag, change: Change) -> None:
    a, b = change.arc
    if change.kind is ChangeKind.ADD:
        dag.remove_arc((a, b))
    elif change.kind is ChangeKind.DELETE:
        dag.add_arc((a, b))
    else:
        dag.remove_arc((b, a))
        dag.add_arc((a, b))
