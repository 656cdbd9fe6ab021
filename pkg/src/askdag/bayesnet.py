"""Discrete Bayesian networks: DAG plus one conditional table per node.

Networks load from a self-describing JSON document and serve two jobs:
ground truth for structure recovery metrics, and generators of synthetic
datasets via ancestral sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from askdag.dataset import Dataset
from askdag.graph import Arc, CycleError, Dag, topological_order


class BayesNetError(Exception):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]


@dataclass(frozen=True)
class Cpt:
    """Conditional table of one node. Rows enumerate parent
    configurations row-major in declared parent order (last parent
    varies fastest); row width is the child cardinality."""

    child: int
    parents: tuple[int, ...]
    table: np.ndarray


@dataclass(frozen=True)
class BayesNet:
    variables: tuple[Variable, ...]
    dag: Dag
    cpts: tuple[Cpt, ...]

    @property
    def n(self) -> int:
        return len(self.variables)

    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def cards(self) -> list[int]:
        return [len(v.states) for v in self.variables]


def validate(net: BayesNet) -> list[str]:
    """All invariant violations, empty when the net is well formed."""
    problems: list[str] = []
    names = net.names()
    if len(names) != len(set(names)):
        problems.append("duplicate variable names")
    for v in net.variables:
        if not v.states:
            problems.append(f"{v.name}: no states")
        if len(v.states) != len(set(v.states)):
            problems.append(f"{v.name}: duplicate state labels")
    try:
        topological_order(net.dag)
    except CycleError:
        problems.append("graph contains a cycle")
    if len(net.cpts) != net.n:
        problems.append("cpt count differs from variable count")
        return problems
    cards = net.cards()
    for i, cpt in enumerate(net.cpts):
        name = names[i] if i < len(names) else str(i)
        if cpt.child != i:
            problems.append(f"{name}: cpt child index mismatch")
            continue
        if set(cpt.parents) != net.dag.parents(i):
            problems.append(f"{name}: cpt parents differ from graph parents")
            continue
        q = int(np.prod([cards[p] for p in cpt.parents])) if cpt.parents else 1
        r = cards[i]
        if cpt.table.shape != (q, r):
            problems.append(f"{name}: table shape {cpt.table.shape}, expected {(q, r)}")
            continue
        if np.any(cpt.table < 0) or np.any(cpt.table > 1):
            problems.append(f"{name}: probabilities outside [0,1]")
        sums = cpt.table.sum(axis=1)
        for j in np.nonzero(np.abs(sums - 1.0) > 1e-9)[0]:
            problems.append(f"{name}: row {int(j)} sums to {sums[j]:.12g}")
    return problems


def forward_sample(net: BayesNet, rows: int, seed: int) -> Dataset:
    """Ancestral sampling: draw each node after its parents, every row
    independently. Column order follows the variable declaration."""
    problems = validate(net)
    if problems:
        raise BayesNetError("; ".join(problems))
    if rows < 1:
        raise BayesNetError("need at least one row")
    rng = np.random.default_rng(seed)
    cards = net.cards()
    cells = np.zeros((rows, net.n), dtype=np.int32)
    for node in topological_order(net.dag):
        cpt = net.cpts[node]
        cfg = np.zeros(rows, dtype=np.int64)
        for p in cpt.parents:
            cfg = cfg * cards[p] + cells[:, p]
        cum = np.cumsum(cpt.table, axis=1)
        u = rng.random(rows)
        # index of first cumulative threshold above u, clipped against
        # float shortfall in the last column
        codes = (u[:, None] >= cum[cfg]).sum(axis=1)
        cells[:, node] = np.minimum(codes, cards[node] - 1)
    return Dataset(net.names(), [list(v.states) for v in net.variables], cells)


def _joint(net: BayesNet) -> np.ndarray:
    if net.n > 12:
        raise BayesNetError("exact joint limited to 12 variables")
    cards = net.cards()
    joint = np.ones(cards)
    for i, cpt in enumerate(net.cpts):
        shaped = cpt.table.reshape(*[cards[p] for p in cpt.parents], cards[i])
        full = shaped.reshape(shaped.shape + (1,) * (net.n - shaped.ndim))
        order = list(cpt.parents) + [i]
        order += [j for j in range(net.n) if j not in order]
        joint = joint * np.moveaxis(full, range(net.n), order)
    return joint


def marginal(net: BayesNet, node: int) -> np.ndarray:
    """Exact single-variable marginal by summing the full joint."""
    joint = _joint(net)
    axes = tuple(j for j in range(net.n) if j != node)
    return joint.sum(axis=axes)


def from_document(doc: dict) -> BayesNet:
    variables = tuple(
        Variable(v["name"], tuple(v["states"])) for v in doc["variables"]
    )
    index = {v.name: i for i, v in enumerate(variables)}
    arcs: list[Arc] = []
    for arc in doc["arcs"]:
        try:
            arcs.append((index[arc["from"]], index[arc["to"]]))
        except KeyError as exc:
            raise BayesNetError(f"arc references unknown variable {exc}") from None
    dag = Dag(len(variables), arcs)
    cpts = []
    for i, v in enumerate(variables):
        try:
            entry = doc["cpts"][v.name]
        except KeyError:
            raise BayesNetError(f"{v.name}: missing cpt") from None
        parents = tuple(index[p] for p in entry.get("parents", []))
        table = np.asarray(entry["table"], dtype=np.float64)
        if table.ndim == 1:
            table = table.reshape(1, -1)
        cpts.append(Cpt(i, parents, table))
    net = BayesNet(variables, dag, tuple(cpts))
    problems = validate(net)
    if problems:
        raise BayesNetError("; ".join(problems))
    return net


def to_document(net: BayesNet) -> dict:
    names = net.names()
    return {
        "variables": [
            {"name": v.name, "states": list(v.states)} for v in net.variables
        ],
        "arcs": [{"from": names[a], "to": names[b]} for a, b in sorted(net.dag.arcs())],
        "cpts": {
            names[c.child]: {
                "parents": [names[p] for p in c.parents],
                "table": c.table.tolist(),
            }
            for c in net.cpts
        },
    }


def load(path) -> BayesNet:
    with open(path, encoding="utf-8") as fh:
        return from_document(json.load(fh))


def save(net: BayesNet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_document(net), fh, indent=1)
        fh.write("\n")


def load_fixture(name: str) -> BayesNet:
    """Load one of the bundled example networks by bare name."""
    ref = resources.files("askdag").joinpath("fixtures", f"{name}.json")
    try:
        text = ref.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise BayesNetError(f"no bundled network named {name!r}") from exc
    return from_document(json.loads(text))
