"""Batch experiment runner over (network x sample size x ordering x arm).

The design is paired: every arm in a grid cell sees byte-identical data.
Sampling happens once per network at the largest requested size, smaller
sizes are prefixes, and column orderings are seeded permutations applied
on top. Accuracy deltas are therefore differences on the same datasets,
not across re-samples.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from askdag import bayesnet
from askdag.dataset import Dataset, permute_columns, permutation_for_seed
from askdag.graph import Dag
from askdag.knowledge import (
    KnowledgeConstraints,
    SimulatedExpert,
    gen_mixed_arcs,
    gen_prohibited_arcs,
    gen_required_arcs,
    gen_tiers,
)
from askdag.metrics import confusion_dag, f1, shd_dag
from askdag.search import Criterion, SearchConfig, tabu_al


class HarnessError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentArm:
    id: str
    mode: str = "none"  # none | active | predefined
    criterion: str | None = None
    threshold: float = 0.0
    limit: float | None = None
    expertise: float = 1.0
    orientation_only: bool = False
    kind: str | None = None  # required | prohibited | mixed | tiers
    multiplier: float = 0.5

    def __post_init__(self):
        if self.mode not in ("none", "active", "predefined"):
            raise HarnessError(f"arm {self.id}: unknown mode {self.mode!r}")
        if self.mode == "active" and self.criterion is None:
            raise HarnessError(f"arm {self.id}: active mode needs a criterion")
        if self.mode == "predefined" and self.kind not in (
            "required",
            "prohibited",
            "mixed",
            "tiers",
        ):
            raise HarnessError(f"arm {self.id}: unknown predefined kind {self.kind!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    networks: tuple[str, ...]
    sample_sizes: tuple[int, ...]
    orderings: int
    arms: tuple[ExperimentArm, ...]
    master_seed: int = 0
    tabu_length: int = 10
    stop_patience: int = 10

    @staticmethod
    def from_document(doc: dict) -> "ExperimentConfig":
        arms = tuple(ExperimentArm(**entry) for entry in doc["arms"])
        ids = [arm.id for arm in arms]
        if len(ids) != len(set(ids)):
            raise HarnessError("duplicate arm ids")
        return ExperimentConfig(
            networks=tuple(doc["networks"]),
            sample_sizes=tuple(int(s) for s in doc["sample_sizes"]),
            orderings=int(doc["orderings"]),
            arms=arms,
            master_seed=int(doc.get("master_seed", 0)),
            tabu_length=int(doc.get("tabu_length", 10)),
            stop_patience=int(doc.get("stop_patience", 10)),
        )


@dataclass
class ResultRow:
    network: str
    n: int
    sample_size: int
    ordering: int
    arm: str
    f1: float | None = None
    shd: int | None = None
    requests: int = 0
    iterations: int = 0
    skeleton_hits: int = 0
    runtime_s: float = 0.0
    digest: str = ""
    error: str = ""


RESULT_COLUMNS = [
    "network",
    "n",
    "sample_size",
    "ordering",
    "arm",
    "f1",
    "shd",
    "requests",
    "iterations",
    "skeleton_hits",
    "runtime_s",
    "digest",
    "error",
]


def _seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _dataset_digest(dataset: Dataset) -> str:
    h = hashlib.sha256()
    h.update(",".join(dataset.names).encode())
    h.update(np.ascontiguousarray(dataset.cells).tobytes())
    return h.hexdigest()[:12]


def load_network(ref: str) -> bayesnet.BayesNet:
    """A network reference is a bundled fixture name or a file path."""
    if "/" not in ref and not ref.endswith(".json"):
        return bayesnet.load_fixture(ref)
    return bayesnet.load(ref)


def _remap_dag(dag: Dag, perm: np.ndarray) -> Dag:
    inverse = np.argsort(perm)
    return Dag(dag.n, [(int(inverse[a]), int(inverse[b])) for a, b in dag.arcs()])


def _criterion(name: str | None) -> Criterion | None:
    if name is None or name == "none":
        return None
    return Criterion(name.replace("-", "_"))


def _run_arm(
    arm: ExperimentArm,
    config: ExperimentConfig,
    dataset: Dataset,
    truth: Dag,
    oracle_seed: int,
    gen_seed: int,
):
    search_config = SearchConfig(
        tabu_length=config.tabu_length,
        stop_patience=config.stop_patience,
        criterion=_criterion(arm.criterion) if arm.mode == "active" else None,
        threshold=arm.threshold,
        orientation_only=arm.orientation_only,
    )
    oracle = None
    constraints = None
    if arm.mode == "active":
        oracle = SimulatedExpert(
            truth,
            expertise=arm.expertise,
            limit=arm.limit,
            seed=oracle_seed,
            orientation_only=arm.orientation_only,
        )
    elif arm.mode == "predefined":
        m = math.ceil(arm.multiplier * truth.n)
        if arm.kind == "required":
            constraints = gen_required_arcs(truth, m, arm.expertise, gen_seed)
        elif arm.kind == "prohibited":
            constraints = gen_prohibited_arcs(truth, m, arm.expertise, gen_seed)
        elif arm.kind == "mixed":
            constraints = gen_mixed_arcs(truth, m, arm.expertise, gen_seed)
        else:
            constraints = gen_tiers(truth, min(m, truth.n), gen_seed)
    return tabu_al(dataset, search_config, oracle, constraints)


def run_grid(config: ExperimentConfig) -> list[ResultRow]:
    """Run every arm on every (network, size, ordering) cell.

    Failures are recorded in the row's error column; they do not abort
    the grid. Output order and content are deterministic for a fixed
    config and master seed.
    """
    rows: list[ResultRow] = []
    max_size = max(config.sample_sizes)
    for net_idx, ref in enumerate(config.networks):
        net = load_network(ref)
        sample_seed = _seed(config.master_seed, net_idx, 0)
        full = bayesnet.forward_sample(net, max_size, sample_seed)
        for size in config.sample_sizes:
            sized = full.truncate(size)
            for ordering in range(config.orderings):
                oseed = _seed(config.master_seed, net_idx, 1, ordering)
                perm = permutation_for_seed(sized.n, oseed)
                data = permute_columns(sized, oseed)
                truth = _remap_dag(net.dag, perm)
                digest = _dataset_digest(data)
                skeleton = {frozenset(arc) for arc in truth.arcs()}
                for arm_idx, arm in enumerate(config.arms):
                    row = ResultRow(
                        network=ref,
                        n=net.n,
                        sample_size=size,
                        ordering=ordering,
                        arm=arm.id,
                        digest=digest,
                    )
                    started = time.perf_counter()
                    try:
                        result = _run_arm(
                            arm,
                            config,
                            data,
                            truth,
                            oracle_seed=_seed(
                                config.master_seed, net_idx, 2, ordering, arm_idx
                            ),
                            gen_seed=_seed(
                                config.master_seed, net_idx, 3, ordering, arm_idx
                            ),
                        )
                        row.f1 = f1(confusion_dag(result.dag, truth))
                        row.shd = shd_dag(result.dag, truth)
                        row.requests = result.trace.request_total
                        row.iterations = len(result.trace.records)
                        row.skeleton_hits = sum(
                            1
                            for rec in result.trace.records
                            if rec.requested and frozenset(rec.change.arc) in skeleton
                        )
                    except Exception as exc:
                        row.error = f"{type(exc).__name__}: {exc}"
                    row.runtime_s = round(time.perf_counter() - started, 4)
                    rows.append(row)
    return rows


@dataclass
class SummaryRow:
    arm: str
    network: str  # a network reference or "overall"
    cells: int
    mean_f1: float
    mean_delta_f1: float
    mean_shd: float
    mean_delta_shd: float
    mean_f1_std: float
    requests: int
    iterations: int
    skeleton_hits: int


SUMMARY_COLUMNS = [
    "arm",
    "network",
    "cells",
    "mean_f1",
    "mean_delta_f1",
    "mean_shd",
    "mean_delta_shd",
    "mean_f1_std",
    "requests",
    "iterations",
    "skeleton_hits",
]


def aggregate(rows: list[ResultRow], baseline: str = "none") -> list[SummaryRow]:
    """Paired per-network and overall means against the baseline arm.

    mean_f1_std is the standard deviation of F1 across orderings,
    computed per (network, size) and averaged — the ordering-sensitivity
    statistic.
    """
    ok = [r for r in rows if not r.error and r.f1 is not None]
    base = {(r.network, r.sample_size, r.ordering): r for r in ok if r.arm == baseline}
    arms = sorted({r.arm for r in ok})
    out: list[SummaryRow] = []
    for arm in arms:
        arm_rows = [r for r in ok if r.arm == arm]
        groups: dict[str, list[ResultRow]] = {}
        for r in arm_rows:
            groups.setdefault(r.network, []).append(r)
        for network in ["overall"] + sorted(groups):
            members = arm_rows if network == "overall" else groups[network]
            d_f1, d_shd = [], []
            for r in members:
                key = (r.network, r.sample_size, r.ordering)
                if key not in base:
                    raise HarnessError(f"no baseline row for cell {key}")
                d_f1.append(r.f1 - base[key].f1)
                d_shd.append(r.shd - base[key].shd)
            by_cell: dict[tuple, list[float]] = {}
            for r in members:
                by_cell.setdefault((r.network, r.sample_size), []).append(r.f1)
            stds = [float(np.std(v)) for v in by_cell.values()]
            out.append(
                SummaryRow(
                    arm=arm,
                    network=network,
                    cells=len(members),
                    mean_f1=float(np.mean([r.f1 for r in members])),
                    mean_delta_f1=float(np.mean(d_f1)),
                    mean_shd=float(np.mean([r.shd for r in members])),
                    mean_delta_shd=float(np.mean(d_shd)),
                    mean_f1_std=float(np.mean(stds)),
                    requests=sum(r.requests for r in members),
                    iterations=sum(r.iterations for r in members),
                    skeleton_hits=sum(r.skeleton_hits for r in members),
                )
            )
    return out


def write_results_csv(rows: list[ResultRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.network,
                    r.n,
                    r.sample_size,
                    r.ordering,
                    r.arm,
                    "" if r.f1 is None else f"{r.f1:.6f}",
                    "" if r.shd is None else r.shd,
                    r.requests,
                    r.iterations,
                    r.skeleton_hits,
                    f"{r.runtime_s:.4f}",
                    r.digest,
                    r.error,
                ]
            )


def write_summary_csv(summary: list[SummaryRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for s in summary:
            writer.writerow(
                [
                    s.arm,
                    s.network,
                    s.cells,
                    f"{s.mean_f1:.6f}",
                    f"{s.mean_delta_f1:.6f}",
                    f"{s.mean_shd:.4f}",
                    f"{s.mean_delta_shd:.4f}",
                    f"{s.mean_f1_std:.6f}",
                    s.requests,
                    s.iterations,
                    s.skeleton_hits,
                ]
            )


def format_summary(summary: list[SummaryRow]) -> str:
    lines = [
        f"{'arm':<18} {'network':<12} {'cells':>5} {'F1':>8} {'dF1':>8} "
        f"{'SHD':>7} {'dSHD':>7} {'F1 std':>8}"
    ]
    for s in summary:
        lines.append(
            f"{s.arm:<18} {s.network:<12} {s.cells:>5} {s.mean_f1:>8.4f} "
            f"{s.mean_delta_f1:>+8.4f} {s.mean_shd:>7.2f} {s.mean_delta_shd:>+7.2f} "
            f"{s.mean_f1_std:>8.4f}"
        )
    return "\n".join(lines)


def run_experiment_file(config_path, results_path, summary_path, baseline="none"):
    with open(config_path, encoding="utf-8") as fh:
        config = ExperimentConfig.from_document(json.load(fh))
    rows = run_grid(config)
    write_results_csv(rows, results_path)
    summary = aggregate(rows, baseline=baseline)
    write_summary_csv(summary, summary_path)
    return rows, summary
