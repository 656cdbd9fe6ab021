"""Command line entry points: generate, learn, evaluate, experiment, serve."""

from __future__ import annotations

import argparse
import json
import sys

from askdag import bayesnet, harness
from askdag.dataset import read_csv, write_csv
from askdag.graph import Dag
from askdag.knowledge import SimulatedExpert, load_constraints
from askdag.metrics import confusion_dag, f1, shd_dag
from askdag.search import Criterion, SearchConfig, tabu_al

CRITERIA = {
    "none": None,
    "equivalent-add": Criterion.EQUIVALENT_ADD,
    "small-counts": Criterion.SMALL_COUNTS,
    "unreliable-score": Criterion.UNRELIABLE_SCORE,
    "small-delta": Criterion.SMALL_DELTA,
}


def save_graph(dag: Dag, names: list[str], path) -> None:
    doc = {
        "nodes": list(names),
        "arcs": [{"from": names[a], "to": names[b]} for a, b in sorted(dag.arcs())],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_graph(path) -> tuple[Dag, list[str]]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    names = list(doc["nodes"])
    index = {name: i for i, name in enumerate(names)}
    arcs = [(index[a["from"]], index[a["to"]]) for a in doc["arcs"]]
    return Dag(len(names), arcs), names


def _align_truth(net: bayesnet.BayesNet, names: list[str]) -> Dag:
    """The truth DAG re-indexed to a dataset's column order."""
    index = {name: i for i, name in enumerate(names)}
    missing = [v.name for v in net.variables if v.name not in index]
    if missing or len(names) != net.n:
        raise SystemExit(f"truth network variables do not match data columns: {missing}")
    remap = {i: index[v.name] for i, v in enumerate(net.variables)}
    return Dag(net.n, [(remap[a], remap[b]) for a, b in net.dag.arcs()])


def cmd_generate(args) -> int:
    net = harness.load_network(args.network)
    data = bayesnet.forward_sample(net, args.rows, args.seed)
    write_csv(data, args.out)
    print(f"wrote {data.row_count} rows x {data.n} columns to {args.out}")
    return 0


def cmd_learn(args) -> int:
    data = read_csv(args.data)
    config = SearchConfig(
        tabu_length=args.tabu_length,
        stop_patience=args.stop_patience,
        criterion=CRITERIA[args.criterion],
        threshold=args.threshold,
        orientation_only=args.orientation_only,
    )
    oracle = None
    truth = None
    if args.truth:
        truth = _align_truth(harness.load_network(args.truth), data.names)
    if config.criterion is not None:
        if truth is None:
            raise SystemExit("an active criterion needs --truth for the simulated answers")
        oracle = SimulatedExpert(
            truth,
            expertise=args.expertise,
            limit=args.limit,
            seed=args.seed,
            orientation_only=args.orientation_only,
        )
    constraints = load_constraints(args.constraints, data.names) if args.constraints else None
    result = tabu_al(data, config, oracle, constraints)
    save_graph(result.dag, data.names, args.out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(result.trace.to_jsonl())
    print(
        f"score {result.score:.4f}, {result.dag.arc_count()} arcs, "
        f"{result.trace.request_total} requests, "
        f"{len(result.trace.records)} iterations"
    )
    if truth is not None:
        print(
            f"f1 {f1(confusion_dag(result.dag, truth)):.4f}, "
            f"shd {shd_dag(result.dag, truth)}"
        )
    return 0


def cmd_evaluate(args) -> int:
    dag, names = load_graph(args.graph)
    truth = _align_truth(harness.load_network(args.truth), names)
    conf = confusion_dag(dag, truth)
    print(
        f"f1 {f1(conf):.4f}, shd {shd_dag(dag, truth)}, "
        f"tp {conf.tp}, fp {conf.fp}, fn {conf.fn}"
    )
    return 0


def cmd_experiment(args) -> int:
    rows, summary = harness.run_experiment_file(
        args.config, args.out, args.summary, baseline=args.baseline
    )
    failed = [r for r in rows if r.error]
    print(harness.format_summary(summary))
    print(f"\n{len(rows)} runs ({len(failed)} failed) -> {args.out}, {args.summary}")
    return 1 if failed else 0


def cmd_serve(args) -> int:
    import uvicorn

    from askdag.service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="askdag",
        description="Structure learning over discrete data with requested knowledge",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a CSV dataset from a network")
    p.add_argument("network", help="bundled fixture name or network JSON path")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn a graph from a CSV dataset")
    p.add_argument("data", help="CSV path")
    p.add_argument("--criterion", choices=sorted(CRITERIA), default="none")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--limit", type=float, default=None,
                   help="request budget as a multiple of the variable count")
    p.add_argument("--expertise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--truth", default=None,
                   help="network answering simulated queries and scoring the result")
    p.add_argument("--constraints", default=None, help="predefined constraints JSON")
    p.add_argument("--orientation-only", action="store_true")
    p.add_argument("--tabu-length", type=int, default=10)
    p.add_argument("--stop-patience", type=int, default=10)
    p.add_argument("--out", required=True, help="learned graph JSON path")
    p.add_argument("--trace", default=None, help="iteration trace JSONL path")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("evaluate", help="score a learned graph against a truth network")
    p.add_argument("graph", help="learned graph JSON path")
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment", help="run a full experiment grid")
    p.add_argument("config", help="experiment config JSON path")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--summary", default="summary.csv")
    p.add_argument("--baseline", default="none")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="run the interactive session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
