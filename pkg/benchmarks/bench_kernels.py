"""Compare the compiled counting kernel against the pure-NumPy fallback.

Times `count_config` — the hot loop behind every score evaluation — over a
range of row counts and parent-set sizes, then prints per-call timings and
speedups. Run from the repo root:

    python benchmarks/bench_kernels.py [--rows 1000000] [--repeat 7]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from askdag.bayesnet import forward_sample, load_fixture
from askdag.kernels import pure


def _backends():
    impls = {"pure": pure.count_config}
    try:
        from askdag.kernels import _ckernels

        impls["cython"] = _ckernels.count_config
    except ImportError:
        pass
    return impls


def _cases(max_rows: int):
    net = load_fixture("cells11")
    data = forward_sample(net, max_rows, seed=7)
    cards = data.cards()
    for rows in sorted({min(r, max_rows) for r in (10_000, 100_000, max_rows)}):
        for parents in ((), (0,), (0, 1), (0, 1, 2), (0, 1, 2, 3)):
            yield rows, parents, data.cells[:rows], cards


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()

    impls = _backends()
    if "cython" not in impls:
        print("compiled kernel not built; timing the pure backend only")

    header = f"{'rows':>9} {'parents':>7}"
    for name in impls:
        header += f" {name + ' (us)':>12}"
    if len(impls) == 2:
        header += f" {'speedup':>8}"
    print(header)

    for rows, parents, cells, cards in _cases(args.rows):
        cells = np.ascontiguousarray(cells)
        per_call = {}
        expect = impls["pure"](cells, cards, 10, parents, 0, rows)
        for name, fn in impls.items():
            got = fn(cells, cards, 10, parents, 0, rows)
            if not np.array_equal(expect, got):
                raise SystemExit(f"backend mismatch: {name} at rows={rows}")
            loops = max(1, 200_000 // max(rows // 100, 1))
            t = min(
                timeit.repeat(
                    lambda: fn(cells, cards, 10, parents, 0, rows),
                    number=loops,
                    repeat=args.repeat,
                )
            )
            per_call[name] = t / loops * 1e6
        line = f"{rows:>9} {len(parents):>7}"
        for name in impls:
            line += f" {per_call[name]:>12.1f}"
        if len(impls) == 2:
            line += f" {per_call['pure'] / per_call['cython']:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
