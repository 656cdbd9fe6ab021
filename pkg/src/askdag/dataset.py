"""Columnar categorical data tables.

A dataset is a dense rows x columns array of small-integer state codes
plus the label vocabulary that gave rise to those codes. Codes are
assigned in sorted label order so two files with the same content get
the same coding regardless of row order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from askdag.kernels import count_config


class DatasetError(Exception):
    pass


class Dataset:
    __slots__ = ("names", "states", "cells")

    def __init__(self, names: list[str], states: list[list[str]], cells: np.ndarray):
        if len(names) != len(set(names)):
            raise DatasetError("duplicate column names")
        if len(names) != len(states):
            raise DatasetError("names/states length mismatch")
        cells = np.ascontiguousarray(cells, dtype=np.int32)
        if cells.ndim != 2 or cells.shape[1] != len(names):
            raise DatasetError("cells shape does not match column count")
        for j, labels in enumerate(states):
            if cells.shape[0] and int(cells[:, j].max(initial=0)) >= len(labels):
                raise DatasetError(f"column {names[j]} has a code out of range")
            if cells.shape[0] and int(cells[:, j].min(initial=0)) < 0:
                raise DatasetError(f"column {names[j]} has a negative code")
        self.names = list(names)
        self.states = [list(s) for s in states]
        self.cells = cells

    @property
    def row_count(self) -> int:
        return self.cells.shape[0]

    @property
    def n(self) -> int:
        return len(self.names)

    def cards(self) -> np.ndarray:
        """Per-column state counts, shaped for the counting kernel."""
        return np.asarray([len(s) for s in self.states], dtype=np.int64)

    def truncate(self, rows: int) -> "Dataset":
        if not 0 <= rows <= self.row_count:
            raise DatasetError("truncation length out of range")
        return Dataset(self.names, self.states, self.cells[:rows].copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.names == other.names
            and self.states == other.states
            and self.cells.shape == other.cells.shape
            and bool(np.array_equal(self.cells, other.cells))
        )


@dataclass(frozen=True)
class ContingencyTable:
    child: int
    parents: tuple[int, ...]
    counts: dict
    total_cells: int


def read_csv(path) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return _parse_rows(list(csv.reader(fh)))


def read_csv_text(text: str) -> Dataset:
    return _parse_rows(list(csv.reader(io.StringIO(text))))


def _parse_rows(rows: list[list[str]]) -> Dataset:
    if not rows:
        raise DatasetError("empty file")
    header = rows[0]
    if len(header) != len(set(header)):
        raise DatasetError("duplicate headers")
    width = len(header)
    body = rows[1:]
    for i, row in enumerate(body):
        if len(row) != width:
            raise DatasetError(f"row {i + 2} has {len(row)} fields, expected {width}")
    states = [sorted({row[j] for row in body}) for j in range(width)]
    coders = [{label: k for k, label in enumerate(col)} for col in states]
    cells = np.empty((len(body), width), dtype=np.int32)
    for i, row in enumerate(body):
        for j, value in enumerate(row):
            cells[i, j] = coders[j][value]
    return Dataset(header, states, cells)


def write_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.names)
        for row in dataset.cells:
            writer.writerow([dataset.states[j][code] for j, code in enumerate(row)])


def permutation_for_seed(n: int, seed: int) -> np.ndarray:
    """The column permutation permute_columns applies for this seed;
    entry j names the old index placed at new position j."""
    return np.random.default_rng(seed).permutation(n)


def permute_columns(dataset: Dataset, seed: int) -> Dataset:
    perm = permutation_for_seed(dataset.n, seed)
    return Dataset(
        [dataset.names[j] for j in perm],
        [dataset.states[j] for j in perm],
        np.ascontiguousarray(dataset.cells[:, perm]),
    )


def half_ranges(dataset: Dataset) -> tuple[range, range]:
    n = dataset.row_count
    if n < 2:
        raise DatasetError("need at least 2 rows to split")
    mid = n // 2
    return range(0, mid), range(mid, n)


def count_table(
    dataset: Dataset, child: int, parents: list[int], rows: range
) -> ContingencyTable:
    """Exact frequency table over a row range.

    The map holds observed (nonzero) cells only; `total_cells` spans the
    full Cartesian product, so never-seen configurations are implicit
    zeros.
    """
    if rows.step != 1 or rows.start < 0 or rows.stop > dataset.row_count:
        raise DatasetError("bad row range")
    cards = dataset.cards()
    flat = count_config(dataset.cells, cards, child, list(parents), rows.start, rows.stop)
    r = int(cards[child])
    pcards = [int(cards[p]) for p in parents]
    table = flat.reshape(-1, r)
    counts = {}
    for j in range(table.shape[0]):
        config = tuple(int(v) for v in np.unravel_index(j, pcards)) if parents else ()
        for k in range(r):
            if table[j, k]:
                counts[(config, k)] = int(table[j, k])
    return ContingencyTable(child, tuple(parents), counts, int(flat.size))
