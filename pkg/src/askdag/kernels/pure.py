"""Numpy implementation of the counting kernel.

Used when the compiled extension is unavailable or explicitly disabled
via ASKDAG_KERNEL=pure.
"""

from __future__ import annotations

import numpy as np


def count_config(
    cells: np.ndarray,
    cards: np.ndarray,
    child: int,
    parents: tuple[int, ...],
    lo: int,
    hi: int,
) -> np.ndarray:
    """Joint counts of (parent configuration, child state) over rows [lo, hi).

    Returns a flat int64 array of length q*r where q is the product of
    parent cardinalities and r the child cardinality. The flat index is
    row-major over parents in the given order with the child state
    varying fastest, so counts.reshape(q, r) is the contingency table.
    """
    if not 0 <= lo <= hi <= cells.shape[0]:
        raise ValueError(f"row range [{lo}, {hi}) outside 0..{cells.shape[0]}")
    idx = cells[lo:hi, child].astype(np.int64)
    mult = int(cards[child])
    for p in reversed(parents):
        idx = idx + mult * cells[lo:hi, p].astype(np.int64)
        mult *= int(cards[p])
    return np.bincount(idx, minlength=mult)
