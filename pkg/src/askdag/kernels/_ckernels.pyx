# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled counting kernel: one fused pass over the row range."""

import numpy as np

cimport numpy as cnp


def count_config(cells, cards, int child, parents, Py_ssize_t lo, Py_ssize_t hi):
    """Same contract as askdag.kernels.pure.count_config."""
    cdef const cnp.int32_t[:, ::1] cv = cells
    cdef const cnp.int64_t[::1] cdv = cards
    if not 0 <= lo <= hi <= cv.shape[0]:
        raise ValueError(f"row range [{lo}, {hi}) outside 0..{cv.shape[0]}")
    cdef Py_ssize_t k = len(parents)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] pidx_arr = np.asarray(parents, dtype=np.int32).reshape(k)
    cdef cnp.int32_t[::1] pidx = pidx_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stride_arr = np.empty(k, dtype=np.int64)
    cdef cnp.int64_t[::1] stride = stride_arr
    cdef cnp.int64_t mult = cdv[child]
    cdef Py_ssize_t i, row
    for i in range(k - 1, -1, -1):
        stride[i] = mult
        mult *= cdv[pidx[i]]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(mult, dtype=np.int64)
    cdef cnp.int64_t[::1] out = counts
    cdef cnp.int64_t flat
    for row in range(lo, hi):
        flat = cv[row, child]
        for i in range(k):
            flat += stride[i] * cv[row, pidx[i]]
        out[flat] += 1
    return counts
