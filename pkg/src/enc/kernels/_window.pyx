# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled budget-window enumeration kernel.

Same contract and row order as the pure-Python fallback in _window_py:
enumerate integer index tuples k with 0 <= k_i < counts_i and
lo <= sum_i k_i * units_i <= hi (inclusive), lexicographic in k.
"""

import numpy as np


def count_window(counts_in, units_in, long long lo, long long hi):
    cdef long long[::1] counts = np.ascontiguousarray(counts_in, dtype=np.int64)
    cdef long long[::1] units = np.ascontiguousarray(units_in, dtype=np.int64)
    cdef Py_ssize_t d = counts.shape[0]
    cdef Py_ssize_t depth, leaf, i
    cdef long long total = 0
    cdef long long ns, lo_rem, hi_rem, kmin, kmax, ulast, cmax_last
    cdef long long[::1] suf = np.zeros(d + 1, dtype=np.int64)
    cdef long long[::1] k = np.zeros(d, dtype=np.int64)
    cdef long long[::1] s = np.zeros(d, dtype=np.int64)

    ulast = units[d - 1]
    cmax_last = counts[d - 1] - 1
    if d == 1:
        if hi < 0:
            return 0
        kmin = 0
        if lo > 0:
            kmin = (lo + ulast - 1) // ulast
        kmax = hi // ulast
        if kmax > cmax_last:
            kmax = cmax_last
        if kmin > kmax:
            return 0
        return kmax - kmin + 1

    for i in range(d - 1, -1, -1):
        suf[i] = suf[i + 1] + units[i] * (counts[i] - 1)
    depth = 0
    leaf = d - 2
    k[0] = -1
    s[0] = 0
    while depth >= 0:
        k[depth] += 1
        if k[depth] >= counts[depth]:
            depth -= 1
            continue
        ns = s[depth] + k[depth] * units[depth]
        if ns > hi:
            depth -= 1
            continue
        if ns + suf[depth + 1] < lo:
            continue
        if depth == leaf:
            lo_rem = lo - ns
            hi_rem = hi - ns
            kmin = 0
            if lo_rem > 0:
                kmin = (lo_rem + ulast - 1) // ulast
            kmax = hi_rem // ulast
            if kmax > cmax_last:
                kmax = cmax_last
            if kmin <= kmax:
                total += kmax - kmin + 1
        else:
            depth += 1
            k[depth] = -1
            s[depth] = ns
    return total


def fill_window(counts_in, units_in, long long lo, long long hi):
    cdef long long n = count_window(counts_in, units_in, lo, hi)
    cdef long long[::1] counts = np.ascontiguousarray(counts_in, dtype=np.int64)
    cdef long long[::1] units = np.ascontiguousarray(units_in, dtype=np.int64)
    cdef Py_ssize_t d = counts.shape[0]
    idx_arr = np.empty((n, d), dtype=np.int32)
    sums_arr = np.empty(n, dtype=np.int64)
    if n == 0:
        return idx_arr, sums_arr
    cdef int[:, ::1] idx = idx_arr
    cdef long long[::1] sums = sums_arr
    cdef Py_ssize_t depth, leaf, i, j
    cdef long long pos = 0
    cdef long long ns, lo_rem, hi_rem, kmin, kmax, kk, ulast, cmax_last
    cdef long long[::1] suf = np.zeros(d + 1, dtype=np.int64)
    cdef long long[::1] k = np.zeros(d, dtype=np.int64)
    cdef long long[::1] s = np.zeros(d, dtype=np.int64)

    ulast = units[d - 1]
    cmax_last = counts[d - 1] - 1
    if d == 1:
        kmin = 0
        if lo > 0:
            kmin = (lo + ulast - 1) // ulast
        kmax = hi // ulast
        if kmax > cmax_last:
            kmax = cmax_last
        for kk in range(kmin, kmax + 1):
            idx[pos, 0] = <int> kk
            sums[pos] = kk * ulast
            pos += 1
        return idx_arr, sums_arr

    for i in range(d - 1, -1, -1):
        suf[i] = suf[i + 1] + units[i] * (counts[i] - 1)
    depth = 0
    leaf = d - 2
    k[0] = -1
    s[0] = 0
    while depth >= 0:
        k[depth] += 1
        if k[depth] >= counts[depth]:
            depth -= 1
            continue
        ns = s[depth] + k[depth] * units[depth]
        if ns > hi:
            depth -= 1
            continue
        if ns + suf[depth + 1] < lo:
            continue
        if depth == leaf:
            lo_rem = lo - ns
            hi_rem = hi - ns
            kmin = 0
            if lo_rem > 0:
                kmin = (lo_rem + ulast - 1) // ulast
            kmax = hi_rem // ulast
            if kmax > cmax_last:
                kmax = cmax_last
            for kk in range(kmin, kmax + 1):
                for j in range(d - 1):
                    idx[pos, j] = <int> k[j]
                idx[pos, d - 1] = <int> kk
                sums[pos] = ns + kk * ulast
                pos += 1
        else:
            depth += 1
            k[depth] = -1
            s[depth] = ns
    return idx_arr, sums_arr
