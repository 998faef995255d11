"""Pure-Python fallback for the budget-window enumeration kernel.

Enumerates integer index tuples k with 0 <= k_i < counts_i whose weighted
sum lies in an inclusive window, lo <= sum_i k_i * units_i <= hi.  Depth
first over all but the last dimension with two prunes (partial sum above
hi; partial sum plus remaining maximum below lo); the last dimension is a
closed-form index range.  Rows come out in lexicographic order of k.
"""

import numpy as np


def _as_lists(counts, units):
    return [int(c) for c in counts], [int(u) for u in units]


def _suffix(counts, units):
    d = len(counts)
    suf = [0] * (d + 1)
    for i in range(d - 1, -1, -1):
        suf[i] = suf[i + 1] + units[i] * (counts[i] - 1)
    return suf


def _last_range(ns, ulast, cmax_last, lo, hi):
    lo_rem = lo - ns
    hi_rem = hi - ns
    if hi_rem < 0:
        return 1, 0
    kmin = 0 if lo_rem <= 0 else (lo_rem + ulast - 1) // ulast
    kmax = hi_rem // ulast
    if kmax > cmax_last:
        kmax = cmax_last
    return kmin, kmax


def count_window(counts, units, lo, hi):
    counts, units = _as_lists(counts, units)
    d = len(counts)
    lo, hi = int(lo), int(hi)
    ulast = units[d - 1]
    cmax_last = counts[d - 1] - 1
    if d == 1:
        kmin, kmax = _last_range(0, ulast, cmax_last, lo, hi)
        return max(0, kmax - kmin + 1)
    suf = _suffix(counts, units)
    k = [-1] * d
    s = [0] * d
    total = 0
    depth = 0
    leaf = d - 2
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
            kmin, kmax = _last_range(ns, ulast, cmax_last, lo, hi)
            if kmin <= kmax:
                total += kmax - kmin + 1
        else:
            depth += 1
            k[depth] = -1
            s[depth] = ns
    return total


def fill_window(counts, units, lo, hi):
    counts, units = _as_lists(counts, units)
    d = len(counts)
    lo, hi = int(lo), int(hi)
    ulast = units[d - 1]
    cmax_last = counts[d - 1] - 1
    prefixes, bases, kmins, kmaxs = [], [], [], []
    if d == 1:
        kmin, kmax = _last_range(0, ulast, cmax_last, lo, hi)
        if kmin <= kmax:
            prefixes.append(())
            bases.append(0)
            kmins.append(kmin)
            kmaxs.append(kmax)
    else:
        suf = _suffix(counts, units)
        k = [-1] * d
        s = [0] * d
        depth = 0
        leaf = d - 2
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
                kmin, kmax = _last_range(ns, ulast, cmax_last, lo, hi)
                if kmin <= kmax:
                    prefixes.append(tuple(k[:d - 1]))
                    bases.append(ns)
                    kmins.append(kmin)
                    kmaxs.append(kmax)
            else:
                depth += 1
                k[depth] = -1
                s[depth] = ns
    if not prefixes:
        return np.zeros((0, d), dtype=np.int32), np.zeros(0, dtype=np.int64)
    kmins = np.asarray(kmins, dtype=np.int64)
    kmaxs = np.asarray(kmaxs, dtype=np.int64)
    bases = np.asarray(bases, dtype=np.int64)
    sizes = kmaxs - kmins + 1
    n = int(sizes.sum())
    idx = np.empty((n, d), dtype=np.int32)
    if d > 1:
        idx[:, :d - 1] = np.repeat(np.asarray(prefixes, dtype=np.int32),
                                   sizes, axis=0)
    shift = np.arange(n, dtype=np.int64) - np.repeat(np.cumsum(sizes) - sizes,
                                                     sizes)
    last = np.repeat(kmins, sizes) + shift
    idx[:, d - 1] = last.astype(np.int32)
    sums = np.repeat(bases, sizes) + last * ulast
    return idx, sums
