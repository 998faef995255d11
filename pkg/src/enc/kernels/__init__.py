"""Budget-window lattice enumeration.

Given per-dimension index counts and positive integer units, enumerate
every index tuple k (0 <= k_i < counts_i) whose weighted sum falls in an
inclusive integer window:

    lo <= sum_i k_i * units_i <= hi.

This is the hot loop of candidate search.  A compiled Cython kernel is
used when the extension built, with a pure-Python fallback selected at
import time; both produce identical rows in identical order.
"""

import numpy as np

from ..errors import ValidationError

try:
    from . import _window as _impl
    IMPLEMENTATION = "compiled"
except ImportError:          # extension not built; use the fallback
    from . import _window_py as _impl
    IMPLEMENTATION = "python"

from . import _window_py

_MAX_TOTAL = 2 ** 62


def _prepare(counts, units):
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    units = np.ascontiguousarray(units, dtype=np.int64)
    if counts.ndim != 1 or units.shape != counts.shape:
        raise ValidationError("counts and units must be 1-D and equal length")
    if counts.size and (counts.min() < 1 or units.min() < 1):
        raise ValidationError("counts and units must be positive")
    total = sum(int(u) * (int(c) - 1) for u, c in zip(units, counts))
    if total >= _MAX_TOTAL:
        raise ValidationError("weighted range too large for 64-bit sums")
    return counts, units


def count_window(counts, units, lo, hi, impl=None):
    """Number of index tuples inside the window."""
    counts, units = _prepare(counts, units)
    if counts.size == 0:
        return 1 if lo <= 0 <= hi else 0
    if hi < lo:
        return 0
    order = np.argsort(-units, kind="stable")   # big units first prune best
    mod = _window_py if impl == "python" else _impl
    return int(mod.count_window(counts[order], units[order], int(lo), int(hi)))


def fill_window(counts, units, lo, hi, impl=None):
    """Materialize all tuples as (index matrix int32, window sums int64)."""
    counts, units = _prepare(counts, units)
    d = counts.size
    if d == 0:
        n = 1 if lo <= 0 <= hi else 0
        return np.zeros((n, 0), dtype=np.int32), np.zeros(n, dtype=np.int64)
    if hi < lo:
        return np.zeros((0, d), dtype=np.int32), np.zeros(0, dtype=np.int64)
    order = np.argsort(-units, kind="stable")
    mod = _window_py if impl == "python" else _impl
    idx, sums = mod.fill_window(counts[order], units[order], int(lo), int(hi))
    restored = np.empty_like(idx)
    restored[:, order] = idx
    return restored, sums
