"""Per-layer rank-to-accuracy curves: monotone, normalized, invertible.

Two curve families share one representation:

* ``pca``: cumulative singular-value energy, normalized so rank 1 maps to
  0 and the maximum rank maps to 1,
      y(r) = (sum_{d<=r} s_d - s_1) / (sum_d s_d - s_1),
  with a knot at every integer rank.
* ``measured``: rank r of a single layer is truncated while the rest of
  the network stays unchanged, an evaluator scores the result, and the
  accuracies at a small rank schedule are min-max normalized to [0, 1].

Knot values are repaired to be strictly increasing (running maximum, then
a tiny slope on flat runs, then renormalization to [0, 1]) and joined by a
monotone PCHIP interpolant, so each curve has a single-valued inverse that
is computed by bisection.
"""

from __future__ import annotations

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import EvaluatorError, ValidationError
from .network import NONE, max_rank

EPS_SLOPE = 1e-9
PCA = "pca"
MEASURED = "measured"


def default_schedule(r_max):
    """Geometric rank schedule {1, r/16, r/8, r/4, r/2, 3r/4, r_max}, deduplicated."""
    if r_max < 2:
        raise ValidationError(f"cannot sample a curve for maximum rank {r_max}")
    points = {1, r_max}
    for num, den in ((1, 16), (1, 8), (1, 4), (1, 2), (3, 4)):
        points.add(min(r_max, max(1, -(-num * r_max // den))))
    return sorted(points)


def _strictify(ranks, values):
    """Repair knot values to a strictly increasing [0, 1] sequence."""
    v = np.maximum.accumulate(np.asarray(values, dtype=np.float64))
    for i in range(1, v.size):
        gap = EPS_SLOPE * (ranks[i] - ranks[i - 1])
        if v[i] < v[i - 1] + gap:
            v[i] = v[i - 1] + gap
    return (v - v[0]) / (v[-1] - v[0])


class LayerCurve:
    """Monotone interpolated curve y(r) on [1, r_max] with y(1)=0, y(r_max)=1."""

    def __init__(self, layer_index, kind, ranks, values):
        ranks = np.asarray(ranks, dtype=np.float64)
        if ranks.size < 2 or ranks[0] != 1 or np.any(np.diff(ranks) <= 0):
            raise ValidationError(f"layer {layer_index}: curve knots must be "
                                  f"increasing and start at rank 1")
        self.layer_index = layer_index
        self.kind = kind
        self.r_max = float(ranks[-1])
        self.knot_ranks = ranks
        self.knot_values = _strictify(ranks, values)
        self._ip = PchipInterpolator(ranks, self.knot_values, extrapolate=True)

    def value(self, r):
        """Evaluate the curve; arguments are clipped to [1, r_max]."""
        rc = np.clip(r, 1.0, self.r_max)
        out = np.clip(self._ip(rc), 0.0, 1.0)
        # pin the endpoints so normalization is exact, not merely rounded
        out = np.where(rc >= self.r_max, 1.0, np.where(rc <= 1.0, 0.0, out))
        return float(out) if np.isscalar(r) else out

    def invert(self, a):
        """Smallest real rank with y(rank) = a, by bisection."""
        scalar = np.isscalar(a)
        a = np.atleast_1d(np.asarray(a, dtype=np.float64))
        if np.any(a < 0) or np.any(a > 1):
            raise ValidationError(f"layer {self.layer_index}: inverse "
                                  f"argument outside [0, 1]")
        lo = np.full(a.shape, 1.0)
        hi = np.full(a.shape, self.r_max)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self._ip(mid) < a
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = np.where(a <= 0, 1.0, np.where(a >= 1, self.r_max, hi))
        return float(out[0]) if scalar else out


def pca_curve(layer):
    """Cumulative-energy curve from a layer's singular values."""
    if layer.singular_values is None:
        raise ValidationError(f"layer {layer.index} ({layer.name}): no "
                              f"singular values available")
    s = np.asarray(layer.singular_values, dtype=np.float64)
    if s.size < 2:
        raise ValidationError(f"layer {layer.index} ({layer.name}): maximum "
                              f"rank {s.size} admits no curve")
    energy = np.cumsum(s)
    values = (energy - energy[0]) / (energy[-1] - energy[0])
    ranks = np.arange(1, s.size + 1, dtype=np.float64)
    return LayerCurve(layer.index, PCA, ranks, values)


def measured_curve(layer, network, evaluator, schedule=None):
    """Accuracy curve from truncating one layer and scoring the network.

    The layer is truncated to each rank in the schedule while every other
    layer keeps its full (or pinned) rank; accuracies are min-max
    normalized so the endpoints map to 0 and 1.
    """
    rmax = max_rank(layer)
    if schedule is None:
        schedule = default_schedule(rmax)
    ranks = sorted({int(r) for r in schedule} | {1, rmax})
    if ranks[0] < 1 or ranks[-1] > rmax:
        raise ValidationError(f"layer {layer.index} ({layer.name}): schedule "
                              f"outside 1..{rmax}")
    base = list(network.full_ranks())
    accs = []
    for r in ranks:
        cfg = list(base)
        cfg[layer.index - 1] = r
        try:
            accs.append(float(evaluator.evaluate(network, tuple(cfg))))
        except Exception as exc:
            raise EvaluatorError(f"layer {layer.index} ({layer.name}): "
                                 f"evaluator failed at rank {r}: {exc}")
    accs = np.asarray(accs, dtype=np.float64)
    span = accs[-1] - accs[0]
    if span > 0:
        values = (accs - accs[0]) / span
    else:
        values = np.zeros_like(accs)   # flat response; repair spreads it
    return LayerCurve(layer.index, MEASURED, ranks, values)


def build_curves(network, kind, evaluator=None, schedule_fn=None):
    """Curves for every compressible layer, keyed by 1-based layer index."""
    curves = {}
    for idx in network.compressible:
        layer = network.layer(idx)
        if kind == PCA:
            curves[idx] = pca_curve(layer)
        elif kind == MEASURED:
            if evaluator is None:
                raise ValidationError("measured curves need an evaluator")
            schedule = schedule_fn(max_rank(layer)) if schedule_fn else None
            curves[idx] = measured_curve(layer, network, evaluator, schedule)
        else:
            raise ValidationError(f"unknown curve kind {kind!r}")
    return curves


def export_curves_csv(curves, path):
    """Write knot-resolution samples of each curve as layer,rank,value rows."""
    lines = ["layer,rank,value"]
    for idx in sorted(curves):
        curve = curves[idx]
        grid = np.arange(1, int(curve.r_max) + 1)
        vals = curve.value(grid)
        for r, v in zip(grid, vals):
            lines.append(f"{idx},{int(r)},{v:.10g}")
    path = str(path)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
