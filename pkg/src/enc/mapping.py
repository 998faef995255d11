"""Complexity <-> accuracy mapping via equal-metric configurations.

Requiring every compressible layer to sit at the same per-layer curve
value a defines a one-parameter family of real-valued configurations
R_e(a) = (y_1^-1(a), ..., y_L^-1(a)).  Sweeping a from 0 to 1 traces a
strictly increasing complexity profile C(R_e(a)) from the all-rank-1
floor to the full-rank total, which yields three maps:

* f_CR: target complexity -> real-valued configuration (bisection on a),
* f_CA: complexity -> network metric (interpolated on the sweep table),
* f_AC: metric -> complexity (the inverse interpolation).

enc_map_select turns f_CR's real configuration into an integer one: floor
each free rank, then greedily hand back ranks (largest fractional parts
first) while the next increment still fits the target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBudgetError, ValidationError
from .network import validate_ranks

DEFAULT_GRID_SIZE = 256


def equal_metric_ranks(ctx, a):
    """Real-valued configuration with every free layer at curve value a.

    Accepts a scalar or a vector of a values; returns a (len(a), L) array
    in the vector case.  Excluded layers sit at their pinned rank.
    """
    network = ctx.network
    curves = ctx.inversion_curves
    scalar = np.isscalar(a)
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    out = np.empty((a.size, network.L), dtype=np.float64)
    excl = network.effective_excluded
    for layer in network.layers:
        col = layer.index - 1
        if layer.index in excl:
            out[:, col] = network.pinned_rank(layer.index)
        else:
            out[:, col] = curves[layer.index].invert(a)
    return out[0] if scalar else out


@dataclass(eq=False)
class MappingTable:
    """Sampled sweep of the equal-metric family, one row per grid point."""

    a_grid: np.ndarray         # common per-layer curve value, increasing
    ranks: np.ndarray          # (grid, L) real-valued configurations
    complexities: np.ndarray   # C(R_e(a)), strictly increasing
    metrics: np.ndarray        # network metric A(R_e(a)), increasing
    metric_kind: str

    @property
    def c_floor(self):
        return float(self.complexities[0])

    @property
    def c_ceiling(self):
        return float(self.complexities[-1])


def build_mapping(ctx, grid_size=DEFAULT_GRID_SIZE):
    """Sample the equal-metric family on a uniform grid of curve values."""
    if grid_size < 2:
        raise ValidationError(f"grid size must be at least 2, got {grid_size}")
    a_grid = np.linspace(0.0, 1.0, grid_size)
    ranks = equal_metric_ranks(ctx, a_grid)
    complexities = ranks @ ctx.model.coefficients.astype(np.float64)
    metrics = np.array([ctx.value(row) for row in ranks])
    if np.any(np.diff(complexities) <= 0):
        raise ValidationError("equal-metric sweep is not strictly increasing "
                              "in complexity; curves are degenerate")
    return MappingTable(a_grid=a_grid, ranks=ranks, complexities=complexities,
                        metrics=metrics, metric_kind=ctx.kind)


def _check_range(table, c, what="complexity"):
    if c < table.c_floor or c > table.c_ceiling:
        raise InfeasibleBudgetError(
            f"{what} {c:.6g} outside the achievable range "
            f"[{table.c_floor:.6g}, {table.c_ceiling:.6g}]")


def map_c_to_r(ctx, table, c_t, clamp=False):
    """Real-valued equal-metric configuration with C(R) <= c_t, within 0.1%.

    With clamp=True, targets outside the achievable range saturate at the
    range endpoints instead of raising.
    """
    if clamp:
        c_t = min(max(c_t, table.c_floor), table.c_ceiling)
    else:
        _check_range(table, c_t, "target")
    if c_t >= table.c_ceiling:
        return equal_metric_ranks(ctx, 1.0)
    model = ctx.model

    def c_of(a):
        return model.total_real(equal_metric_ranks(ctx, a))

    lo, hi = 0.0, 1.0
    for _ in range(200):
        if c_t - c_of(lo) <= 1e-3 * c_t or hi - lo < 1e-14:
            break
        mid = 0.5 * (lo + hi)
        if c_of(mid) <= c_t:
            lo = mid
        else:
            hi = mid
    return equal_metric_ranks(ctx, lo)


def map_c_to_a(table, c):
    """Complexity -> network metric, interpolated on the sweep table."""
    _check_range(table, c)
    return float(np.interp(c, table.complexities, table.metrics))


def map_a_to_c(table, a_value):
    """Network metric -> complexity, the inverse interpolation."""
    lo, hi = float(table.metrics[0]), float(table.metrics[-1])
    if a_value < lo or a_value > hi:
        raise InfeasibleBudgetError(f"metric target {a_value:.6g} outside "
                                    f"the achievable range [{lo:.6g}, "
                                    f"{hi:.6g}]")
    return float(np.interp(a_value, table.metrics, table.complexities))


def enc_map_select(ctx, table, c_t):
    """Integer equal-metric configuration with C(R) <= c_t.

    Floors the real-valued configuration, then hands back rank increments
    in order of decreasing fractional part while they still fit, so little
    of the budget is left on the table.
    """
    network, model = ctx.network, ctx.model
    if c_t >= table.c_ceiling:
        if c_t > model.c_orig:
            raise InfeasibleBudgetError(f"target {c_t:.6g} above the "
                                        f"full-rank total {model.c_orig}")
        return network.full_ranks()
    _check_range(table, c_t, "target")

    real = map_c_to_r(ctx, table, c_t)
    excl = network.effective_excluded
    free = [l.index for l in network.layers if l.index not in excl]
    ranks = np.empty(network.L, dtype=np.int64)
    frac = {}
    for layer in network.layers:
        col = layer.index - 1
        if layer.index in excl:
            ranks[col] = network.pinned_rank(layer.index)
        else:
            ranks[col] = max(1, int(np.floor(real[col])))
            frac[layer.index] = real[col] - ranks[col]

    slack = c_t - model.total(ranks)
    if slack < 0:
        raise InfeasibleBudgetError(f"target {c_t:.6g} below the rank floor "
                                    f"{model.total(ranks)}")
    coeffs = ctx.model.coefficients
    rmax = ctx.model.r_max
    order = sorted(free, key=lambda i: (-frac[i], i))
    moved = True
    while moved:
        moved = False
        for idx in order:
            col = idx - 1
            if ranks[col] < rmax[col] and coeffs[col] <= slack:
                ranks[col] += 1
                slack -= coeffs[col]
                moved = True
    return validate_ranks(network, ranks)
