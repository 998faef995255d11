"""Linear complexity model: cost is a weighted sum of per-layer ranks.

A factorized layer's cost grows linearly in its rank r_l with an integer
coefficient c_l fixed by geometry:

* flops mode counts multiply-accumulates of the factorized forward pass:
  spatial  c_l = W*H*D*(I+O),  channel  c_l = W*H*(I*D*D + O)
  (fully connected layers are channel with W = H = D = 1, c_l = I+O).
* parameters mode counts stored weights and drops the spatial extent:
  spatial  c_l = D*(I+O),  channel  c_l = I*D*D + O.

C(R) = sum_l c_l * r_l.  The reference total C_orig uses the factorized
form at maximum rank, C_orig = sum_l c_l * r_l^max, which for typical
shapes exceeds the dense cost; the dense total is tracked separately so
reports can show ratios against both accountings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBudgetError, ValidationError
from .network import CHANNEL, SPATIAL, max_rank

MODE_FLOPS = "flops"
MODE_PARAMS = "parameters"

DEFAULT_SPACE_MARGIN = 0.10      # search-space margin, fraction of C_orig
DEFAULT_WINDOW_MARGIN = 0.005    # candidate-window margin, fraction of C_t


def coefficient(layer, mode):
    """Integer cost per unit rank for one layer."""
    if mode not in (MODE_FLOPS, MODE_PARAMS):
        raise ValidationError(f"unknown complexity mode {mode!r}")
    spatial_extent = layer.W * layer.H if mode == MODE_FLOPS else 1
    if layer.decomposition == SPATIAL:
        return spatial_extent * layer.D * (layer.I + layer.O)
    return spatial_extent * (layer.I * layer.D * layer.D + layer.O)


def dense_cost(layer, mode):
    """Cost of the layer kept dense (no factorization)."""
    spatial_extent = layer.W * layer.H if mode == MODE_FLOPS else 1
    return spatial_extent * layer.I * layer.O * layer.D * layer.D


@dataclass(eq=False)
class ComplexityModel:
    """Per-layer coefficients plus totals for one cost mode."""

    mode: str
    coefficients: np.ndarray   # int64, one entry per layer
    r_max: np.ndarray          # int64, maximum rank per layer
    c_orig: int                # factorized cost at maximum ranks
    dense_orig: int            # cost of the original dense network

    @classmethod
    def from_network(cls, network, mode=MODE_FLOPS):
        coeffs = np.array([coefficient(l, mode) for l in network.layers],
                          dtype=np.int64)
        rmax = np.array([max_rank(l) for l in network.layers], dtype=np.int64)
        dense = sum(dense_cost(l, mode) for l in network.layers)
        return cls(mode=mode, coefficients=coeffs, r_max=rmax,
                   c_orig=int(np.dot(coeffs, rmax)), dense_orig=int(dense))

    def total(self, ranks):
        """Exact integer total C(R) for an integer rank configuration."""
        ranks = np.asarray(ranks, dtype=np.int64)
        if ranks.shape != self.coefficients.shape:
            raise ValidationError(f"rank configuration has {ranks.size} "
                                  f"entries, expected {self.coefficients.size}")
        return int(np.dot(self.coefficients, ranks))

    def total_real(self, ranks):
        """Total for real-valued ranks (used on equal-metric rays)."""
        ranks = np.asarray(ranks, dtype=np.float64)
        if ranks.shape != self.coefficients.shape:
            raise ValidationError(f"rank configuration has {ranks.size} "
                                  f"entries, expected {self.coefficients.size}")
        return float(np.dot(self.coefficients, ranks))


@dataclass(eq=False)
class Budget:
    """Resolved complexity target with search and window margins.

    c_t is the absolute target, delta_s the margin used to bound the
    search space, delta_m the half-width of the strict candidate window
    C_t - delta_m < C(R) < C_t + delta_m.
    """

    c_t: float
    delta_s: float
    delta_m: float

    def __post_init__(self):
        if not self.c_t > 0:
            raise ValidationError(f"budget target must be positive, got "
                                  f"{self.c_t}")
        if self.delta_s < 0 or self.delta_m < 0:
            raise ValidationError(f"margins must be nonnegative, got "
                                  f"delta_s={self.delta_s} "
                                  f"delta_m={self.delta_m}")
        if self.delta_m > 0 and self.delta_m >= self.delta_s:
            raise ValidationError(f"window margin {self.delta_m} must be "
                                  f"below the space margin {self.delta_s}")

    @property
    def window(self):
        return self.c_t - self.delta_m, self.c_t + self.delta_m


def make_budget(model, target, space_margin=None, window_margin=None):
    """Resolve a budget given as a fraction (<= 1) or an absolute total.

    Margins are fractions: space_margin of C_orig (default 0.10) and
    window_margin of C_t (default 0.005).
    """
    if target <= 0:
        raise ValidationError(f"budget target must be positive, got {target}")
    c_t = target * model.c_orig if target <= 1 else float(target)
    if c_t > model.c_orig:
        raise ValidationError(f"budget {c_t:.0f} exceeds the factorized "
                              f"full-rank total {model.c_orig}")
    if space_margin is None:
        space_margin = DEFAULT_SPACE_MARGIN
    if window_margin is None:
        window_margin = DEFAULT_WINDOW_MARGIN
    return Budget(c_t=c_t, delta_s=space_margin * model.c_orig,
                  delta_m=window_margin * c_t)


def uniform_configuration(network, model, c_t):
    """Largest uniform rank fraction whose total stays within c_t.

    Every free layer gets rank max(1, floor(rho * r_max)) for the largest
    feasible rho; excluded layers stay pinned.  A baseline for comparing
    against per-layer selection.
    """
    excl = network.effective_excluded
    pinned = [network.pinned_rank(l.index) if l.index in excl else None
              for l in network.layers]

    def ranks_for(rho):
        out = []
        for l, p in zip(network.layers, pinned):
            if p is not None:
                out.append(p)
            else:
                out.append(max(1, int(rho * max_rank(l))))
        return tuple(out)

    floor_cfg = ranks_for(0.0)
    if model.total(floor_cfg) > c_t:
        raise InfeasibleBudgetError(f"target {c_t:.0f} below the rank-1 "
                                    f"floor {model.total(floor_cfg)}")
    lo, hi = 0.0, 1.0
    if model.total(ranks_for(1.0)) <= c_t:
        return ranks_for(1.0)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if model.total(ranks_for(mid)) <= c_t:
            lo = mid
        else:
            hi = mid
    return ranks_for(lo)
