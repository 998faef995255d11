"""Whole-network accuracy metrics over rank configurations.

Three interchangeable metrics estimate how a rank configuration R affects
network accuracy, each normalized so the full-rank configuration has a
fixed value:

* measured  A_m(R) = prod_l y_m,l(r_l)        (full rank -> 1)
* energy    A_p(R) = prod_l y_p,l(r_l)        (full rank -> 1)
* combined  A_c(R) = A_p(R) * C(R)/C_orig + A_m(R)   (full rank -> 2)

Products run over compressible layers only; excluded layers contribute a
factor of 1.  Products are evaluated in log space so that a zero factor
gives exactly 0 instead of underflow noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import MEASURED, PCA
from .errors import ValidationError

COMBINED = "combined"
METRIC_KINDS = (PCA, MEASURED, COMBINED)


def log_product(curves, ranks_by_index):
    """Sum of log curve values; -inf marks a zero factor."""
    total = 0.0
    for idx, curve in curves.items():
        y = curve.value(ranks_by_index[idx - 1])
        if y <= 0.0:
            return -np.inf
        total += np.log(y)
    return total


def a_m(network, measured_curves, ranks):
    return float(np.exp(log_product(measured_curves, ranks)))


def a_p(network, pca_curves, ranks):
    return float(np.exp(log_product(pca_curves, ranks)))


def a_c(network, pca_curves, measured_curves, model, ranks):
    ratio = model.total_real(ranks) / model.c_orig
    return a_p(network, pca_curves, ranks) * ratio + \
        a_m(network, measured_curves, ranks)


def default_metric_kind(n_free, have_evaluator):
    """Metric choice by network size: measured for small networks, combined
    for mid-sized ones, energy for deep ones; energy whenever no evaluator
    is available."""
    if not have_evaluator:
        return PCA
    if n_free <= 8:
        return MEASURED
    if n_free <= 24:
        return COMBINED
    return PCA


def default_top_n(n_free):
    """Evaluation budget for enc-inf by network size."""
    if n_free <= 8:
        return 50
    if n_free <= 16:
        return 40
    return 20


@dataclass(eq=False)
class MetricContext:
    """A network, complexity model, and the curves behind one metric kind.

    Bundles everything needed to score configurations (integer or real
    valued) and to invert per-layer curves for equal-metric construction.
    """

    network: object
    model: object
    kind: str
    pca: dict | None = None
    measured: dict | None = None

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValidationError(f"unknown metric kind {self.kind!r}")
        if self.kind in (PCA, COMBINED) and self.pca is None:
            raise ValidationError(f"metric {self.kind!r} needs energy curves")
        if self.kind in (MEASURED, COMBINED) and self.measured is None:
            raise ValidationError(f"metric {self.kind!r} needs measured curves")

    @property
    def inversion_curves(self):
        """Curve family used to build equal-metric configurations."""
        return self.pca if self.kind == PCA else self.measured

    @property
    def proxy_curve_sets(self):
        """Curve families whose product ranks partial configurations."""
        if self.kind == PCA:
            return (self.pca,)
        if self.kind == MEASURED:
            return (self.measured,)
        return (self.pca, self.measured)

    def value(self, ranks):
        """Metric value of one configuration (ranks may be real-valued)."""
        if self.kind == PCA:
            return a_p(self.network, self.pca, ranks)
        if self.kind == MEASURED:
            return a_m(self.network, self.measured, ranks)
        return a_c(self.network, self.pca, self.measured, self.model, ranks)
