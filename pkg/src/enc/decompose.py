"""Materialize a rank configuration: factor tensors, errors, and reports.

Each layer with a decomposition scheme is split into its two factor
tensors at the selected rank via truncated SVD of the matricized weights,
with the square root of each singular value folded into both factors.
Layers marked ``none`` pass through dense.  The report lists per-layer
ranks, truncation errors, and costs under both complexity modes, with
totals compared against the factorized full-rank reference and against
the dense original.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .complexity import MODE_FLOPS, MODE_PARAMS, ComplexityModel
from .errors import ValidationError
from .network import NONE, factor_tensors, max_rank, svd_factors, validate_ranks


@dataclass(eq=False)
class FactorizedLayer:
    """The two factor tensors replacing one layer, plus the truncation error."""

    index: int
    name: str
    kind: str
    decomposition: str
    rank: int
    first: np.ndarray
    second: np.ndarray
    frobenius_error: float


def factorize_layer(layer, rank):
    """Best rank-r factorization of one layer's weights."""
    if layer.decomposition == NONE:
        raise ValidationError(f"layer {layer.index} ({layer.name}) is not "
                              f"decomposed")
    rmax = max_rank(layer)
    if not 1 <= rank <= rmax:
        raise ValidationError(f"layer {layer.index} ({layer.name}): rank "
                              f"{rank} outside 1..{rmax}")
    u, s, vt = svd_factors(layer)
    first, second = factor_tensors(layer, u, s, vt, rank)
    err = float(np.sqrt(np.sum(s[rank:] ** 2)))
    return FactorizedLayer(index=layer.index, name=layer.name, kind=layer.kind,
                           decomposition=layer.decomposition, rank=rank,
                           first=first, second=second, frobenius_error=err)


@dataclass(eq=False)
class DecompositionReport:
    """Per-layer rows plus totals and ratios for both complexity modes."""

    rows: list
    totals: dict

    def to_csv(self, path):
        cols = ("layer", "name", "kind", "decomposition", "rank", "r_max",
                "frobenius_error", "flops", "parameters")
        lines = [",".join(cols)]
        for r in self.rows:
            lines.append(",".join(str(r[c]) for c in cols))
        Path(path).write_text("\n".join(lines) + "\n")
        return path

    def format(self):
        head = (f"{'layer':>5} {'name':<12} {'decomp':<8} {'rank':>6} "
                f"{'r_max':>6} {'error':>12} {'flops':>14} {'params':>12}")
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(f"{r['layer']:>5} {r['name']:<12} "
                         f"{r['decomposition']:<8} {r['rank']:>6} "
                         f"{r['r_max']:>6} {r['frobenius_error']:>12.4e} "
                         f"{r['flops']:>14} {r['parameters']:>12}")
        t = self.totals
        lines.append("-" * len(head))
        lines.append(f"flops      {t['flops']:>14}  "
                     f"({100 * t['flops_ratio']:.2f}% of factorized full "
                     f"rank, {100 * t['flops_ratio_dense']:.2f}% of dense)")
        lines.append(f"parameters {t['parameters']:>14}  "
                     f"({100 * t['parameters_ratio']:.2f}% of factorized "
                     f"full rank, {100 * t['parameters_ratio_dense']:.2f}% "
                     f"of dense)")
        return "\n".join(lines)


def decompose_network(network, ranks):
    """Factorize every decomposed layer at its selected rank.

    Returns (factors, report): factors maps 1-based layer index to a
    FactorizedLayer (dense layers are absent).
    """
    ranks = validate_ranks(network, ranks)
    flops = ComplexityModel.from_network(network, MODE_FLOPS)
    params = ComplexityModel.from_network(network, MODE_PARAMS)
    factors = {}
    rows = []
    for layer, r in zip(network.layers, ranks):
        if layer.decomposition != NONE:
            if layer.weights is None:
                raise ValidationError(f"layer {layer.index} ({layer.name}): "
                                      f"no weights to factorize")
            factors[layer.index] = factorize_layer(layer, r)
            err = factors[layer.index].frobenius_error
        else:
            err = 0.0
        col = layer.index - 1
        rows.append({"layer": layer.index, "name": layer.name,
                     "kind": layer.kind, "decomposition": layer.decomposition,
                     "rank": r, "r_max": max_rank(layer),
                     "frobenius_error": err,
                     "flops": int(flops.coefficients[col]) * r,
                     "parameters": int(params.coefficients[col]) * r})
    totals = {"flops": flops.total(ranks), "parameters": params.total(ranks),
              "flops_ratio": flops.total(ranks) / flops.c_orig,
              "parameters_ratio": params.total(ranks) / params.c_orig,
              "flops_ratio_dense": flops.total(ranks) / flops.dense_orig,
              "parameters_ratio_dense": params.total(ranks) / params.dense_orig}
    return factors, DecompositionReport(rows=rows, totals=totals)


def write_factorized(network, ranks, factors, path):
    """Write the factorized network as JSON plus float32 weight blobs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"name": f"{network.name}-factorized", "layers": []}
    for layer, r in zip(network.layers, ranks):
        entry = {"name": layer.name, "kind": layer.kind, "rank": int(r),
                 "decomposition": layer.decomposition,
                 "W": layer.W, "H": layer.H, "D": layer.D,
                 "I": layer.I, "O": layer.O}
        if layer.index in factors:
            f = factors[layer.index]
            for tag, tensor in (("first", f.first), ("second", f.second)):
                blob = f"{path.stem}_{layer.name}_{tag}.bin"
                tensor.astype("<f4").tofile(path.parent / blob)
                entry[tag] = {"file": blob, "shape": list(tensor.shape)}
            entry["frobenius_error"] = f.frobenius_error
        elif layer.weights is not None:
            blob = f"{path.stem}_{layer.name}_dense.bin"
            layer.weights.astype("<f4").tofile(path.parent / blob)
            entry["dense"] = {"file": blob, "shape": list(layer.weights.shape)}
        doc["layers"].append(entry)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
