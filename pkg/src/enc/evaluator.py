"""Forward-pass evaluation of truncated networks, plus a test oracle.

The engine runs small feed-forward stacks (convolutions with stride 1 and
same padding, then fully connected layers) on NCHW batches.  Dataset
tensors are float32 on disk; arithmetic runs in float64 so factorized and
dense paths agree to rounding noise.  Every layer
with a decomposition scheme runs in factorized form at its configured
rank, including at maximum rank, so factorization itself is exercised;
layers marked ``none`` run dense.  ReLU follows every layer except the
last, and the final layer must be fully connected so the output is one
score row per item.

MiniNetEvaluator scores top-1 accuracy of a truncated network on a
dataset.  AnalyticOracle is a deterministic stand-in whose "accuracy" is
an affine function of the product of energy-curve values, which makes
expected measured curves computable in closed form for tests.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curves import pca_curve
from .errors import NetworkFormatError, ValidationError
from .network import (KIND_FC, NONE, SPATIAL, factor_tensors, svd_factors,
                      validate_ranks)

_MAGIC = b"ENCD"
_VERSION = 1
_SPLITS = ("train", "validation")


def conv2d(x, w, pad_h, pad_w):
    """Correlate NCHW input with (O, I, kh, kw) weights, stride 1."""
    n, c, h, width = x.shape
    o, i, kh, kw = w.shape
    if c != i:
        raise ValidationError(f"convolution expects {i} input channels, "
                              f"got {c}")
    xp = np.pad(x, ((0, 0), (0, 0), (pad_h, pad_h), (pad_w, pad_w)))
    oh = h + 2 * pad_h - kh + 1
    ow = width + 2 * pad_w - kw + 1
    out = np.zeros((n, o, oh, ow), dtype=np.float64)
    for dv in range(kh):
        for dh in range(kw):
            patch = xp[:, :, dv:dv + oh, dh:dh + ow]
            out += np.tensordot(patch, w[:, :, dv, dh],
                                axes=([1], [1])).transpose(0, 3, 1, 2)
    return out


class _FactorCache:
    """Lazy per-layer SVD cache keyed by layer index."""

    def __init__(self):
        self._svd = {}

    def factors(self, layer, r):
        if layer.index not in self._svd:
            self._svd[layer.index] = svd_factors(layer)
        u, s, vt = self._svd[layer.index]
        return factor_tensors(layer, u, s, vt, r)


def forward(network, ranks, x, cache=None, dense=False):
    """Run the network on an NCHW batch; returns (N, classes) scores."""
    ranks = validate_ranks(network, ranks)
    if network.layers[-1].kind != KIND_FC:
        raise ValidationError("the final layer must be fully connected")
    if cache is None:
        cache = _FactorCache()
    out = np.asarray(x, dtype=np.float64)
    last = network.L
    for layer, r in zip(network.layers, ranks):
        if layer.weights is None:
            raise ValidationError(f"layer {layer.index} ({layer.name}): no "
                                  f"weights; cannot run the evaluator")
        if layer.kind == KIND_FC:
            out = out.reshape(out.shape[0], -1)
            if out.shape[1] != layer.I:
                raise ValidationError(f"layer {layer.index} ({layer.name}): "
                                      f"flattened input {out.shape[1]} != "
                                      f"{layer.I}")
            if dense or layer.decomposition == NONE:
                out = out @ layer.weights.T
            else:
                first, second = cache.factors(layer, r)
                out = (out @ first.T) @ second.T
        else:
            if out.ndim != 4 or out.shape[2] != layer.W or out.shape[3] != layer.H:
                raise ValidationError(f"layer {layer.index} ({layer.name}): "
                                      f"expected {layer.W}x{layer.H} input")
            pad = (layer.D - 1) // 2
            if 2 * pad + 1 != layer.D:
                raise ValidationError(f"layer {layer.index} ({layer.name}): "
                                      f"same padding needs an odd kernel")
            if dense or layer.decomposition == NONE:
                out = conv2d(out, layer.weights, pad, pad)
            elif layer.decomposition == SPATIAL:
                first, second = cache.factors(layer, r)
                out = conv2d(out, first, pad, 0)
                out = conv2d(out, second, 0, pad)
            else:
                first, second = cache.factors(layer, r)
                out = conv2d(out, first, pad, pad)
                out = conv2d(out, second, 0, 0)
        if layer.index != last:
            out = np.maximum(out, 0.0)
    return out


@dataclass(eq=False)
class MiniDataset:
    """Labeled NCHW images with a named split."""

    inputs: np.ndarray   # (N, C, H, W) float32
    labels: np.ndarray   # (N,) int64
    split: str = "validation"

    def __post_init__(self):
        if self.inputs.ndim != 4:
            raise ValidationError("dataset inputs must be (N, C, H, W)")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ValidationError("dataset labels must match inputs")
        if self.split not in _SPLITS:
            raise ValidationError(f"unknown split {self.split!r}")

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def n_classes(self):
        return int(self.labels.max()) + 1

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        n, c, h, w = self.inputs.shape
        header = struct.pack("<4sIIIIIIII", _MAGIC, _VERSION,
                             _SPLITS.index(self.split), n, c, h, w,
                             self.n_classes, 0)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(self.labels.astype("<u4").tobytes())
            fh.write(self.inputs.astype("<f4").tobytes())
        return path

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise NetworkFormatError(f"cannot read {path}: {exc}")
        head = struct.calcsize("<4sIIIIIIII")
        if len(raw) < head:
            raise NetworkFormatError(f"{path}: truncated header")
        magic, version, split, n, c, h, w, classes, dtype = \
            struct.unpack("<4sIIIIIIII", raw[:head])
        if magic != _MAGIC or version != _VERSION:
            raise NetworkFormatError(f"{path}: not a dataset file")
        if dtype != 0 or split >= len(_SPLITS):
            raise NetworkFormatError(f"{path}: unsupported encoding")
        need = head + 4 * n + 4 * n * c * h * w
        if len(raw) != need:
            raise NetworkFormatError(f"{path}: expected {need} bytes, "
                                     f"got {len(raw)}")
        labels = np.frombuffer(raw, dtype="<u4", count=n,
                               offset=head).astype(np.int64)
        inputs = np.frombuffer(raw, dtype="<f4", count=n * c * h * w,
                               offset=head + 4 * n).reshape(n, c, h, w)
        if classes != int(labels.max()) + 1:
            raise NetworkFormatError(f"{path}: label range disagrees with "
                                     f"header")
        return cls(inputs=inputs.copy(), labels=labels,
                   split=_SPLITS[split])


class MiniNetEvaluator:
    """Top-1 accuracy of a truncated network on a dataset."""

    def __init__(self, dataset, batch_size=512):
        self.dataset = dataset
        self.batch_size = batch_size
        self._cache = _FactorCache()

    def evaluate(self, network, ranks):
        hits = 0
        x, y = self.dataset.inputs, self.dataset.labels
        for i in range(0, len(self.dataset), self.batch_size):
            scores = forward(network, ranks, x[i:i + self.batch_size],
                             cache=self._cache)
            hits += int(np.sum(np.argmax(scores, axis=1) == y[i:i + self.batch_size]))
        return hits / len(self.dataset)

    def evaluate_dense(self, network):
        """Accuracy of the untouched dense network."""
        hits = 0
        x, y = self.dataset.inputs, self.dataset.labels
        for i in range(0, len(self.dataset), self.batch_size):
            scores = forward(network, network.full_ranks(),
                             x[i:i + self.batch_size], dense=True)
            hits += int(np.sum(np.argmax(scores, axis=1) == y[i:i + self.batch_size]))
        return hits / len(self.dataset)


class AnalyticOracle:
    """Deterministic evaluator whose accuracy is affine in the energy product.

    accuracy(R) = lo + (hi - lo) * prod_l y_p,l(r_l).  Because min-max
    normalization removes the affine part, measured curves built against
    this oracle must reproduce the energy curves exactly.
    """

    def __init__(self, network, lo=0.1, hi=0.9):
        self.network = network.with_singular_values()
        self.curves = {idx: pca_curve(self.network.layer(idx))
                       for idx in self.network.compressible}
        self.lo, self.hi = lo, hi

    def evaluate(self, network, ranks):
        ranks = validate_ranks(self.network, ranks)
        prod = 1.0
        for idx, curve in self.curves.items():
            prod *= curve.value(float(ranks[idx - 1]))
        return self.lo + (self.hi - self.lo) * prod
