"""Shared builders for the test suite.

Most test networks are declared through singular values alone, which is
enough for every selection algorithm.  Evaluator and decomposition tests
attach real weight tensors, either random or with a prescribed spectrum.
Brute-force enumeration helpers live here so search results can be checked
against an independent path.
"""

import itertools
import json
from pathlib import Path

import numpy as np
import pytest

import enc
from enc import curves as curves_mod
from enc import metrics as metrics_mod
from enc.complexity import ComplexityModel, make_budget
from enc.evaluator import MiniDataset
from enc.mapping import build_mapping
from enc.metrics import MetricContext
from enc.network import (CHANNEL, KIND_CONV, KIND_FC, SPATIAL, LayerSpec,
                         NetworkSpec, load_network)

FIXTURES = Path(enc.__file__).parent / "fixtures"

# Canonical 13-convolution dimension pattern (input channels, filters,
# output feature map size); all kernels are 3x3.
VGG16_CONVS = [
    (3, 64, 224), (64, 64, 224),
    (64, 128, 112), (128, 128, 112),
    (128, 256, 56), (256, 256, 56), (256, 256, 56),
    (256, 512, 28), (512, 512, 28), (512, 512, 28),
    (512, 512, 14), (512, 512, 14), (512, 512, 14),
]


# ---------------------------------------------------------------------------
# layer and network builders

def geometric_sigma(r, ratio=0.7, top=4.0):
    """Strictly decreasing spectrum top * ratio**d."""
    return top * ratio ** np.arange(r, dtype=np.float64)


def sv_layer(index, name, sigma, I=None, O=None):
    """Fully connected layer declared through its singular values alone."""
    sigma = np.asarray(sigma, dtype=np.float64)
    k = sigma.size
    I = k if I is None else I
    O = k if O is None else O
    assert min(I, O) == k, "spectrum length must equal min(I, O)"
    return LayerSpec(index=index, name=name, kind=KIND_FC, W=1, H=1, D=1,
                     I=I, O=O, decomposition=CHANNEL, singular_values=sigma)


def sv_conv(index, name, sigma, I, O, D=3, W=8, H=8, decomposition=SPATIAL):
    """Convolution layer declared through its singular values alone."""
    sigma = np.asarray(sigma, dtype=np.float64)
    return LayerSpec(index=index, name=name, kind=KIND_CONV, W=W, H=H, D=D,
                     I=I, O=O, decomposition=decomposition,
                     singular_values=sigma)


def orthonormal_columns(rng, n, k):
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q[:, :k]


def spectrum_fc_layer(rng, index, name, sigma, I=None, O=None):
    """FC layer whose matricized weights carry the prescribed spectrum."""
    sigma = np.asarray(sigma, dtype=np.float64)
    k = sigma.size
    I = k if I is None else I
    O = k if O is None else O
    m = orthonormal_columns(rng, I, k) @ \
        (sigma[:, None] * orthonormal_columns(rng, O, k).T)
    return LayerSpec(index=index, name=name, kind=KIND_FC, W=1, H=1, D=1,
                     I=I, O=O, decomposition=CHANNEL,
                     weights=np.ascontiguousarray(m.T),
                     singular_values=sigma)


def two_layer_toy():
    """Two rank-4 layers, sigma = [4, 3, 2, 1] each; coefficients [8, 8]."""
    sig = [4.0, 3.0, 2.0, 1.0]
    return NetworkSpec([sv_layer(1, "fc1", sig), sv_layer(2, "fc2", sig)],
                       name="toy")


def coefficient_pair():
    """Coefficients [10, 20] and max ranks [4, 8]; full total 200."""
    l1 = sv_layer(1, "fc1", geometric_sigma(4), I=4, O=6)
    l2 = sv_layer(2, "fc2", geometric_sigma(8), I=12, O=8)
    return NetworkSpec([l1, l2], name="pair")


def stack12():
    """Twelve layers whose cost pattern is [a, b, c, d, d, d, e*6]."""
    sizes = [(4, 6), (5, 7), (6, 8)] + [(7, 9)] * 3 + [(8, 10)] * 6
    layers = [sv_layer(i, f"fc{i}", geometric_sigma(min(a, b)), I=a, O=b)
              for i, (a, b) in enumerate(sizes, start=1)]
    return NetworkSpec(layers, name="stack12")


def three_layer_mixed(seed=11):
    """Spatial conv + channel conv + FC with weights; max ranks [4, 6, 5]."""
    rng = np.random.default_rng(seed)
    layers = [
        LayerSpec(index=1, name="conv1", kind=KIND_CONV, W=6, H=6, D=2,
                  I=2, O=4, decomposition=SPATIAL,
                  weights=rng.standard_normal((4, 2, 2, 2))),
        LayerSpec(index=2, name="conv2", kind=KIND_CONV, W=5, H=5, D=2,
                  I=4, O=6, decomposition=CHANNEL,
                  weights=rng.standard_normal((6, 4, 2, 2))),
        LayerSpec(index=3, name="fc", kind=KIND_FC, W=1, H=1, D=1,
                  I=8, O=5, decomposition=CHANNEL,
                  weights=rng.standard_normal((5, 8))),
    ]
    return NetworkSpec(layers, name="mixed3").with_singular_values()


def random_sv_network(rng, n_layers=None, r_lo=16, r_hi=64, name="random"):
    """Random FC stack with moderate cost spread, declared via spectra."""
    if n_layers is None:
        n_layers = int(rng.integers(8, 17))
    layers = []
    for i in range(1, n_layers + 1):
        r = int(rng.integers(r_lo, r_hi + 1))
        extra = int(rng.integers(1, r + 1))
        sigma = np.sort(rng.uniform(0.05, 1.0, size=r))[::-1]
        layers.append(sv_layer(i, f"fc{i}", sigma, I=r, O=r + extra))
    return NetworkSpec(layers, name=name)


def vgg16_like(rng=None):
    """Thirteen-convolution stack with the canonical dimension pattern.

    Without an rng the spectra are declared analytically (fast); with one,
    real weight tensors are attached and spectra come from their SVDs.
    """
    layers = []
    for i, (I, O, S) in enumerate(VGG16_CONVS, start=1):
        r = min(I * 3, O * 3)
        if rng is None:
            sigma = np.exp(-np.linspace(0.0, 5.0, r))
            layers.append(sv_conv(i, f"conv{i}", sigma, I, O, D=3, W=S, H=S))
        else:
            w = rng.standard_normal((O, I, 3, 3))
            layers.append(LayerSpec(index=i, name=f"conv{i}", kind=KIND_CONV,
                                    W=S, H=S, D=3, I=I, O=O,
                                    decomposition=SPATIAL, weights=w))
    net = NetworkSpec(layers, name="vgg16-like")
    return net.with_singular_values() if rng is not None else net


# ---------------------------------------------------------------------------
# metric context plumbing

def make_ctx(network, mode="flops", kind="pca", evaluator=None):
    """MetricContext with whatever curve families the kind needs."""
    network = network.with_singular_values()
    model = ComplexityModel.from_network(network, mode)
    pca = curves_mod.build_curves(network, "pca")
    measured = None
    if kind in ("measured", "combined"):
        measured = curves_mod.build_curves(network, "measured", evaluator)
    return MetricContext(network=network, model=model, kind=kind,
                         pca=pca, measured=measured)


def make_table(ctx, grid_size=None):
    return build_mapping(ctx) if grid_size is None else \
        build_mapping(ctx, grid_size)


# ---------------------------------------------------------------------------
# brute-force helpers

def enumerate_box(network, space):
    """Every full configuration in the space's per-layer rank box."""
    template = list(network.full_ranks())
    axes = []
    for j, idx in enumerate(space.layer_ids):
        axes.append(range(int(space.r_min[j]), int(space.r_max[j]) + 1))
    configs = []
    for combo in itertools.product(*axes):
        cfg = list(template)
        for idx, r in zip(space.layer_ids, combo):
            cfg[idx - 1] = r
        configs.append(tuple(cfg))
    return configs


def enumerate_window(network, model, space, budget):
    """Integer configurations of the box inside the strict window."""
    lo, hi = budget.window
    out = []
    for cfg in enumerate_box(network, space):
        c = model.total(cfg)
        if lo < c < hi:
            out.append(cfg)
    return out


def metric_of(ctx, ranks):
    """Metric value for one integer configuration, via the public formulas."""
    net = ctx.network
    if ctx.kind == metrics_mod.PCA:
        return metrics_mod.a_p(net, ctx.pca, ranks)
    if ctx.kind == metrics_mod.MEASURED:
        return metrics_mod.a_m(net, ctx.measured, ranks)
    return metrics_mod.a_c(net, ctx.pca, ctx.measured, ctx.model, ranks)


def exhaustive_best(ctx, configs):
    """Argmax of the metric with the canonical tie break (lexicographic)."""
    best_cfg, best_val = None, -np.inf
    for cfg in sorted(configs):
        v = metric_of(ctx, cfg)
        if v > best_val:
            best_cfg, best_val = cfg, v
    return best_cfg, best_val


# ---------------------------------------------------------------------------
# test doubles

class TableEvaluator:
    """Evaluator returning prescribed accuracies keyed by rank tuple."""

    def __init__(self, table=None, default=0.5):
        self.table = {tuple(k): float(v) for k, v in (table or {}).items()}
        self.default = default
        self.calls = []

    def evaluate(self, network, ranks):
        key = tuple(int(r) for r in ranks)
        self.calls.append(key)
        return self.table.get(key, self.default)


class FailingEvaluator:
    """Evaluator that always raises, for error propagation tests."""

    def evaluate(self, network, ranks):
        raise RuntimeError("synthetic evaluator failure")


# ---------------------------------------------------------------------------
# independent singular value oracle

def jacobi_singular_values(m, sweeps=60, tol=1e-30):
    """One-sided Jacobi SVD, independent of LAPACK, descending order."""
    a = np.array(m, dtype=np.float64)
    if a.shape[0] < a.shape[1]:
        a = a.T.copy()
    n = a.shape[1]
    for _ in range(sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p] @ a[:, q]
                app = a[:, p] @ a[:, p]
                aqq = a[:, q] @ a[:, q]
                if apq * apq <= tol * app * aqq:
                    continue
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                col_p = a[:, p].copy()
                a[:, p] = c * col_p - s * a[:, q]
                a[:, q] = s * col_p + c * a[:, q]
        if not rotated:
            break
    return np.sort(np.sqrt(np.sum(a * a, axis=0)))[::-1]


# ---------------------------------------------------------------------------
# shipped fixture

@pytest.fixture(scope="session")
def mini_network():
    return load_network(FIXTURES / "mini.json")


@pytest.fixture(scope="session")
def mini_val():
    return MiniDataset.load(FIXTURES / "mini-val.ds")


@pytest.fixture(scope="session")
def mini_train():
    return MiniDataset.load(FIXTURES / "mini-train.ds")


@pytest.fixture(scope="session")
def mini_meta():
    return json.loads((FIXTURES / "mini-meta.json").read_text())
