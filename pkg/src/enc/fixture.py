"""A small trainable CNN fixture with a synthetic dataset.

The fixture network is four 3x3 convolutions (1->8->16->16->12 channels,
stride 1, same padding, 12x12 inputs) followed by a 1728->10 fully
connected classifier.  The dataset draws each class from a fixed random
prototype image plus Gaussian noise, so a few epochs of plain SGD reach
high accuracy while rank truncation still degrades it smoothly.

Training is pure numpy (softmax cross-entropy, SGD with momentum, float32)
and fully determined by the seed.  ``generate`` writes the network, both
dataset splits, and a metadata record; ``load_default`` loads the copy
shipped inside the package.  Regenerate it with::

    python -m enc.fixture --out src/enc/fixtures --seed 7
"""

from __future__ import annotations

import argparse
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .evaluator import MiniDataset, MiniNetEvaluator, conv2d
from .network import (CHANNEL, KIND_CONV, KIND_FC, SPATIAL, LayerSpec,
                      NetworkSpec, load_network)

IMAGE = 12
CLASSES = 10
CHANNELS = (1, 8, 16, 16, 12)
DEFAULT_SEED = 7
DEFAULT_NOISE = 2.4


def make_dataset(rng, n, protos=None, noise=DEFAULT_NOISE,
                 split="validation"):
    """Class prototypes plus Gaussian noise, balanced across classes.

    Pass the same ``protos`` array for every split of one task; drawing
    fresh prototypes per split would make the task unlearnable.
    """
    if protos is None:
        protos = rng.standard_normal(
            (CLASSES, 1, IMAGE, IMAGE)).astype(np.float32)
    labels = np.arange(n) % CLASSES
    rng.shuffle(labels)
    inputs = protos[labels] + noise * rng.standard_normal(
        (n, 1, IMAGE, IMAGE)).astype(np.float32)
    return MiniDataset(inputs=inputs.astype(np.float32),
                       labels=labels.astype(np.int64), split=split)


def _conv_backward(dout, xp, w, pad):
    """Gradients of conv2d: returns (dw, dx)."""
    n, o, oh, ow = dout.shape
    _, i, kh, kw = w.shape
    dw = np.zeros_like(w)
    dxp = np.zeros_like(xp)
    for dv in range(kh):
        for dh in range(kw):
            patch = xp[:, :, dv:dv + oh, dh:dh + ow]
            dw[:, :, dv, dh] = np.tensordot(dout, patch,
                                            axes=([0, 2, 3], [0, 2, 3]))
            contrib = np.tensordot(dout, w[:, :, dv, dh], axes=([1], [0]))
            dxp[:, :, dv:dv + oh, dh:dh + ow] += contrib.transpose(0, 3, 1, 2)
    dx = dxp[:, :, pad:xp.shape[2] - pad, pad:xp.shape[3] - pad]
    return dw, dx


def _init_weights(rng):
    weights = []
    for cin, cout in zip(CHANNELS[:-1], CHANNELS[1:]):
        std = np.sqrt(2.0 / (cin * 9))
        weights.append((std * rng.standard_normal((cout, cin, 3, 3)))
                       .astype(np.float32))
    fc_in = CHANNELS[-1] * IMAGE * IMAGE
    std = np.sqrt(1.0 / fc_in)
    weights.append((std * rng.standard_normal((CLASSES, fc_in)))
                   .astype(np.float32))
    return weights


def _forward_train(weights, x):
    """Forward pass keeping the activations needed for backprop."""
    acts = [x]
    out = x
    for w in weights[:-1]:
        out = np.maximum(conv2d(out, w, 1, 1), 0.0)
        acts.append(out)
    flat = out.reshape(out.shape[0], -1)
    scores = flat @ weights[-1].T
    return scores, acts


def _train_step(weights, velocity, x, y, lr, momentum=0.9):
    scores, acts = _forward_train(weights, x)
    scores = scores - scores.max(axis=1, keepdims=True)
    p = np.exp(scores)
    p /= p.sum(axis=1, keepdims=True)
    loss = float(-np.log(np.maximum(p[np.arange(len(y)), y], 1e-12)).mean())
    dscores = p.astype(np.float32)
    dscores[np.arange(len(y)), y] -= 1.0
    dscores /= len(y)

    grads = [None] * len(weights)
    flat = acts[-1].reshape(len(y), -1)
    grads[-1] = dscores.T @ flat
    dflat = dscores @ weights[-1]
    dout = dflat.reshape(acts[-1].shape)
    for li in range(len(weights) - 2, -1, -1):
        dout = dout * (acts[li + 1] > 0)
        xp = np.pad(acts[li], ((0, 0), (0, 0), (1, 1), (1, 1)))
        grads[li], dout = _conv_backward(dout, xp, weights[li], 1)

    for li, (w, g) in enumerate(zip(weights, grads)):
        velocity[li] = momentum * velocity[li] - lr * g
        weights[li] = (w + velocity[li]).astype(np.float32)
    return loss


def _as_network(weights, name):
    layers = []
    for i, w in enumerate(weights[:-1], start=1):
        layers.append(LayerSpec(index=i, name=f"conv{i}", kind=KIND_CONV,
                                W=IMAGE, H=IMAGE, D=3, I=w.shape[1],
                                O=w.shape[0], decomposition=SPATIAL,
                                weights=w))
    fc = weights[-1]
    layers.append(LayerSpec(index=len(weights), name="fc", kind=KIND_FC,
                            W=1, H=1, D=1, I=fc.shape[1], O=fc.shape[0],
                            decomposition=CHANNEL, weights=fc))
    # the first convolution is tiny (rank cap 3); keep it dense-rank
    return NetworkSpec(layers, excluded=frozenset({1}), name=name)


def train_fixture(seed=DEFAULT_SEED, n_train=1500, n_val=1000,
                  noise=DEFAULT_NOISE, epochs=8, batch=125, lr=0.01):
    """Train the fixture; returns (network, train_set, val_set, meta)."""
    rng = np.random.default_rng(seed)
    protos = rng.standard_normal((CLASSES, 1, IMAGE, IMAGE)).astype(np.float32)
    train = make_dataset(rng, n_train, protos, noise, split="train")
    val = make_dataset(rng, n_val, protos, noise, split="validation")
    weights = _init_weights(rng)
    velocity = [np.zeros_like(w) for w in weights]
    losses = []
    for epoch in range(epochs):
        order = rng.permutation(n_train)
        step_lr = lr * (0.5 ** (epoch // 2))
        for i in range(0, n_train, batch):
            sel = order[i:i + batch]
            losses.append(_train_step(weights, velocity, train.inputs[sel],
                                      train.labels[sel], step_lr))
    network = _as_network(weights, f"mini-seed{seed}").with_singular_values()
    evaluator = MiniNetEvaluator(val)
    train_eval = MiniNetEvaluator(train)
    meta = {"seed": seed, "n_train": n_train, "n_val": n_val, "noise": noise,
            "epochs": epochs, "batch": batch, "lr": lr,
            "final_loss": losses[-1],
            "val_accuracy": evaluator.evaluate_dense(network),
            "train_accuracy": train_eval.evaluate_dense(network)}
    return network, train, val, meta


def generate(out_dir, seed=DEFAULT_SEED, **kwargs):
    """Train and write the fixture files into a directory."""
    from .network import save_network
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    network, train, val, meta = train_fixture(seed=seed, **kwargs)
    network.name = "mini"
    save_network(network, out / "mini.json")
    train.save(out / "mini-train.ds")
    val.save(out / "mini-val.ds")
    (out / "mini-meta.json").write_text(json.dumps(meta, indent=2,
                                                   sort_keys=True) + "\n")
    return meta


def fixture_dir():
    return resources.files("enc") / "fixtures"


def load_default():
    """Load the shipped fixture: (network, train_set, val_set, meta)."""
    base = fixture_dir()
    network = load_network(base / "mini.json")
    train = MiniDataset.load(base / "mini-train.ds")
    val = MiniDataset.load(base / "mini-val.ds")
    meta = json.loads((base / "mini-meta.json").read_text())
    return network, train, val, meta


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="train and write the mini fixture")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--epochs", type=int, default=8)
    parser.add_argument("--noise", type=float, default=DEFAULT_NOISE)
    args = parser.parse_args(argv)
    meta = generate(args.out, seed=args.seed, epochs=args.epochs,
                    noise=args.noise)
    print(json.dumps(meta, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
