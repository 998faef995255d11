"""Network descriptions: layer geometry, weights, singular values, rank bounds.

A network is an ordered list of layers, each convolutional or fully
connected, annotated with the decomposition applied to it:

* ``spatial``: a D x D convolution becomes a D x 1 convolution into r
  intermediate channels followed by a 1 x D convolution.  The weight
  tensor (O, I, D, D) is matricized to (I*D) x (O*D), rows indexed by
  (input channel, vertical offset) and columns by (output channel,
  horizontal offset).  The maximum rank is min(I*D, O*D).
* ``channel``: the layer becomes a D x D convolution into r channels
  followed by a 1 x 1 convolution.  The weight tensor is matricized to
  (I*D*D) x O and the maximum rank is min(I*D*D, O).  Fully connected
  layers are the D = W = H = 1 case of this scheme.
* ``none``: the layer is kept dense and excluded from rank selection.

Layers carry either a weight tensor, a singular-value array of the
matricized weights, or both (cross-checked on load).  Singular values are
enough for every selection algorithm; weights are needed only to run the
forward-pass evaluator and to materialize factorized networks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import NetworkFormatError, ValidationError

KIND_CONV = "convolutional"
KIND_FC = "fully-connected"
SPATIAL = "spatial"
CHANNEL = "channel"
NONE = "none"

# Declared singular values must match the SVD of the weights to within
# this tolerance, relative to the largest singular value.
SV_MATCH_TOL = 1e-6


@dataclass(eq=False)
class LayerSpec:
    """One layer: geometry, decomposition scheme, and optional payload.

    W, H are the output spatial dimensions, D the kernel size, I and O the
    input and output channel counts.  Fully connected layers use
    W = H = D = 1 with I the flattened input size.  Arrays are treated as
    read-only once attached.
    """

    index: int
    name: str
    kind: str
    W: int
    H: int
    D: int
    I: int
    O: int
    decomposition: str
    weights: np.ndarray | None = None
    singular_values: np.ndarray | None = None


def max_rank(layer):
    """Largest admissible rank for the layer's decomposition scheme."""
    if layer.decomposition == SPATIAL:
        return min(layer.I * layer.D, layer.O * layer.D)
    return min(layer.I * layer.D * layer.D, layer.O)


def matricize(layer):
    """Reshape the weight tensor into the 2-D matrix that gets factorized."""
    if layer.weights is None:
        raise ValidationError(f"layer {layer.index} ({layer.name}): "
                              f"no weights to matricize")
    w = layer.weights
    if w.ndim == 2:
        w = w.reshape(layer.O, layer.I, 1, 1)
    O, I, D = layer.O, layer.I, layer.D
    if layer.decomposition == SPATIAL:
        # rows (i, dv), columns (o, dh)
        return np.ascontiguousarray(w.transpose(1, 2, 0, 3)).reshape(I * D, O * D)
    # rows (i, dv, dh), columns o
    return np.ascontiguousarray(w.transpose(1, 2, 3, 0)).reshape(I * D * D, O)


def singular_values(layer):
    """Singular values of the matricized weights, as float64."""
    s = np.linalg.svd(matricize(layer).astype(np.float64), compute_uv=False)
    s = s[:max_rank(layer)]
    if s[0] <= 0:
        raise ValidationError(f"layer {layer.index} ({layer.name}): weights "
                              f"are all zero")
    # keep strictly positive so energy curves stay well defined
    return np.maximum(s, s[0] * 1e-15)


def svd_factors(layer):
    """Full SVD (U, s, Vt) of the matricized weights, truncatable by slicing."""
    m = matricize(layer).astype(np.float64)
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    r = max_rank(layer)
    return u[:, :r], s[:r], vt[:r]


def factor_tensors(layer, u, s, vt, r):
    """Slice an SVD to rank r and reshape into the layer's two factor tensors.

    The square root of each kept singular value is folded into both sides.
    Shapes: spatial (r, I, D, 1) and (O, r, 1, D); channel (r, I, D, D) and
    (O, r, 1, 1); fully connected (r, I) and (O, r).
    """
    root = np.sqrt(s[:r])
    a = u[:, :r] * root          # (rows, r)
    b = root[:, None] * vt[:r]   # (r, cols)
    I, O, D = layer.I, layer.O, layer.D
    if layer.kind == KIND_FC:
        return a.T, b.T
    if layer.decomposition == SPATIAL:
        first = a.T.reshape(r, I, D, 1)
        second = b.reshape(r, O, D).transpose(1, 0, 2)[:, :, None, :]
        return first, second
    first = a.T.reshape(r, I, D, D)
    second = b.T[:, :, None, None]
    return first, second


def validate_layer(layer):
    """Check a single layer's invariants, raising ValidationError."""
    where = f"layer {layer.index} ({layer.name})"
    if layer.kind not in (KIND_CONV, KIND_FC):
        raise ValidationError(f"{where}: unknown kind {layer.kind!r}")
    if layer.decomposition not in (SPATIAL, CHANNEL, NONE):
        raise ValidationError(f"{where}: unknown decomposition "
                              f"{layer.decomposition!r}")
    for dim in ("W", "H", "D", "I", "O"):
        v = getattr(layer, dim)
        if not isinstance(v, int) or v < 1:
            raise ValidationError(f"{where}: {dim} must be a positive "
                                  f"integer, got {v!r}")
    if layer.kind == KIND_FC:
        if layer.D != 1 or layer.W != 1 or layer.H != 1:
            raise ValidationError(f"{where}: fully-connected layers require "
                                  f"W = H = D = 1")
        if layer.decomposition == SPATIAL:
            raise ValidationError(f"{where}: spatial decomposition needs a "
                                  f"convolution")
    if layer.weights is None and layer.singular_values is None:
        raise ValidationError(f"{where}: needs weights or singular values")
    if layer.weights is not None:
        w = layer.weights
        expect = (layer.O, layer.I) if layer.kind == KIND_FC else \
            (layer.O, layer.I, layer.D, layer.D)
        if w.shape != expect:
            raise ValidationError(f"{where}: weight shape {w.shape} does not "
                                  f"match geometry {expect}")
        if not np.all(np.isfinite(w)):
            raise ValidationError(f"{where}: weights contain non-finite values")
    if layer.singular_values is not None:
        s = np.asarray(layer.singular_values, dtype=np.float64)
        if s.ndim != 1 or s.size != max_rank(layer):
            raise ValidationError(f"{where}: expected {max_rank(layer)} "
                                  f"singular values, got {s.size}")
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValidationError(f"{where}: singular values must be finite "
                                  f"and positive")
        if np.any(np.diff(s) > 0):
            raise ValidationError(f"{where}: singular values must be "
                                  f"non-increasing")
    if layer.weights is not None and layer.singular_values is not None:
        computed = singular_values(layer)
        declared = np.asarray(layer.singular_values, dtype=np.float64)
        scale = max(computed[0], 1e-30)
        if np.max(np.abs(declared - computed)) > SV_MATCH_TOL * scale:
            raise ValidationError(f"{where}: declared singular values do not "
                                  f"match the SVD of the weights")


@dataclass(eq=False)
class NetworkSpec:
    """An ordered stack of layers plus the compression exclusion policy.

    ``excluded`` holds 1-based indices of layers pinned by the user; layers
    whose maximum rank is 1 or whose decomposition is ``none`` are excluded
    automatically.  ``fixed_ranks`` optionally pins an excluded layer at a
    rank below its maximum (it is then still factorized, just not searched).
    """

    layers: list[LayerSpec]
    excluded: frozenset = frozenset()
    fixed_ranks: dict = field(default_factory=dict)
    name: str = "network"

    def __post_init__(self):
        self.excluded = frozenset(self.excluded)
        self.validate()

    @property
    def L(self):
        return len(self.layers)

    def layer(self, index):
        """Layer by 1-based index."""
        return self.layers[index - 1]

    @property
    def effective_excluded(self):
        """User-excluded plus automatically excluded layer indices."""
        auto = {l.index for l in self.layers
                if l.decomposition == NONE or max_rank(l) <= 1}
        return self.excluded | auto

    @property
    def compressible(self):
        """1-based indices of layers whose rank is selected, in order."""
        out = self.effective_excluded
        return tuple(l.index for l in self.layers if l.index not in out)

    def pinned_rank(self, index):
        """Rank an excluded layer is held at (its maximum unless overridden)."""
        if index in self.fixed_ranks:
            return self.fixed_ranks[index]
        return max_rank(self.layer(index))

    def full_ranks(self):
        """Rank configuration with every free layer at maximum rank."""
        ranks = []
        excl = self.effective_excluded
        for l in self.layers:
            if l.index in excl:
                ranks.append(self.pinned_rank(l.index))
            else:
                ranks.append(max_rank(l))
        return tuple(ranks)

    def validate(self):
        if not self.layers:
            raise ValidationError("network has no layers")
        for pos, layer in enumerate(self.layers, start=1):
            if layer.index != pos:
                raise ValidationError(f"layer {layer.name!r} has index "
                                      f"{layer.index}, expected {pos}")
            validate_layer(layer)
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise ValidationError("layer names must be unique")
        valid = set(range(1, self.L + 1))
        if not set(self.excluded) <= valid:
            raise ValidationError(f"excluded indices {sorted(self.excluded)} "
                                  f"outside 1..{self.L}")
        for idx, r in self.fixed_ranks.items():
            if idx not in valid:
                raise ValidationError(f"fixed rank for unknown layer {idx}")
            if idx not in self.effective_excluded:
                raise ValidationError(f"fixed rank given for layer {idx}, "
                                      f"which is not excluded")
            rmax = max_rank(self.layer(idx))
            if not isinstance(r, int) or not 1 <= r <= rmax:
                raise ValidationError(f"fixed rank {r} for layer {idx} "
                                      f"outside 1..{rmax}")
        if not self.compressible:
            raise ValidationError("no compressible layers remain after "
                                  "exclusions")

    def with_singular_values(self):
        """Return a copy where every free layer carries singular values."""
        new = []
        for l in self.layers:
            if l.singular_values is None and l.weights is not None \
                    and l.decomposition != NONE:
                new.append(replace(l, singular_values=singular_values(l)))
            else:
                new.append(l)
        return NetworkSpec(new, excluded=self.excluded,
                           fixed_ranks=dict(self.fixed_ranks), name=self.name)


def validate_ranks(network, ranks):
    """Validate a rank configuration against a network; return it as a tuple."""
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != network.L:
        raise ValidationError(f"rank configuration has {len(ranks)} entries "
                              f"for a {network.L}-layer network")
    excl = network.effective_excluded
    for layer, r in zip(network.layers, ranks):
        rmax = max_rank(layer)
        if not 1 <= r <= rmax:
            raise ValidationError(f"layer {layer.index} ({layer.name}): rank "
                                  f"{r} outside 1..{rmax}")
        if layer.index in excl and r != network.pinned_rank(layer.index):
            raise ValidationError(f"layer {layer.index} ({layer.name}) is "
                                  f"excluded and pinned at rank "
                                  f"{network.pinned_rank(layer.index)}, "
                                  f"got {r}")
    return ranks


# ---------------------------------------------------------------------------
# file format

def _parse_layer(idx, entry, base):
    if not isinstance(entry, dict):
        raise NetworkFormatError(f"layer {idx}: expected an object")
    try:
        name = entry.get("name", f"layer{idx}")
        kind = entry["kind"]
    except KeyError as exc:
        raise NetworkFormatError(f"layer {idx}: missing field {exc}")
    if kind == KIND_FC:
        defaults = {"W": 1, "H": 1, "D": 1}
        decomposition = entry.get("decomposition", CHANNEL)
    else:
        defaults = {}
        decomposition = entry.get("decomposition", SPATIAL)
    dims = {}
    for dim in ("W", "H", "D", "I", "O"):
        if dim in entry:
            dims[dim] = entry[dim]
        elif dim in defaults:
            dims[dim] = defaults[dim]
        else:
            raise NetworkFormatError(f"layer {idx} ({name}): missing "
                                     f"dimension {dim!r}")
    weights = None
    if "weights" in entry:
        blob = base / entry["weights"]
        if not blob.is_file():
            raise NetworkFormatError(f"layer {idx} ({name}): weight blob "
                                     f"{blob} not found")
        raw = np.fromfile(blob, dtype="<f4")
        if kind == KIND_FC:
            shape = (dims["O"], dims["I"])
        else:
            shape = (dims["O"], dims["I"], dims["D"], dims["D"])
        if raw.size != int(np.prod(shape)):
            raise NetworkFormatError(f"layer {idx} ({name}): blob {blob} has "
                                     f"{raw.size} floats, expected "
                                     f"{int(np.prod(shape))}")
        weights = raw.reshape(shape)
    sv = None
    if "singular_values" in entry:
        sv = np.asarray(entry["singular_values"], dtype=np.float64)
    return LayerSpec(index=idx, name=name, kind=kind, decomposition=decomposition,
                     weights=weights, singular_values=sv, **dims)


def load_network(path):
    """Load a network description from a JSON file.

    Weight blobs are little-endian float32 files referenced relative to the
    JSON file's directory.  Singular values may be given inline instead.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise NetworkFormatError(f"cannot read {path}: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON ({exc})")
    if not isinstance(doc, dict) or "layers" not in doc:
        raise NetworkFormatError(f"{path}: expected an object with a "
                                 f"'layers' array")
    layers = [_parse_layer(i, entry, path.parent)
              for i, entry in enumerate(doc["layers"], start=1)]
    excluded = doc.get("excluded", [])
    if not isinstance(excluded, list):
        raise NetworkFormatError(f"{path}: 'excluded' must be a list of "
                                 f"layer indices")
    fixed = {}
    for key, val in doc.get("fixed_ranks", {}).items():
        try:
            fixed[int(key)] = int(val)
        except (TypeError, ValueError):
            raise NetworkFormatError(f"{path}: bad fixed_ranks entry "
                                     f"{key!r}: {val!r}")
    try:
        return NetworkSpec(layers, excluded=frozenset(int(i) for i in excluded),
                           fixed_ranks=fixed, name=doc.get("name", path.stem))
    except (TypeError, ValueError) as exc:
        raise NetworkFormatError(f"{path}: {exc}")


def save_network(network, path):
    """Write a network to JSON, storing weights as sibling .bin blobs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"name": network.name, "layers": []}
    if network.excluded:
        doc["excluded"] = sorted(network.excluded)
    if network.fixed_ranks:
        doc["fixed_ranks"] = {str(k): v for k, v in
                              sorted(network.fixed_ranks.items())}
    for l in network.layers:
        entry = {"name": l.name, "kind": l.kind, "W": l.W, "H": l.H,
                 "D": l.D, "I": l.I, "O": l.O, "decomposition": l.decomposition}
        if l.weights is not None:
            blob = f"{path.stem}_{l.name}.bin"
            l.weights.astype("<f4").tofile(path.parent / blob)
            entry["weights"] = blob
        if l.singular_values is not None:
            entry["singular_values"] = [float(v) for v in l.singular_values]
        doc["layers"].append(entry)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
