"""End-to-end flows behind the CLI: prepare inputs, run, write artifacts.

Each run loads the network, builds the complexity model(s) and whichever
curve families the chosen metric needs, sweeps the equal-metric mapping,
and then applies one of the selection strategies.  Artifacts (rank
configuration JSON, mapping/curve/candidate CSVs, factor blobs) land in
the output directory; file contents are deterministic for fixed inputs.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from . import curves as curves_mod
from .complexity import (MODE_FLOPS, MODE_PARAMS, ComplexityModel,
                         make_budget)
from .errors import NetworkFormatError, ValidationError
from .evaluator import AnalyticOracle, MiniDataset, MiniNetEvaluator
from .mapping import build_mapping, enc_map_select, map_a_to_c, map_c_to_a
from .metrics import MetricContext, default_metric_kind, default_top_n
from .network import load_network, max_rank, validate_ranks
from .search import (build_hierarchy, enc_inf_select, enc_model_select,
                     extract_candidates, filter_candidates, limit_space)

CANDIDATE_CSV_ROWS = 1000
TRADE_OFF_POINTS = 17


def _metric_value(ctx, ranks):
    return ctx.value(np.asarray(ranks, dtype=np.float64))


def prepare(network_path, mode=MODE_FLOPS, metric=None, dataset_path=None,
            grid_size=None, evaluator_kind="mini"):
    """Load inputs and build (ctx, table, evaluator) for a run."""
    network = load_network(network_path).with_singular_values()
    model = ComplexityModel.from_network(network, mode)
    evaluator = None
    if evaluator_kind == "oracle":
        evaluator = AnalyticOracle(network)
    elif evaluator_kind != "mini":
        raise ValidationError(f"evaluator must be 'mini' or 'oracle', got "
                              f"{evaluator_kind!r}")
    elif dataset_path is not None:
        evaluator = MiniNetEvaluator(MiniDataset.load(dataset_path))
    if metric is None:
        metric = default_metric_kind(len(network.compressible),
                                     evaluator is not None)
    # energy curves are cheap and always reported alongside results
    pca = curves_mod.build_curves(network, "pca")
    measured = None
    if metric in ("measured", "combined"):
        if evaluator is None:
            raise ValidationError(f"metric {metric!r} needs --dataset (or "
                                  f"--evaluator oracle) to build measured "
                                  f"curves")
        measured = curves_mod.build_curves(network, "measured", evaluator)
    ctx = MetricContext(network=network, model=model, kind=metric,
                        pca=pca, measured=measured)
    table = build_mapping(ctx, grid_size) if grid_size else build_mapping(ctx)
    return ctx, table, evaluator


def resolve_budget(ctx, table, target=None, accuracy=None, space_margin=None,
                   window_margin=None):
    """Budget from a complexity target (fraction or absolute) or a metric
    target mapped through the accuracy-to-complexity table."""
    if (target is None) == (accuracy is None):
        raise ValidationError("exactly one of --target and --accuracy is "
                              "required")
    if accuracy is not None:
        target = map_a_to_c(table, accuracy)
    return make_budget(ctx.model, target, space_margin, window_margin)


# ---------------------------------------------------------------------------
# artifact writers

def write_mapping_csv(table, path):
    lines = ["a,complexity,metric"]
    for a, c, m in zip(table.a_grid, table.complexities, table.metrics):
        lines.append(f"{a:.10g},{c:.10g},{m:.10g}")
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def write_candidates_csv(candidates, path, limit=CANDIDATE_CSV_ROWS,
                         records=None):
    accs = {}
    if records:
        accs = {r["ranks"]: r["accuracy"] for r in records}
    lines = ["rank_configuration,complexity,metric,accuracy"]
    n = min(len(candidates), limit)
    for i in range(n):
        ranks = tuple(int(r) for r in candidates.configs[i])
        acc = accs.get(ranks, "")
        lines.append(f"\"{' '.join(map(str, ranks))}\","
                     f"{int(candidates.complexities[i])},"
                     f"{candidates.metrics[i]:.10g},{acc}")
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def write_rank_config(path, ctx, ranks, command, extras=None):
    """The rank-configuration file consumed by `enc decompose`."""
    network = ctx.network
    ranks = validate_ranks(network, ranks)
    flops = ctx.model if ctx.model.mode == MODE_FLOPS else \
        ComplexityModel.from_network(network, MODE_FLOPS)
    params = ctx.model if ctx.model.mode == MODE_PARAMS else \
        ComplexityModel.from_network(network, MODE_PARAMS)
    layers = []
    for layer, r in zip(network.layers, ranks):
        col = layer.index - 1
        row = {"index": layer.index, "name": layer.name, "rank": int(r),
               "r_max": max_rank(layer),
               "flops_coefficient": int(flops.coefficients[col]),
               "parameter_coefficient": int(params.coefficients[col]),
               "excluded": layer.index in network.effective_excluded}
        if ctx.pca and layer.index in ctx.pca:
            row["y_energy"] = float(ctx.pca[layer.index].value(float(r)))
        if ctx.measured and layer.index in ctx.measured:
            row["y_measured"] = float(ctx.measured[layer.index].value(float(r)))
        layers.append(row)
    doc = {"network": network.name, "command": command,
           "metric": {"kind": ctx.kind,
                      "value": _metric_value(ctx, ranks)},
           "ranks": [int(r) for r in ranks],
           "layers": layers,
           "totals": {
               "flops": flops.total(ranks),
               "flops_of_factorized_full": flops.total(ranks) / flops.c_orig,
               "flops_of_dense": flops.total(ranks) / flops.dense_orig,
               "parameters": params.total(ranks),
               "parameters_of_factorized_full":
                   params.total(ranks) / params.c_orig,
               "parameters_of_dense": params.total(ranks) / params.dense_orig,
           }}
    if extras:
        doc.update(extras)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def read_rank_config(path):
    """Rank configuration from either the JSON artifact or a plain list."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise NetworkFormatError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"{path}: invalid JSON ({exc})")
    if isinstance(doc, list):
        return [int(r) for r in doc]
    if isinstance(doc, dict) and "ranks" in doc:
        return [int(r) for r in doc["ranks"]]
    raise NetworkFormatError(f"{path}: expected a rank list or an object "
                             f"with a 'ranks' field")


# ---------------------------------------------------------------------------
# command flows

def run_metrics(network_path, mode=MODE_FLOPS, metric=None, dataset_path=None,
                grid_size=None, out_dir=".", evaluator_kind="mini"):
    """Build curves and the mapping table; write them as CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx, table, _ = prepare(network_path, mode, metric, dataset_path,
                            grid_size, evaluator_kind)
    paths = {}
    if ctx.pca:
        paths["curves_energy"] = curves_mod.export_curves_csv(
            ctx.pca, out / "curves_energy.csv")
    if ctx.measured:
        paths["curves_measured"] = curves_mod.export_curves_csv(
            ctx.measured, out / "curves_measured.csv")
    paths["mapping"] = write_mapping_csv(table, out / "mapping.csv")
    summary = {"network": ctx.network.name, "metric": ctx.kind,
               "mode": mode, "layers": ctx.network.L,
               "compressible": list(ctx.network.compressible),
               "c_floor": table.c_floor, "c_ceiling": table.c_ceiling,
               "c_orig": ctx.model.c_orig, "dense_orig": ctx.model.dense_orig}
    return summary, paths


def run_map(network_path, target=None, accuracy=None, mode=MODE_FLOPS,
            metric=None, dataset_path=None, grid_size=None, out_dir=".",
            space_margin=None, window_margin=None, seed=None,
            evaluator_kind="mini"):
    """Equal-metric selection for a budget; writes ranks.json + mapping.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    ctx, table, _ = prepare(network_path, mode, metric, dataset_path,
                            grid_size, evaluator_kind)
    budget = resolve_budget(ctx, table, target, accuracy, space_margin,
                            window_margin)
    ranks = enc_map_select(ctx, table, budget.c_t)
    elapsed = time.perf_counter() - started
    command = {"strategy": "map", "mode": mode, "target": budget.c_t,
               "seed": seed}
    # timings are printed, never stored: artifacts must be byte-identical
    # across reruns with the same inputs
    doc = write_rank_config(out / "ranks.json", ctx, ranks, command)
    write_mapping_csv(table, out / "mapping.csv")
    doc["_elapsed"] = elapsed
    return ranks, doc


def run_search(network_path, target=None, accuracy=None, mode=MODE_FLOPS,
               metric=None, dataset_path=None, strategy="model", top_n=None,
               beam=None, step=None, manual_groups=None, group_size=None,
               max_top_dim=None, grid_size=None, out_dir=".",
               space_margin=None, window_margin=None, max_candidates=None,
               secondary_target=None, workers=None, seed=None,
               evaluator_kind="mini"):
    """Windowed candidate search; writes ranks.json + candidates.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    ctx, table, evaluator = prepare(network_path, mode, metric, dataset_path,
                                    grid_size, evaluator_kind)
    budget = resolve_budget(ctx, table, target, accuracy, space_margin,
                            window_margin)
    space = limit_space(ctx, table, budget, step=step)
    kwargs = {}
    if group_size:
        kwargs["group_size"] = group_size
    if max_top_dim:
        kwargs["max_top_dim"] = max_top_dim
    hierarchy = build_hierarchy(ctx, space, manual_groups=manual_groups,
                                **kwargs)
    extract_kwargs = {}
    if beam is not None:
        extract_kwargs["beam"] = beam if beam > 0 else None
    if max_candidates:
        extract_kwargs["max_candidates"] = max_candidates
    candidates = extract_candidates(ctx, space, hierarchy, budget,
                                    **extract_kwargs)
    if secondary_target is not None:
        other_mode = MODE_PARAMS if mode == MODE_FLOPS else MODE_FLOPS
        other_model = ComplexityModel.from_network(ctx.network, other_mode)
        other_budget = make_budget(other_model, secondary_target,
                                   space_margin, window_margin)
        candidates = filter_candidates(candidates, other_model, other_budget)

    records = None
    if strategy == "model":
        ranks = enc_model_select(candidates)
    elif strategy == "inf":
        if evaluator is None:
            raise ValidationError("strategy 'inf' needs --dataset or "
                                  "--evaluator oracle")
        if top_n is None:
            top_n = default_top_n(len(ctx.network.compressible))
        ranks, records = enc_inf_select(candidates, top_n, evaluator,
                                        ctx.network, workers=workers)
    else:
        raise ValidationError(f"unknown strategy {strategy!r}")
    elapsed = time.perf_counter() - started

    command = {"strategy": strategy, "mode": mode, "target": budget.c_t,
               "window_low": budget.window[0], "window_high": budget.window[1],
               "seed": seed}
    extras = {"search": dict(candidates.info),
              "candidates": len(candidates)}
    if records is not None:
        extras["evaluated"] = len(records)
    doc = write_rank_config(out / "ranks.json", ctx, ranks, command, extras)
    write_candidates_csv(candidates, out / "candidates.csv", records=records)
    doc["_elapsed"] = elapsed
    doc["_candidates"] = candidates
    return ranks, doc


def run_decompose(network_path, ranks_path, out_dir="."):
    """Factorize a network at a stored rank configuration."""
    from .decompose import decompose_network, write_factorized
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    network = load_network(network_path)
    ranks = validate_ranks(network, read_rank_config(ranks_path))
    factors, report = decompose_network(network, ranks)
    write_factorized(network, ranks, factors, out / "factorized.json")
    report.to_csv(out / "decompose_report.csv")
    return report


def write_trade_off_csv(ctx, table, path, evaluator=None,
                        points=TRADE_OFF_POINTS):
    """Sweep budgets across the mapping range and tabulate the trade-off.

    Each row holds the selected configuration's complexity fraction, its
    metric value and, when an evaluator is available, its measured top-1
    accuracy.  Duplicate configurations from adjacent budgets collapse to
    one row.
    """
    targets = np.linspace(table.c_floor, table.c_ceiling, points)
    lines = ["complexity_fraction,complexity,metric,accuracy"]
    seen = set()
    for c_t in targets:
        ranks = enc_map_select(ctx, table, float(c_t))
        key = tuple(int(r) for r in ranks)
        if key in seen:
            continue
        seen.add(key)
        c = ctx.model.total(ranks)
        metric = _metric_value(ctx, ranks)
        acc = ""
        if evaluator is not None:
            acc = f"{evaluator.evaluate(ctx.network, ranks):.10g}"
        lines.append(f"{c / ctx.model.c_orig:.10g},{c:.10g},"
                     f"{metric:.10g},{acc}")
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def run_report(network_path, ranks_path=None, mode=MODE_FLOPS, metric=None,
               dataset_path=None, out_dir=".", evaluator_kind="mini"):
    """Complexity/metric report for a configuration (full rank if absent).

    Writes report.json for the requested configuration and trade_off.csv
    sweeping budgets over the achievable range (with measured accuracy
    when an evaluator is available).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx, table, evaluator = prepare(network_path, mode, metric, dataset_path,
                                    None, evaluator_kind)
    network = ctx.network
    if ranks_path is None:
        ranks = network.full_ranks()
    else:
        ranks = validate_ranks(network, read_rank_config(ranks_path))
    command = {"strategy": "report", "mode": mode}
    doc = write_rank_config(out / "report.json", ctx, ranks, command)
    write_trade_off_csv(ctx, table, out / "trade_off.csv", evaluator)
    c = ctx.model.total(ranks)
    doc["_achievable"] = (table.c_floor, table.c_ceiling)
    if table.c_floor <= c <= table.c_ceiling:
        doc["_mapped_metric"] = map_c_to_a(table, c)
    return ranks, doc
