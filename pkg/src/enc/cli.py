"""Command line interface.

Subcommands:
  metrics    build accuracy curves and the metric-complexity mapping
  map        pick ranks by equal-metric mapping for a budget
  search     windowed candidate search (model- or inference-selected)
  decompose  materialize factorized weights for a rank configuration
  report     complexity/metric report for a stored configuration

Exit codes: 0 success, 2 infeasible budget, 3 bad input or arguments.
"""

from __future__ import annotations

import argparse
import sys

from .complexity import MODE_FLOPS, MODE_PARAMS
from .errors import (EvaluatorError, InfeasibleBudgetError,
                     NetworkFormatError, ValidationError)
from .metrics import METRIC_KINDS
from . import pipeline

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; we reserve 2 for infeasible
    budgets, so usage problems exit 3 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _parse_groups(text):
    """Manual layer groups, e.g. '2-4,7-8' (1-based, inclusive)."""
    groups = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            first, _, last = part.partition("-")
            groups.append((int(first), int(last if last else first)))
        except ValueError:
            raise ValidationError(f"bad group spec {part!r}; expected "
                                  f"FIRST-LAST")
    return groups or None


def _add_common(p):
    p.add_argument("--network", required=True,
                   help="network description JSON")
    p.add_argument("--dataset", default=None,
                   help="evaluation dataset (.ds) for measured curves")
    p.add_argument("--evaluator", choices=("mini", "oracle"), default="mini",
                   help="accuracy source: forward passes over --dataset, "
                        "or the analytic energy-product oracle")
    p.add_argument("--mode", choices=(MODE_FLOPS, MODE_PARAMS),
                   default=MODE_FLOPS, help="complexity mode")
    p.add_argument("--metric", choices=tuple(METRIC_KINDS), default=None,
                   help="metric kind (default picked by network size)")
    p.add_argument("--grid-size", type=int, default=None,
                   help="mapping table resolution")
    p.add_argument("--out", default=".", help="output directory")


def _add_budget(p):
    p.add_argument("--target", type=float, default=None,
                   help="complexity budget; <=1 means fraction of the "
                        "full-rank factorized total")
    p.add_argument("--accuracy", type=float, default=None,
                   help="metric target in [0, 1]; mapped to a budget")
    p.add_argument("--space-margin", type=float, default=None,
                   help="search space margin as a fraction of the total "
                        "(default 0.10)")
    p.add_argument("--window-margin", type=float, default=None,
                   help="candidate window half-width as a fraction of the "
                        "target (default 0.005)")
    p.add_argument("--seed", type=int, default=None,
                   help="recorded in outputs; selection is deterministic")


def build_parser():
    parser = _Parser(prog="enc",
                     description="Rank selection for factorized networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="curves and mapping table")
    _add_common(p)

    p = sub.add_parser("map", help="equal-metric rank selection")
    _add_common(p)
    _add_budget(p)

    p = sub.add_parser("search", help="windowed candidate search")
    _add_common(p)
    _add_budget(p)
    p.add_argument("--strategy", choices=("model", "inf"), default="model",
                   help="pick by metric only, or re-rank the top N by "
                        "measured accuracy")
    p.add_argument("--n", type=int, default=None,
                   help="candidates to evaluate for --strategy inf")
    p.add_argument("--beam", type=int, default=None,
                   help="per-group split beam width (0 keeps every split)")
    p.add_argument("--step", type=int, default=None,
                   help="fixed rank step (disables automatic coarsening)")
    p.add_argument("--group", default=None,
                   help="manual layer groups, e.g. 2-4,7-8")
    p.add_argument("--group-size", type=int, default=None,
                   help="largest run of equal-cost layers merged per pass")
    p.add_argument("--max-dims", type=int, default=None,
                   help="largest allowed top-level search dimension")
    p.add_argument("--max-candidates", type=float, default=None,
                   help="cap on enumerated window tuples")
    p.add_argument("--target-params", type=float, default=None,
                   help="secondary parameter budget (with --mode flops)")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel evaluations for --strategy inf")

    p = sub.add_parser("decompose", help="materialize factorized weights")
    p.add_argument("--network", required=True)
    p.add_argument("--ranks", required=True,
                   help="rank configuration JSON (from map/search)")
    p.add_argument("--out", default=".")

    p = sub.add_parser("report", help="report a stored configuration")
    _add_common(p)
    p.add_argument("--ranks", default=None,
                   help="rank configuration JSON (default: full rank)")

    return parser


def _print_selection(doc):
    totals = doc["totals"]
    print(f"network: {doc['network']}")
    print("ranks: " + " ".join(str(r) for r in doc["ranks"]))
    print(f"metric ({doc['metric']['kind']}): {doc['metric']['value']:.6f}")
    print(f"flops: {totals['flops']} "
          f"({totals['flops_of_factorized_full']:.4f} of factorized full, "
          f"{totals['flops_of_dense']:.4f} of dense)")
    print(f"parameters: {totals['parameters']} "
          f"({totals['parameters_of_factorized_full']:.4f} of factorized "
          f"full, {totals['parameters_of_dense']:.4f} of dense)")


def run(args):
    if args.command == "metrics":
        summary, paths = pipeline.run_metrics(
            args.network, mode=args.mode, metric=args.metric,
            dataset_path=args.dataset, grid_size=args.grid_size,
            out_dir=args.out, evaluator_kind=args.evaluator)
        print(f"network: {summary['network']}  layers: {summary['layers']}  "
              f"metric: {summary['metric']}")
        print(f"achievable complexity: {summary['c_floor']} .. "
              f"{summary['c_ceiling']} (full {summary['c_orig']}, "
              f"dense {summary['dense_orig']})")
        for name, path in sorted(paths.items()):
            print(f"wrote {path}")
        return EXIT_OK

    if args.command == "map":
        ranks, doc = pipeline.run_map(
            args.network, target=args.target, accuracy=args.accuracy,
            mode=args.mode, metric=args.metric, dataset_path=args.dataset,
            grid_size=args.grid_size, out_dir=args.out,
            space_margin=args.space_margin, window_margin=args.window_margin,
            seed=args.seed, evaluator_kind=args.evaluator)
        _print_selection(doc)
        print(f"elapsed: {doc['_elapsed']:.2f} s")
        return EXIT_OK

    if args.command == "search":
        if args.target_params is not None and args.mode != MODE_FLOPS:
            raise ValidationError("--target-params is a secondary budget "
                                  "for --mode flops")
        groups = _parse_groups(args.group) if args.group else None
        max_candidates = int(args.max_candidates) if args.max_candidates \
            else None
        ranks, doc = pipeline.run_search(
            args.network, target=args.target, accuracy=args.accuracy,
            mode=args.mode, metric=args.metric, dataset_path=args.dataset,
            strategy=args.strategy, top_n=args.n, beam=args.beam,
            step=args.step, manual_groups=groups, group_size=args.group_size,
            max_top_dim=args.max_dims, grid_size=args.grid_size,
            out_dir=args.out, space_margin=args.space_margin,
            window_margin=args.window_margin, max_candidates=max_candidates,
            secondary_target=args.target_params, workers=args.workers,
            seed=args.seed, evaluator_kind=args.evaluator)
        _print_selection(doc)
        info = doc["search"]
        print(f"candidates: {doc['candidates']} "
              f"(window tuples {info['valid_tuples']}, "
              f"step divisor {info['divisor']})")
        if "evaluated" in doc:
            print(f"evaluated: {doc['evaluated']}")
        print(f"search time: {doc['_elapsed']:.2f} s")
        return EXIT_OK

    if args.command == "decompose":
        report = pipeline.run_decompose(args.network, args.ranks, args.out)
        print(report.format())
        return EXIT_OK

    if args.command == "report":
        ranks, doc = pipeline.run_report(
            args.network, ranks_path=args.ranks, mode=args.mode,
            metric=args.metric, dataset_path=args.dataset, out_dir=args.out,
            evaluator_kind=args.evaluator)
        _print_selection(doc)
        return EXIT_OK

    raise ValidationError(f"unknown command {args.command!r}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except InfeasibleBudgetError as exc:
        print(f"enc: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NetworkFormatError, ValidationError, EvaluatorError) as exc:
        print(f"enc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"enc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
