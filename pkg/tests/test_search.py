"""Search space bounding, hierarchy grouping, extraction, and selection.

Every extraction test has a brute-force twin: enumerate the rank box,
keep the strict-window members, and compare sets, metrics, and argmax.
"""

import numpy as np
import pytest

from conftest import (coefficient_pair, enumerate_window, exhaustive_best,
                      make_ctx, make_table, metric_of, random_sv_network,
                      stack12, sv_layer, three_layer_mixed, two_layer_toy,
                      vgg16_like, FailingEvaluator, TableEvaluator)
from enc.complexity import Budget, ComplexityModel
from enc.errors import (EmptyCandidateError, EvaluatorError,
                        InfeasibleBudgetError, ValidationError)
from enc.evaluator import AnalyticOracle
from enc.mapping import enc_map_select
from enc.network import NetworkSpec
from enc.search import (CandidateSet, SearchSpace, build_hierarchy,
                        enc_inf_select, enc_model_select, extract_candidates,
                        filter_candidates, limit_space, min_offset, steps_for)


def full_box(network, model, shrink=0):
    """SearchSpace covering each free layer's [1 + shrink-from-top, r_max]."""
    free = network.compressible
    r_max = np.array([int(model.r_max[i - 1]) for i in free], dtype=np.int64)
    r_min = np.maximum(1, r_max - shrink) if shrink else \
        np.ones(len(free), dtype=np.int64)
    return SearchSpace(free, r_min, r_max, np.ones(len(free), dtype=np.int64))


def config_set(candidates):
    return {tuple(int(r) for r in row) for row in candidates.configs}


def bound_totals(ctx, space):
    """Complexity totals at the space's upper and lower corner."""
    up = list(ctx.network.full_ranks())
    lo = list(ctx.network.full_ranks())
    for j, idx in enumerate(space.layer_ids):
        up[idx - 1] = int(space.r_max[j])
        lo[idx - 1] = int(space.r_min[j])
    return ctx.model.total(up), ctx.model.total(lo)


# ---------------------------------------------------------------------------
# steps and space validation

def test_steps_for_rounds_ranges_up():
    got = steps_for([0, 1, 31, 32, 33, 64], 32)
    assert got.tolist() == [1, 1, 1, 1, 2, 2]


def test_search_space_validation():
    ids = (1, 2)
    ones = np.ones(2, dtype=np.int64)
    with pytest.raises(ValidationError):
        SearchSpace(ids, np.array([3, 1]), np.array([2, 4]), ones)
    with pytest.raises(ValidationError):
        SearchSpace(ids, np.array([0, 1]), np.array([2, 4]), ones)
    with pytest.raises(ValidationError):
        SearchSpace(ids, ones, np.array([2, 4]), np.array([1, 0]))
    with pytest.raises(ValidationError):
        SearchSpace((1,), ones, np.array([2, 4]), ones)


# ---------------------------------------------------------------------------
# limit_space

def test_limit_space_zero_margin_degenerates_to_map():
    net = two_layer_toy()
    ctx = make_ctx(net)
    table = make_table(ctx)
    for c_t in (24.0, 32.0, 40.0, 52.0):
        space = limit_space(ctx, table, Budget(c_t, 0.0, 0.0))
        assert np.all(space.r_max - space.r_min <= 1)
        ranks = enc_map_select(ctx, table, c_t)
        picked = np.array([ranks[i - 1] for i in space.layer_ids])
        assert np.all(space.r_min <= picked) and np.all(picked <= space.r_max)


def test_limit_space_one_row_margin_brackets_map():
    net = two_layer_toy()
    ctx = make_ctx(net)
    table = make_table(ctx)
    row = (table.c_ceiling - table.c_floor) / (len(table.a_grid) - 1)
    for c_t in (28.0, 44.0):
        space = limit_space(ctx, table, Budget(c_t, row, 0.0))
        ranks = enc_map_select(ctx, table, c_t)
        picked = np.array([ranks[i - 1] for i in space.layer_ids])
        assert np.all(space.r_min <= picked) and np.all(picked <= space.r_max)


def test_limit_space_bound_complexities_on_conv_stack():
    # a quarter-complexity target with a ten percent margin must bound the
    # space by configurations near 35 and 15 percent of the full total
    net = vgg16_like()
    ctx = make_ctx(net)
    table = make_table(ctx)
    c_orig = ctx.model.c_orig
    budget = Budget(0.25 * c_orig, 0.10 * c_orig, 0.005 * 0.25 * c_orig)
    space = limit_space(ctx, table, budget)
    c_up, c_lo = bound_totals(ctx, space)
    assert abs(c_up / c_orig - 0.35) < 0.01
    assert abs(c_lo / c_orig - 0.15) < 0.01


def test_limit_space_saturates_at_range_ends():
    net = two_layer_toy()
    ctx = make_ctx(net)
    table = make_table(ctx)
    space = limit_space(ctx, table, Budget(60.0, 30.0, 0.0))
    assert space.r_max.tolist() == [4, 4]
    assert space.r_min.tolist() >= [1, 1]
    space = limit_space(ctx, table, Budget(20.0, 30.0, 0.0))
    assert space.r_min.tolist() == [1, 1]


def test_limit_space_explicit_step_caps_and_disables_coarsening():
    net = vgg16_like()
    ctx = make_ctx(net)
    table = make_table(ctx)
    c_orig = ctx.model.c_orig
    budget = Budget(0.25 * c_orig, 0.10 * c_orig, 0.005 * 0.25 * c_orig)
    space = limit_space(ctx, table, budget, step=5)
    assert space.divisor is None
    ranges = np.maximum(space.ranges, 1)
    assert np.array_equal(space.steps, np.minimum(5, ranges))
    with pytest.raises(ValidationError):
        limit_space(ctx, table, budget, step=0)


# ---------------------------------------------------------------------------
# min_offset

def test_min_offset_differential_target():
    # coefficients [10, 20], upper corner [4, 3]: C(R_max) = 100, so a
    # target of 80 leaves an offset budget of 20
    net = coefficient_pair()
    ctx = make_ctx(net)
    space = SearchSpace((1, 2), np.array([2, 1], dtype=np.int64),
                        np.array([4, 3], dtype=np.int64),
                        np.ones(2, dtype=np.int64))
    c_rmax, delta_ct = min_offset(ctx, space, Budget(80.0, 20.0, 2.0))
    assert c_rmax == 100
    assert delta_ct == 20.0


def test_min_offset_reconstruction_identity():
    rng = np.random.default_rng(5)
    net = random_sv_network(rng, n_layers=6)
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    budget = Budget(0.6 * ctx.model.c_orig, 0.1 * ctx.model.c_orig, 50.0)
    c_rmax, _ = min_offset(ctx, space, budget)
    coeffs = np.array([int(ctx.model.coefficients[i - 1])
                       for i in space.layer_ids], dtype=np.int64)
    for _ in range(200):
        off = rng.integers(0, space.ranges + 1)
        cfg = [int(r) for r in space.r_max - off]
        assert ctx.model.total(cfg) == c_rmax - int(off @ coeffs)


def test_min_offset_rejects_target_above_space():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = SearchSpace((1, 2), np.array([1, 1], dtype=np.int64),
                        np.array([2, 2], dtype=np.int64),
                        np.ones(2, dtype=np.int64))
    with pytest.raises(InfeasibleBudgetError, match="above"):
        min_offset(ctx, space, Budget(40.0, 4.0, 2.0))


# ---------------------------------------------------------------------------
# build_hierarchy

def test_hierarchy_twelve_layer_stack_groups_to_five():
    net = stack12()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space, group_size=3)
    assert hier.depth == 3
    assert hier.level_dims == (12, 6, 5)
    assert [v.coeff for v in hier.variables] == [10, 12, 14, 16, 18]
    assert [v.positions for v in hier.variables] == [
        (0,), (1,), (2,), (3, 4, 5), (6, 7, 8, 9, 10, 11)]
    text = hier.describe()
    assert "depth 3" in text and "G(3,4,5)" in text


def test_hierarchy_two_distinct_layers_stay_flat():
    net = coefficient_pair()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    assert hier.depth == 1
    assert hier.level_dims == (2,)
    assert all(len(v.positions) == 1 for v in hier.variables)


def test_hierarchy_fixpoint_leaves_no_equal_neighbors():
    net = stack12()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    for g in (2, 3, 4):
        hier = build_hierarchy(ctx, space, group_size=g)
        coeffs = [v.coeff for v in hier.variables]
        assert all(a != b for a, b in zip(coeffs, coeffs[1:]))
        covered = sorted(p for v in hier.variables for p in v.positions)
        assert covered == list(range(12))


def test_hierarchy_top_dimension_bound():
    net = stack12()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    with pytest.raises(ValidationError, match="top-level dimension"):
        build_hierarchy(ctx, space, group_size=3, max_top_dim=4)


def test_hierarchy_manual_groups():
    net = stack12()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space, group_size=3,
                           manual_groups=[(4, 6), (7, 9)])
    grouped = [v.positions for v in hier.variables if len(v.positions) > 1]
    assert (3, 4, 5) in grouped
    covered = sorted(p for v in hier.variables for p in v.positions)
    assert covered == list(range(12))


def test_hierarchy_manual_group_validation():
    net = stack12()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    cases = [
        ([(6, 4)], "reversed"),
        ([(11, 13)], "not a free layer"),
        ([(3, 4)], "mixes cost"),
        ([(7, 12)], "exceeds"),
        ([(7, 9), (9, 11)], "overlap"),
    ]
    for groups, match in cases:
        with pytest.raises(ValidationError, match=match):
            build_hierarchy(ctx, space, group_size=4, manual_groups=groups)


# ---------------------------------------------------------------------------
# extract_candidates against brute force

def check_extraction(ctx, space, budget, **kw):
    """Extract with an unlimited beam and compare with flat enumeration."""
    hier = build_hierarchy(ctx, space)
    cands = extract_candidates(ctx, space, hier, budget, beam=None, **kw)
    brute = enumerate_window(ctx.network, ctx.model, space, budget)
    assert config_set(cands) == set(brute)
    lo, hi = budget.window
    for i in range(len(cands)):
        cfg = tuple(int(r) for r in cands.configs[i])
        assert lo < cands.complexities[i] < hi
        assert cands.complexities[i] == ctx.model.total(cfg)
        assert cands.metrics[i] == pytest.approx(metric_of(ctx, cfg),
                                                 rel=1e-9, abs=1e-12)
    best_cfg, _ = exhaustive_best(ctx, brute)
    assert enc_model_select(cands) == best_cfg
    return cands


def test_extract_matches_brute_force_on_grouped_toy():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    cands = check_extraction(ctx, space, Budget(40.0, 8.0, 6.0))
    assert len(cands) == len(config_set(cands))


def test_extract_matches_brute_force_on_mixed_kinds():
    net = three_layer_mixed()
    oracle = AnalyticOracle(net)
    for kind in ("pca", "measured", "combined"):
        ctx = make_ctx(net, kind=kind, evaluator=oracle)
        space = full_box(net, ctx.model)
        c_t = 0.55 * ctx.model.c_orig
        check_extraction(ctx, space, Budget(c_t, 0.1 * ctx.model.c_orig,
                                            0.08 * c_t))


def test_extract_matches_brute_force_on_grouped_stack():
    net = stack12()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model, shrink=1)
    c_rmax, _ = bound_totals(ctx, space)
    cands = check_extraction(ctx, space, Budget(c_rmax - 95.0, 20.0, 12.0))
    hier = build_hierarchy(ctx, space)
    assert any(len(v.positions) == 6 for v in hier.variables)
    assert len(cands) > 0


def test_grouped_variable_range_spans_member_sum():
    # three equal-cost layers with differential range 4 collapse to one
    # variable ranging over total offsets 0..12
    layers = [sv_layer(i, f"fc{i}", np.sort(
        np.linspace(0.2, 3.0, 5))[::-1], I=5, O=7) for i in (1, 2, 3)]
    net = NetworkSpec(layers, name="triple")
    ctx = make_ctx(net)
    coeff = int(ctx.model.coefficients[0])
    assert np.all(ctx.model.coefficients == coeff)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    assert [v.positions for v in hier.variables] == [(0, 1, 2)]
    c_t = ctx.model.c_orig - 6 * coeff
    cands = extract_candidates(ctx, space, hier,
                               Budget(c_t, 7.0 * coeff, 6.5 * coeff),
                               beam=None)
    offsets = (ctx.model.c_orig - cands.complexities) // coeff
    assert set(offsets.tolist()) == set(range(13))
    assert len(cands) == 5 ** 3


def test_extract_beam_subsets_nest():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    budget = Budget(40.0, 8.0, 6.0)
    full = config_set(extract_candidates(ctx, space, hier, budget, beam=None))
    prev = set()
    for beam in (1, 2, 4):
        got = config_set(extract_candidates(ctx, space, hier, budget,
                                            beam=beam))
        assert got <= full
        assert prev <= got
        prev = got


def test_extract_beam_one_keeps_best_split_per_total():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    cands = extract_candidates(ctx, space, hier, Budget(40.0, 8.0, 6.0),
                               beam=1)
    assert len(cands) == cands.info["valid_tuples"]


def test_extract_zero_window_margin_is_empty():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    with pytest.raises(EmptyCandidateError, match="widen"):
        extract_candidates(ctx, space, hier, Budget(40.0, 8.0, 0.0))


def test_extract_window_between_lattice_totals_is_empty():
    # toy totals are multiples of 8; (33.5, 39.5) contains none
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    with pytest.raises(EmptyCandidateError, match="window"):
        extract_candidates(ctx, space, hier, Budget(36.5, 8.0, 3.0))


def test_extract_collapsed_space_keeps_single_configuration():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = SearchSpace((1, 2), np.array([3, 3], dtype=np.int64),
                        np.array([3, 3], dtype=np.int64),
                        np.ones(2, dtype=np.int64))
    hier = build_hierarchy(ctx, space)
    cands = extract_candidates(ctx, space, hier, Budget(47.5, 2.0, 1.0))
    assert config_set(cands) == {(3, 3)}
    with pytest.raises(EmptyCandidateError):
        extract_candidates(ctx, space, hier, Budget(45.0, 2.0, 1.0))


def test_extract_unreachable_group_total_is_empty():
    # member lattices stepping by [2, 3] never reach the grid total 4,
    # so a window selecting only that total has no expansion
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = SearchSpace((1, 2), np.array([2, 1], dtype=np.int64),
                        np.array([4, 4], dtype=np.int64),
                        np.array([2, 3], dtype=np.int64), divisor=None)
    hier = build_hierarchy(ctx, space)
    assert len(hier.variables) == 1
    with pytest.raises(EmptyCandidateError, match="split"):
        extract_candidates(ctx, space, hier, Budget(32.0, 10.0, 8.0))


def test_extract_explicit_step_overflow_raises():
    net = two_layer_toy()
    ctx = make_ctx(net)
    table = make_table(ctx)
    space = limit_space(ctx, table, Budget(40.0, 24.0, 23.0), step=1)
    hier = build_hierarchy(ctx, space)
    with pytest.raises(ValidationError, match="raise --step"):
        extract_candidates(ctx, space, hier, Budget(40.0, 24.0, 23.0),
                           max_candidates=3)


def test_extract_auto_coarsens_to_fit_budget():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    cands = extract_candidates(ctx, space, hier, Budget(40.0, 24.0, 23.0),
                               max_candidates=1)
    assert len(cands) == 1
    assert cands.info["divisor"] == 1
    assert cands.info["steps"] == [3, 3]
    lo, hi = Budget(40.0, 24.0, 23.0).window
    assert lo < cands.complexities[0] < hi


def test_extract_candidate_count_respects_cap():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    budget = Budget(40.0, 24.0, 23.0)
    full = extract_candidates(ctx, space, hier, budget, beam=None)
    n_tuples = full.info["valid_tuples"]
    capped = extract_candidates(ctx, space, hier, budget, beam=None,
                                max_candidates=n_tuples + 2)
    assert len(capped) == n_tuples + 2
    assert config_set(capped) <= config_set(full)


def test_extract_ordering_and_determinism():
    rng = np.random.default_rng(17)
    net = random_sv_network(rng, n_layers=5, r_lo=6, r_hi=12)
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    c_t = 0.6 * ctx.model.c_orig
    budget = Budget(c_t, 0.1 * ctx.model.c_orig, 0.01 * c_t)
    first = extract_candidates(ctx, space, hier, budget)
    second = extract_candidates(ctx, space, hier, budget)
    assert np.array_equal(first.configs, second.configs)
    assert np.array_equal(first.metrics, second.metrics)
    diffs = np.diff(first.metrics)
    assert np.all(diffs <= 1e-15)
    ties = np.nonzero(np.abs(diffs) == 0)[0]
    for i in ties:
        a = tuple(first.configs[i].tolist())
        b = tuple(first.configs[i + 1].tolist())
        assert a < b
    for key in ("c_rmax", "delta_ct", "window", "tuples", "valid_tuples",
                "divisor", "hierarchy", "beam", "steps"):
        assert key in first.info


def test_extract_strict_window_and_bounds_property():
    rng = np.random.default_rng(29)
    for trial in range(5):
        net = random_sv_network(rng, n_layers=int(rng.integers(4, 8)),
                                r_lo=8, r_hi=24)
        ctx = make_ctx(net)
        table = make_table(ctx)
        frac = float(rng.uniform(0.45, 0.85))
        budget = Budget(frac * ctx.model.c_orig, 0.1 * ctx.model.c_orig,
                        0.005 * frac * ctx.model.c_orig)
        space = limit_space(ctx, table, budget)
        hier = build_hierarchy(ctx, space)
        cands = extract_candidates(ctx, space, hier, budget)
        lo, hi = budget.window
        assert np.all(cands.complexities > lo)
        assert np.all(cands.complexities < hi)
        cols = [i - 1 for i in space.layer_ids]
        sub = cands.configs[:, cols]
        assert np.all(sub >= space.r_min[None, :])
        assert np.all(sub <= space.r_max[None, :])


# ---------------------------------------------------------------------------
# joint windows

def test_filter_candidates_applies_second_window():
    net = three_layer_mixed()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    c_t = 0.55 * ctx.model.c_orig
    cands = extract_candidates(ctx, space, hier,
                               Budget(c_t, 0.1 * ctx.model.c_orig, 0.1 * c_t),
                               beam=None)
    pmodel = ComplexityModel.from_network(net, "parameters")
    totals = cands.configs.astype(np.int64) @ pmodel.coefficients
    mid = float(np.median(totals))
    spread = float(totals.max() - totals.min())
    pbudget = Budget(mid, spread, spread / 4.0)
    kept = filter_candidates(cands, pmodel, pbudget)
    lo, hi = pbudget.window
    expect = (totals > lo) & (totals < hi)
    assert len(kept) == int(expect.sum())
    assert config_set(kept) == {tuple(int(r) for r in row)
                                for row in cands.configs[expect]}
    assert kept.info["secondary_mode"] == "parameters"
    assert kept.info["secondary_kept"] == len(kept)
    with pytest.raises(EmptyCandidateError, match="also satisfies"):
        filter_candidates(cands, pmodel, Budget(1.5, 1.0, 0.5))


# ---------------------------------------------------------------------------
# selection rules

def extract_toy_forty(ctx):
    net = ctx.network
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    return extract_candidates(ctx, space, hier, Budget(40.0, 8.0, 4.0),
                              beam=None)


def test_model_select_breaks_ties_lexicographically():
    # all four toy configurations at total 40 are candidates; (2, 3) and
    # (3, 2) share the best metric and the smaller vector wins
    ctx = make_ctx(two_layer_toy())
    cands = extract_toy_forty(ctx)
    assert config_set(cands) == {(1, 4), (2, 3), (3, 2), (4, 1)}
    rows = [tuple(int(r) for r in row) for row in cands.configs]
    assert rows[:2] == [(2, 3), (3, 2)]
    assert enc_model_select(cands) == (2, 3)


def test_model_select_single_candidate():
    net = two_layer_toy()
    ctx = make_ctx(net)
    space = SearchSpace((1, 2), np.array([2, 2], dtype=np.int64),
                        np.array([3, 3], dtype=np.int64),
                        np.ones(2, dtype=np.int64))
    hier = build_hierarchy(ctx, space)
    cands = extract_candidates(ctx, space, hier, Budget(47.0, 4.0, 2.0))
    assert len(cands) == 1
    assert enc_model_select(cands) == (3, 3)


def empty_candidates():
    return CandidateSet(configs=np.zeros((0, 2), dtype=np.int32),
                        complexities=np.zeros(0, dtype=np.int64),
                        metrics=np.zeros(0), metric_kind="pca")


def test_select_rejects_empty_sets():
    with pytest.raises(EmptyCandidateError):
        enc_model_select(empty_candidates())
    with pytest.raises(EmptyCandidateError):
        enc_inf_select(empty_candidates(), 5, TableEvaluator(),
                       two_layer_toy())


def test_inf_select_top_one_equals_model_select():
    ctx = make_ctx(two_layer_toy())
    cands = extract_toy_forty(ctx)
    evaluator = TableEvaluator(default=0.5)
    ranks, records = enc_inf_select(cands, 1, evaluator, ctx.network)
    assert ranks == enc_model_select(cands)
    assert len(records) == 1
    assert set(records[0]) == {"ranks", "metric", "complexity", "accuracy"}
    assert records[0]["ranks"] == (2, 3)
    assert records[0]["complexity"] == 40
    assert records[0]["accuracy"] == 0.5


def test_inf_select_follows_measured_accuracy():
    # the evaluator inverts the metric ranking of the top two candidates
    ctx = make_ctx(two_layer_toy())
    cands = extract_toy_forty(ctx)
    evaluator = TableEvaluator({(2, 3): 0.2, (3, 2): 0.9}, default=0.1)
    ranks, records = enc_inf_select(cands, 2, evaluator, ctx.network)
    assert ranks == (3, 2)
    assert [r["accuracy"] for r in records] == [0.2, 0.9]
    assert evaluator.calls == [(2, 3), (3, 2)]


def test_inf_select_accuracy_tie_falls_back_to_metric():
    ctx = make_ctx(two_layer_toy())
    cands = extract_toy_forty(ctx)
    ranks, records = enc_inf_select(cands, 4, TableEvaluator(default=0.3),
                                    ctx.network)
    assert ranks == (2, 3)
    assert len(records) == 4


def test_inf_select_clips_top_n_to_set_size():
    ctx = make_ctx(two_layer_toy())
    cands = extract_toy_forty(ctx)
    ranks, records = enc_inf_select(cands, 99, TableEvaluator(default=0.3),
                                    ctx.network)
    assert len(records) == len(cands)
    assert ranks == (2, 3)


def test_inf_select_parallel_matches_serial():
    net = three_layer_mixed()
    ctx = make_ctx(net)
    space = full_box(net, ctx.model)
    hier = build_hierarchy(ctx, space)
    c_t = 0.55 * ctx.model.c_orig
    cands = extract_candidates(ctx, space, hier,
                               Budget(c_t, 0.1 * ctx.model.c_orig, 0.1 * c_t),
                               beam=None)
    oracle = AnalyticOracle(net)
    serial = enc_inf_select(cands, 8, oracle, net)
    parallel = enc_inf_select(cands, 8, oracle, net, workers=3)
    assert serial[0] == parallel[0]
    assert serial[1] == parallel[1]


def test_inf_select_wraps_evaluator_failure():
    ctx = make_ctx(two_layer_toy())
    cands = extract_toy_forty(ctx)
    with pytest.raises(EvaluatorError, match="candidate 0"):
        enc_inf_select(cands, 2, FailingEvaluator(), ctx.network)
