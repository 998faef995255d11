"""Candidate search inside a complexity window, and the selection rules.

Starting from the equal-metric map, the search bounds each free layer's
rank between the configurations at C_t +/- delta_s, switches to offsets
below the upper bound (so the window constraint becomes a small weighted
sum), groups consecutive layers with equal cost coefficients into joint
total-offset variables, and enumerates the top-level lattice inside the
strict window

    C_t - delta_m < C(R) < C_t + delta_m.

Because grouped layers share one coefficient, every way of splitting a
group total across its members has the same complexity, so window
membership is decided entirely at the top level.  Group totals are then
expanded into member assignments, keeping the best splits per total as
ranked by the partial metric product (the beam).  enc_model_select takes
the metric argmax over the candidates; enc_inf_select re-scores the top N
with a forward-pass evaluator and takes the accuracy argmax.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyCandidateError, EvaluatorError,
                     InfeasibleBudgetError, ValidationError)
from .kernels import count_window, fill_window
from .mapping import map_c_to_r

DEFAULT_STEP_DIVISOR = 32
DEFAULT_BEAM = 64
DEFAULT_GROUP_SIZE = 4
# wide enough for a 13-conv stack whose equal-cost runs merge to 9 variables
DEFAULT_MAX_TOP_DIM = 12
DEFAULT_MAX_CANDIDATES = 2_000_000
GROUP_BOX_LIMIT = 5_000_000
# analytic pre-coarsening kicks in when the normal-approximation estimate
# of the window count exceeds this multiple of max_candidates
_ESTIMATE_HEADROOM = 64


@dataclass(eq=False)
class SearchSpace:
    """Per-free-layer rank bounds [r_min, r_max] and lattice steps."""

    layer_ids: tuple           # 1-based indices of free layers, in order
    r_min: np.ndarray          # int64
    r_max: np.ndarray          # int64
    steps: np.ndarray          # int64, lattice step per layer
    divisor: int | None = DEFAULT_STEP_DIVISOR   # None = user-fixed steps

    def __post_init__(self):
        if not (len(self.layer_ids) == self.r_min.size == self.r_max.size
                == self.steps.size):
            raise ValidationError("search space arrays disagree in length")
        if np.any(self.r_min < 1) or np.any(self.r_min > self.r_max):
            raise ValidationError("search space requires 1 <= r_min <= r_max")
        if np.any(self.steps < 1):
            raise ValidationError("lattice steps must be positive")

    @property
    def ranges(self):
        return self.r_max - self.r_min


def steps_for(ranges, divisor):
    """Default lattice step: the range split into about `divisor` pieces."""
    ranges = np.asarray(ranges, dtype=np.int64)
    return np.maximum(1, -(-ranges // divisor))


def limit_space(ctx, table, budget, step=None, divisor=DEFAULT_STEP_DIVISOR):
    """Bound the search space with the equal-metric map at C_t +/- delta_s.

    The upper bound rounds up and the lower bound rounds down; targets
    beyond the achievable range saturate at the endpoints.  An explicit
    `step` fixes the lattice step for every layer (capped by its range)
    and disables automatic coarsening.
    """
    network = ctx.network
    upper = map_c_to_r(ctx, table, budget.c_t + budget.delta_s, clamp=True)
    lower = map_c_to_r(ctx, table, budget.c_t - budget.delta_s, clamp=True)
    free = network.compressible
    r_max = np.empty(len(free), dtype=np.int64)
    r_min = np.empty(len(free), dtype=np.int64)
    for j, idx in enumerate(free):
        cap = int(ctx.model.r_max[idx - 1])
        r_max[j] = max(1, min(cap, int(np.ceil(upper[idx - 1] - 1e-9))))
        r_min[j] = max(1, int(np.floor(lower[idx - 1] + 1e-9)))
        r_min[j] = min(r_min[j], r_max[j])
    ranges = r_max - r_min
    if step is not None:
        if step < 1:
            raise ValidationError(f"step must be positive, got {step}")
        steps = np.maximum(1, np.minimum(step, np.maximum(ranges, 1)))
        return SearchSpace(free, r_min, r_max, steps.astype(np.int64),
                           divisor=None)
    return SearchSpace(free, r_min, r_max, steps_for(ranges, divisor),
                       divisor=divisor)


def min_offset(ctx, space, budget):
    """Switch to rank offsets below the upper bound.

    Returns (c_rmax, delta_ct): the total at the upper-bound configuration
    and the offset budget delta_ct = C(R_max) - C_t that offset sums must
    match within delta_m.
    """
    network = ctx.network
    cfg = list(network.full_ranks())
    for j, idx in enumerate(space.layer_ids):
        cfg[idx - 1] = int(space.r_max[j])
    c_rmax = ctx.model.total(cfg)
    delta_ct = c_rmax - budget.c_t
    if delta_ct < -budget.delta_m:
        raise InfeasibleBudgetError(
            f"target {budget.c_t:.6g} lies above the bounded space "
            f"maximum {c_rmax}")
    return c_rmax, delta_ct


@dataclass(eq=False)
class HierVariable:
    """One top-level search variable: a single layer or a grouped run."""

    positions: tuple           # indices into space.layer_ids
    coeff: int                 # shared complexity coefficient


@dataclass(eq=False)
class Hierarchy:
    """Grouping of free layers into top-level variables."""

    variables: list
    depth: int
    level_dims: tuple

    def describe(self):
        parts = []
        for var in self.variables:
            if len(var.positions) == 1:
                parts.append(f"L{var.positions[0]}")
            else:
                parts.append(f"G({','.join(str(p) for p in var.positions)})")
        return (f"depth {self.depth}, "
                f"dims {'->'.join(map(str, self.level_dims))}, "
                f"top [{' '.join(parts)}]")


def _merge_pass(variables, group_size):
    merged, changed, i = [], False, 0
    while i < len(variables):
        j = i + 1
        while (j < len(variables) and variables[j][1] == variables[i][1]
               and j - i < group_size):
            j += 1
        if j - i >= 2:
            positions = tuple(p for var in variables[i:j] for p in var[0])
            merged.append((positions, variables[i][1]))
            changed = True
        else:
            merged.append(variables[i])
        i = j
    return merged, changed


def build_hierarchy(ctx, space, group_size=DEFAULT_GROUP_SIZE,
                    max_top_dim=DEFAULT_MAX_TOP_DIM, manual_groups=None):
    """Group consecutive equal-coefficient layers, bottom up to a fixpoint.

    Each pass merges runs of at most `group_size` adjacent variables with
    identical cost coefficients; passes repeat until nothing merges.
    `manual_groups` (list of (first, last) 1-based layer index pairs)
    replaces the first pass with an explicit bottom grouping.
    """
    coeffs = [int(ctx.model.coefficients[idx - 1]) for idx in space.layer_ids]
    variables = [((p,), coeffs[p]) for p in range(len(space.layer_ids))]
    level_dims = [len(variables)]

    if manual_groups:
        id_to_pos = {idx: p for p, idx in enumerate(space.layer_ids)}
        starts = {}
        for first, last in manual_groups:
            if last < first:
                raise ValidationError(f"group {first}-{last} is reversed")
            members = []
            for idx in range(first, last + 1):
                if idx not in id_to_pos:
                    raise ValidationError(f"group {first}-{last}: layer {idx} "
                                          f"is not a free layer")
                members.append(id_to_pos[idx])
            if members != list(range(members[0], members[-1] + 1)):
                raise ValidationError(f"group {first}-{last} is not contiguous")
            cs = {coeffs[p] for p in members}
            if len(cs) != 1:
                raise ValidationError(f"group {first}-{last} mixes cost "
                                      f"coefficients {sorted(cs)}")
            if len(members) > group_size:
                raise ValidationError(f"group {first}-{last} exceeds the "
                                      f"group size limit {group_size}")
            if members[0] in starts:
                raise ValidationError("manual groups overlap")
            starts[members[0]] = (tuple(members), coeffs[members[0]])
        covered = {p for m, _ in starts.values() for p in m}
        variables, p = [], 0
        while p < len(space.layer_ids):
            if p in starts:
                variables.append(starts[p])
                p = starts[p][0][-1] + 1
            elif p in covered:
                raise ValidationError("manual groups overlap")
            else:
                variables.append(((p,), coeffs[p]))
                p += 1
        level_dims.append(len(variables))

    while True:
        variables, changed = _merge_pass(variables, group_size)
        if not changed:
            break
        level_dims.append(len(variables))

    if len(variables) > max_top_dim:
        raise ValidationError(
            f"top-level dimension {len(variables)} exceeds the bound "
            f"{max_top_dim}; raise --max-dims, enlarge --group-size, or "
            f"supply --group")
    return Hierarchy(variables=[HierVariable(positions=p, coeff=c)
                                for p, c in variables],
                     depth=len(level_dims), level_dims=tuple(level_dims))


@dataclass(eq=False)
class CandidateSet:
    """Extracted configurations with their complexities and metric values.

    Rows are ordered by decreasing metric, ties broken by lexicographically
    smaller configuration, so row 0 is the enc-model selection.
    """

    configs: np.ndarray        # (n, L) int32 full rank configurations
    complexities: np.ndarray   # (n,) int64
    metrics: np.ndarray        # (n,) float64
    metric_kind: str
    info: dict = field(default_factory=dict)

    def __len__(self):
        return self.configs.shape[0]


@dataclass(eq=False)
class GroupBucket:
    """One group's member-lattice rows bucketed by total offset.

    rows within a bucket are sorted by decreasing partial score; start < 0
    marks grid totals with no reachable member assignment.
    """

    tg: int                    # group lattice step (min member step)
    rows: np.ndarray           # (m, group size) member lattice indices
    scores: np.ndarray         # (m,) partial proxy scores
    start: np.ndarray          # per grid code, first row of its bucket
    length: np.ndarray         # per grid code, bucket size (beam-trimmed)


def _layer_log_tables(ctx, space):
    """Per free layer, per curve family: log y at each lattice offset."""
    tables = {}
    for fam, curves in (("pca", ctx.pca), ("measured", ctx.measured)):
        if curves is None:
            tables[fam] = None
            continue
        per_layer = []
        for j, idx in enumerate(space.layer_ids):
            count = int(space.ranges[j] // space.steps[j]) + 1
            ranks = space.r_max[j] - np.arange(count) * space.steps[j]
            vals = curves[idx].value(ranks.astype(np.float64))
            with np.errstate(divide="ignore"):
                per_layer.append(np.log(vals))
        tables[fam] = per_layer
    return tables


def _proxy_tables(ctx, tables):
    """Log proxy used to rank partial assignments (product of families)."""
    sets = []
    if ctx.kind in ("pca", "combined"):
        sets.append(tables["pca"])
    if ctx.kind in ("measured", "combined"):
        sets.append(tables["measured"])
    nlayers = len(sets[0])
    return [sum(fam[j] for fam in sets) for j in range(nlayers)]


def _group_buckets(var, space, proxy, beam, impl=None):
    """Enumerate one group's member lattice and bucket rows by total offset."""
    pos = list(var.positions)
    steps = space.steps[pos]
    counts = (space.ranges[pos] // steps) + 1
    tg = int(steps.min())
    t_max = int(((counts - 1) * steps).sum())
    grid_count = t_max // tg + 1
    idx, sums = fill_window(counts, steps, 0, t_max, impl=impl)
    score = np.zeros(idx.shape[0])
    for j, p in enumerate(pos):
        score += proxy[p][idx[:, j]]
    # order by total, then score descending, then member offsets ascending
    keys = tuple(idx[:, j] for j in range(len(pos) - 1, -1, -1))
    order = np.lexsort(keys + (-score, sums))
    idx, sums, score = idx[order], sums[order], score[order]

    start = np.full(grid_count, -1, dtype=np.int64)
    length = np.zeros(grid_count, dtype=np.int64)
    totals, first, per = np.unique(sums, return_index=True, return_counts=True)
    on_grid = totals % tg == 0
    codes = totals[on_grid] // tg
    lens = per[on_grid]
    if beam is not None:
        lens = np.minimum(lens, beam)
    start[codes] = first[on_grid]
    length[codes] = lens
    return GroupBucket(tg=tg, rows=idx, scores=score, start=start,
                       length=length)


def _best_first(scores_lists, limit, skip_first):
    """Yield index tuples over score-sorted lists in best-total-first order."""
    dims = len(scores_lists)
    first = (0,) * dims

    def total(state):
        return sum(scores_lists[g][state[g]] for g in range(dims))

    heap = [(-total(first), first)]
    seen = {first}
    emitted = 0
    cap = None if limit is None else limit + int(skip_first)
    while heap and (cap is None or emitted < cap):
        _, state = heapq.heappop(heap)
        if not (skip_first and emitted == 0):
            yield state
        emitted += 1
        for g in range(dims):
            if state[g] + 1 < len(scores_lists[g]):
                succ = state[:g] + (state[g] + 1,) + state[g + 1:]
                if succ not in seen:
                    seen.add(succ)
                    heapq.heappush(heap, (-total(succ), succ))


def _expand_single_group(idx_top, tuple_score, bucket, col, beam, budget_left):
    """Vectorized expansion when exactly one group exists: for each tuple,
    emit bucket rows 1..len-1 (best tuples first) until the budget runs out."""
    lens = bucket.length[idx_top[:, col]]
    if beam is not None:
        lens = np.minimum(lens, beam)
    order = np.argsort(-tuple_score, kind="stable")
    extra = (lens[order] - 1).astype(np.int64)
    cum = np.cumsum(extra)
    total = int(cum[-1]) if extra.size else 0
    take = min(total, budget_left)
    if take <= 0:
        return None
    last = int(np.searchsorted(cum, take, side="left"))
    cnt = extra[:last + 1].copy()
    cnt[last] = take - (int(cum[last - 1]) if last > 0 else 0)
    sel = order[:last + 1]
    keep = cnt > 0
    sel, cnt = sel[keep], cnt[keep]
    tuple_idx = np.repeat(sel, cnt)
    starts = np.cumsum(cnt) - cnt
    offs = np.arange(take, dtype=np.int64) - np.repeat(starts, cnt) + 1
    return tuple_idx, offs[:, None]


def extract_candidates(ctx, space, hierarchy, budget, beam=DEFAULT_BEAM,
                       max_candidates=DEFAULT_MAX_CANDIDATES, impl=None):
    """Enumerate the strict complexity window and expand group totals.

    Returns a CandidateSet ordered by decreasing metric.  When the default
    lattice produces more top-level tuples than `max_candidates` (or a
    group member lattice grows too large), steps are coarsened by halving
    the step divisor; user-fixed steps are never altered.
    """
    network, model = ctx.network, ctx.model
    nfree = len(space.layer_ids)
    c_rmax, delta_ct = min_offset(ctx, space, budget)
    lo = math.floor(delta_ct - budget.delta_m) + 1
    hi = math.ceil(delta_ct + budget.delta_m) - 1
    if hi < lo:
        raise EmptyCandidateError(
            f"window (+-{budget.delta_m:.6g}) around offset {delta_ct:.6g} "
            f"contains no integer totals; widen --window-margin")

    def lattice(steps):
        counts = (space.ranges // steps) + 1
        units, top_counts, boxes = [], [], [0]
        for var in hierarchy.variables:
            pos = list(var.positions)
            if len(pos) == 1:
                units.append(var.coeff * int(steps[pos[0]]))
                top_counts.append(int(counts[pos[0]]))
            else:
                tg = int(steps[pos].min())
                t_max = int(((counts[pos] - 1) * steps[pos]).sum())
                units.append(var.coeff * tg)
                top_counts.append(t_max // tg + 1)
                boxes.append(int(np.prod(counts[pos].astype(np.float64))))
        return (np.asarray(top_counts, dtype=np.int64),
                np.asarray(units, dtype=np.int64), max(boxes))

    def estimate(steps):
        """Normal-approximation window count; avoids exact-counting
        lattices that are orders of magnitude past the budget."""
        top_counts, top_units, _ = lattice(steps)
        n = top_counts.astype(np.float64)
        u = top_units.astype(np.float64)
        log_box = float(np.log(n).sum())
        mean = float((u * (n - 1)).sum()) / 2.0
        sigma = math.sqrt(float((u * u * (n * n - 1)).sum()) / 12.0)
        if sigma == 0.0:
            inside = 1.0 if lo <= mean <= hi else 1e-300
        else:
            za = (lo - 0.5 - mean) / (sigma * math.sqrt(2.0))
            zb = (hi + 0.5 - mean) / (sigma * math.sqrt(2.0))
            inside = max(0.5 * (math.erf(zb) - math.erf(za)), 1e-300)
        return math.exp(min(log_box + math.log(inside), 700.0))

    divisor = space.divisor
    steps = space.steps
    if divisor is not None:
        while divisor > 1 and \
                estimate(steps) > _ESTIMATE_HEADROOM * max_candidates:
            divisor //= 2
            steps = steps_for(space.ranges, divisor)
    while True:
        top_counts, top_units, max_box = lattice(steps)
        n_top = count_window(top_counts, top_units, lo, hi, impl=impl)
        if n_top <= max_candidates and max_box <= GROUP_BOX_LIMIT:
            break
        if divisor is None:
            raise ValidationError(
                f"window holds {n_top} tuples (largest group box {max_box}); "
                f"raise --step or --max-candidates")
        if divisor <= 1:
            break
        divisor //= 2
        steps = steps_for(space.ranges, divisor)
    if n_top == 0:
        raise EmptyCandidateError(
            f"no configurations inside the +-{budget.delta_m:.6g} window "
            f"around {budget.c_t:.6g}; widen --window-margin or lower --step")
    if n_top > max_candidates:
        raise ValidationError(f"window holds {n_top} tuples even at the "
                              f"coarsest lattice; raise --max-candidates")

    eff_space = SearchSpace(space.layer_ids, space.r_min.copy(),
                            space.r_max.copy(), steps, divisor=divisor)
    tables = _layer_log_tables(ctx, eff_space)
    proxy = _proxy_tables(ctx, tables)

    idx_top, _ = fill_window(top_counts, top_units, lo, hi, impl=impl)

    groups = [(j, var) for j, var in enumerate(hierarchy.variables)
              if len(var.positions) > 1]
    singles = [(j, var.positions[0]) for j, var in
               enumerate(hierarchy.variables) if len(var.positions) == 1]
    buckets = {j: _group_buckets(var, eff_space, proxy, beam, impl=impl)
               for j, var in groups}

    # best attainable proxy score per tuple; tuples whose group total is
    # unreachable on the member lattice are dropped
    tuple_score = np.zeros(idx_top.shape[0])
    valid = np.ones(idx_top.shape[0], dtype=bool)
    for j, p in singles:
        tuple_score += proxy[p][idx_top[:, j]]
    for j, var in groups:
        b = buckets[j]
        codes = idx_top[:, j]
        ok = b.start[codes] >= 0
        valid &= ok
        safe = np.where(ok, b.start[codes], 0)
        tuple_score += np.where(ok, b.scores[safe], 0.0)
    idx_top = idx_top[valid]
    tuple_score = tuple_score[valid]
    n_valid = idx_top.shape[0]
    if n_valid == 0:
        raise EmptyCandidateError(
            "no group split matches any total inside the window; widen "
            "--window-margin or lower --step")

    # emission: per-tuple best split first, then further splits best-first
    # per tuple (best tuples first) until the candidate budget is spent
    n_groups = len(groups)
    blocks = [(np.arange(n_valid), np.zeros((n_valid, n_groups),
                                            dtype=np.int64))]
    n_emit = n_valid
    if groups and (beam is None or beam > 1):
        budget_left = max_candidates - n_valid
        if budget_left > 0 and n_groups == 1:
            extra = _expand_single_group(idx_top, tuple_score,
                                         buckets[groups[0][0]], groups[0][0],
                                         beam, budget_left)
            if extra is not None:
                blocks.append(extra)
                n_emit += extra[0].size
        elif budget_left > 0:
            order = np.argsort(-tuple_score, kind="stable")
            limit = None if beam is None else beam - 1
            extra_tuple, extra_offs = [], []
            for ti in order:
                if budget_left <= 0:
                    break
                lists = []
                for j, var in groups:
                    b = buckets[j]
                    code = idx_top[ti, j]
                    s, ln = int(b.start[code]), int(b.length[code])
                    lists.append(b.scores[s:s + ln])
                for state in _best_first(lists, limit, skip_first=True):
                    extra_tuple.append(ti)
                    extra_offs.append(state)
                    budget_left -= 1
                    if budget_left <= 0:
                        break
            if extra_tuple:
                blocks.append((np.asarray(extra_tuple, dtype=np.int64),
                               np.asarray(extra_offs, dtype=np.int64)))
                n_emit += len(extra_tuple)

    # assemble per-layer lattice offsets for every emitted candidate
    k_mat = np.empty((n_emit, nfree), dtype=np.int64)
    row = 0
    for tuples, offs in blocks:
        block = slice(row, row + tuples.size)
        for j, p in singles:
            k_mat[block, p] = idx_top[tuples, j]
        for gi, (j, var) in enumerate(groups):
            b = buckets[j]
            chosen = b.start[idx_top[tuples, j]] + offs[:, gi]
            member_rows = b.rows[chosen]
            for mj, p in enumerate(var.positions):
                k_mat[block, p] = member_rows[:, mj]
        row += tuples.size

    offsets = k_mat * steps[None, :]
    free_cols = np.asarray([idx - 1 for idx in space.layer_ids])
    coeffs_free = model.coefficients[free_cols]
    offset_cost = offsets @ coeffs_free
    if not np.all((lo <= offset_cost) & (offset_cost <= hi)):
        raise ValidationError("window re-check failed after expansion")
    complexities = c_rmax - offset_cost

    configs = np.tile(np.asarray(network.full_ranks(), dtype=np.int32),
                      (n_emit, 1))
    configs[:, free_cols] = (eff_space.r_max[None, :] - offsets).astype(np.int32)

    logs = {}
    for fam in ("pca", "measured"):
        if tables[fam] is None:
            continue
        tot = np.zeros(n_emit)
        for p in range(nfree):
            tot += tables[fam][p][k_mat[:, p]]
        logs[fam] = tot
    if ctx.kind == "pca":
        metrics = np.exp(logs["pca"])
    elif ctx.kind == "measured":
        metrics = np.exp(logs["measured"])
    else:
        ratio = complexities.astype(np.float64) / model.c_orig
        metrics = np.exp(logs["pca"]) * ratio + np.exp(logs["measured"])

    keys = tuple(configs[:, c] for c in range(network.L - 1, -1, -1))
    order = np.lexsort(keys + (-metrics,))
    info = {"c_rmax": int(c_rmax), "delta_ct": float(delta_ct),
            "window": (int(lo), int(hi)), "tuples": int(n_top),
            "valid_tuples": int(n_valid), "divisor": divisor,
            "hierarchy": hierarchy.describe(), "beam": beam,
            "steps": steps.tolist()}
    return CandidateSet(configs=configs[order],
                        complexities=complexities[order],
                        metrics=metrics[order], metric_kind=ctx.kind,
                        info=info)


def filter_candidates(candidates, model, budget):
    """Keep candidates inside a second strict window (joint constraints)."""
    totals = candidates.configs.astype(np.int64) @ model.coefficients
    lo, hi = budget.window
    keep = (totals > lo) & (totals < hi)
    if not np.any(keep):
        raise EmptyCandidateError(
            f"no candidate also satisfies the {model.mode} window around "
            f"{budget.c_t:.6g}; widen --window-margin")
    info = dict(candidates.info)
    info["secondary_mode"] = model.mode
    info["secondary_kept"] = int(keep.sum())
    return CandidateSet(configs=candidates.configs[keep],
                        complexities=candidates.complexities[keep],
                        metrics=candidates.metrics[keep],
                        metric_kind=candidates.metric_kind, info=info)


def enc_model_select(candidates):
    """Metric argmax; ties resolved to the lexicographically smallest."""
    if len(candidates) == 0:
        raise EmptyCandidateError("no candidates to select from")
    return tuple(int(r) for r in candidates.configs[0])


def enc_inf_select(candidates, top_n, evaluator, network, workers=None):
    """Re-score the top N candidates with an evaluator; accuracy argmax.

    Returns (ranks, records): records hold rank tuples, metric values, and
    measured accuracies for the evaluated candidates, in candidate order.
    """
    if len(candidates) == 0:
        raise EmptyCandidateError("no candidates to select from")
    n = min(top_n, len(candidates))
    rows = [tuple(int(r) for r in candidates.configs[i]) for i in range(n)]

    def score(i):
        try:
            return float(evaluator.evaluate(network, rows[i]))
        except Exception as exc:
            raise EvaluatorError(f"evaluator failed on candidate {i} "
                                 f"{rows[i]}: {exc}")

    if workers and workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accs = list(pool.map(score, range(n)))
    else:
        accs = [score(i) for i in range(n)]

    best = 0
    for i in range(1, n):
        key = (accs[i], float(candidates.metrics[i]))
        best_key = (accs[best], float(candidates.metrics[best]))
        if key > best_key or (key == best_key and rows[i] < rows[best]):
            best = i
    records = [{"ranks": rows[i], "metric": float(candidates.metrics[i]),
                "complexity": int(candidates.complexities[i]),
                "accuracy": accs[i]} for i in range(n)]
    return rows[best], records
