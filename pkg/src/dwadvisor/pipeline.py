"""End-to-end advisor pipeline: workload in, candidate universe and configuration out."""

from dataclasses import dataclass, replace

from .clustering import DEFAULT_BLOWUP, cluster, fuse
from .costs import CostEvaluator
from .matrices import CandidateUniverse, build_query_attribute
from .mining import itemsets_to_indexes, mine_closed
from .selector import ObjectiveParams, select

DEFAULT_MINSUP = 0.01


@dataclass
class Candidates:
    workload: object
    catalog: object
    qa: object
    partition: object
    itemsets: list
    universe: CandidateUniverse

    @property
    def total_bytes(self):
        """S_VI: footprint of every candidate view and index."""
        return sum(o.size_bytes for o in self.universe.objects)


def candidate_views(workload, partition, catalog, blowup=DEFAULT_BLOWUP, estimator="yao"):
    views = []
    seen = set()
    for cls in partition.classes:
        for v in fuse([workload.query(q) for q in cls], catalog, blowup, estimator):
            key = (v.joins, v.attributes, v.measures)
            if key in seen:
                continue
            seen.add(key)
            views.append(replace(v, id=f"v{len(views) + 1}"))
    return views


def mining_context(qa, views):
    """Query rows plus one pseudo-transaction per view, over the QA columns."""
    cols = set(qa.column_labels)
    rows = [frozenset(c for c, b in zip(qa.column_labels, r) if b) for r in qa.bits]
    rows += [frozenset(a for a in v.attributes if a in cols) for v in views]
    return rows


def build_candidates(workload, catalog, rules=None, minsup=DEFAULT_MINSUP,
                     blowup=DEFAULT_BLOWUP, estimator="yao"):
    qa = build_query_attribute(workload, rules, catalog)
    partition = cluster(qa, {q.id: q.join_set for q in workload})
    views = candidate_views(workload, partition, catalog, blowup, estimator)
    itemsets = mine_closed(mining_context(qa, views), minsup)
    indexes = itemsets_to_indexes(itemsets, catalog, views)
    universe = CandidateUniverse.build(workload, views, indexes)
    return Candidates(workload, catalog, qa, partition, itemsets, universe)


def isolate(universe, workload, mode):
    """Sub-universe for the views-only or indexes-only comparison runs."""
    if mode == "joint":
        return universe
    if mode == "views":
        keep = [v.id for v in universe.views]
    elif mode == "indexes":
        keep = [i.id for i in universe.indexes if i.kind == "bitmap_join"]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return universe.restricted(workload, keep)


def resolve_budget(spec, total_bytes):
    """Budget from bytes (``"1000000"``) or a percentage of S_VI (``"35%"``)."""
    text = str(spec).strip()
    if text.endswith("%"):
        pct = float(text[:-1])
        if pct < 0:
            raise ValueError("budget percentage must be >= 0")
        return int(total_bytes * pct / 100)
    value = float(text)
    if value < 0 or value != int(value):
        raise ValueError(f"budget must be a non-negative whole number of bytes, got {spec!r}")
    return int(value)


def advise(cands, budget, params=None, mode="joint", via_btree=True):
    params = params or ObjectiveParams(refresh_ratio=cands.catalog.refresh_ratio)
    universe = isolate(cands.universe, cands.workload, mode)
    ev = CostEvaluator(cands.catalog, cands.workload, universe, via_btree=via_btree)
    config = select(universe, budget, params, cands.workload, cands.catalog, ev)
    return config, ev, universe


def sweep(cands, percents, params=None, modes=("joint", "views", "indexes")):
    """Workload cost per budget point and mode, budgets as % of S_VI."""
    rows = []
    total = cands.total_bytes
    for pct in percents:
        budget = resolve_budget(f"{pct}%", total)
        row = {"percent": pct, "budget_bytes": budget}
        for mode in modes:
            config, _, _ = advise(cands, budget, params, mode)
            row[mode] = config.cost_after
            row[f"{mode}_bytes"] = config.occupied_bytes
        rows.append(row)
    return rows
