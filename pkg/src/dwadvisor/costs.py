"""Analytical cost models, all expressed in disk-page reads.

View sizes follow Yao's formula (and Cardenas' approximation of it),
bitmap join indexes are priced by bitmap scan plus tuple fetch, B-trees on
materialized views by traversal plus a Cardenas page-hit estimate. The
:class:`CostEvaluator` combines them into per-query plan menus.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .catalog import ROW_ID_BYTES, AttributeStats, pages_of
from .errors import DomainError, InapplicablePlan

COUNT_WIDTH = 8
_YAO_CHUNK = 1 << 20


def ceil_log(base, x):
    """Smallest integer k >= 0 with base**k >= x (0 for x <= 1)."""
    if base <= 1:
        raise DomainError(f"logarithm base must exceed 1, got {base}")
    k, p = 0, 1
    while p < x:
        p *= base
        k += 1
    return k


def max_view_size(view, catalog):
    """Product of the cardinalities of the view's grouping attributes."""
    out = 1.0
    for ref in view.attributes:
        card = catalog.attribute(ref).cardinality
        if card <= 0:
            raise DomainError(f"{ref} has cardinality {card}")
        out *= card
    return out


def yao_rows(max_v, max_f, n):
    """Expected distinct groups when ``n`` of ``max_f`` tuples fall into ``max_v`` groups.

    Sampling is without replacement, each group owning ``max_f / max_v``
    tuples.
    """
    if max_v <= 0 or max_f <= 0:
        raise DomainError("max sizes must be positive")
    if n <= 0:
        return 0.0
    if max_v <= 1:
        return 1.0
    per_group = max_f / max_v
    if n >= max_f - per_group + 1:
        return float(min(max_v, n))
    log_prod = 0.0
    for start in range(1, n + 1, _YAO_CHUNK):
        i = np.arange(start, min(n, start + _YAO_CHUNK - 1) + 1, dtype=float)
        log_prod += float(np.sum(np.log1p(-per_group / (max_f - i + 1))))
    rows = max_v * -math.expm1(log_prod)
    return float(min(max(rows, 1.0), max_v, n))


def cardenas_rows(max_v, n):
    """Expected distinct groups among ``n`` uniform draws with replacement."""
    if max_v <= 0:
        raise DomainError("max_size(V) must be positive")
    if n <= 0:
        return 0.0
    if max_v <= 1:
        return 1.0
    rows = max_v * -math.expm1(n * math.log1p(-1.0 / max_v))
    return float(min(max(rows, 1.0), max_v, n))


def view_rows_yao(view, catalog):
    return yao_rows(max_view_size(view, catalog), catalog.max_fact_size(),
                    catalog.fact.row_count)


def view_rows_cardenas(view, catalog):
    return cardenas_rows(max_view_size(view, catalog), catalog.fact.row_count)


ESTIMATORS = {"yao": view_rows_yao, "cardenas": view_rows_cardenas}


def measure_width(measure, catalog):
    func, ref = measure
    if func == "COUNT" or ref == "*":
        return COUNT_WIDTH
    return catalog.attribute(ref).width_bytes


def view_size_bytes(view, catalog, rows=None):
    """Whole rows times the summed widths of grouping columns and measures."""
    if rows is None:
        rows = view.row_estimate
    width = sum(catalog.attribute(a).width_bytes for a in view.attributes)
    width += sum(measure_width(m, catalog) for m in view.measures)
    return int(math.ceil(rows)) * width


def bitmap_index_bytes(cardinality, fact_rows):
    """One bit per fact row for each distinct value."""
    return int(math.ceil(cardinality * fact_rows / 8))


def btree_index_bytes(view_rows, attrs):
    """One (key, row id) entry per view row and indexed attribute."""
    return int(math.ceil(view_rows)) * sum(a.width_bytes + ROW_ID_BYTES for a in attrs)


def _bitmap_traversal(d, card, fact_rows, page_size, order, via_btree, leaf_term):
    bitmap_pages = fact_rows / (8 * page_size)
    if not via_btree:
        return d * card * bitmap_pages
    descent = max(0.0, math.log(card, order) - 1) if card > 0 else 0.0
    leaves = card / (order - 1) if leaf_term else 0.0
    return descent + leaves + d * bitmap_pages


def _tuple_fetch(fraction, fact_rows, fact_pages):
    return fact_pages * -math.expm1(-fraction * fact_rows / fact_pages)


def bitmap_access_cost(d, attr, fact, catalog, via_btree=False, leaf_term=False):
    """Pages read to answer ``d`` predicates through a bitmap join index on ``attr``.

    ``leaf_term`` adds the worst-case leaf scan |A|/(m-1) of the B-tree
    variant; it is off by default.
    """
    if d < 1:
        raise DomainError("a bitmap access needs at least one predicate")
    card = attr.cardinality
    trav = _bitmap_traversal(d, card, fact.row_count, catalog.page_size_bytes,
                             catalog.btree_order, via_btree, leaf_term)
    return trav + _tuple_fetch(d / card, fact.row_count, fact.page_count)


def bitmap_maintenance(attr, dim, fact, catalog, xi=0):
    """Pages touched per fact insert and per dimension insert."""
    bitmaps = attr.cardinality * fact.row_count / (8 * catalog.page_size_bytes)
    return {"on_fact_insert": dim.page_count + bitmaps,
            "on_dim_insert": fact.page_count + (1 + xi) * bitmaps}


def btree_traversal(rows, attrs):
    """Descent plus leaf pages for each indexed attribute (ceil(..) - 1 clamped at 0)."""
    total = 0
    for a in attrs:
        total += ceil_log(a.blocking_factor, rows)
        total += max(0, math.ceil(a.selectivity * rows / a.blocking_factor) - 1)
    return total


def cardenas_pages(pages, n):
    """Distinct pages hit by ``n`` random row fetches over ``pages`` pages."""
    if pages <= 0 or n <= 0:
        return 0.0
    if pages == 1:
        return 1.0
    return pages * -math.expm1(n * math.log1p(-1.0 / pages))


def btree_lookup_cost(rows, view_pages, attrs):
    """Traversal and search pages for a B-tree lookup on a view."""
    n = rows
    for a in attrs:
        n *= a.selectivity
    return btree_traversal(rows, attrs), cardenas_pages(view_pages, n)


def btree_access_cost(q, view, indexed, catalog):
    """Pages read answering ``q`` from ``view`` through B-trees on ``indexed``."""
    usable = [a for a in q.restriction_attributes if a in set(indexed)]
    if not usable:
        raise InapplicablePlan(f"{q.id}: no restriction on {sorted(indexed)}")
    rows = int(math.ceil(view.row_estimate))
    if rows < 1:
        raise InapplicablePlan(f"{view.id} is empty")
    attrs = [catalog.attribute(a) for a in usable]
    trav, search = btree_lookup_cost(rows, pages_of(view.size_bytes, catalog), attrs)
    return trav + search


def btree_maintenance(view, indexed, catalog, updated=None):
    """Expected pages per maintenance event for B-trees on ``indexed``.

    ``updated`` is the set of attributes touched by updates; it defaults to
    ``indexed`` since an interrogation workload says nothing about updates.
    """
    rows = int(math.ceil(view.row_estimate))
    freqs = catalog.op_frequencies
    indexed = list(indexed)
    updated = set(indexed if updated is None else updated)
    total = 0.0
    for ref in indexed:
        a = catalog.attribute(ref)
        descent = ceil_log(a.blocking_factor, rows) if rows >= 1 else 0
        total += (freqs["ins"] + freqs["del"]) * descent
        if ref in updated:
            upd = descent + max(0, math.ceil(rows * a.selectivity / (2 * a.blocking_factor)) - 1)
            total += freqs["upd"] * upd
    return total


def index_stats(index, catalog):
    """Effective cardinality of a (possibly composite) index key."""
    card = 1
    for ref in index.attributes:
        card *= catalog.attribute(ref).cardinality
    if len(index.attributes) > 1:
        card = min(card, catalog.table(index.table).row_count)
    return AttributeStats(name="+".join(index.attributes), cardinality=max(card, 1),
                          width_bytes=1, selectivity=1.0 / max(card, 1), blocking_factor=2)


def bitmap_predicate_count(q, index, catalog):
    """Bitmaps scanned: predicates on the key times the values of unrestricted key columns."""
    d = sum(q.predicates_on(a) for a in index.attributes)
    if d == 0:
        return 0
    for a in index.attributes:
        if q.predicates_on(a) == 0:
            d *= catalog.attribute(a).cardinality
    return min(d, index_stats(index, catalog).cardinality)


def object_maintenance(obj, catalog, views_by_id=None):
    """Maintenance pages charged per refresh event for one candidate object."""
    kind = getattr(obj, "kind", "view")
    if kind == "view":
        return float(pages_of(obj.size_bytes, catalog))
    if kind == "bitmap_join":
        dim = catalog.table(obj.table)
        return bitmap_maintenance(index_stats(obj, catalog), dim, catalog.fact,
                                  catalog)["on_fact_insert"]
    view = views_by_id[obj.target_view]
    return btree_maintenance(view, obj.attributes, catalog)


@dataclass(frozen=True)
class PlanCost:
    query_id: str
    plan: str
    objects: tuple
    pages: float


class CostEvaluator:
    """Prices queries against configurations drawn from one candidate universe.

    Plan options are precomputed per query; ``query_cost`` then only filters
    them by the configuration. Results are memoized on the objects relevant
    to each query.
    """

    max_bitmap_subset = 10

    def __init__(self, catalog, workload, universe, via_btree=True, leaf_term=False):
        self.catalog = catalog
        self.workload = workload
        self.universe = universe
        self.via_btree = via_btree
        self.leaf_term = leaf_term
        self._memo = {}
        self._options = {q.id: self._plan_options(q) for q in workload.queries}

    def baseline(self, q):
        dims = {t.partition(".")[0] for pair in q.joins for t in pair}
        dims.discard(self.catalog.fact.name)
        return float(self.catalog.fact.page_count
                     + sum(self.catalog.table(d).page_count for d in sorted(dims)))

    def _plan_options(self, q):
        u, cat = self.universe, self.catalog
        qi = u.qv.row_index(q.id)
        scans, lookups, bitmaps = [], [], []
        restricted = set(q.restriction_attributes)
        for vj, v in enumerate(u.views):
            if not u.qv.bits[qi, vj]:
                continue
            scans.append((v.id, float(pages_of(v.size_bytes, cat))))
            for ij, idx in enumerate(u.indexes):
                if idx.kind != "btree_on_view" or not u.vi.bits[vj, ij]:
                    continue
                if not set(idx.attributes) <= restricted:
                    continue
                try:
                    pages = btree_access_cost(q, v, idx.attributes, cat)
                except InapplicablePlan:
                    continue
                lookups.append((v.id, idx.id, pages))
        for ij, idx in enumerate(u.indexes):
            if idx.kind != "bitmap_join" or not u.qi.bits[qi, ij]:
                continue
            d = bitmap_predicate_count(q, idx, cat)
            if d == 0:
                continue
            card = index_stats(idx, cat).cardinality
            trav = _bitmap_traversal(d, card, cat.fact.row_count, cat.page_size_bytes,
                                     cat.btree_order, self.via_btree, self.leaf_term)
            bitmaps.append((idx.id, frozenset(idx.attributes), trav, d / card))
        relevant = frozenset([s[0] for s in scans] + [l[1] for l in lookups]
                             + [b[0] for b in bitmaps])
        return {"baseline": self.baseline(q), "scans": scans, "lookups": lookups,
                "bitmaps": bitmaps, "relevant": relevant}

    def relevant_objects(self, q):
        return self._options[q.id]["relevant"]

    def query_cost(self, q, selected):
        opts = self._options[q.id]
        key = (q.id, opts["relevant"] & frozenset(selected))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        present = key[1]
        plans = [(opts["baseline"], 0, "baseline", ())]
        for vid, pages in opts["scans"]:
            if vid in present:
                plans.append((pages, 1, f"view_scan({vid})", (vid,)))
        for vid, iid, pages in opts["lookups"]:
            if vid in present and iid in present:
                plans.append((pages, 2, f"view_index({vid},{iid})", (vid, iid)))
        avail = [b for b in opts["bitmaps"] if b[0] in present]
        plans.extend(self._bitmap_plans(avail))
        pages, _, name, objs = min(plans)
        result = PlanCost(q.id, name, objs, pages)
        self._memo[key] = result
        return result

    def _bitmap_plans(self, avail):
        cat = self.catalog
        if not avail:
            return []
        if len(avail) > self.max_bitmap_subset:
            avail = sorted(avail, key=lambda b: b[3])[: self.max_bitmap_subset]
        plans = []
        for r in range(1, len(avail) + 1):
            for combo in itertools.combinations(avail, r):
                attrs = [b[1] for b in combo]
                if sum(len(a) for a in attrs) != len(frozenset().union(*attrs)):
                    continue  # overlapping keys would double-count selectivity
                frac = math.prod(b[3] for b in combo)
                pages = sum(b[2] for b in combo) + _tuple_fetch(
                    frac, cat.fact.row_count, cat.fact.page_count)
                ids = tuple(b[0] for b in combo)
                plans.append((pages, len(ids), f"bitmap_join({'+'.join(ids)})", ids))
        return plans

    def workload_cost(self, selected):
        return sum(self.query_cost(q, selected).pages for q in self.workload.queries)

    def plan_table(self, selected):
        return [self.query_cost(q, selected) for q in self.workload.queries]


def query_cost(q, selected, universe, catalog, **kw):
    """Cheapest plan for one query; builds a throwaway evaluator."""
    from .workload import Workload
    return CostEvaluator(catalog, Workload((q,), ""), universe, **kw).query_cost(q, selected)


def workload_cost(workload, selected, universe, catalog, **kw):
    return CostEvaluator(catalog, workload, universe, **kw).workload_cost(selected)
