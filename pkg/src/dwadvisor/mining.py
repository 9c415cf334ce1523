"""Closed frequent itemset mining over the query-attribute context.

The miner follows the Close strategy: frequent minimal generators are found
level by level and each contributes its Galois closure (the attributes shared
by every query containing it). Closed attribute sets then become candidate
indexes.
"""

import math
from dataclasses import dataclass

from .costs import bitmap_index_bytes, btree_index_bytes, index_stats


@dataclass(frozen=True)
class ClosedItemset:
    items: tuple
    support: int


@dataclass(frozen=True)
class CandidateIndex:
    id: str
    table: str
    attributes: tuple
    kind: str = "bitmap_join"
    target_view: str | None = None
    size_bytes: int = 0

    def __post_init__(self):
        if self.kind not in ("bitmap_join", "btree_on_view"):
            raise ValueError(f"unknown index kind {self.kind!r}")
        if not self.attributes:
            raise ValueError("an index needs at least one attribute")
        if self.kind == "btree_on_view" and self.target_view is None:
            raise ValueError("a view index needs a target view")


def context_rows(context):
    """Normalize a BinaryMatrix or an iterable of item collections to frozensets."""
    if hasattr(context, "bits"):
        cols = context.column_labels
        return [frozenset(cols[j] for j, b in enumerate(row) if b) for row in context.bits]
    return [frozenset(row) for row in context]


def support_threshold(minsup, n_objects):
    """Absolute support: ceil(minsup * objects), at least 1."""
    # tolerate binary fractions such as 0.34 * 100 = 34.000000000000004
    return max(1, math.ceil(minsup * n_objects - 1e-9))


def _closure(gen, rows):
    hits = [r for r in rows if gen <= r]
    if not hits:
        return 0, frozenset()
    return len(hits), frozenset.intersection(*hits)


def close_levels(context, minsup):
    """Frequent generators per level, as ``[{generator: (support, closure)}]``."""
    rows = context_rows(context)
    if not rows:
        return []
    threshold = support_threshold(minsup, len(rows))
    items = sorted(frozenset().union(*rows))
    candidates = [frozenset([i]) for i in items]
    levels = []
    while candidates:
        level = {}
        for gen in candidates:
            support, closure = _closure(gen, rows)
            if support >= threshold:
                level[gen] = (support, closure)
        if not level:
            break
        levels.append(level)
        candidates = _next_candidates(level)
    return levels


def _next_candidates(level):
    gens = sorted(tuple(sorted(g)) for g in level)
    out = []
    for a in range(len(gens)):
        for b in range(a + 1, len(gens)):
            if gens[a][:-1] != gens[b][:-1]:
                break
            cand = frozenset(gens[a] + gens[b][-1:])
            subsets = [cand - {x} for x in cand]
            if any(s not in level for s in subsets):
                continue
            # a candidate inside a subset's closure is not a minimal generator
            if any(cand <= level[s][1] for s in subsets):
                continue
            out.append(cand)
    return out


def mine_closed(context, minsup=0.01):
    """Closed itemsets with support >= ceil(minsup * objects).

    Sorted by descending support, then ascending item tuple.
    """
    closed = {}
    for level in close_levels(context, minsup):
        for support, closure in level.values():
            closed[closure] = support
    result = [ClosedItemset(tuple(sorted(c)), s) for c, s in closed.items() if c]
    result.sort(key=lambda x: (-x.support, x.items))
    return result


def itemsets_to_indexes(itemsets, catalog, views=(), start=1):
    """Turn closed attribute sets into candidate indexes.

    Key attributes are dropped. Dimension attributes grouped by table become
    bitmap join indexes; any group contained in a view's attribute set also
    becomes a B-tree index on that view.
    """
    seen = set()
    out = []

    def add(table, attrs, kind, target, size):
        key = (kind, table, attrs, target)
        if key in seen:
            return
        seen.add(key)
        out.append(CandidateIndex(f"i{start + len(out)}", table, attrs, kind, target, size))

    for itemset in itemsets:
        groups = {}
        for ref in itemset.items:
            if catalog.is_key(ref):
                continue
            groups.setdefault(ref.partition(".")[0], []).append(ref)
        for table in sorted(groups):
            attrs = tuple(sorted(groups[table]))
            if not catalog.is_fact(table):
                probe = CandidateIndex("_", table, attrs)
                size = bitmap_index_bytes(index_stats(probe, catalog).cardinality,
                                          catalog.fact.row_count)
                add(table, attrs, "bitmap_join", None, size)
            for v in views:
                if set(attrs) <= set(v.attributes):
                    size = btree_index_bytes(v.row_estimate,
                                             [catalog.attribute(a) for a in attrs])
                    add(v.id, attrs, "btree_on_view", v.id, size)
    return out
