"""Brute-force reference answers for the test suite.

Nothing here calls into the miner, the clusterer, the cost models, the
matrix builders or the selector. Formulas are rewritten from scratch, reading
only raw data fields off the objects passed in.
"""

import itertools
import math
from dataclasses import dataclass

from .errors import CapExceeded

MAX_ITEMS = 16
MAX_QUERIES = 8
MAX_CANDIDATES = 14


@dataclass(frozen=True)
class OracleItemset:
    items: tuple
    support: int


def naive_closed_itemsets(rows, minsup):
    """Every non-empty subset whose support meets the threshold and equals its closure."""
    rows = [set(r) for r in rows]
    items = sorted(set().union(*rows)) if rows else []
    if len(items) > MAX_ITEMS:
        raise CapExceeded(f"{len(items)} items exceeds the cap of {MAX_ITEMS}")
    n = len(rows)
    need = math.ceil(round(minsup * n, 9))
    need = max(need, 1)
    found = []
    for mask in range(1, 1 << len(items)):
        subset = {items[k] for k in range(len(items)) if mask >> k & 1}
        containing = [r for r in rows if subset <= r]
        if len(containing) < need:
            continue
        shared = set(items)
        for r in containing:
            shared &= r
        if shared == subset:
            found.append(OracleItemset(tuple(sorted(subset)), len(containing)))
    found.sort(key=lambda x: (-x.support, x.items))
    return found


def _set_partitions(elems):
    if not elems:
        yield []
        return
    head, rest = elems[0], elems[1:]
    for part in _set_partitions(rest):
        yield [[head]] + part
        for k in range(len(part)):
            yield part[:k] + [[head] + part[k]] + part[k + 1:]


def partition_quality(classes, rows):
    """Q computed pair by pair straight from the 0/1 rows."""
    where = {q: k for k, c in enumerate(classes) for q in c}
    labels = list(rows)
    total = 0
    for x, y in itertools.combinations(labels, 2):
        a, b = rows[x], rows[y]
        if where[x] == where[y]:
            total += sum(1 for u, v in zip(a, b) if u != v)
        else:
            total += sum(1 for u, v in zip(a, b) if u == 1 and v == 1)
    return total


def best_partition(rows, joins):
    """Exhaustive minimum of Q over join-compatible partitions.

    ``rows`` maps query id to its 0/1 list, in workload order. Returns
    (quality, classes). Ties go to fewer classes, then the lexicographically
    smaller class list.
    """
    labels = list(rows)
    if len(labels) > MAX_QUERIES:
        raise CapExceeded(f"{len(labels)} queries exceeds the cap of {MAX_QUERIES}")
    order = {q: i for i, q in enumerate(labels)}
    best = None
    for part in _set_partitions(labels):
        if any(len({frozenset(joins[q]) for q in c}) > 1 for c in part):
            continue
        classes = sorted((sorted(c, key=order.get) for c in part),
                         key=lambda c: order[c[0]])
        key = (partition_quality(classes, rows), len(classes),
               [[order[q] for q in c] for c in classes])
        if best is None or key < best[0]:
            best = (key, classes)
    return best[0][0], [tuple(c) for c in best[1]]


class PlanOracle:
    """Per-query plan lists as (required object ids, pages), priced independently."""

    def __init__(self, catalog, queries, views, indexes, via_btree=True):
        self.catalog = catalog
        self.queries = list(queries)
        self.views = list(views)
        self.indexes = list(indexes)
        self.via_btree = via_btree
        self.plans = {q.id: self._plans(q) for q in self.queries}

    def _attr(self, ref):
        tname, aname = ref.split(".", 1)
        for t in (self.catalog.fact, *self.catalog.dimensions):
            if t.name == tname:
                for a in t.attributes:
                    if a.name == aname:
                        return a, t
        raise KeyError(ref)

    def _pages(self, nbytes):
        if nbytes <= 0:
            return 0
        return math.ceil(nbytes / self.catalog.page_size_bytes)

    @staticmethod
    def _wanted(q):
        return set(q.grouping) | {p.attribute for p in q.restrictions}

    def _answers(self, v, q):
        if not set(q.joins) <= set(v.joins):
            return False
        if not self._wanted(q) <= set(v.attributes):
            return False
        stored = set(v.measures)
        for func, ref in q.measures:
            if func == "AVG":
                if ("SUM", ref) not in stored:
                    return False
                if ("COUNT", ref) not in stored and ("COUNT", "*") not in stored:
                    return False
            elif (func, ref) not in stored:
                return False
        return True

    @staticmethod
    def _levels(bf, n):
        k = 0
        while bf ** k < n:
            k += 1
        return k

    def _btree(self, q, v, idx):
        rows = math.ceil(v.row_estimate)
        if rows < 1:
            return None
        restricted = [p.attribute for p in q.restrictions]
        if not set(idx.attributes) <= set(restricted):
            return None
        trav = 0
        n = rows
        for ref in dict.fromkeys(restricted):
            if ref not in idx.attributes:
                continue
            a, _ = self._attr(ref)
            trav += self._levels(a.blocking_factor, rows)
            leaf = math.ceil(a.selectivity * rows / a.blocking_factor) - 1
            trav += leaf if leaf > 0 else 0
            n *= a.selectivity
        P = self._pages(v.size_bytes)
        if P <= 0 or n <= 0:
            search = 0.0
        elif P == 1:
            search = 1.0
        else:
            search = P * (1 - (1 - 1 / P) ** n)
        return trav + search

    def _bitmap(self, q, idx):
        """(key attribute set, traversal pages, selected fraction) or None."""
        if idx.target_view is not None or idx.table not in q.tables:
            return None
        if not set(idx.attributes) & self._wanted(q):
            return None
        counts = {a: sum(1 for p in q.restrictions if p.attribute == a) for a in idx.attributes}
        d = sum(counts.values())
        if d == 0:
            return None
        card = 1
        for ref in idx.attributes:
            card *= self._attr(ref)[0].cardinality
        if len(idx.attributes) > 1:
            _, table = self._attr(idx.attributes[0])
            card = min(card, table.row_count)
        card = max(card, 1)
        for ref in idx.attributes:
            if counts[ref] == 0:
                d *= self._attr(ref)[0].cardinality
        d = min(d, card)
        fact = self.catalog.fact
        scan = d * fact.row_count / (8 * self.catalog.page_size_bytes)
        if self.via_btree:
            descent = math.log(card) / math.log(self.catalog.btree_order) - 1
            scan += max(descent, 0.0)
        else:
            scan *= card
        return frozenset(idx.attributes), scan, d / card

    def _plans(self, q):
        fact = self.catalog.fact
        dims = [t for t in self.catalog.dimensions if t.name in q.tables]
        plans = [(frozenset(), float(fact.page_count + sum(t.page_count for t in dims)))]
        for v in self.views:
            if not self._answers(v, q):
                continue
            plans.append((frozenset([v.id]), float(self._pages(v.size_bytes))))
            for idx in self.indexes:
                if idx.kind != "btree_on_view" or idx.target_view != v.id:
                    continue
                c = self._btree(q, v, idx)
                if c is not None:
                    plans.append((frozenset([v.id, idx.id]), c))
        bitmaps = []
        for idx in self.indexes:
            if idx.kind == "bitmap_join":
                b = self._bitmap(q, idx)
                if b is not None:
                    bitmaps.append((idx.id,) + b)
        for r in range(1, len(bitmaps) + 1):
            for combo in itertools.combinations(bitmaps, r):
                keys = [c[1] for c in combo]
                if len(frozenset().union(*keys)) != sum(len(k) for k in keys):
                    continue
                frac = 1.0
                for c in combo:
                    frac *= c[3]
                read = fact.page_count * (1 - math.exp(-frac * fact.row_count / fact.page_count))
                plans.append((frozenset(c[0] for c in combo), sum(c[2] for c in combo) + read))
        return plans

    def query_cost(self, q, selected):
        chosen = set(selected)
        return min(cost for need, cost in self.plans[q.id] if need <= chosen)

    def workload_cost(self, selected):
        return sum(self.query_cost(q, selected) for q in self.queries)


@dataclass(frozen=True)
class OracleConfiguration:
    selected: tuple
    occupied_bytes: int
    cost: float


def best_configuration(views, indexes, budget, queries, catalog, via_btree=True):
    """Cheapest budget-feasible subset; an index on a view needs that view."""
    objs = list(views) + list(indexes)
    if len(objs) > MAX_CANDIDATES:
        raise CapExceeded(f"{len(objs)} candidates exceeds the cap of {MAX_CANDIDATES}")
    pricer = PlanOracle(catalog, queries, views, indexes, via_btree)
    best = None
    for r in range(len(objs) + 1):
        for combo in itertools.combinations(objs, r):
            ids = {o.id for o in combo}
            if any(getattr(o, "target_view", None) not in (None, *ids) for o in combo):
                continue
            size = sum(o.size_bytes for o in combo)
            if size > budget:
                continue
            cost = pricer.workload_cost(ids)
            key = (cost, r, sorted(ids))
            if best is None or key < best[0]:
                best = (key, OracleConfiguration(tuple(o.id for o in combo), size, cost))
    return best[1]
