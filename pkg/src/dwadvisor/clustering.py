"""Query clustering and view fusion.

Queries are grouped so that similar ones (many shared attributes) land in the
same class while dissimilar ones are kept apart, subject to the rule that a
class only holds queries with the same join set. Each class is then fused
into one candidate view, or into per-query views when fusion blows up.
"""

from dataclasses import dataclass, replace

import numpy as np

from .costs import ESTIMATORS, view_size_bytes

DEFAULT_BLOWUP = 2.0


@dataclass(frozen=True)
class CandidateView:
    id: str
    joins: frozenset
    attributes: tuple
    measures: tuple
    row_estimate: float
    size_bytes: int
    source_queries: tuple = ()
    kind = "view"


def make_view(vid, joins, attributes, measures, catalog, estimator="yao", source_queries=()):
    """Build a view and fill in its row estimate and byte size."""
    probe = CandidateView(vid, frozenset(joins), tuple(attributes), tuple(measures), 0.0, 0)
    rows = ESTIMATORS[estimator](probe, catalog) if probe.attributes else min(
        1.0, float(catalog.fact.row_count))
    return replace(probe, row_estimate=rows, size_bytes=view_size_bytes(probe, catalog, rows),
                   source_queries=tuple(source_queries))


def view_measures(queries):
    """Stored aggregates needed to answer every query; AVG becomes SUM and COUNT."""
    out = []
    for q in queries:
        for func, ref in q.measures:
            parts = [("SUM", ref), ("COUNT", ref)] if func == "AVG" else [(func, ref)]
            for m in parts:
                if m not in out:
                    out.append(m)
    return tuple(out)


@dataclass(frozen=True)
class Partition:
    classes: tuple

    def __post_init__(self):
        flat = [q for c in self.classes for q in c]
        if len(flat) != len(set(flat)) or any(not c for c in self.classes):
            raise ValueError("classes must be disjoint and non-empty")

    def __len__(self):
        return len(self.classes)

    @classmethod
    def canonical(cls, classes, order):
        """Members in workload order, classes ordered by their first member."""
        pos = {q: i for i, q in enumerate(order)}
        sorted_classes = [tuple(sorted(c, key=pos.__getitem__)) for c in classes]
        sorted_classes.sort(key=lambda c: pos[c[0]])
        return cls(tuple(sorted_classes))


def _row(M, q):
    return M.bits[M.row_index(q)].astype(np.int64)


def sim(q, q2, M):
    return int(np.sum(_row(M, q) & _row(M, q2)))


def dissim(q, q2, M):
    return int(np.sum(_row(M, q) ^ _row(M, q2)))


def _pair_tables(M):
    bits = M.bits.astype(np.int64)
    S = bits @ bits.T
    w = bits.sum(axis=1)
    D = w[:, None] + w[None, :] - 2 * S
    return S, D


def quality(P, M):
    """Interclass similarity plus intraclass dissimilarity; lower is better."""
    S, D = _pair_tables(M)
    label = {}
    for k, c in enumerate(P.classes):
        for q in c:
            label[M.row_index(q)] = k
    n = len(M.row_labels)
    total = 0
    for a in range(n):
        for b in range(a + 1, n):
            total += D[a, b] if label[a] == label[b] else S[a, b]
    return int(total)


def coarsest_partition(M, joins):
    """One class per distinct join set."""
    groups = {}
    for q in M.row_labels:
        groups.setdefault(frozenset(joins[q]), []).append(q)
    return Partition.canonical(groups.values(), M.row_labels)


def singleton_partition(M):
    return Partition.canonical([[q] for q in M.row_labels], M.row_labels)


def cluster(M, joins):
    """Join-constrained greedy agglomeration followed by single-query moves.

    A merge of classes A and B changes Q by sum(dissim - sim) over the cross
    pairs, so the most negative such sum is merged first. Afterwards queries
    are moved between compatible classes while that lowers Q. The result is
    never worse than the coarsest compatible partition.
    """
    labels = list(M.row_labels)
    S, D = _pair_tables(M)
    delta = D - S
    js = [frozenset(joins[q]) for q in labels]
    classes = [[i] for i in range(len(labels))]

    while True:
        best = None
        for a in range(len(classes)):
            for b in range(a + 1, len(classes)):
                if js[classes[a][0]] != js[classes[b][0]]:
                    continue
                d = int(delta[np.ix_(classes[a], classes[b])].sum())
                if d < 0 and (best is None or d < best[0]):
                    best = (d, a, b)
        if best is None:
            break
        _, a, b = best
        classes[a] = classes[a] + classes[b]
        del classes[b]

    classes = _refine(classes, delta, js)
    greedy = Partition.canonical([[labels[i] for i in c] for c in classes], labels)
    coarse = coarsest_partition(M, joins)
    return coarse if quality(coarse, M) < quality(greedy, M) else greedy


def _refine(classes, delta, js):
    # moving query x from class A to B changes Q by
    # sum over B of delta(x, .) - sum over A minus x of delta(x, .)
    improved = True
    while improved:
        improved = False
        for x in range(delta.shape[0]):
            src = next(k for k, c in enumerate(classes) if x in c)
            stay = sum(int(delta[x, y]) for y in classes[src] if y != x)
            best = (0, None)
            for k, c in enumerate(classes):
                if k == src or js[c[0]] != js[x]:
                    continue
                gain = sum(int(delta[x, y]) for y in c) - stay
                if gain < best[0]:
                    best = (gain, k)
            if best[1] is None and len(classes[src]) > 1 and -stay < 0:
                best = (-stay, -1)  # split x out on its own
            if best[1] is None:
                continue
            classes[src] = [y for y in classes[src] if y != x]
            if best[1] == -1:
                classes.append([x])
            else:
                classes[best[1]].append(x)
            classes = [c for c in classes if c]
            improved = True
    return classes


def query_view(q, catalog, vid="", estimator="yao"):
    """The view answering exactly ``q``: its joins, access attributes and measures."""
    return make_view(vid, q.join_set, q.access_attributes, view_measures([q]), catalog,
                     estimator, (q.id,))


def fuse(queries, catalog, blowup=DEFAULT_BLOWUP, estimator="yao"):
    """Views for one class; ids are left empty for the caller to assign."""
    queries = list(queries)
    if len({q.join_set for q in queries}) != 1:
        raise ValueError("fusion needs queries sharing one join set")
    singles = []
    for q in queries:
        v = query_view(q, catalog, estimator=estimator)
        if not any(s.joins == v.joins and s.attributes == v.attributes
                   and s.measures == v.measures for s in singles):
            singles.append(v)
    if len(queries) == 1:
        return singles
    attrs = tuple(dict.fromkeys(a for q in queries for a in q.access_attributes))
    fused = make_view("", queries[0].join_set, attrs, view_measures(queries), catalog,
                      estimator, tuple(q.id for q in queries))
    if fused.size_bytes > blowup * sum(s.size_bytes for s in singles):
        return singles
    return [fused]
