"""Binary relationship matrices between queries, attributes, views and indexes."""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .workload import RuleSet, representative_attributes


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    row_labels: tuple
    column_labels: tuple
    bits: np.ndarray

    def __post_init__(self):
        if self.bits.shape != (len(self.row_labels), len(self.column_labels)):
            raise ValueError("bit array does not match label counts")
        if len(set(self.row_labels)) != len(self.row_labels):
            raise ValueError("duplicate row labels")
        if len(set(self.column_labels)) != len(self.column_labels):
            raise ValueError("duplicate column labels")

    @classmethod
    def from_rows(cls, row_labels, column_labels, rows):
        bits = np.array(rows, dtype=np.uint8).reshape(len(row_labels), len(column_labels))
        return cls(tuple(row_labels), tuple(column_labels), bits)

    @property
    def shape(self):
        return self.bits.shape

    def row_index(self, label):
        return self.row_labels.index(label)

    def column_index(self, label):
        return self.column_labels.index(label)

    def get(self, row, col):
        return int(self.bits[self.row_index(row), self.column_index(col)])

    def row(self, label):
        return self.bits[self.row_index(label)]

    def to_lists(self):
        return self.bits.astype(int).tolist()

    def __eq__(self, other):
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return (self.row_labels == other.row_labels
                and self.column_labels == other.column_labels
                and np.array_equal(self.bits, other.bits))

    def to_csv(self, corner=""):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([corner, *self.column_labels])
        for label, row in zip(self.row_labels, self.bits):
            writer.writerow([label, *(int(b) for b in row)])
        return buf.getvalue()


def _matrix(rows, cols, predicate):
    bits = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    for r, a in enumerate(rows):
        for c, b in enumerate(cols):
            if predicate(a, b):
                bits[r, c] = 1
    return bits


def build_query_attribute(workload, rules=None, catalog=None):
    """Query-attribute matrix; columns in order of first appearance."""
    rules = RuleSet() if rules is None else rules
    per_query = [representative_attributes(q, rules, catalog) for q in workload]
    columns = tuple(dict.fromkeys(a for attrs in per_query for a in attrs))
    bits = np.zeros((len(per_query), len(columns)), dtype=np.uint8)
    pos = {a: j for j, a in enumerate(columns)}
    for i, attrs in enumerate(per_query):
        for a in attrs:
            bits[i, pos[a]] = 1
    return BinaryMatrix(tuple(q.id for q in workload), columns, bits)


def measure_derivable(measure, available):
    """Whether an aggregate can be rolled up from the stored aggregates."""
    func, ref = measure
    if func == "AVG":
        return ("SUM", ref) in available and (("COUNT", ref) in available
                                              or ("COUNT", "*") in available)
    return (func, ref) in available


def covers(view, q):
    """True when ``view`` can answer ``q`` by re-aggregation and filtering."""
    if not frozenset(view.joins) >= q.join_set:
        return False
    if not set(view.attributes) >= set(q.access_attributes):
        return False
    available = set(view.measures)
    return all(measure_derivable(m, available) for m in q.measures)


def build_query_view(workload, views):
    queries = list(workload)
    return BinaryMatrix(tuple(q.id for q in queries), tuple(v.id for v in views),
                        _matrix(queries, views, lambda q, v: covers(v, q)))


def index_serves_query(index, q):
    if index.target_view is not None or index.table not in q.tables:
        return False
    return bool(set(index.attributes) & set(q.access_attributes))


def build_query_index(workload, indexes):
    queries = list(workload)
    return BinaryMatrix(tuple(q.id for q in queries), tuple(i.id for i in indexes),
                        _matrix(queries, indexes, lambda q, i: index_serves_query(i, q)))


def index_fits_view(index, view):
    if index.target_view is not None and index.target_view != view.id:
        return False
    return set(index.attributes) <= set(view.attributes)


def build_view_index(views, indexes):
    return BinaryMatrix(tuple(v.id for v in views), tuple(i.id for i in indexes),
                        _matrix(views, indexes, lambda v, i: index_fits_view(i, v)))


@dataclass(frozen=True, eq=False)
class CandidateUniverse:
    """Candidate views and indexes together with their QV, QI and VI matrices."""
    views: tuple
    indexes: tuple
    qv: BinaryMatrix
    qi: BinaryMatrix
    vi: BinaryMatrix

    def __post_init__(self):
        if self.qv.shape[1] != len(self.views) or self.vi.shape != (len(self.views), len(self.indexes)):
            raise ValueError("matrix dimensions do not match candidate lists")
        if self.qi.shape[1] != len(self.indexes):
            raise ValueError("matrix dimensions do not match candidate lists")

    @classmethod
    def build(cls, workload, views, indexes):
        views, indexes = tuple(views), tuple(indexes)
        return cls(views, indexes, build_query_view(workload, views),
                   build_query_index(workload, indexes), build_view_index(views, indexes))

    @property
    def objects(self):
        return self.views + self.indexes

    def by_id(self):
        return {o.id: o for o in self.objects}

    def views_by_id(self):
        return {v.id: v for v in self.views}

    def restricted(self, workload, keep):
        """Sub-universe with only the objects whose ids are in ``keep``."""
        keep = set(keep)
        return CandidateUniverse.build(workload, [v for v in self.views if v.id in keep],
                                       [i for i in self.indexes if i.id in keep])
