"""Star-schema statistics consumed by every cost model.

A catalog is a single JSON document::

    {
      "fact": {"name": "sales", "row_count": 100000, "attributes": [...]},
      "dimensions": [{"name": "times", "row_count": 1826, "key": "time_id", ...}],
      "page_size_bytes": 8192,
      "btree_order": 100,
      "refresh_ratio": 0.01,
      "op_frequencies": {"ins": 0.5, "del": 0.25, "upd": 0.25}
    }

Attribute objects carry ``name``, ``cardinality``, ``width_bytes`` and the
optional ``selectivity``, ``blocking_factor``, ``references`` (fact foreign
keys, ``"dimension.attribute"``) and ``sample`` (values used to derive a
missing cardinality). Unknown keys are rejected.
"""

import json
import math
from dataclasses import dataclass, field, replace

from .errors import ParseError, ValidationError

ROW_ID_BYTES = 8

_TOP_KEYS = {"fact", "dimensions", "page_size_bytes", "btree_order",
             "refresh_ratio", "op_frequencies"}
_TABLE_KEYS = {"name", "row_count", "page_count", "attributes", "key"}
_ATTR_KEYS = {"name", "cardinality", "width_bytes", "selectivity",
              "blocking_factor", "references", "sample"}
_OP_KEYS = {"ins", "del", "upd"}


@dataclass(frozen=True)
class AttributeStats:
    name: str
    cardinality: int
    width_bytes: int
    selectivity: float
    blocking_factor: int
    references: str | None = None


@dataclass(frozen=True)
class TableStats:
    name: str
    row_count: int
    attributes: tuple
    page_count: int
    key: str | None = None

    def attribute(self, name):
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise KeyError(f"{self.name}.{name}")

    @property
    def row_width(self):
        return sum(a.width_bytes for a in self.attributes)


@dataclass(frozen=True)
class Catalog:
    fact: TableStats
    dimensions: tuple
    page_size_bytes: int = 8192
    btree_order: int = 100
    refresh_ratio: float = 0.0
    op_frequencies: dict = field(default_factory=lambda: {"ins": 0.0, "del": 0.0, "upd": 0.0})

    @property
    def tables(self):
        return (self.fact,) + tuple(self.dimensions)

    def table(self, name):
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def has_table(self, name):
        return any(t.name == name for t in self.tables)

    def attribute(self, ref):
        """Look up ``"table.attr"``."""
        table, _, attr = ref.partition(".")
        return self.table(table).attribute(attr)

    def has_attribute(self, ref):
        try:
            self.attribute(ref)
        except KeyError:
            return False
        return True

    def is_fact(self, table_name):
        return table_name == self.fact.name

    def is_key(self, ref):
        """True for dimension keys and fact foreign keys."""
        table, _, attr = ref.partition(".")
        t = self.table(table)
        if t is self.fact:
            return t.attribute(attr).references is not None
        return t.key == attr

    def dimension_of_reference(self, ref):
        """Dimension referenced by a fact foreign key, or None."""
        fk = self.attribute(ref).references
        return fk.partition(".")[0] if fk else None

    def max_fact_size(self):
        """Product of all dimension row counts (the fact table's key space)."""
        out = 1.0
        for d in self.dimensions:
            out *= d.row_count
        return out

    def with_fact_rows(self, row_count):
        """Copy with the fact table rescaled; page count recomputed."""
        fact = replace(self.fact, row_count=row_count,
                       page_count=_default_pages(row_count, self.fact.row_width,
                                                 self.page_size_bytes))
        return replace(self, fact=fact)

    def to_dict(self):
        def table_dict(t):
            d = {"name": t.name, "row_count": t.row_count, "page_count": t.page_count,
                 "attributes": []}
            if t.key is not None:
                d["key"] = t.key
            for a in t.attributes:
                ad = {"name": a.name, "cardinality": a.cardinality,
                      "width_bytes": a.width_bytes, "selectivity": a.selectivity,
                      "blocking_factor": a.blocking_factor}
                if a.references:
                    ad["references"] = a.references
                d["attributes"].append(ad)
            return d

        return {"fact": table_dict(self.fact),
                "dimensions": [table_dict(t) for t in self.dimensions],
                "page_size_bytes": self.page_size_bytes,
                "btree_order": self.btree_order,
                "refresh_ratio": self.refresh_ratio,
                "op_frequencies": dict(self.op_frequencies)}


def pages_of(nbytes, catalog):
    """Disk pages needed for ``nbytes``: 0 for nothing, else the ceiling."""
    if nbytes <= 0:
        return 0
    return -(-int(math.ceil(nbytes)) // catalog.page_size_bytes)


def _default_pages(row_count, row_width, page_size):
    return max(1, math.ceil(row_count * row_width / page_size))


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ValidationError(where, "expected an object")
    extra = set(obj) - allowed
    if extra:
        raise ValidationError(where, f"unknown keys {sorted(extra)}")


def _number(obj, key, where, kind=int, required=True, default=None):
    if key not in obj:
        if required:
            raise ValidationError(f"{where}.{key}", "missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}.{key}", f"expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ValidationError(f"{where}.{key}", f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _parse_attribute(obj, table_where, row_count, page_size):
    _check_keys(obj, _ATTR_KEYS, table_where + ".attributes[]")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise ValidationError(table_where + ".attributes[].name", "missing or empty")
    where = f"{table_where}.{name.lower()}"

    cardinality = _number(obj, "cardinality", where, required=False)
    if cardinality is None:
        sample = obj.get("sample")
        if not sample:
            raise ValidationError(f"{where}.cardinality", "missing and no sample block")
        cardinality = len({json.dumps(v, sort_keys=True) for v in sample})
    if cardinality < 1:
        raise ValidationError(f"{where}.cardinality", "must be >= 1")
    if row_count > 0 and cardinality > row_count:
        raise ValidationError(f"{where}.cardinality",
                              f"{cardinality} exceeds table row_count {row_count}")

    width = _number(obj, "width_bytes", where)
    if width < 1:
        raise ValidationError(f"{where}.width_bytes", "must be >= 1")

    selectivity = _number(obj, "selectivity", where, kind=float, required=False,
                          default=1.0 / cardinality)
    if not 0.0 < selectivity <= 1.0:
        raise ValidationError(f"{where}.selectivity", "must lie in (0, 1]")

    bf = _number(obj, "blocking_factor", where, required=False,
                 default=page_size // (width + ROW_ID_BYTES))
    if bf < 2:
        # log base 1 is undefined in the B-tree formulas
        raise ValidationError(f"{where}.blocking_factor", f"must be >= 2, got {bf}")

    references = obj.get("references")
    if references is not None and (not isinstance(references, str) or "." not in references):
        raise ValidationError(f"{where}.references", "expected 'dimension.attribute'")

    return AttributeStats(name=name.lower(), cardinality=cardinality, width_bytes=width,
                          selectivity=selectivity, blocking_factor=bf,
                          references=references.lower() if references else None)


def _parse_table(obj, where, page_size):
    _check_keys(obj, _TABLE_KEYS, where)
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise ValidationError(where + ".name", "missing or empty")
    where = name.lower()
    row_count = _number(obj, "row_count", where)
    if row_count < 0:
        raise ValidationError(f"{where}.row_count", "must be >= 0")
    raw_attrs = obj.get("attributes")
    if not isinstance(raw_attrs, list) or not raw_attrs:
        raise ValidationError(f"{where}.attributes", "expected a non-empty list")
    attrs = tuple(_parse_attribute(a, where, row_count, page_size) for a in raw_attrs)
    names = [a.name for a in attrs]
    if len(set(names)) != len(names):
        raise ValidationError(f"{where}.attributes", "duplicate attribute names")
    width = sum(a.width_bytes for a in attrs)
    page_count = _number(obj, "page_count", where, required=False,
                         default=_default_pages(row_count, width, page_size))
    if page_count < 1:
        raise ValidationError(f"{where}.page_count", "must be >= 1")
    key = obj.get("key")
    if key is not None:
        key = key.lower()
        if key not in names:
            raise ValidationError(f"{where}.key", f"{key!r} is not an attribute")
    return TableStats(name=name.lower(), row_count=row_count, attributes=attrs,
                      page_count=page_count, key=key)


def catalog_from_dict(doc):
    """Validate a decoded catalog document and build a :class:`Catalog`."""
    _check_keys(doc, _TOP_KEYS, "catalog")
    page_size = _number(doc, "page_size_bytes", "catalog", required=False, default=8192)
    if page_size <= 0:
        raise ValidationError("page_size_bytes", "must be > 0")
    btree_order = _number(doc, "btree_order", "catalog", required=False, default=100)
    if btree_order < 3:
        raise ValidationError("btree_order", "must be >= 3")
    refresh = _number(doc, "refresh_ratio", "catalog", kind=float, required=False, default=0.0)
    if refresh < 0:
        raise ValidationError("refresh_ratio", "must be >= 0")

    ops = doc.get("op_frequencies", {})
    _check_keys(ops, _OP_KEYS, "op_frequencies")
    freqs = {k: _number(ops, k, "op_frequencies", kind=float, required=False, default=0.0)
             for k in ("ins", "del", "upd")}
    if any(v < 0 for v in freqs.values()):
        raise ValidationError("op_frequencies", "frequencies must be >= 0")
    if sum(freqs.values()) > 1 + 1e-12:
        raise ValidationError("op_frequencies", "frequencies must sum to <= 1")

    if "fact" not in doc:
        raise ValidationError("fact", "missing")
    fact = _parse_table(doc["fact"], "fact", page_size)
    dims = doc.get("dimensions")
    if not isinstance(dims, list) or not dims:
        raise ValidationError("dimensions", "at least one dimension is required")
    dimensions = tuple(_parse_table(d, "dimensions[]", page_size) for d in dims)

    names = [fact.name] + [d.name for d in dimensions]
    if len(set(names)) != len(names):
        raise ValidationError("dimensions", "table names must be unique")

    by_name = {d.name: d for d in dimensions}
    for attr in fact.attributes:
        if attr.references is None:
            continue
        dim_name, _, dim_attr = attr.references.partition(".")
        dim = by_name.get(dim_name)
        if dim is None or dim_attr not in [a.name for a in dim.attributes]:
            raise ValidationError(f"{fact.name}.{attr.name}.references",
                                  f"{attr.references!r} does not resolve to a dimension")
        if dim.key is not None and dim.key != dim_attr:
            raise ValidationError(f"{fact.name}.{attr.name}.references",
                                  f"{attr.references!r} is not the key of {dim_name}")

    return Catalog(fact=fact, dimensions=dimensions, page_size_bytes=page_size,
                   btree_order=btree_order, refresh_ratio=refresh, op_frequencies=freqs)


def load_catalog(path):
    """Read and validate a catalog JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return catalog_from_dict(doc)
