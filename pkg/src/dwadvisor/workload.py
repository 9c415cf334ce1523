"""SQL-subset workload parsing and rule-based attribute preselection.

Accepted statements have the shape::

    SELECT col | AGG(col) | AGG(*) [, ...]
    FROM table [, ...]
    [WHERE cond AND cond ...]
    [GROUP BY col [, ...]]

where ``AGG`` is one of SUM, AVG, COUNT, MIN, MAX and a condition is either
an equi-join ``t1.a = t2.b`` or a restriction on one column (``=``, ``<``,
``>``, ``<=``, ``>=``, ``<>``/``!=``, ``BETWEEN .. AND ..``, ``LIKE``).
Anything else (subqueries, OR, HAVING, aliases, ORDER BY) is rejected.
"""

import hashlib
import re
from dataclasses import dataclass

from .errors import SQLSyntaxError, UnknownAttributeError, ValidationError

AGGREGATES = ("SUM", "AVG", "COUNT", "MIN", "MAX")
OPERATORS = ("=", "<", ">", "<=", ">=", "<>", "BETWEEN", "LIKE")
_KEYWORDS = {"SELECT", "FROM", "WHERE", "GROUP", "BY", "AND", "BETWEEN", "LIKE",
             "OR", "HAVING", "ORDER", "AS", "NOT", "IN", "UNION", "JOIN", "ON",
             "DISTINCT", "LIMIT", "EXISTS"} | set(AGGREGATES)

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>--[^\n]*)
  | (?P<string>'(?:[^']|'')*')
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)
  | (?P<op><=|>=|<>|!=|=|<|>)
  | (?P<punct>[(),*;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Predicate:
    attribute: str
    op: str
    literals: tuple


@dataclass(frozen=True)
class Query:
    id: str
    grouping: tuple
    measures: tuple
    restrictions: tuple
    joins: tuple
    tables: tuple
    # attribute references in textual order, measures excluded
    attribute_order: tuple = ()

    @property
    def join_set(self):
        return frozenset(self.joins)

    @property
    def restriction_attributes(self):
        return tuple(dict.fromkeys(p.attribute for p in self.restrictions))

    @property
    def access_attributes(self):
        """Grouping plus restriction attributes, in textual order."""
        wanted = set(self.grouping) | {p.attribute for p in self.restrictions}
        return tuple(a for a in self.attribute_order if a in wanted)

    def predicates_on(self, attribute):
        return sum(1 for p in self.restrictions if p.attribute == attribute)


@dataclass(frozen=True)
class Workload:
    queries: tuple
    source_digest: str

    def __len__(self):
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)

    def query(self, qid):
        for q in self.queries:
            if q.id == qid:
                return q
        raise KeyError(qid)


@dataclass(frozen=True)
class RuleSet:
    """Attribute exclusion rules applied before mining.

    ``min_cardinality`` drops attributes with fewer distinct values;
    ``max_cardinality_fraction`` drops non-key attributes whose cardinality
    exceeds that fraction of their table's rows (None disables it).
    """
    exclude_neq: bool = True
    min_cardinality: int = 2
    max_cardinality_fraction: float | None = None

    def __post_init__(self):
        if self.min_cardinality < 0:
            raise ValidationError("rules.min_cardinality", "must be >= 0")
        if self.max_cardinality_fraction is not None and self.max_cardinality_fraction < 0:
            raise ValidationError("rules.max_cardinality_fraction", "must be >= 0")

    @classmethod
    def none(cls):
        return cls(exclude_neq=False, min_cardinality=0, max_cardinality_fraction=None)

    @classmethod
    def from_dict(cls, doc):
        allowed = {"exclude_neq", "min_cardinality", "max_cardinality_fraction"}
        extra = set(doc or {}) - allowed
        if extra:
            raise ValidationError("rules", f"unknown keys {sorted(extra)}")
        return cls(**(doc or {}))


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SQLSyntaxError(_statement_count(tokens), text[pos:pos + 10],
                                 "unrecognized character")
        kind = m.lastgroup
        value = m.group(kind)
        pos = m.end()
        if kind in ("ws", "comment"):
            continue
        if kind == "ident" and value.upper() in _KEYWORDS:
            tokens.append(("kw", value.upper()))
        elif kind == "ident":
            tokens.append(("ident", value.lower()))
        elif kind == "string":
            tokens.append(("string", value[1:-1].replace("''", "'")))
        elif kind == "number":
            tokens.append(("number", float(value) if "." in value else int(value)))
        elif kind == "op":
            tokens.append(("op", "<>" if value == "!=" else value))
        else:
            tokens.append(("punct", value))
    return tokens


def _statement_count(tokens):
    return sum(1 for t in tokens if t == ("punct", ";"))


class _Parser:
    def __init__(self, tokens, index):
        self.tokens = tokens
        self.pos = 0
        self.index = index

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else ("eof", None)

    def fail(self, message="unexpected token"):
        raise SQLSyntaxError(self.index, self.peek()[1], message)

    def take(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            self.fail(f"expected {value or kind}")
        self.pos += 1
        return tok[1]

    def accept(self, kind, value=None):
        tok = self.peek()
        if tok[0] == kind and (value is None or tok[1] == value):
            self.pos += 1
            return True
        return False

    def column(self):
        tok = self.peek()
        if tok == ("punct", "(") or tok == ("kw", "SELECT"):
            self.fail("subqueries are not supported")
        return self.take("ident")

    def literal(self):
        tok = self.peek()
        if tok[0] in ("string", "number"):
            self.pos += 1
            return tok[1]
        if tok == ("punct", "(") or tok == ("kw", "SELECT"):
            self.fail("subqueries are not supported")
        self.fail("expected a literal")

    def parse(self):
        seen = []  # column references in textual order
        select_cols, measures = [], []
        self.take("kw", "SELECT")
        while True:
            tok = self.peek()
            if tok[0] == "kw" and tok[1] in AGGREGATES:
                self.pos += 1
                self.take("punct", "(")
                if self.accept("punct", "*"):
                    if tok[1] != "COUNT":
                        self.fail("only COUNT accepts *")
                    arg = "*"
                else:
                    arg = self.column()
                self.take("punct", ")")
                measures.append((tok[1], arg))
            else:
                col = self.column()
                select_cols.append(col)
                seen.append(col)
            if self.accept("kw", "AS"):
                self.take("ident")
            if not self.accept("punct", ","):
                break
        if not measures:
            self.fail("an aggregate is required")

        self.take("kw", "FROM")
        tables = [self.take("ident")]
        while self.accept("punct", ","):
            tables.append(self.take("ident"))
        if self.peek()[0] == "ident":
            self.fail("table aliases are not supported")

        conds = []
        if self.accept("kw", "WHERE"):
            conds.append(self.condition(seen))
            while self.accept("kw", "AND"):
                conds.append(self.condition(seen))
            if self.peek() == ("kw", "OR"):
                self.fail("only conjunctive WHERE clauses are supported")

        grouping = []
        if self.accept("kw", "GROUP"):
            self.take("kw", "BY")
            grouping.append(self.column())
            while self.accept("punct", ","):
                grouping.append(self.column())
        if self.peek()[0] != "eof":
            self.fail()
        return select_cols, measures, tables, conds, grouping, seen

    def condition(self, seen):
        left = self.column()
        seen.append(left)
        tok = self.peek()
        if tok == ("kw", "BETWEEN"):
            self.pos += 1
            lo = self.literal()
            self.take("kw", "AND")
            hi = self.literal()
            return ("restrict", left, "BETWEEN", (lo, hi))
        if tok == ("kw", "LIKE"):
            self.pos += 1
            return ("restrict", left, "LIKE", (self.literal(),))
        if tok[0] != "op":
            self.fail("expected a comparison operator")
        self.pos += 1
        op = tok[1]
        if self.peek()[0] == "ident":
            right = self.column()
            seen.append(right)
            if op != "=":
                self.fail("only equi-joins are supported")
            return ("join", left, right)
        return ("restrict", left, op, (self.literal(),))


def _split_statements(tokens):
    stmts, current = [], []
    for tok in tokens:
        if tok == ("punct", ";"):
            if current:
                stmts.append(current)
            current = []
        else:
            current.append(tok)
    if current:
        stmts.append(current)
    return stmts


def _resolver(catalog, tables, index):
    def resolve(col):
        if catalog is None:
            if "." not in col:
                if len(tables) == 1:
                    return f"{tables[0]}.{col}"
                raise UnknownAttributeError(
                    f"statement {index}: unqualified column {col!r} needs a catalog")
            return col
        if "." in col:
            if not catalog.has_attribute(col):
                raise UnknownAttributeError(f"statement {index}: unknown attribute {col!r}")
            return col
        hits = [f"{t}.{col}" for t in tables if catalog.has_table(t)
                and catalog.has_attribute(f"{t}.{col}")]
        if len(hits) != 1:
            what = "ambiguous" if hits else "unknown"
            raise UnknownAttributeError(f"statement {index}: {what} column {col!r}")
        return hits[0]
    return resolve


def _build_query(index, parsed, catalog):
    select_cols, measures, tables, conds, grouping, seen = parsed
    if catalog is not None:
        for t in tables:
            if not catalog.has_table(t):
                raise UnknownAttributeError(f"statement {index}: unknown table {t!r}")
    resolve = _resolver(catalog, tables, index)

    order = [resolve(c) for c in seen]
    group = tuple(dict.fromkeys(resolve(c) for c in grouping))
    order += [g for g in group if g not in order]
    for col in select_cols:
        if resolve(col) not in group:
            raise SQLSyntaxError(index, col, "selected column missing from GROUP BY")
    meas = tuple(dict.fromkeys((f, a if a == "*" else resolve(a)) for f, a in measures))

    joins, restrictions = [], []
    for cond in conds:
        if cond[0] == "join":
            a, b = resolve(cond[1]), resolve(cond[2])
            ta, tb = a.partition(".")[0], b.partition(".")[0]
            if ta == tb:
                raise SQLSyntaxError(index, cond[1], "column comparison within one table")
            if catalog is not None and catalog.is_fact(tb):
                a, b = b, a
            joins.append((a, b))
        else:
            restrictions.append(Predicate(resolve(cond[1]), cond[2], cond[3]))

    for ref in [r for pair in joins for r in pair] + [p.attribute for p in restrictions] + list(group):
        table = ref.partition(".")[0]
        if table not in tables:
            raise UnknownAttributeError(f"statement {index}: {ref!r} not in FROM list")

    joins = tuple(dict.fromkeys(joins))
    if catalog is not None:
        joined = {t.partition(".")[0] for pair in joins for t in pair}
        for ref in list(group) + [p.attribute for p in restrictions]:
            table = ref.partition(".")[0]
            if not catalog.is_fact(table) and table not in joined:
                raise ValidationError(f"q{index + 1}",
                                      f"dimension {table!r} is not joined to the fact table")

    return Query(id=f"q{index + 1}", grouping=group, measures=meas,
                 restrictions=tuple(restrictions), joins=joins, tables=tuple(tables),
                 attribute_order=tuple(dict.fromkeys(order)))


def parse_workload(text, catalog=None):
    """Parse ``;``-separated statements into a :class:`Workload`.

    With a catalog, unqualified columns are resolved against the FROM list
    and every reference is checked; without one, columns must be qualified.
    """
    tokens = _tokenize(text)
    statements = _split_statements(tokens)
    if not statements:
        raise SQLSyntaxError(0, "", "workload contains no statement")
    queries = []
    for i, stmt in enumerate(statements):
        parsed = _Parser(stmt, i).parse()
        queries.append(_build_query(i, parsed, catalog))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return Workload(queries=tuple(queries), source_digest=digest)


def load_workload(path, catalog=None):
    with open(path, encoding="utf-8") as fh:
        return parse_workload(fh.read(), catalog)


def _excluded(ref, q, rules, catalog):
    if rules.exclude_neq:
        in_group = ref in q.grouping
        in_join = any(ref in pair for pair in q.joins)
        ops = [p.op for p in q.restrictions if p.attribute == ref]
        if ops and not in_group and not in_join and all(op == "<>" for op in ops):
            return True
    if catalog is not None:
        stats = catalog.attribute(ref)
        if stats.cardinality < rules.min_cardinality:
            return True
        frac = rules.max_cardinality_fraction
        if frac is not None and not catalog.is_key(ref):
            rows = catalog.table(ref.partition(".")[0]).row_count
            if stats.cardinality > frac * rows:
                return True
    return False


def representative_attributes(q, rules=None, catalog=None):
    """Grouping, restriction and join attributes of ``q`` that survive ``rules``.

    Measures never qualify. The result keeps textual order.
    """
    rules = RuleSet() if rules is None else rules
    return tuple(a for a in q.attribute_order if not _excluded(a, q, rules, catalog))
