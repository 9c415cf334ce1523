"""Shared fixtures: the eight-query sales example, its golden matrices, random stars."""

import random
from importlib import resources

from dwadvisor.catalog import catalog_from_dict, load_catalog
from dwadvisor.clustering import make_view
from dwadvisor.mining import CandidateIndex
from dwadvisor.workload import load_workload, parse_workload

DATA = resources.files("dwadvisor") / "data"

FK = {"times": "sales.time_id", "products": "sales.prod_id", "customers": "sales.cust_id",
      "promotions": "sales.promo_id", "channels": "sales.channel_id"}
QTY, AMT = ("SUM", "sales.quantity_sold"), ("SUM", "sales.amount_sold")

# Candidate views of the example, with the corrections listed in the ledger.
VIEW_DEFS = [
    ("v1", ["times"], ["sales.time_id", "times.time_fiscal_year"], [AMT]),
    ("v2", ["products", "channels", "customers"],
     ["sales.prod_id", "sales.cust_id", "channels.channel_desc", "channels.channel_class"], [QTY]),
    ("v3", ["customers", "products"],
     ["customers.cust_first_name", "products.prod_name", "products.prod_category",
      "customers.cust_gender", "customers.cust_marital_status"], [QTY, AMT]),
    ("v4", ["products", "promotions"],
     ["sales.prod_id", "products.prod_name", "products.prod_category",
      "promotions.promo_category"], [AMT]),
    ("v5", ["products", "promotions"], ["products.prod_category", "promotions.promo_category"],
     [AMT]),
    ("v6", ["channels", "products"],
     ["channels.channel_class", "products.prod_name", "channels.channel_desc",
      "products.prod_category"], [QTY, AMT]),
    ("v7", ["products", "promotions", "channels"],
     ["sales.prod_id", "products.prod_category", "channels.channel_desc",
      "promotions.promo_name", "promotions.promo_begin_date", "promotions.promo_end_date",
      "products.prod_name"], [QTY, AMT]),
]

INDEX_ATTRS = ["promotions.promo_category", "channels.channel_desc", "channels.channel_class",
               "customers.cust_marital_status", "customers.cust_gender",
               "promotions.promo_begin_date", "promotions.promo_end_date",
               "times.time_fiscal_year", "products.prod_name", "products.prod_category",
               "promotions.promo_name", "customers.cust_first_name"]

GOLDEN_QA = [[1, 1, 1, 0, 0, 0, 0, 0],
          [1, 1, 0, 1, 1, 1, 0, 0],
          [1, 1, 0, 0, 0, 0, 1, 1]]
GOLDEN_QA_COLUMNS = ("f.a1", "d1.a3", "d1.a4", "f.a5", "d2.a7", "d2.a8", "f.a9", "d3.a10")

GOLDEN_QV = [[1, 0, 0, 0, 0, 0, 0],
          [0, 0, 0, 1, 0, 0, 0],
          [0, 0, 1, 0, 0, 0, 0],
          [0, 0, 0, 1, 0, 0, 0],
          [0, 0, 0, 0, 0, 0, 1],
          [0, 0, 1, 0, 0, 0, 0],
          [0, 0, 0, 0, 0, 0, 1],
          [0, 1, 0, 0, 0, 1, 0]]

GOLDEN_QI = [[0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0],
          [1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
          [0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 0],
          [1, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0],
          [0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0],
          [0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 1],
          [0, 0, 0, 0, 0, 0, 1, 0, 1, 1, 0, 0],
          [0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0]]

GOLDEN_VI = [[0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0],
          [0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
          [0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1],
          [1, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0],
          [1, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0],
          [0, 1, 1, 0, 0, 0, 0, 0, 1, 1, 0, 0],
          [0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1, 0]]

# Printed cells that contradict the matrix definitions; see the ledger.
GOLDEN_QI_CONTRADICTIONS = {("q5", "i5"), ("q5", "i7")}
GOLDEN_VI_CONTRADICTIONS = {("v2", "i3")}


def toy_catalog():
    return load_catalog(DATA / "toy_catalog.json")


def toy_workload(catalog=None):
    return load_workload(DATA / "toy_workload.sql", catalog or toy_catalog())


def sales_catalog(fact_rows=None):
    cat = load_catalog(DATA / "sales_catalog.json")
    return cat if fact_rows is None else cat.with_fact_rows(fact_rows)


def sales_workload(catalog=None):
    return load_workload(DATA / "sales_workload.sql", catalog or sales_catalog())


def example_views(catalog):
    out = []
    for vid, dims, attrs, measures in VIEW_DEFS:
        joins = [(FK[d], f"{d}.{FK[d].split('.')[1]}") for d in dims]
        out.append(make_view(vid, joins, attrs, measures, catalog))
    return out


def example_indexes():
    return [CandidateIndex(f"i{k}", ref.split(".")[0], (ref,))
            for k, ref in enumerate(INDEX_ATTRS, 1)]


def random_star(rng: random.Random, n_queries=None):
    """A small random star schema and a workload over it, as (catalog, workload)."""
    n_dims = rng.randint(2, 3)
    fact_rows = rng.choice([2_000, 20_000, 200_000])
    dims, fact_attrs = [], []
    for d in range(1, n_dims + 1):
        rows = rng.randint(20, 2000)
        attrs = [{"name": "k", "cardinality": rows, "width_bytes": 4}]
        for a in range(1, rng.randint(2, 4)):
            attrs.append({"name": f"a{a}", "cardinality": rng.randint(2, rows),
                          "width_bytes": rng.choice([4, 8, 20])})
        dims.append({"name": f"d{d}", "row_count": rows, "key": "k", "attributes": attrs})
        fact_attrs.append({"name": f"fk{d}", "cardinality": rows, "width_bytes": 4,
                           "references": f"d{d}.k"})
    fact_attrs.append({"name": "m", "cardinality": 100, "width_bytes": 8})
    catalog = catalog_from_dict({
        "fact": {"name": "f", "row_count": fact_rows, "attributes": fact_attrs},
        "dimensions": dims, "page_size_bytes": 4096, "btree_order": 50,
    })

    statements = []
    for _ in range(n_queries or rng.randint(2, 5)):
        chosen = rng.sample(dims, rng.randint(1, min(2, n_dims)))
        cols = [f"{d['name']}.{a['name']}" for d in chosen for a in d["attributes"][1:]]
        group = rng.sample(cols, rng.randint(1, min(2, len(cols))))
        rest = [c for c in cols if c not in group]
        preds = rng.sample(rest, rng.randint(0, min(2, len(rest))))
        tables = ["f"] + [d["name"] for d in chosen]
        where = [f"f.fk{d['name'][1:]} = {d['name']}.k" for d in chosen]
        where += [f"{p} = {rng.randint(1, 9)}" for p in preds]
        statements.append(f"SELECT {', '.join(group)}, SUM(f.m) FROM {', '.join(tables)} "
                          f"WHERE {' AND '.join(where)} GROUP BY {', '.join(group)};")
    return catalog, parse_workload("\n".join(statements), catalog)
