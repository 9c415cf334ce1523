"""Advice reports: JSON document, DDL script, CSV tables and figures."""

import csv
import io
import json
from pathlib import Path

from .matrices import covers


def column_alias(ref):
    return ref.replace(".", "_")


def _measure_alias(measure):
    func, ref = measure
    return f"{func.lower()}_{'all' if ref == '*' else column_alias(ref)}"


def view_ddl(v, fact_name):
    cols = [f"{a} AS {column_alias(a)}" for a in v.attributes]
    cols += [f"{f}({r}) AS {_measure_alias((f, r))}" for f, r in v.measures]
    tables = [fact_name] + sorted({d.partition(".")[0] for _, d in v.joins})
    sql = [f"CREATE MATERIALIZED VIEW {v.id} AS",
           f"  SELECT {', '.join(cols)}",
           f"  FROM {', '.join(tables)}"]
    if v.joins:
        sql.append("  WHERE " + " AND ".join(f"{f} = {d}" for f, d in sorted(v.joins)))
    if v.attributes:
        sql.append(f"  GROUP BY {', '.join(v.attributes)}")
    return "\n".join(sql) + ";"


def index_ddl(i, catalog):
    if i.kind == "btree_on_view":
        cols = ", ".join(column_alias(a) for a in i.attributes)
        return f"CREATE INDEX {i.id} ON {i.target_view} ({cols});"
    fact = catalog.fact
    fk = next(f"{fact.name}.{a.name}" for a in fact.attributes
              if a.references and a.references.partition(".")[0] == i.table)
    dim_key = catalog.attribute(fk).references
    return (f"CREATE BITMAP INDEX {i.id} ON {fact.name} ({', '.join(i.attributes)})\n"
            f"  FROM {fact.name}, {i.table}\n"
            f"  WHERE {fk} = {dim_key};")


def ddl_script(selected_objects, catalog):
    parts = []
    for o in selected_objects:
        if o.kind == "view":
            parts.append(view_ddl(o, catalog.fact.name))
    for o in selected_objects:
        if o.kind != "view":
            parts.append(index_ddl(o, catalog))
    return "\n\n".join(parts) + ("\n" if parts else "")


def cover_rate(workload, views):
    """Share of queries answerable by at least one of ``views``."""
    if not len(workload):
        return 1.0
    hit = sum(1 for q in workload if any(covers(v, q) for v in views))
    return hit / len(workload)


def build_report(cands, config, evaluator, universe, budget, mode="joint"):
    objs = universe.by_id()
    chosen = [objs[i] for i in config.selected]
    views = [o for o in chosen if o.kind == "view"]
    indexes = [o for o in chosen if o.kind != "view"]
    plans = evaluator.plan_table(config.selected)
    before = evaluator.plan_table([])
    return {
        "mode": mode,
        "workload_digest": cands.workload.source_digest,
        "budget_bytes": budget,
        "candidate_bytes": cands.total_bytes,
        "occupied_bytes": config.occupied_bytes,
        "cost_before": config.cost_before,
        "cost_after": config.cost_after,
        "cover_rate_selected": cover_rate(cands.workload, views),
        "cover_rate_candidates": cover_rate(cands.workload, universe.views),
        "views": [{"id": v.id, "joins": [list(j) for j in sorted(v.joins)],
                   "attributes": list(v.attributes),
                   "measures": [list(m) for m in v.measures],
                   "rows": v.row_estimate, "size_bytes": v.size_bytes} for v in views],
        "indexes": [{"id": i.id, "kind": i.kind, "table": i.table,
                     "attributes": list(i.attributes), "target_view": i.target_view,
                     "size_bytes": i.size_bytes} for i in indexes],
        "plans": [{"query": p.query_id, "plan": p.plan, "objects": list(p.objects),
                   "pages": p.pages, "baseline_pages": b.pages}
                  for p, b in zip(plans, before)],
        "ddl": ddl_script(chosen, cands.catalog),
    }


def plans_csv(plans):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query_id", "plan", "objects", "pages"])
    for p in plans:
        w.writerow([p.query_id, p.plan, " ".join(p.objects), repr(float(p.pages))])
    return buf.getvalue()


def sweep_csv(rows):
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def plot_plans(report, path):
    """Per-query page cost before and after the recommendation."""
    plt = _pyplot()
    names = [p["query"] for p in report["plans"]]
    before = [p["baseline_pages"] for p in report["plans"]]
    after = [p["pages"] for p in report["plans"]]
    x = range(len(names))
    fig, ax = plt.subplots(figsize=(max(4, 0.7 * len(names) + 2), 3.5))
    ax.bar([i - 0.2 for i in x], before, width=0.4, label="no objects", color="0.7")
    ax.bar([i + 0.2 for i in x], after, width=0.4, label="recommended", color="tab:blue")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names)
    ax.set_ylabel("pages read")
    ax.legend(frameon=False)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_sweep(rows, path, modes=("joint", "views", "indexes")):
    """Workload cost against budget, one line per selection mode."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    pct = [r["percent"] for r in rows]
    styles = {"joint": "o-", "views": "s--", "indexes": "^:"}
    for mode in modes:
        if rows and mode in rows[0]:
            ax.plot(pct, [r[mode] for r in rows], styles.get(mode, "o-"), label=mode)
    ax.set_xlabel("budget (% of all candidates)")
    ax.set_ylabel("workload cost (pages)")
    ax.legend(frameon=False)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def write_advice(report, out_dir, trace=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out / "recommendation.sql").write_text(report["ddl"])
    plot_plans(report, out / "plans.png")
    return out
