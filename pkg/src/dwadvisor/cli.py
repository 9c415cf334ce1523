"""Command-line front end.

Exit codes: 0 success, 1 bad input (parse or validation), 2 internal error.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

from .catalog import load_catalog
from .costs import CostEvaluator
from .errors import AdvisorError, CapExceeded
from .pipeline import DEFAULT_MINSUP, advise, build_candidates, resolve_budget, sweep
from .report import build_report, plans_csv, plot_sweep, sweep_csv, write_advice
from .selector import ObjectiveParams
from .workload import RuleSet, load_workload

SWEEP_POINTS = (1, 5, 15, 35, 60, 100)


def _common(p):
    p.add_argument("catalog", help="catalog JSON file")
    p.add_argument("workload", help="SQL workload file")
    p.add_argument("--rules", help="JSON file of attribute exclusion rules")
    p.add_argument("--minsup", type=float, default=DEFAULT_MINSUP)
    p.add_argument("--fact-rows", type=int, help="rescale the fact table to this many rows")


def _objective(p):
    p.add_argument("--alpha-index", type=float, default=1.0,
                   help="weight on bitmap join index benefits")
    p.add_argument("--refresh-ratio", type=float,
                   help="refresh to interrogation ratio (default: catalog value)")


def build_parser():
    parser = argparse.ArgumentParser(prog="dwadvisor",
                                     description="Recommend materialized views and indexes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("advise", help="select views and indexes under a budget")
    _common(p)
    _objective(p)
    p.add_argument("--budget", default="100%", help="bytes, or N%% of all candidates")
    p.add_argument("--mode", choices=("joint", "views", "indexes"), default="joint")
    p.add_argument("--trace", help="write one JSON object per greedy step here")
    p.add_argument("--out", help="directory for report.json, recommendation.sql, plans.png")

    p = sub.add_parser("evaluate", help="price a given object list")
    _common(p)
    p.add_argument("--config", required=True,
                   help="JSON list of object ids, or a report.json")

    p = sub.add_parser("explain", help="dump intermediate structures")
    _common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--matrices", action="store_true")
    g.add_argument("--clusters", action="store_true")
    g.add_argument("--itemsets", action="store_true")

    p = sub.add_parser("mine", help="closed attribute sets as CSV")
    _common(p)

    p = sub.add_parser("sweep", help="workload cost across budgets")
    _common(p)
    _objective(p)
    p.add_argument("--percents", default=",".join(map(str, SWEEP_POINTS)))
    p.add_argument("--out", help="directory for sweep.csv and sweep.png")

    p = sub.add_parser("oracle")  # exhaustive check, small universes only
    _common(p)
    p.add_argument("--budget", default="100%")
    return parser


def _load(args):
    catalog = load_catalog(args.catalog)
    if args.fact_rows is not None:
        catalog = catalog.with_fact_rows(args.fact_rows)
    workload = load_workload(args.workload, catalog)
    rules = None
    if args.rules:
        try:
            doc = json.loads(Path(args.rules).read_text() or "{}")
        except json.JSONDecodeError as exc:
            raise AdvisorError(f"{args.rules}: {exc}") from exc
        rules = RuleSet.from_dict(doc)
    return build_candidates(workload, catalog, rules, args.minsup)


def _params(args, cands):
    ratio = cands.catalog.refresh_ratio if args.refresh_ratio is None else args.refresh_ratio
    return ObjectiveParams(alpha={"bitmap_join": args.alpha_index}, refresh_ratio=ratio)


def cmd_advise(args, out):
    cands = _load(args)
    budget = resolve_budget(args.budget, cands.total_bytes)
    config, ev, universe = advise(cands, budget, _params(args, cands), args.mode)
    if config.occupied_bytes > budget or config.cost_after > config.cost_before + 1e-9:
        raise RuntimeError("selection broke the budget or raised the cost")
    report = build_report(cands, config, ev, universe, budget, args.mode)
    if args.trace:
        with open(args.trace, "w") as fh:
            for step in config.trace:
                fh.write(json.dumps(step, sort_keys=True) + "\n")
    if args.out:
        write_advice(report, args.out)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["key", "value"])
    for key in ("budget_bytes", "candidate_bytes", "occupied_bytes", "cost_before",
                "cost_after", "cover_rate_selected"):
        w.writerow([key, report[key]])
    w.writerow(["selected", " ".join(config.selected)])
    return 0


def _read_config(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise AdvisorError(f"{path}: {exc}") from exc
    if isinstance(doc, dict):
        return [v["id"] for v in doc.get("views", [])] + [i["id"] for i in doc.get("indexes", [])]
    if isinstance(doc, list) and all(isinstance(x, str) for x in doc):
        return doc
    raise AdvisorError(f"{path}: expected a list of ids or a report object")


def cmd_evaluate(args, out):
    cands = _load(args)
    ids = _read_config(args.config)
    known = cands.universe.by_id()
    missing = [i for i in ids if i not in known]
    if missing:
        raise AdvisorError(f"unknown objects: {', '.join(missing)}")
    ev = CostEvaluator(cands.catalog, cands.workload, cands.universe)
    out.write(plans_csv(ev.plan_table(ids)))
    return 0


def _itemsets_csv(itemsets):
    lines = ["support,items"]
    lines += [f"{s.support},{' '.join(s.items)}" for s in itemsets]
    return "\n".join(lines) + "\n"


def cmd_explain(args, out):
    cands = _load(args)
    u = cands.universe
    if args.matrices:
        for name, m in (("QA", cands.qa), ("QV", u.qv), ("QI", u.qi), ("VI", u.vi)):
            out.write(f"# {name}\n")
            out.write(m.to_csv())
            out.write("\n")
    elif args.clusters:
        for k, cls in enumerate(cands.partition.classes, 1):
            out.write(f"class {k}: {' '.join(cls)}\n")
        for v in u.views:
            measures = " ".join(f"{f}({r})" for f, r in v.measures)
            out.write(f"{v.id}: queries={' '.join(v.source_queries)} "
                      f"attributes={' '.join(v.attributes)} measures={measures} "
                      f"rows={v.row_estimate:.6g} bytes={v.size_bytes}\n")
    else:
        out.write(_itemsets_csv(cands.itemsets))
        for i in u.indexes:
            target = i.target_view or "-"
            out.write(f"# {i.id} {i.kind} {i.table} {' '.join(i.attributes)} "
                      f"target={target} bytes={i.size_bytes}\n")
    return 0


def cmd_mine(args, out):
    out.write(_itemsets_csv(_load(args).itemsets))
    return 0


def cmd_sweep(args, out):
    cands = _load(args)
    try:
        percents = [float(x) if "." in x else int(x) for x in args.percents.split(",")]
    except ValueError as exc:
        raise AdvisorError(f"bad --percents: {exc}") from exc
    rows = sweep(cands, percents, _params(args, cands))
    text = sweep_csv(rows)
    out.write(text)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / "sweep.csv").write_text(text)
        plot_sweep(rows, d / "sweep.png")
    return 0


def cmd_oracle(args, out):
    from .oracle import best_configuration
    cands = _load(args)
    budget = resolve_budget(args.budget, cands.total_bytes)
    best = best_configuration(cands.universe.views, cands.universe.indexes, budget,
                              cands.workload.queries, cands.catalog)
    out.write(f"selected,{' '.join(best.selected)}\noccupied_bytes,{best.occupied_bytes}\n"
              f"cost,{best.cost!r}\n")
    return 0


COMMANDS = {"advise": cmd_advise, "evaluate": cmd_evaluate, "explain": cmd_explain,
            "mine": cmd_mine, "sweep": cmd_sweep, "oracle": cmd_oracle}


def main(argv=None, out=None):
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return COMMANDS[args.command](args, out)
    except (AdvisorError, CapExceeded, ValueError, OSError) as exc:
        print(f"dwadvisor: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # invariant violations and bugs
        print(f"dwadvisor: internal error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
