"""Greedy selection of views and indexes under one storage budget.

Each round prices every remaining candidate (or candidate bundle) by

    f = (alpha * cost reduction - sum(beta * maintenance)) / bundle bytes

and admits the best one while f > 0 and the bundle fits. Benefits are
recomputed every round, so an index on a view is worth more once the view
is in.
"""

from dataclasses import dataclass, field

from .costs import CostEvaluator, object_maintenance


@dataclass(frozen=True)
class ObjectiveParams:
    alpha: dict = field(default_factory=dict)  # kind -> weight, default 1
    refresh_ratio: float = 0.0
    p_mode: str = "union"  # |O| is taken as |O + {o}|; the only convention offered

    def __post_init__(self):
        if self.p_mode != "union":
            raise ValueError(f"unsupported p_mode {self.p_mode!r}")

    def weight(self, obj):
        a = self.alpha.get(getattr(obj, "kind", "view"), 1.0)
        if a < 0:
            raise ValueError("alpha must be >= 0")
        return a


def update_probability(o, selected, params):
    """Refresh probability charged to ``o``, spread over |O + {o}| objects."""
    if params.refresh_ratio <= 0:
        return 0.0
    n = len(set(selected) | {o})
    return min(1.0, params.refresh_ratio / n)


@dataclass
class Configuration:
    selected: list
    occupied_bytes: int
    budget_bytes: int
    trace: list
    cost_before: float = 0.0
    cost_after: float = 0.0


class Pricer:
    """Workload cost and bundle value lookups for one universe."""

    def __init__(self, universe, workload, catalog, params=None, evaluator=None):
        params = params or ObjectiveParams()
        evaluator = evaluator or CostEvaluator(catalog, workload, universe)
        self.u = universe
        self.workload = workload
        self.catalog = catalog
        self.params = params
        self.ev = evaluator
        self.objs = universe.by_id()
        self.views_by_id = universe.views_by_id()
        self.maint = {o.id: object_maintenance(o, catalog, self.views_by_id)
                      for o in universe.objects}

    def cost(self, selected):
        return self.ev.workload_cost(selected)

    def size(self, ids):
        return sum(self.objs[i].size_bytes for i in ids)

    def bundle_value(self, primary, bundle, selected, base_cost):
        sel = set(selected)
        after = self.cost(sel | set(bundle))
        gain = self.params.weight(self.objs[primary]) * (base_cost - after)
        n_q = len(self.workload)
        penalty = sum(n_q * update_probability(o, sel, self.params) * self.maint[o]
                      for o in bundle)
        size = max(self.size(bundle), 1)
        return gain / size, penalty / size, after


def benefit_index(i, selected, universe, pricer, base_cost=None):
    """Benefit per byte of index ``i``; a view index brings its target view along."""
    base = pricer.cost(selected) if base_cost is None else base_cost
    idx = pricer.objs[i]
    partners = ()
    if idx.kind == "btree_on_view" and idx.target_view not in selected:
        partners = (idx.target_view,)
    value, _, _ = pricer.bundle_value(i, (i,) + partners, selected, base)
    return {"value": max(value, 0.0), "co_selected": partners}


def useful_view_indexes(v, selected, universe, pricer):
    """Unselected indexes defined on ``v`` that lower cost once ``v`` is in."""
    sel = set(selected) | {v}
    col = universe.vi.row_index(v)
    alone = pricer.cost(sel)
    out = []
    for j, idx in enumerate(universe.indexes):
        if idx.id in selected or not universe.vi.bits[col, j]:
            continue
        if idx.kind != "btree_on_view":
            continue
        if pricer.cost(sel | {idx.id}) < alone:
            out.append(idx.id)
    return tuple(out)


def benefit_view(v, selected, universe, pricer, base_cost=None):
    """Benefit per byte of view ``v`` together with its useful unselected indexes."""
    base = pricer.cost(selected) if base_cost is None else base_cost
    partners = useful_view_indexes(v, selected, universe, pricer)
    value, _, _ = pricer.bundle_value(v, (v,) + partners, selected, base)
    return {"value": max(value, 0.0), "co_selected": partners}


def _bundles(oid, selected, universe, pricer):
    obj = pricer.objs[oid]
    if obj.kind == "view":
        partners = useful_view_indexes(oid, selected, universe, pricer)
        out = [(oid,)]
        if partners:
            out.append((oid,) + partners)
        return out
    if obj.kind == "btree_on_view" and obj.target_view not in selected:
        return [(oid, obj.target_view)]
    return [(oid,)]


def select(universe, budget, params, workload, catalog, evaluator=None):
    """Greedy configuration construction; returns a :class:`Configuration`."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    ev = evaluator or CostEvaluator(catalog, workload, universe)
    pricer = Pricer(universe, workload, catalog, params, ev)
    selected = []
    remaining = [o.id for o in universe.objects]
    occupied = 0
    base = pricer.cost(selected)
    config = Configuration([], 0, budget, [], cost_before=base, cost_after=base)
    iteration = 0
    while remaining and occupied < budget:
        best = None
        for oid in remaining:
            for bundle in _bundles(oid, selected, universe, pricer):
                size = pricer.size(bundle)
                if occupied + size > budget:
                    continue
                gain, penalty, after = pricer.bundle_value(oid, bundle, selected, base)
                f = gain - penalty
                key = (-f, size, oid, len(bundle))
                if best is None or key < best[0]:
                    best = (key, oid, bundle, f, gain, penalty, after, size)
        if best is None or best[3] <= 0:
            break
        _, oid, bundle, f, gain, penalty, after, size = best
        iteration += 1
        selected.extend(bundle)
        occupied += size
        remaining = [o for o in remaining if o not in bundle]
        base = after
        config.trace.append({
            "iteration": iteration, "chosen": oid, "co_selected": list(bundle[1:]),
            "f": f, "benefit": gain, "maintenance": penalty,
            "bundle_bytes": size, "occupied_bytes": occupied, "workload_cost": after,
        })
    config.selected = selected
    config.occupied_bytes = occupied
    config.cost_after = base
    return config
