"""Physical design advisor for star-schema warehouses.

Suggests materialized views together with bitmap join and B-tree indexes
under one storage budget.
"""

from .catalog import Catalog, catalog_from_dict, load_catalog
from .pipeline import advise, build_candidates, sweep
from .workload import load_workload, parse_workload

__version__ = "0.1.0"

__all__ = ["Catalog", "catalog_from_dict", "load_catalog", "load_workload",
           "parse_workload", "build_candidates", "advise", "sweep"]
