"""Figure generation for cache-hierarchy sweep CSVs: speedup bars, AMAT bars,
reference-breakdown stacks and DRAM row-opening counts."""

from bcview.data import (FigureSpec, KINDS, ViewerError, breakdown_table,
                         load_rows, metric_table, speedup_table)
from bcview.plots import render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "KINDS", "ViewerError", "breakdown_table",
           "load_rows", "metric_table", "speedup_table", "render",
           "__version__"]
