"""Figure rendering over rdloop run directories.

Strictly a read-only consumer of the documented run artifacts
(``kappa.csv``, ``v.csv``, ``readings.csv``, ``snapshots/``,
``report.json``); never imports the simulator.
"""

from .errors import NoDataError, SchemaError
from .render import KINDS, PlotJob, render
from .runs import load_report, load_snapshots, load_table

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "NoDataError",
    "PlotJob",
    "SchemaError",
    "load_report",
    "load_snapshots",
    "load_table",
    "render",
]
