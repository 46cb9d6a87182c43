"""Figure rendering for simulation trajectory and sweep CSV files."""

from .render import (LAYOUTS, PanelSpec, PlotsError, Table, read_table,
                     render_sweep, render_trajectory)

__version__ = "1.0.0"

__all__ = ["LAYOUTS", "PanelSpec", "PlotsError", "Table", "read_table",
           "render_sweep", "render_trajectory"]
