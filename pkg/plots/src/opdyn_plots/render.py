"""Render trajectory and sweep CSV files into figure panels.

Reads only the CSV formats emitted by the simulation CLI (a ``t`` column
followed by per-agent ``F_i``/``G_i`` columns and the two global means, or a
two-column sweep curve).  Each render writes an SVG and a PNG side by side
and never modifies its inputs.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# stable ids inside the SVG output so reruns are byte-identical
matplotlib.rcParams["svg.hashsalt"] = "opdyn-plots"

LAYOUTS = ("agent1", "agent6", "middle", "all")


class PlotsError(ValueError):
    """Malformed CSV input or an unknown column/layout request."""


@dataclass(frozen=True)
class Table:
    columns: list
    data: dict  # column name -> list of floats

    @property
    def n_rows(self):
        return len(next(iter(self.data.values()))) if self.data else 0

    def column(self, name):
        if name not in self.data:
            raise PlotsError(f"column '{name}' not found; header has {self.columns}")
        return self.data[name]


@dataclass(frozen=True)
class PanelSpec:
    """One panel: which columns of which CSV, under which title."""

    csv_path: str
    columns: tuple
    title: str
    out_path: str = ""


def read_table(path) -> Table:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotsError(f"{path}: empty file, expected a CSV header") from None
        rows = list(reader)
    if not rows:
        raise PlotsError(f"{path}: no data rows after the header")
    data = {name: [] for name in header}
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise PlotsError(f"{path}:{i}: expected {len(header)} fields, got {len(row)}")
        for name, value in zip(header, row):
            try:
                data[name].append(float(value))
            except ValueError:
                raise PlotsError(f"{path}:{i}: non-numeric value {value!r} in '{name}'") from None
    return Table(columns=header, data=data)


def agent_count(table: Table) -> int:
    n = 0
    while f"F_{n + 1}" in table.data and f"G_{n + 1}" in table.data:
        n += 1
    if n == 0:
        raise PlotsError(f"not a trajectory CSV; header has {table.columns}")
    return n


def layout_panels(table: Table, layout: str, csv_path: str):
    n = agent_count(table)

    def pair(a):
        return (f"F_{a}", f"G_{a}")

    middle = tuple(c for a in range(2, n) for c in pair(a))
    every = tuple(c for a in range(1, n + 1) for c in pair(a)) + ("F_mean", "G_mean")
    catalog = {
        "agent1": PanelSpec(csv_path, pair(1), "Agent 1 (transmitter)"),
        f"agent{n}": PanelSpec(csv_path, pair(n), f"Agent {n} (receiver)"),
        "middle": PanelSpec(csv_path, middle, "Middle layer"),
        "all": PanelSpec(csv_path, every, "All agents"),
    }
    catalog["agent6"] = catalog[f"agent{n}"]  # canonical name from the 6-agent network
    if layout is None:
        return [catalog["agent1"], catalog[f"agent{n}"], catalog["middle"], catalog["all"]]
    if layout not in catalog:
        raise PlotsError(f"unknown layout {layout!r}; choose from {LAYOUTS}")
    return [catalog[layout]]


def _style(column):
    if column.startswith("F"):
        return {"linestyle": "--"}
    return {"linestyle": "-"}


def _draw_panel(ax, table, panel: PanelSpec):
    t = table.column("t")
    marker = "o" if len(t) < 2 else None
    for name in panel.columns:
        series = table.column(name)
        ax.plot(t, series, label=name, linewidth=1.0, marker=marker, **_style(name))
    ax.set_xlabel("t")
    ax.set_ylabel("mean value")
    ax.set_title(panel.title)
    if panel.columns:
        ncol = 2 if len(panel.columns) > 6 else 1
        ax.legend(fontsize=6, ncol=ncol, loc="upper right")


def _save(fig, out_path):
    base = Path(out_path)
    if base.suffix.lower() in (".svg", ".png"):
        base = base.with_suffix("")
    paths = []
    for ext in (".svg", ".png"):
        target = base.with_suffix(ext)
        target.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(target, metadata={"Date": None} if ext == ".svg" else None)
        paths.append(str(target))
    plt.close(fig)
    return paths


def render_trajectory(csv_path, out_path, layout=None, columns=None):
    """Trajectory panels; ``layout`` picks one named panel, the default is the
    2x2 grid (transmitter, receiver, middle layer, all agents).  ``columns``
    overrides the panel with an explicit column list."""
    table = read_table(csv_path)
    if columns is not None:
        for name in columns:
            table.column(name)
        panels = [PanelSpec(str(csv_path), tuple(columns), "Selected columns")]
    else:
        panels = layout_panels(table, layout, str(csv_path))
    for panel in panels:
        for name in panel.columns:
            table.column(name)
    if len(panels) == 1:
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
        _draw_panel(ax, table, panels[0])
    else:
        fig, axes = plt.subplots(2, 2, figsize=(11.0, 7.5), dpi=150)
        for ax, panel in zip(axes.ravel(), panels):
            _draw_panel(ax, table, panel)
        fig.tight_layout()
    return _save(fig, out_path)


def render_sweep(csv_path, out_path):
    """Sweep curve with the saturation level annotated."""
    table = read_table(csv_path)
    if len(table.columns) != 2:
        raise PlotsError(f"expected a two-column sweep CSV, header has {table.columns}")
    x_name, y_name = table.columns
    x, y = table.column(x_name), table.column(y_name)
    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=150)
    ax.plot(x, y, marker="o", markersize=3, linewidth=1.0)
    saturation = y[-1]
    ax.axhline(saturation, linestyle=":", linewidth=0.8, color="gray")
    ax.annotate(f"saturation = {saturation:.4f}", xy=(x[0], saturation),
                xytext=(0, 4), textcoords="offset points", fontsize=8)
    ax.set_xlabel(x_name)
    ax.set_ylabel(y_name)
    ax.set_title(f"{y_name} vs {x_name}")
    return _save(fig, out_path)
