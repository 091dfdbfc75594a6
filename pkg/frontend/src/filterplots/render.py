"""Turn an rmse.csv from the benchmark harness into a labeled figure.

The CSV schema is the only contract with the harness:

    problem,filter,step,time_s,component,rmse

One curve is drawn per filter, in the order filters first appear in the
file, so re-rendering the same CSV always produces the same data series.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

REQUIRED_COLUMNS = {"problem", "filter", "step", "time_s", "component", "rmse"}

COMPONENT_UNITS = {
    "state": "state units",
    "position": "m",
    "velocity": "m/s",
}


class SchemaError(ValueError):
    """The CSV is missing columns or holds no rows for the request."""


@dataclass(frozen=True)
class PlotSpec:
    in_path: str
    problem: str
    component: str
    out_path: str


def load_series(in_path: str, problem: str, component: str) -> dict[str, tuple[list, list]]:
    """Read (time, rmse) series per filter for one problem/component pair."""
    series: dict[str, tuple[list, list]] = {}
    with open(in_path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = set(reader.fieldnames or [])
        missing = REQUIRED_COLUMNS - header
        if missing:
            raise SchemaError(f"missing columns: {', '.join(sorted(missing))}")
        for row in reader:
            if row["problem"] != problem or row["component"] != component:
                continue
            times, values = series.setdefault(row["filter"], ([], []))
            times.append(float(row["time_s"]))
            values.append(float(row["rmse"]))
    if not series:
        raise SchemaError(
            f"no rows for problem={problem!r} component={component!r} in {in_path}"
        )
    for times, _ in series.values():
        if times != sorted(times):
            raise SchemaError("rows out of time order; refusing to draw crossing lines")
    return series


def render(spec: PlotSpec) -> None:
    """Write the figure; raises SchemaError before touching the output file."""
    series = load_series(spec.in_path, spec.problem, spec.component)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    try:
        for name, (times, values) in series.items():
            ax.plot(times, values, label=name.upper(), linewidth=1.4)
        unit = COMPONENT_UNITS.get(spec.component, "state units")
        ax.set_xlabel("time (s)")
        ax.set_ylabel(f"RMSE ({unit})")
        ax.set_title(f"{spec.problem}: {spec.component} RMSE")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(spec.out_path, dpi=150)
    finally:
        plt.close(fig)
