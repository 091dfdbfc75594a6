"""RMSE figure rendering from benchmark harness CSV files."""

from .render import PlotSpec, SchemaError, load_series, render

__all__ = ["PlotSpec", "SchemaError", "load_series", "render"]

__version__ = "0.1.0"
