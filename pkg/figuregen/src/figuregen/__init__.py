"""Comparison-figure rendering for key-rate sweep CSVs."""

from .render import BASELINE, PlotError, PlotSpec, load_plot_spec, read_sweep_csv, render

__all__ = ["BASELINE", "PlotError", "PlotSpec", "load_plot_spec", "read_sweep_csv", "render"]
