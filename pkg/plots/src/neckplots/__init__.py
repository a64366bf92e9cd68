"""Figures for neckmodes experiment outputs.

Reads the CSV/JSON files the experiment CLI writes (the only interface
to the solver package) and renders log-linear rate figures with fitted
slopes and target-slope reference lines, plus residual and matrix
overviews for the non-rate experiments.
"""

__version__ = "0.1.0"

from .dispatch import FAMILIES, family_of, render_experiment
from .spec import PlotError, PlotSpec, load_csv, render

__all__ = ["FAMILIES", "PlotError", "PlotSpec", "family_of", "load_csv",
           "render", "render_experiment", "__version__"]
