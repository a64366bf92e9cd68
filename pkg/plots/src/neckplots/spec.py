"""Generic rate figure driven by a PlotSpec.

A PlotSpec names the input CSV, the x/y columns, log-axis flags, the
target slope and the output path.  Rendering draws the samples, the
fitted log-linear line and the target-slope reference anchored at the
first sample, and annotates the fit residual.  Missing columns and empty
files are reported by name; rendering never modifies its inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fitting import fit_slope


class PlotError(ValueError):
    """Input file does not match the documented schema."""


def load_csv(path: str) -> dict:
    """Columns by header name; numeric where possible."""
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PlotError(f"{path}: empty file, no header row") from None
        rows = [row for row in reader if row]
    if not rows:
        raise PlotError(f"{path}: no data rows")
    cols = {}
    for j, name in enumerate(header):
        raw = [row[j] for row in rows]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw)
    return cols


def require_columns(cols: dict, names, path: str = "csv"):
    missing = [n for n in names if n not in cols]
    if missing:
        raise PlotError(f"{path}: missing columns {missing}; have {sorted(cols)}")
    return cols


@dataclass
class PlotSpec:
    csv_path: str
    x_column: str
    y_column: str
    out_path: str
    log_x: bool = False
    log_y: bool = True
    target_slope: float | None = None
    title: str = ""
    series_by: str | None = None   # optional grouping column(s), comma-joined
    labels: dict = field(default_factory=dict)


def _series(cols, spec):
    if spec.series_by is None:
        yield "", np.argsort(cols[spec.x_column])
        return
    keys = [k.strip() for k in spec.series_by.split(",")]
    tagged = list(zip(*(cols[k] for k in keys)))
    for tag in sorted(set(tagged)):
        idx = np.array([i for i, t in enumerate(tagged) if t == tag])
        idx = idx[np.argsort(cols[spec.x_column][idx])]
        label = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in zip(keys, tag))
        yield label, idx


def render(spec: PlotSpec) -> str:
    """Write the figure; returns the output path."""
    cols = load_csv(spec.csv_path)
    need = [spec.x_column, spec.y_column] + (
        [k.strip() for k in spec.series_by.split(",")] if spec.series_by else [])
    require_columns(cols, need, spec.csv_path)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    annotations = []
    for label, idx in _series(cols, spec):
        x = cols[spec.x_column][idx]
        y = np.abs(cols[spec.y_column][idx])
        line, = ax.plot(x, y, "o", ms=4, label=label or spec.y_column)
        if spec.log_y and len(x) >= 2 and np.all(y > 0):
            slope, intercept, resid = fit_slope(x, y)
            xx = np.linspace(x.min(), x.max(), 64)
            ax.plot(xx, np.exp(intercept + slope * xx), "-", lw=1,
                    color=line.get_color(),
                    label=f"fit {label}: slope {slope:.4f}")
            annotations.append(f"{label or spec.y_column}: "
                               f"slope {slope:.4f}, rms resid {resid:.2e}")
            if spec.target_slope is not None:
                ax.plot(xx, y[0] * np.exp(spec.target_slope * (xx - x[0])),
                        "--", lw=1, color="gray")
    if spec.target_slope is not None:
        ax.plot([], [], "--", lw=1, color="gray",
                label=f"target slope {spec.target_slope:.4f}")
    if spec.log_y:
        ax.set_yscale("log")
    if spec.log_x:
        ax.set_xscale("log")
    ax.set_xlabel(spec.labels.get("x", spec.x_column))
    ax.set_ylabel(spec.labels.get("y", spec.y_column))
    ax.set_title(spec.title)
    ax.legend(fontsize=8)
    if annotations:
        ax.text(0.02, 0.02, "\n".join(annotations), transform=ax.transAxes,
                fontsize=7, va="bottom",
                bbox=dict(boxstyle="round", fc="white", alpha=0.7))
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=130)
    plt.close(fig)
    return spec.out_path
