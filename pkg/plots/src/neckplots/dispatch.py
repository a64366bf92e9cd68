"""Experiment-family renderers and the dispatcher.

Five families cover the eleven experiments:

    rate      decay_scan, hn_decay, ab_rates, vcyl_convergence
    ratio     ratio_bound
    identity  green_identity, stretch_identity, trace_variation
    matrix    v_matrix, assumptions
    oracle    oracle_convergence

Rate figures are the PlotSpec log-linear renderer; the others are small
dedicated figures (residual scatter, matrix overview, order plot).  The
verify_slopes helper recomputes every rate-like slope from the CSV with
the same least-squares fit the experiment CLI uses and compares against
the JSON summary; agreement to 1e-9 is asserted by the tests.
"""

from __future__ import annotations

import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fitting import fit_slope
from .spec import PlotError, PlotSpec, load_csv, render, require_columns

FAMILIES = {
    "decay_scan": "rate",
    "hn_decay": "rate",
    "ab_rates": "rate",
    "vcyl_convergence": "rate",
    "ratio_bound": "ratio",
    "green_identity": "identity",
    "stretch_identity": "identity",
    "trace_variation": "identity",
    "v_matrix": "matrix",
    "assumptions": "matrix",
    "oracle_convergence": "oracle",
}


def family_of(experiment: str) -> str:
    try:
        return FAMILIES[experiment]
    except KeyError:
        raise PlotError(f"no figure family for experiment {experiment!r}") from None


def _summary_target(summary, name_prefix):
    for c in summary.get("criteria", []):
        if c["name"].startswith(name_prefix) and isinstance(c.get("target"), (int, float)):
            return float(c["target"])
    return None


def render_rate(experiment, csv_path, summary, out_path):
    if experiment == "decay_scan":
        spec = PlotSpec(csv_path, "s", "abs_u", out_path, target_slope=None,
                        title="coefficient decay across the neck",
                        series_by="n,m")
    elif experiment == "hn_decay":
        spec = PlotSpec(csv_path, "s", "sup_H", out_path,
                        target_slope=_summary_target(summary, "hn_rate"),
                        title="Poisson correction along the neck", series_by="n")
    elif experiment == "ab_rates":
        spec = PlotSpec(csv_path, "s", "sup_A", out_path,
                        target_slope=_summary_target(summary, "A_rate"),
                        title="boundary expansion tails")
    else:  # vcyl_convergence
        spec = PlotSpec(csv_path, "s", "abs_err", out_path, target_slope=-0.25,
                        title="junction-normalized coefficient vs cylinder limit",
                        series_by="n")
    return render(spec)


def render_ratio(experiment, csv_path, summary, out_path):
    cols = require_columns(load_csv(csv_path), ["n", "m", "s", "ratio"], csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for n in sorted(set(cols["n"])):
        for m in sorted(set(cols["m"])):
            idx = (cols["n"] == n) & (cols["m"] == m)
            if not np.any(idx):
                continue
            order = np.argsort(cols["s"][idx])
            ax.plot(cols["s"][idx][order], cols["ratio"][idx][order], "o-",
                    ms=3, lw=0.8, alpha=0.7)
    ax.axhline(2.0, color="red", ls="--", lw=1, label="bound 2")
    ax.axhline(1.0, color="gray", ls=":", lw=1, label="pure exponential")
    ax.set_xlabel("s")
    ax.set_ylabel("growth ratio")
    ax.set_title("two-sided neck growth ratio")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_identity(experiment, csv_path, summary, out_path):
    cols = load_csv(csv_path)
    err_col = "rel_err" if "rel_err" in cols else "residual"
    require_columns(cols, [err_col], csv_path)
    errs = np.maximum(np.abs(cols[err_col]), 1e-18)
    tol = None
    for c in summary.get("criteria", []):
        if isinstance(c.get("tolerance"), (int, float)):
            tol = float(c["tolerance"])
            break
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.semilogy(np.arange(len(errs)), errs, "o", ms=4)
    if tol is not None:
        ax.axhline(tol, color="red", ls="--", lw=1, label=f"tolerance {tol:g}")
        ax.legend(fontsize=8)
    ax.set_xlabel("case index")
    ax.set_ylabel(err_col)
    ax.set_title(f"{experiment}: identity residuals")
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_matrix(experiment, csv_path, summary, out_path):
    cols = load_csv(csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if experiment == "v_matrix":
        require_columns(cols, ["p", "det", "cond"], csv_path)
        ax.bar(cols["p"] - 0.15, np.abs(cols["det"]), width=0.3, label="|det V|")
        ax.bar(cols["p"] + 0.15, cols["cond"], width=0.3, label="cond V")
        ax.set_yscale("log")
        ax.set_xlabel("edges p")
        ax.set_title("response matrix determinant and conditioning")
    else:  # assumptions
        require_columns(cols, ["s", "a2_rel", "v30_abs"], csv_path)
        order = np.argsort(cols["s"])
        ax.semilogy(cols["s"][order], np.maximum(cols["a2_rel"][order], 1e-18),
                    "o-", label="dominant coefficient (relative)")
        ax.semilogy(cols["s"][order], cols["v30_abs"][order], "s-",
                    label="rescaled subleading floor")
        ax.set_xlabel("s")
        ax.set_title("corrected family across neck lengths")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_oracle(experiment, csv_path, summary, out_path):
    cols = require_columns(load_csv(csv_path), ["level", "discrepancy"], csv_path)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    lev = cols["level"]
    d = cols["discrepancy"]
    ax.semilogy(lev, d, "o-", label="oracle vs mode solves")
    ax.semilogy(lev, d[0] * 4.0 ** (-(lev - lev[0])), "--", color="gray",
                label="order-2 reference")
    ax.set_xlabel("refinement level")
    ax.set_ylabel("sup discrepancy")
    ax.set_title("independent 2D discretization")
    ax.set_xticks(lev)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


_RENDERERS = {
    "rate": render_rate,
    "ratio": render_ratio,
    "identity": render_identity,
    "matrix": render_matrix,
    "oracle": render_oracle,
}


def render_experiment(experiment: str, csv_path: str, summary_path: str | None,
                      out_path: str) -> str:
    """Dispatch to the family renderer; summary JSON supplies targets."""
    summary = {}
    if summary_path and os.path.exists(summary_path):
        with open(summary_path, "r", encoding="utf-8") as fh:
            summary = json.load(fh)
    fam = family_of(experiment)
    return _RENDERERS[fam](experiment, csv_path, summary, out_path)


# -- slope cross-check -------------------------------------------------------


def recompute_slopes(experiment: str, csv_path: str) -> dict:
    """Rate-like slopes from the CSV, keyed like the summary criteria."""
    cols = load_csv(csv_path)
    out = {}
    if experiment == "decay_scan":
        for n in sorted(set(cols["n"].astype(int))):
            for m in sorted(set(cols["m"].astype(int))):
                idx = (cols["n"] == n) & (cols["m"] == m)
                if np.any(idx):
                    order = np.argsort(cols["s"][idx])
                    slope, _, _ = fit_slope(cols["s"][idx][order],
                                            cols["abs_u"][idx][order])
                    out[f"decay_slope_{n}_{m}"] = slope
    elif experiment == "hn_decay":
        for n in sorted(set(cols["n"].astype(int))):
            idx = cols["n"] == n
            order = np.argsort(cols["s"][idx])
            slope, _, _ = fit_slope(cols["s"][idx][order], cols["sup_H"][idx][order])
            out[f"hn_rate_{n}"] = slope
    elif experiment == "ab_rates":
        order = np.argsort(cols["s"])
        out["A_rate"] = fit_slope(cols["s"][order], cols["sup_A"][order])[0]
        out["B_rate"] = fit_slope(cols["s"][order],
                                  cols["sup_B_minus_Binf"][order])[0]
    return out


def verify_slopes(experiment: str, csv_path: str, summary_path: str,
                  tol: float = 1e-9) -> dict:
    """Compare recomputed slopes against the summary; raises on mismatch."""
    with open(summary_path, "r", encoding="utf-8") as fh:
        summary = json.load(fh)
    recomputed = recompute_slopes(experiment, csv_path)
    reported = {c["name"]: c["measured"] for c in summary["criteria"]}
    checked = {}
    for name, slope in recomputed.items():
        if name not in reported or not isinstance(reported[name], (int, float)):
            continue
        gap = abs(slope - float(reported[name]))
        if gap > tol:
            raise PlotError(
                f"{experiment}/{name}: recomputed slope {slope!r} differs from "
                f"summary {reported[name]!r} by {gap:.3e} (> {tol:g})")
        checked[name] = gap
    return checked
