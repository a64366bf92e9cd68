import json
import os

import numpy as np
import pytest

from neckplots import (FAMILIES, PlotError, PlotSpec, family_of, load_csv,
                       render, render_experiment)
from neckplots.cli import main
from neckplots.dispatch import recompute_slopes, verify_slopes

HERE = os.path.dirname(__file__)
DATA = os.path.join(HERE, "..", "sample_data")


def sample(name, suffix=".csv"):
    return os.path.join(DATA, f"{name}{suffix}")


def test_family_coverage():
    assert set(FAMILIES.values()) == {"rate", "ratio", "identity", "matrix",
                                      "oracle"}
    assert len(FAMILIES) == 11
    with pytest.raises(PlotError):
        family_of("bogus")


def test_slopes_match_summaries():
    """Recomputed fits agree with the CLI's to 1e-9."""
    checked_total = 0
    for name in ("decay_scan", "hn_decay", "ab_rates"):
        checked = verify_slopes(name, sample(name), sample(name, "_summary.json"),
                                tol=1e-9)
        assert checked, f"no slopes compared for {name}"
        checked_total += len(checked)
    assert checked_total >= 6


def test_slope_mismatch_detected(tmp_path):
    doctored = tmp_path / "ab_rates.csv"
    with open(sample("ab_rates")) as fh:
        lines = fh.read().splitlines()
    parts = lines[1].split(",")
    parts[1] = repr(float(parts[1]) * 1.5)
    lines[1] = ",".join(parts)
    doctored.write_text("\n".join(lines) + "\n")
    with pytest.raises(PlotError):
        verify_slopes("ab_rates", str(doctored), sample("ab_rates", "_summary.json"))


def test_render_one_figure_per_family(tmp_path):
    by_family = {}
    for name, fam in FAMILIES.items():
        by_family.setdefault(fam, name)
    for fam, name in sorted(by_family.items()):
        out = tmp_path / f"{name}.png"
        got = render_experiment(name, sample(name), sample(name, "_summary.json"),
                                str(out))
        assert os.path.exists(got)
        assert os.path.getsize(got) > 4096


def test_render_all_experiments(tmp_path):
    for name in FAMILIES:
        out = tmp_path / f"{name}.png"
        render_experiment(name, sample(name), sample(name, "_summary.json"),
                          str(out))
        assert out.exists()


def test_render_idempotent(tmp_path):
    out = tmp_path / "fig.png"
    spec = PlotSpec(sample("decay_scan"), "s", "abs_u", str(out), series_by="n,m")
    render(spec)
    first = out.read_bytes()
    render(spec)
    assert out.read_bytes() == first
    # inputs untouched
    before = open(sample("decay_scan"), "rb").read()
    assert before == open(sample("decay_scan"), "rb").read()


def test_missing_columns_reported(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    spec = PlotSpec(str(bad), "s", "abs_u", str(tmp_path / "x.png"))
    with pytest.raises(PlotError) as err:
        render(spec)
    assert "abs_u" in str(err.value) and "'s'" in str(err.value)


def test_empty_csv_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(PlotError):
        load_csv(str(empty))
    header_only = tmp_path / "h.csv"
    header_only.write_text("s,abs_u\n")
    with pytest.raises(PlotError):
        load_csv(str(header_only))


def test_target_slope_in_legend(tmp_path):
    out = tmp_path / "fig.png"
    spec = PlotSpec(sample("hn_decay"), "s", "sup_H", str(out),
                    target_slope=-0.5, series_by="n")
    render(spec)
    assert out.exists()


def test_cli_render_and_check(tmp_path, capsys):
    assert main(["render", DATA, "-o", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.count("rendered") == 11
    assert main(["check", DATA]) == 0
    assert main(["render", str(tmp_path / "nowhere")]) == 2


def test_recompute_handles_exact_floor():
    """vcyl rates are reported as exact; no numeric slope to compare."""
    slopes = recompute_slopes("vcyl_convergence", sample("vcyl_convergence"))
    assert slopes == {}
    summary = json.load(open(sample("vcyl_convergence", "_summary.json")))
    rates = [c for c in summary["criteria"] if c["name"].startswith("vcyl_rate")]
    assert rates and all(c["measured"] == "exact (below floor)" for c in rates)
