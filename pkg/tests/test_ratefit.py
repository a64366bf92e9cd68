import numpy as np
import pytest

from neckmodes.ratefit import FitError, fit_rate


def test_pure_exponential():
    s = np.arange(10.0, 41.0, 5.0)
    fit = fit_rate(s, np.exp(-0.25 * s), target=-0.25)
    assert fit.slope == pytest.approx(-0.25, abs=1e-12)
    assert fit.passed


def test_contaminated_exponential():
    s = np.arange(10.0, 41.0, 5.0)
    fit = fit_rate(s, np.exp(-0.25 * s) * (1.0 + np.exp(-s)), target=-0.25)
    assert fit.slope == pytest.approx(-0.25, abs=1e-3)


def test_constant_samples():
    s = np.arange(0.0, 10.0, 1.0)
    fit = fit_rate(s, np.full_like(s, 3.7))
    assert fit.slope == pytest.approx(0.0, abs=1e-14)
    assert fit.passed is None


def test_sign_change_warns():
    s = np.arange(0.0, 6.0, 1.0)
    vals = np.exp(-s) * np.array([1, -1, 1, -1, 1, -1])
    fit = fit_rate(s, vals, target=-1.0)
    assert "sign" in fit.warning
    assert fit.slope == pytest.approx(-1.0, abs=1e-12)


def test_floor_branch():
    s = np.arange(0.0, 6.0, 1.0)
    vals = 1e-15 * np.ones_like(s)
    fit = fit_rate(s, vals, target=-0.25, one_sided=True, floor=1e-12)
    assert fit.exact_floor and fit.passed
    with pytest.raises(FitError):
        fit_rate(s, np.zeros_like(s), target=-0.25)


def test_sample_count_guard():
    with pytest.raises(FitError):
        fit_rate([1, 2, 3], [1, 2, 3])


def test_one_sided():
    s = np.arange(10.0, 41.0, 5.0)
    fit = fit_rate(s, np.exp(-0.5 * s), target=-0.25, one_sided=True)
    assert fit.passed  # decaying faster than required
    fit2 = fit_rate(s, np.exp(-0.1 * s), target=-0.25, one_sided=True)
    assert not fit2.passed
