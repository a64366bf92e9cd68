"""Log-linear rate estimation for exponential decay laws.

A quantity following C * e^{slope * s} appears affine in log space; the
slope is recovered by least squares over the sample range.  Targets are
checked either two-sided (|slope - target| within a relative tolerance)
or one-sided (decay at least as fast as a floor).  Samples that sit at
the numerical floor carry no rate information; fits whose values are
all below an explicit floor are marked exact ("decays faster than any
measurable rate": the zero function satisfies every decay bound).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    """Raised when samples cannot support a rate fit."""


@dataclass
class RateFit:
    s: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual: float            # rms deviation of log|value| from the fit
    target: float | None = None
    tolerance: float = 0.03
    one_sided: bool = False
    passed: bool | None = None
    exact_floor: bool = False  # all samples below the declared floor
    warning: str = ""

    def summary(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "target": self.target,
            "tolerance": self.tolerance,
            "one_sided": self.one_sided,
            "pass": self.passed,
            "exact_floor": self.exact_floor,
            "warning": self.warning,
        }


def fit_rate(s, values, target: float | None = None, tolerance: float = 0.03,
             one_sided: bool = False, floor: float | None = None) -> RateFit:
    """Least-squares slope of log|value| against s.

    target is the expected slope (signed).  With one_sided=True the fit
    passes when the measured decay is at least as fast: slope <= target
    + |target| * tolerance.  floor declares the resolution limit of the
    values; if every |value| falls below it, the quantity is zero to
    numerical precision and any decay bound holds vacuously (pass, with
    exact_floor set).
    """
    s = np.asarray(s, dtype=float)
    values = np.asarray(values)
    if len(s) < 5:
        raise FitError(f"rate fit needs >= 5 samples, got {len(s)}")
    if len(s) != len(values):
        raise FitError("sample arrays disagree in length")
    mags = np.abs(values)

    warning = ""
    if np.isrealobj(values) and np.any(values < 0) and np.any(values > 0):
        warning = "sign changes in samples; fitted |value|"

    if floor is not None and np.all(mags <= floor):
        fit = RateFit(s, mags, slope=-np.inf, intercept=-np.inf, residual=0.0,
                      target=target, tolerance=tolerance, one_sided=one_sided,
                      exact_floor=True, warning=warning)
        fit.passed = True if target is not None else None
        return fit
    if np.any(mags == 0.0):
        raise FitError("zero sample without a declared floor")

    logs = np.log(mags)
    A = np.column_stack([s, np.ones_like(s)])
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    residual = float(np.sqrt(np.mean((logs - A @ coef) ** 2)))
    fit = RateFit(s, mags, slope, intercept, residual, target, tolerance,
                  one_sided, warning=warning)
    if target is not None:
        if one_sided:
            fit.passed = slope <= target + abs(target) * tolerance
        else:
            fit.passed = abs(slope - target) <= abs(target) * tolerance
    return fit
