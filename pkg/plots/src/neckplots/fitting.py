"""Log-linear slope fit, numerically identical to the experiment CLI's.

Least squares of log|value| against s via the same lstsq normal system;
reproducing the CLI's fitted slopes to 1e-9 is part of the test suite,
so no other fitting method may be substituted here.
"""

from __future__ import annotations

import numpy as np


def fit_slope(s, values):
    """(slope, intercept, rms residual) of log|values| against s."""
    s = np.asarray(s, dtype=float)
    mags = np.abs(np.asarray(values, dtype=float))
    if len(s) < 2:
        raise ValueError("slope fit needs at least two samples")
    if np.any(mags == 0.0):
        raise ValueError("zero sample in log-space fit")
    logs = np.log(mags)
    A = np.column_stack([s, np.ones_like(s)])
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    resid = float(np.sqrt(np.mean((logs - A @ coef) ** 2)))
    return float(coef[0]), float(coef[1]), resid
