"""Log-log power-law regression shared by the experiment suites."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveValue


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    residual: float


def fit_loglog(lams, values) -> LogLogFit:
    """Ordinary least squares of log(value) on log(lambda).

    ``residual`` is the root-mean-square of the fit residuals in log space.

    >>> fit = fit_loglog([1, 4, 9], [2, 16, 54])
    >>> round(fit.slope, 12)
    1.5
    """
    x = np.asarray(lams, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("lams and values must be 1-D arrays of equal length")
    if len(x) < 2:
        raise ValueError("need at least two samples")
    if np.any(x <= 0) or np.any(y <= 0):
        raise NonPositiveValue("log-log fit needs strictly positive samples")
    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return LogLogFit(float(slope), float(intercept), float(np.sqrt(np.mean(resid ** 2))))
