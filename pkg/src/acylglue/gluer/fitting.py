"""Least-squares decay-rate fits on a log scale, with confidence intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import InvalidInputError


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    ci95: float  # half-width of the 95% confidence interval on the slope
    n_used: int

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "ci95": self.ci95,
            "n_used": self.n_used,
        }


def fit_log_linear(t: np.ndarray, values: np.ndarray, min_points: int = 4) -> FitResult:
    """Fit log(values) = intercept + slope * t, dropping nonpositive values."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 1e-300
    t, values = t[keep], values[keep]
    n = len(t)
    if n < min_points:
        raise InvalidInputError(
            f"need at least {min_points} positive samples for a decay fit, got {n}"
        )
    y = np.log(values)
    tbar = t.mean()
    sxx = float(np.sum((t - tbar) ** 2))
    if sxx == 0.0:
        raise InvalidInputError("degenerate grid: all abscissae equal")
    slope = float(np.sum((t - tbar) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * tbar)
    resid = y - (intercept + slope * t)
    if n > 2:
        s2 = float(np.sum(resid**2) / (n - 2))
        stderr = float(np.sqrt(s2 / sxx))
        ci95 = float(stats.t.ppf(0.975, n - 2) * stderr)
    else:
        stderr = float("inf")
        ci95 = float("inf")
    return FitResult(slope=slope, intercept=intercept, stderr=stderr, ci95=ci95, n_used=n)
