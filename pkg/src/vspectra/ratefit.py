"""Power-law and exponential envelope fits for norm time series.

Both regressors follow the scikit-learn estimator protocol so they can be
cloned, grid-searched over fit windows, and used in pipelines::

    PowerLawRegressor(window=(1e2, 1e4)).fit(t, y).exponent_
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_series


@dataclass
class RateFit:
    model: str
    exponent: float
    amplitude: float
    r_squared: float
    window: tuple
    residual_max: float

    @property
    def rate(self):
        """Decay rate ``c`` of ``exp(-c t)`` (exponential fits)."""
        return -self.exponent

    def as_dict(self, field=None, k=None, expected=None, tol=None):
        out = {
            "field": field, "k": k, "model": self.model, "exponent": self.exponent,
            "expected": expected, "r2": self.r_squared, "window": list(self.window),
        }
        if self.model == "exponential":
            out["rate"] = self.rate
        if expected is not None and tol is not None:
            out["pass"] = bool(abs(self.exponent - expected) <= tol)
        else:
            out["pass"] = None
        return out


def _line_fit(x, y):
    # centred normal equations; exact for exact lines
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    sxx = float(np.dot(dx, dx))
    if sxx == 0:
        raise ValueError("fit window has no spread in the abscissa")
    slope = float(np.dot(dx, dy)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    syy = float(np.dot(dy, dy))
    r2 = 1.0 - float(np.dot(resid, resid)) / syy if syy > 0 else 1.0
    return slope, intercept, min(max(r2, 0.0), 1.0), float(np.abs(resid).max())


class _LogLinearRegressor(RegressorMixin, BaseEstimator):
    _model = None
    min_points = 2

    def __init__(self, window=None):
        self.window = window

    def _abscissa(self, t):
        raise NotImplementedError

    def fit(self, t, y):
        t, y = check_series(t, y)
        if self.window is not None:
            lo, hi = self.window
            keep = (t >= lo) & (t <= hi)
            t, y = t[keep], y[keep]
        if t.size < self.min_points:
            raise ValueError(f"need at least {self.min_points} points in the fit window, "
                             f"got {t.size}")
        if np.any(~np.isfinite(y)) or np.any(y <= 0):
            raise ValueError("series must be positive on the fit window")
        slope, intercept, r2, rmax = _line_fit(self._abscissa(t), np.log(y))
        self.exponent_ = slope
        self.amplitude_ = float(np.exp(intercept))
        self.r_squared_ = r2
        self.residual_max_ = rmax
        self.window_ = (float(t[0]), float(t[-1]))
        return self

    def predict(self, t):
        check_is_fitted(self, "exponent_")
        x = self._abscissa(np.asarray(t, dtype=float))
        return self.amplitude_ * np.exp(self.exponent_ * x)

    def to_ratefit(self) -> RateFit:
        check_is_fitted(self, "exponent_")
        return RateFit(self._model, self.exponent_, self.amplitude_, self.r_squared_,
                       self.window_, self.residual_max_)


class PowerLawRegressor(_LogLinearRegressor):
    """``y = A (1 + t)^p``; ``exponent_`` is ``p`` (negative for decay)."""

    _model = "power"

    def _abscissa(self, t):
        return np.log1p(t)


class ExponentialRegressor(_LogLinearRegressor):
    """``y = A exp(-c t)``; ``exponent_`` is ``-c`` and ``rate_`` is ``c``."""

    _model = "exponential"

    def _abscissa(self, t):
        return t

    @property
    def rate_(self):
        return -self.exponent_


def fit_power(t, y, window=None, min_points=10) -> RateFit:
    est = PowerLawRegressor(window=window)
    est.min_points = min_points
    return est.fit(t, y).to_ratefit()


def fit_exponential(t, y, window=None, min_points=10) -> RateFit:
    est = ExponentialRegressor(window=window)
    est.min_points = min_points
    return est.fit(t, y).to_ratefit()


def generate_power(t, exponent, amplitude=1.0):
    return amplitude * (1.0 + np.asarray(t, dtype=float)) ** exponent


def last_decades(t, decades=2.0):
    """Window covering the last ``decades`` decades of ``t``."""
    t = np.asarray(t, dtype=float)
    hi = float(t[-1])
    return (max(float(t[0]), hi / 10 ** decades), hi)


# weights of the time-weighted functional: ((field, k), exponent)
WEIGHTED_TERMS = tuple(
    [(("rho_phi", k), 0.75 + 0.5 * k) for k in range(4)]
    + [(("v", k), 1.25 + 0.5 * k) for k in range(3)]
    + [(("v", 3), 2.25)]
)


def combine_pair(a, b):
    """Norm of a pair of fields from the norms of each."""
    return np.hypot(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def weighted_sup(t, series) -> np.ndarray:
    """Running supremum of the time-weighted decay functional.

    ``series`` maps ``("rho_phi", k)`` for k = 0..3 (norm of the pair) and
    ``("v", k)`` for k = 0..3 to arrays sampled at ``t``.  Returns ``M`` on
    the same samples.
    """
    t = np.asarray(t, dtype=float)
    missing = [key for key, _ in WEIGHTED_TERMS if key not in series]
    if missing:
        raise ValueError(f"missing series for {missing}")
    total = np.zeros_like(t)
    for key, power in WEIGHTED_TERMS:
        values = np.asarray(series[key], dtype=float)
        if values.shape != t.shape:
            raise ValueError(f"series {key} has shape {values.shape}, expected {t.shape}")
        total += (1.0 + t) ** power * values
    return np.maximum.accumulate(total)
