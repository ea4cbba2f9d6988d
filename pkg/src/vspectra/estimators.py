"""scikit-learn style wrapper around the dispersion relation.

``SpectrumTransformer`` maps a column of wavenumbers to the real and
imaginary parts of the three eigenvalues, so a parameter set can sit inside
a ``Pipeline`` or be cloned and swept with ``set_params``::

    st = SpectrumTransformer(alpha=2, beta=3, nu=1).fit()
    st.theta_, st.xi0_
    st.transform([[0.5], [1.0]])      # shape (2, 6)
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dispersion import eigen_solve_many, find_growth_max, match_branches
from .model import (
    ModelParams,
    PressureLaw,
    Stability,
    classify_stability,
    derive_coeffs,
    parse_pressure,
)


class SpectrumTransformer(TransformerMixin, BaseEstimator):
    """Eigenvalues of the linear symbol at the wavenumbers in ``X[:, 0]``.

    ``fit`` only validates the parameters and locates the growth maximum;
    ``X`` is accepted for API compatibility and ignored.
    """

    def __init__(self, alpha=1.0, beta=1.0, mu=1.0, nu=1.0, gamma=1.0, rho_bar=1.0,
                 pressure="power:1,1", track_branches=True):
        self.alpha = alpha
        self.beta = beta
        self.mu = mu
        self.nu = nu
        self.gamma = gamma
        self.rho_bar = rho_bar
        self.pressure = pressure
        self.track_branches = track_branches

    def _model(self):
        law = self.pressure if isinstance(self.pressure, PressureLaw) else \
            parse_pressure(self.pressure)
        return ModelParams(alpha=self.alpha, beta=self.beta, mu=self.mu, nu=self.nu,
                           gamma=self.gamma, rho_bar=self.rho_bar, pressure=law)

    def fit(self, X=None, y=None):
        self.params_ = self._model()
        self.coeffs_ = derive_coeffs(self.params_)
        self.stability_ = classify_stability(self.coeffs_, self.params_.nu)
        if self.stability_ is Stability.UNSTABLE:
            growth = find_growth_max(self.coeffs_, self.params_)
            self.theta_, self.xi0_ = growth.Theta, growth.xi0
        else:
            self.theta_, self.xi0_ = None, None
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        check_is_fitted(self, "coeffs_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != 1:
            raise ValueError(f"expected a single wavenumber column, got {X.shape[1]}")
        r = X[:, 0]
        if np.any(r < 0):
            raise ValueError("wavenumbers must be non-negative")
        lam, _, _, _ = eigen_solve_many(self.coeffs_, self.params_, r, with_projectors=False)
        if self.track_branches and r.size > 1 and np.all(np.diff(r) > 0):
            lam = match_branches(lam)
        out = np.empty((r.size, 6))
        out[:, 0::2] = lam.real
        out[:, 1::2] = lam.imag
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array([f"{part}_lambda{i}" for i in (1, 2, 3) for part in ("re", "im")],
                        dtype=object)
