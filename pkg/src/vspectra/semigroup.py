"""Linear evolution on R^3 for radially symmetric Fourier data.

The compressible unknowns ``U = (rho, d, phi)`` evolve mode by mode as
``U_hat(r, t) = exp(t A(r)) U_hat_0(r)`` and the incompressible part decays as
``exp(-alpha t)``.  L2(R^3) norms of radial Fourier profiles reduce to

    ||grad^k f||^2 = 4 pi * int_0^inf |f_hat(r)|^2 r^(2k+2) dr

which is evaluated by composite Simpson on a log + linear grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, simpson
from scipy.linalg import expm

from ._validation import check_grid
from .dispersion import (
    GAP_TOL,
    SpectralPoint,
    eigen_solve_many,
    middle_band_bound,
    symbol,
)
from .model import DerivedCoeffs, ModelParams, Stability, classify_stability
from .ratefit import RateFit, fit_exponential, fit_power

COMPONENTS = ("rho", "d", "phi")


class DecayDiagnostic(RuntimeError):
    """The data do not excite the slow branch, so the rate cannot be measured."""


# -- cutoffs ----------------------------------------------------------------

def _smooth_h(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    h0 = _smooth_h(s)
    h1 = _smooth_h(1.0 - np.asarray(s, dtype=float))
    return h0 / (h0 + h1)


def cutoff_psi(r):
    """Low-frequency cutoff: 1 on ``r <= 1``, 0 on ``r >= 2``."""
    return smooth_step(2.0 - np.asarray(r, dtype=float))


# -- quadrature -------------------------------------------------------------

def _simpson_weights(n, h):
    if n < 3 or n % 2 == 0:
        raise ValueError("composite Simpson needs an odd number (>= 3) of nodes")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def radial_grid(n=8193, r_lo=1e-6, r_split=1.0, r_max=12.0, log_fraction=0.5):
    """Log-spaced nodes on ``[r_lo, r_split]`` joined to linear nodes up to ``r_max``.

    Returns ``(grid, weights)`` with ``sum(w * g(grid)) ~ int g(r) dr``.
    Both pieces carry an odd node count; the shared node is stored once.
    """
    if r_max <= r_split:
        n_log = n if n % 2 else n + 1
        s = np.linspace(math.log(r_lo), math.log(r_max), n_log)
        grid = np.exp(s)
        return grid, _simpson_weights(n_log, s[1] - s[0]) * grid
    n_log = int(n * log_fraction)
    n_log += 1 - n_log % 2
    n_lin = n - n_log + 1
    n_lin += 1 - n_lin % 2
    s = np.linspace(math.log(r_lo), math.log(r_split), n_log)
    g_log = np.exp(s)
    w_log = _simpson_weights(n_log, s[1] - s[0]) * g_log
    g_lin = np.linspace(r_split, r_max, n_lin)
    w_lin = _simpson_weights(n_lin, g_lin[1] - g_lin[0])
    grid = np.concatenate([g_log, g_lin[1:]])
    w = np.concatenate([w_log, w_lin[1:]])
    w[n_log - 1] += w_lin[0]
    return grid, w


def _pairwise_sum(x):
    """Deterministic tree reduction along the last axis."""
    x = np.asarray(x)
    while x.shape[-1] > 1:
        if x.shape[-1] % 2:
            x = np.concatenate([x, np.zeros(x.shape[:-1] + (1,), dtype=x.dtype)], axis=-1)
        x = x[..., 0::2] + x[..., 1::2]
    return x[..., 0]


@dataclass
class RadialProfile:
    """Radial Fourier data ``(rho_hat, d_hat, phi_hat)`` on a quadrature grid."""

    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray = field(repr=False)
    low_frequency: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = check_grid(self.grid, positive=True)
        self.values = np.asarray(self.values, dtype=complex).reshape(self.grid.size, 3)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.low_frequency is False:
            self.low_frequency = bool(self.grid[np.any(self.values != 0, axis=1)].max(
                initial=0.0) <= 2.0)

    @classmethod
    def from_functions(cls, rho, d, phi, n=8193, r_lo=1e-6, r_max=None, **kw):
        """Sample callables on the default grid.

        Without ``r_max`` the grid is cut where ``|f| r`` drops below 1e-14.
        """
        if r_max is None:
            probe = np.linspace(1.0, 200.0, 20000)
            mag = sum(np.abs(np.asarray(f(probe), dtype=complex)) for f in (rho, d, phi)) * probe
            above = np.flatnonzero(mag >= 1e-14)
            r_max = float(probe[above[-1]] * 1.05) if above.size else 2.0
            r_max = max(r_max, 2.0)
        grid, w = radial_grid(n=n, r_lo=r_lo, r_max=r_max)
        values = np.stack([np.asarray(f(grid), dtype=complex) * np.ones_like(grid)
                           for f in (rho, d, phi)], axis=1)
        return cls(grid, values, w, **kw)

    def with_values(self, values, **meta):
        return RadialProfile(self.grid, values, self.weights, self.low_frequency,
                             dict(self.meta, **meta))

    def _integral(self, integrand, weights=None):
        w = self.weights if weights is None else weights
        return 4.0 * math.pi * float(_pairwise_sum(w * integrand))

    def norm(self, component=None, k=0, cutoff=None):
        """L2(R^3) norm of ``grad^k`` of a component (or of all three together).

        ``cutoff`` is ``"L"`` or ``"H"`` to take the low/high frequency part.
        """
        vals = self._select(component)
        mult = np.ones_like(self.grid)
        if cutoff == "L":
            mult = cutoff_psi(self.grid)
        elif cutoff == "H":
            mult = 1.0 - cutoff_psi(self.grid)
        integrand = (np.abs(vals) ** 2).sum(axis=1) * mult ** 2 * self.grid ** (2 * k + 2)
        return math.sqrt(max(self._integral(integrand), 0.0))

    def _select(self, component):
        if component is None:
            return self.values
        if isinstance(component, str):
            component = COMPONENTS.index(component)
        return self.values[:, [component]]

    def refinement_error(self, component=None, k=0):
        """Relative gap between the full Simpson sum and the every-other-node sum."""
        full = self.norm(component, k) ** 2
        if full == 0:
            return 0.0
        coarse = self._coarse_integral((np.abs(self._select(component)) ** 2).sum(axis=1)
                                       * self.grid ** (2 * k + 2))
        return abs(full - coarse) / full

    def _coarse_integral(self, integrand):
        # Simpson on every other node; scipy handles the uneven spacing
        return 4.0 * math.pi * float(simpson(integrand[::2], x=self.grid[::2]))

    def accepted(self, rtol=1e-6):
        return all(self.refinement_error(c) <= rtol for c in range(3)
                   if self.norm(c) > 0)


# -- propagators ------------------------------------------------------------

def mode_exp(point: SpectralPoint, t: float, method="auto"):
    """``exp(t A(r))`` for one spectral point."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if method == "expm" or (method == "auto" and point.degenerate):
        return expm(t * np.asarray(point.matrix, dtype=complex))
    if point.projectors is None:
        raise ValueError("spectral form requested at a degenerate point")
    return np.einsum("i,ijk->jk", np.exp(point.lambdas * t), point.projectors)


def mode_exp_many(coeffs: DerivedCoeffs, params: ModelParams, r, t, gap_tol=GAP_TOL):
    """``exp(t A(r))`` on an array of wavenumbers, shape ``(n, 3, 3)``."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    lam, proj, degenerate, _ = eigen_solve_many(coeffs, params, r, gap_tol=gap_tol)
    out = np.einsum("ni,nijk->njk", np.exp(lam * t), np.nan_to_num(proj))
    if np.any(degenerate):
        mats = symbol(coeffs, params, r[degenerate])
        out[degenerate] = np.stack([expm(t * m) for m in mats])
    return out


def evolve_linear(profile: RadialProfile, t, coeffs: DerivedCoeffs,
                  params: ModelParams) -> RadialProfile:
    if t < 0:
        raise ValueError("t must be non-negative")
    prop = mode_exp_many(coeffs, params, profile.grid, t)
    values = np.einsum("njk,nk->nj", prop, profile.values)
    return profile.with_values(values, t=float(t))


class LinearPropagator:
    """Cache the eigen-decomposition of a profile's grid and evolve it repeatedly."""

    def __init__(self, profile: RadialProfile, coeffs: DerivedCoeffs, params: ModelParams):
        self.profile = profile
        self.coeffs = coeffs
        self.params = params
        lam, proj, deg, _ = eigen_solve_many(coeffs, params, profile.grid)
        self._lam = lam
        self._deg = deg
        # project the data once: modal amplitudes P_i U_0
        self._modes = np.einsum("nijk,nk->nij", np.nan_to_num(proj), profile.values)
        self._mats = symbol(coeffs, params, profile.grid[deg]) if np.any(deg) else None

    def __call__(self, t) -> RadialProfile:
        if t < 0:
            raise ValueError("t must be non-negative")
        values = np.einsum("ni,nij->nj", np.exp(self._lam * t), self._modes)
        if self._mats is not None:
            u0 = self.profile.values[self._deg]
            values[self._deg] = np.stack([expm(t * m) @ u for m, u in zip(self._mats, u0)])
        return self.profile.with_values(values, t=float(t))


def omega_decay(omega0_norm, t, alpha):
    """Norm of the incompressible part: ``exp(-alpha t) ||Omega_0||``."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    return omega0_norm * np.exp(-alpha * np.asarray(t, dtype=float))


# -- decay-rate checks ------------------------------------------------------

def expected_exponent(component, k):
    """Algebraic decay exponent of the low-frequency part at derivative order k."""
    base = {"rho": -0.75, "phi": -0.75, "d": -1.25}[component]
    return base - 0.5 * k


def default_low_profile(n=8193):
    psi = cutoff_psi
    return RadialProfile.from_functions(
        lambda r: psi(r) * np.exp(-r * r),
        lambda r: 0.5 * psi(r) * r * np.exp(-r * r),
        lambda r: 0.5 * psi(r) * np.exp(-r * r),
        n=n, r_max=2.5,
    )


@dataclass
class DecayCheck:
    component: str
    k: int
    fit: RateFit
    expected: float

    @property
    def abs_error(self):
        return abs(self.fit.exponent - self.expected)

    def passes(self, tol=0.05):
        return self.abs_error <= tol

    def as_dict(self):
        return {
            "field": self.component, "k": self.k, "model": "power",
            "exponent": self.fit.exponent, "expected": self.expected,
            "exponent_fitted": self.fit.exponent, "exponent_expected": self.expected,
            "abs_error": self.abs_error, "pass": self.passes(),
            "r2": self.fit.r_squared, "window": list(self.fit.window),
        }


def decay_times(t_lo=1e2, t_hi=1e4, per_decade=40):
    decades = math.log10(t_hi / t_lo)
    return np.geomspace(t_lo, t_hi, int(round(decades * per_decade)) + 1)


def decay_series(coeffs, params, profile=None, orders=range(4), times=None, cutoff="L"):
    """Norm time series ``{(component, k): array}`` of the linear evolution."""
    if profile is None:
        profile = default_low_profile()
    if times is None:
        times = decay_times()
    prop = LinearPropagator(profile, coeffs, params)
    out = {(c, k): np.empty(len(times)) for c in COMPONENTS for k in orders}
    for j, t in enumerate(times):
        state = prop(t)
        for c in COMPONENTS:
            for k in orders:
                out[(c, k)][j] = state.norm(c, k, cutoff=cutoff)
    return np.asarray(times), out


def _check_excitation(coeffs, params, profile):
    r = profile.grid[:8]
    lam, proj, deg, _ = eigen_solve_many(coeffs, params, r)
    slow = np.argmin(np.abs(lam), axis=1)
    amp = np.array([np.abs(proj[i, slow[i]] @ profile.values[i]).max()
                    for i in range(r.size) if not deg[i]])
    if amp.size == 0 or amp.max() <= 1e-12 * max(np.abs(profile.values[:8]).max(), 1e-300):
        raise DecayDiagnostic("data have no slow-branch component near r=0; use generic data")


def decay_envelope_check(coeffs: DerivedCoeffs, params: ModelParams, profile=None,
                         orders=range(4), times=None) -> list[DecayCheck]:
    """Fit ``(1+t)^p`` to the low-frequency norms and compare with the predicted p."""
    if classify_stability(coeffs, params.nu) is not Stability.STABLE:
        raise ValueError("algebraic decay rates apply to the stable regime only")
    if profile is None:
        profile = default_low_profile()
    _check_excitation(coeffs, params, profile)
    times, series = decay_series(coeffs, params, profile, orders, times)
    checks = []
    for c in COMPONENTS:
        for k in orders:
            fit = fit_power(times, series[(c, k)])
            checks.append(DecayCheck(c, k, fit, expected_exponent(c, k)))
    return checks


@dataclass
class HighFrequencyCheck:
    fitted_rate: float
    band_rate: float
    alpha_quarter: float
    fit: RateFit

    def passes(self, rtol=0.05):
        return self.fitted_rate >= (1.0 - rtol) * self.band_rate

    def as_dict(self):
        return {"fitted_rate": self.fitted_rate, "band_rate": self.band_rate,
                "alpha_quarter": self.alpha_quarter, "pass": self.passes(),
                "r2": self.fit.r_squared}


def high_frequency_check(coeffs, params, profile=None, times=None) -> HighFrequencyCheck:
    """Exponential decay of ``(rho^H, d^H, phi^H)`` against the band rate on ``r >= 1``."""
    if profile is None:
        profile = RadialProfile.from_functions(
            lambda r: np.exp(-0.05 * r * r), lambda r: 0.3 * np.exp(-0.05 * r * r),
            lambda r: 0.2 * np.exp(-0.05 * r * r), n=8193, r_max=40.0)
    if times is None:
        times = np.linspace(5.0, 40.0, 71)
    prop = LinearPropagator(profile, coeffs, params)
    norms = np.array([prop(t).norm(None, 0, cutoff="H") for t in times])
    fit = fit_exponential(times, norms)
    band = middle_band_bound(coeffs, params, eta1=1.0, eta2=float(profile.grid[-1]))
    return HighFrequencyCheck(fitted_rate=fit.rate, band_rate=-band.max_real,
                              alpha_quarter=params.alpha / 4.0, fit=fit)


# -- Duhamel envelopes ------------------------------------------------------

_LOW_EXPONENTS = {
    # (output, source) -> base exponent; derivative order adds -k/2
    ("S1", "N1"): 0.75, ("S1", "N2"): 1.25,
    ("S2", "N1"): 1.25, ("S2", "N2"): 1.75,
}


def convolution_bound(tau, source, t, s):
    """``int_0^t (1 + t - tau)^(-s) source(tau) dtau`` by trapezoid on the samples."""
    tau = np.asarray(tau, dtype=float)
    source = np.asarray(source, dtype=float)
    mask = tau <= t
    if mask.sum() < 2:
        return 0.0
    x = tau[mask]
    y = (1.0 + t - x) ** (-s) * source[mask]
    return float(np.trapezoid(y, x))


def duhamel_envelope(tau, n1_l1, n2_l1, t, k=0, output="S1", high=None, alpha=None):
    """Reference bound on the low-frequency Duhamel term at time ``t``.

    ``n1_l1``/``n2_l1`` are sampled L1 norms of the low-frequency sources.
    With ``high`` (sampled L2 norms of the high-frequency sources) and
    ``alpha`` the exponentially damped high part is added.
    Constants are unity; only the shape is meaningful.
    """
    if output not in ("S1", "S2"):
        raise ValueError("output must be 'S1' or 'S2'")
    total = 0.0
    for src, series in (("N1", n1_l1), ("N2", n2_l1)):
        s = _LOW_EXPONENTS[(output, src)] + 0.5 * k
        total += convolution_bound(tau, series, t, s)
    if high is not None:
        if alpha is None:
            raise ValueError("alpha is required for the high-frequency envelope")
        tau = np.asarray(tau, dtype=float)
        mask = tau <= t
        y = np.exp(-0.25 * alpha * (t - tau[mask])) * np.asarray(high, dtype=float)[mask]
        total += float(np.trapezoid(y, tau[mask]))
    return total


def kernel_integral(t, s):
    """Closed form of ``int_0^t (1 + t - tau)^(-s) dtau``."""
    if s == 1.0:
        return math.log1p(t)
    return ((1.0 + t) ** (1.0 - s) - 1.0) / (1.0 - s)


def kernel_integral_quad(t, s):
    return quad(lambda x: (1.0 + t - x) ** (-s), 0.0, t, limit=200)[0]
