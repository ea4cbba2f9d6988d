"""Unstable linear solutions from a Fourier bump around the fastest-growing shell.

Data are built as an exact eigen-solution of the symbol on a thin shell
``| |xi| - xi0 | <= 2 zeta_bar`` where the dominant eigenvalue stays within
``ThetaBar`` of its maximum ``Theta``.  The evolved norms are then squeezed
between ``exp((Theta - ThetaBar) t)`` and ``exp(Theta t)`` times the initial
norm, component by component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dispersion import (
    GrowthSummary,
    char_coeffs,
    find_growth_max,
    match_branches,
    solve_cubic,
)
from .model import DerivedCoeffs, ModelParams, Stability, classify_stability
from .semigroup import COMPONENTS, RadialProfile, _simpson_weights, mode_exp_many


class RegimeError(ValueError):
    pass


class CertificateError(AssertionError):
    pass


def _roots(coeffs, params, r):
    return solve_cubic(*char_coeffs(coeffs, params, r))


class DominantBranch:
    """The eigenvalue attaining ``Theta`` at ``xi0``, followed by continuity."""

    def __init__(self, coeffs, params, xi0, half_width, n=4001):
        self.coeffs, self.params = coeffs, params
        left = np.linspace(xi0, max(xi0 - half_width, 1e-12), n)
        right = np.linspace(xi0, xi0 + half_width, n)
        top = None
        pieces = []
        for side in (left, right):
            lam = match_branches(_roots(coeffs, params, side))
            if top is None:
                top = int(np.argmax(lam[0].real))
                if lam[0, top].imag < 0:
                    # prefer the upper member of a conjugate pair
                    top = int(np.argmin(np.abs(lam[0] - np.conj(lam[0, top]))))
            pieces.append((side, lam[:, top]))
        (lg, lv), (rg, rv) = pieces
        self.grid = np.concatenate([lg[::-1], rg[1:]])
        self.values = np.concatenate([lv[::-1], rv[1:]])

    def __call__(self, r):
        """Eigenvalue at ``r`` closest to the tracked branch."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        ref_re = np.interp(r, self.grid, self.values.real)
        ref_im = np.interp(r, self.grid, self.values.imag)
        ref = ref_re + 1j * ref_im
        lam = _roots(self.coeffs, self.params, r)
        pick = np.argmin(np.abs(lam - ref[:, None]), axis=1)
        return lam[np.arange(r.size), pick]


@dataclass
class BumpData:
    xi0: float
    zeta_bar: float
    theta_bar: float
    Theta: float
    profile: RadialProfile
    lambda0: np.ndarray = field(repr=False)
    psi_norm: float = 1.0

    @property
    def support(self):
        return (self.xi0 - 2 * self.zeta_bar, self.xi0 + 2 * self.zeta_bar)

    def initial_norms(self):
        return {c: self.profile.norm(c) for c in COMPONENTS}

    def evolve(self, t):
        """Single-branch law ``U(t) = exp(lambda0 t) U_0``."""
        return self.profile.with_values(np.exp(self.lambda0 * t)[:, None] * self.profile.values,
                                        t=float(t))

    def d_lower_bound(self, coeffs, use_theta=True):
        """``Theta / (a (xi0 + 2 zeta_bar))`` (or with ``Theta - ThetaBar``)."""
        growth = self.Theta if use_theta else self.Theta - self.theta_bar
        return growth / (coeffs.a * (self.xi0 + 2 * self.zeta_bar))


def mollifier(s):
    """``exp(-1 / (1 - s^2))`` on ``|s| < 1``, zero elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _bump_profile(coeffs, params, xi0, zeta_bar, branch, n):
    lo, hi = xi0 - 2 * zeta_bar, xi0 + 2 * zeta_bar
    n = n + 1 - n % 2
    grid = np.linspace(lo, hi, n)
    w = _simpson_weights(n, grid[1] - grid[0])
    psi = mollifier((grid - xi0) / (2 * zeta_bar))
    psi_norm = math.sqrt(4 * math.pi * float(np.dot(w, psi ** 2 * grid ** 2)))
    lam0 = branch(grid)
    denom = lam0 + params.nu + params.mu * grid ** 2
    if np.min(np.abs(denom)) <= 1e-12 * max(1.0, params.nu):
        raise RegimeError("phi denominator vanishes on the bump support")
    values = np.stack([
        psi / psi_norm,
        -lam0 * psi / (coeffs.a * grid * psi_norm),
        params.gamma * psi / (denom * psi_norm),
    ], axis=1)
    return RadialProfile(grid, values, w, low_frequency=False,
                         meta={"xi0": xi0, "zeta_bar": zeta_bar}), lam0, psi_norm


def build_bump(coeffs: DerivedCoeffs, params: ModelParams, theta_bar, growth=None,
               zeta_bar=None, n=4097) -> BumpData:
    """Unstable data around ``xi0`` with growth margin ``theta_bar`` in ``(0, Theta/2)``.

    ``zeta_bar`` defaults to the largest radius ``<= xi0/4`` for which the
    dominant real part stays ``>= Theta - theta_bar`` on the support; a
    smaller value may be passed explicitly.
    """
    if classify_stability(coeffs, params.nu) is not Stability.UNSTABLE:
        raise RegimeError("unstable data exist only when a*nu - b*gamma < 0")
    if growth is None:
        growth = find_growth_max(coeffs, params)
    theta, xi0 = growth.Theta, growth.xi0
    if not 0 < theta_bar < theta / 2:
        raise ValueError(f"theta_bar must lie in (0, Theta/2) = (0, {theta / 2:.6g})")
    branch = DominantBranch(coeffs, params, xi0, xi0 / 2)
    level = theta - theta_bar
    zmax = largest_zeta(branch, xi0, level)
    if zeta_bar is None:
        zeta_bar = zmax
    elif zeta_bar > zmax * (1 + 1e-12):
        raise ValueError(f"zeta_bar={zeta_bar:.6g} exceeds the admissible {zmax:.6g}")
    profile, lam0, psi_norm = _bump_profile(coeffs, params, xi0, zeta_bar, branch, n)
    bump = BumpData(xi0=xi0, zeta_bar=zeta_bar, theta_bar=theta_bar, Theta=theta,
                    profile=profile, lambda0=lam0, psi_norm=psi_norm)
    _assert_invariants(bump, coeffs)
    return bump


def largest_zeta(branch: DominantBranch, xi0, level):
    """Largest ``zeta <= xi0/4`` with ``Re lambda0 >= level`` on ``|r - xi0| <= 2 zeta``."""
    f = lambda r: float(branch(r)[0].real) - level  # noqa: E731
    g = branch.grid
    re = branch.values.real - level
    i0 = int(np.argmin(np.abs(g - xi0)))
    reach = []
    for step in (-1, 1):
        idx = np.arange(i0, -1 if step < 0 else g.size, step)
        below = idx[re[idx] < 0]
        if below.size == 0:
            reach.append(abs(g[idx[-1]] - xi0))
            continue
        j = below[0]
        prev = j - step
        edge = brentq(f, min(g[prev], g[j]), max(g[prev], g[j]), xtol=1e-15, rtol=1e-14)
        reach.append(abs(edge - xi0))
    half = 0.5 * min(reach)
    # stay strictly inside the admissible set
    return min(xi0 / 4.0, half * (1.0 - 1e-9))


def _assert_invariants(bump: BumpData, coeffs):
    re = bump.lambda0.real
    if re.min() < bump.Theta - bump.theta_bar - 1e-12 * max(1.0, bump.Theta):
        raise CertificateError("Re lambda0 drops below Theta - ThetaBar on the support")
    if bump.zeta_bar > bump.xi0 / 4 * (1 + 1e-12):
        raise CertificateError("zeta_bar exceeds xi0 / 4")
    norms = bump.initial_norms()
    if not all(v > 0 for v in norms.values()):
        raise CertificateError("an initial component norm vanishes")


@dataclass
class SandwichReport:
    passed: bool
    worst_ratio: float
    worst_time: float
    worst_component: str
    lower_ratio_min: float
    upper_ratio_max: float
    tight_ratio: dict
    mode_exp_mismatch: float
    times: list

    def as_dict(self):
        return dict(self.__dict__, pass_=self.passed)


def sandwich_check(bump: BumpData, coeffs: DerivedCoeffs, params: ModelParams, times,
                   rtol=1e-6, n_cross=10, seed=0) -> SandwichReport:
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    if np.any(bump.Theta * times > 40):
        raise ValueError("Theta * t must stay <= 40")
    theta, tb = bump.Theta, bump.theta_bar
    base = bump.initial_norms()
    worst = (math.inf, 0.0, "rho")
    lo_min, up_max = math.inf, 0.0
    tight = {}
    for t in times:
        state = bump.evolve(t)
        for c in COMPONENTS:
            nrm = state.norm(c)
            lower = nrm / (math.exp((theta - tb) * t) * base[c])
            upper = nrm / (math.exp(theta * t) * base[c])
            lo_min = min(lo_min, lower)
            up_max = max(up_max, upper)
            score = min(lower, 1.0 / upper)
            if score < worst[0]:
                worst = (score, float(t), c)
            if t == times.max():
                tight[c] = upper
    mismatch = _cross_check(bump, coeffs, params, float(times.max()), n_cross, seed)
    passed = bool(worst[0] >= 1.0 - rtol)
    return SandwichReport(passed=passed, worst_ratio=worst[0], worst_time=worst[1],
                          worst_component=worst[2], lower_ratio_min=lo_min,
                          upper_ratio_max=up_max, tight_ratio=tight,
                          mode_exp_mismatch=mismatch, times=times.tolist())


def _cross_check(bump, coeffs, params, t, n, seed):
    """Max relative gap between the single-branch law and the full propagator."""
    rng = np.random.default_rng(seed)
    grid = bump.profile.grid
    inner = np.flatnonzero(np.abs(grid - bump.xi0) < bump.zeta_bar)
    idx = rng.choice(inner, size=min(n, inner.size), replace=False)
    prop = mode_exp_many(coeffs, params, grid[idx], t)
    full = np.einsum("njk,nk->nj", prop, bump.profile.values[idx])
    single = np.exp(bump.lambda0[idx] * t)[:, None] * bump.profile.values[idx]
    scale = np.abs(single).max(axis=1)
    return float((np.abs(full - single).max(axis=1) / scale).max())


@dataclass(frozen=True)
class EscapePrediction:
    delta: float
    epsilon0: float
    T_delta: float


def predict_escape(Theta, epsilon0, delta) -> EscapePrediction:
    """Escape time ``ln(2 epsilon0 / delta) / Theta``."""
    if Theta <= 0:
        raise ValueError("Theta must be positive")
    if not 0 < delta < 2 * epsilon0:
        raise ValueError("need 0 < delta < 2 * epsilon0 for a positive escape time")
    return EscapePrediction(delta, epsilon0, math.log(2 * epsilon0 / delta) / Theta)


def certify(coeffs, params, theta_bar=None, t_max=None, n_times=20, growth=None):
    """Build the bump and run the sandwich check; returns a JSON-ready dict."""
    if growth is None:
        growth = find_growth_max(coeffs, params)
    if theta_bar is None:
        theta_bar = growth.Theta / 4
    if t_max is None:
        t_max = 20.0 / growth.Theta
    bump = build_bump(coeffs, params, theta_bar, growth=growth)
    times = np.linspace(0.0, t_max, n_times)
    rep = sandwich_check(bump, coeffs, params, times)
    return {
        "Theta": growth.Theta, "xi0": growth.xi0, "zeta_bar": bump.zeta_bar,
        "theta_bar": theta_bar, "pass": rep.passed, "worst_ratio": rep.worst_ratio,
        "worst_time": rep.worst_time, "worst_component": rep.worst_component,
        "mode_exp_mismatch": rep.mode_exp_mismatch,
    }


__all__ = [
    "BumpData", "CertificateError", "DominantBranch", "EscapePrediction", "GrowthSummary",
    "RegimeError", "SandwichReport", "build_bump", "certify", "largest_zeta", "mollifier",
    "predict_escape", "sandwich_check",
]
