"""Fourier symbol, cubic dispersion relation, projectors and growth maximum.

Per radial wavenumber ``r = |xi|`` the compressible subsystem is governed by
the 3x3 symbol

    A(r) = [[0,      -a r,  0            ],
            [a r,    -alpha, -b r        ],
            [gamma,  0,     -(nu + mu r^2)]]

whose characteristic polynomial is

    F(r, lam) = lam^3 + (mu r^2 + alpha + nu) lam^2
                + ((a^2 + alpha mu) r^2 + alpha nu) lam
                + a^2 mu r^4 + a (a nu - b gamma) r^2.

Everything here is vectorised over ``r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from ._validation import check_grid, check_nonneg
from .model import DerivedCoeffs, ModelParams, Stability, classify_stability

GAP_TOL = 1e-7


class DomainError(ValueError):
    pass


class WindowError(ValueError):
    """Growth maximum sits on the search window boundary."""


# -- symbol and polynomial --------------------------------------------------

def symbol(coeffs: DerivedCoeffs, params: ModelParams, r):
    """Symbol matrix ``A(r)``; shape ``(3, 3)`` for scalar r, else ``(n, 3, 3)``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radial wavenumber must be non-negative")
    a, b = coeffs.a, coeffs.b
    m = np.zeros(r_arr.shape + (3, 3))
    m[..., 0, 1] = -a * r_arr
    m[..., 1, 0] = a * r_arr
    m[..., 1, 1] = -params.alpha
    m[..., 1, 2] = -b * r_arr
    m[..., 2, 0] = params.gamma
    m[..., 2, 2] = -(params.nu + params.mu * r_arr ** 2)
    return m


def char_coeffs(coeffs: DerivedCoeffs, params: ModelParams, r):
    """Monic cubic coefficients ``(c2, c1, c0)`` of ``F(r, .)``."""
    r2 = np.asarray(r, dtype=float) ** 2
    a, b = coeffs.a, coeffs.b
    al, mu, nu, ga = params.alpha, params.mu, params.nu, params.gamma
    c2 = mu * r2 + al + nu
    c1 = (a * a + al * mu) * r2 + al * nu
    c0 = a * a * mu * r2 * r2 + a * (a * nu - b * ga) * r2
    return c2, c1, c0


def companion_roots(c2, c1, c0):
    """Roots by dense eigensolve of the companion matrix (batched)."""
    c2, c1, c0 = np.broadcast_arrays(*(np.atleast_1d(np.asarray(c, float)) for c in (c2, c1, c0)))
    comp = np.zeros(c2.shape + (3, 3))
    comp[..., 0, :] = np.stack([-c2, -c1, -c0], axis=-1)
    comp[..., 1, 0] = 1.0
    comp[..., 2, 1] = 1.0
    return np.linalg.eigvals(comp)


def _newton_polish(roots, c2, c1, c0, steps=2):
    lam = roots
    for _ in range(steps):
        f = ((lam + c2[:, None]) * lam + c1[:, None]) * lam + c0[:, None]
        df = (3.0 * lam + 2.0 * c2[:, None]) * lam + c1[:, None]
        ok = df != 0
        delta = np.where(ok, f / np.where(ok, df, 1.0), 0.0)
        lam = lam - delta
    return lam


def solve_cubic(c2, c1, c0, polish=2, degenerate_rtol=1e-12):
    """All three roots of ``x^3 + c2 x^2 + c1 x + c0`` with real coefficients.

    Closed form (trigonometric for three real roots, Cardano otherwise),
    Newton-polished on the original polynomial.  Near multiple roots the
    closed form is unreliable and the companion eigenvalues are used.
    Returns an ``(n, 3)`` complex array; complex roots come as exact
    conjugate pairs.
    """
    c2, c1, c0 = np.broadcast_arrays(*(np.atleast_1d(np.asarray(c, float)) for c in (c2, c1, c0)))
    c2, c1, c0 = (np.ascontiguousarray(c).ravel() for c in (c2, c1, c0))
    n = c2.size
    shift = c2 / 3.0
    p = c1 - c2 * shift
    q = (2.0 * shift * shift - c1) * shift + c0
    # scale-relative discriminant of the depressed cubic
    half_q = 0.5 * q
    third_p = p / 3.0
    disc = half_q * half_q + third_p ** 3
    scale = np.maximum(half_q * half_q, np.abs(third_p) ** 3)
    near = np.abs(disc) <= degenerate_rtol * np.where(scale > 0, scale, 1.0)

    roots = np.empty((n, 3), dtype=complex)

    three_real = (disc < 0) & ~near
    if np.any(three_real):
        pp = p[three_real]
        qq = q[three_real]
        m = 2.0 * np.sqrt(-pp / 3.0)
        arg = np.clip(3.0 * qq / (pp * m), -1.0, 1.0)
        theta = np.arccos(arg) / 3.0
        k = np.arange(3)[None, :]
        x = m[:, None] * np.cos(theta[:, None] - 2.0 * np.pi * k / 3.0)
        roots[three_real] = x - shift[three_real, None]

    one_real = (disc >= 0) & ~near
    if np.any(one_real):
        hq = half_q[one_real]
        sd = np.sqrt(disc[one_real])
        # pick the sign that avoids cancellation
        w = -hq - np.copysign(sd, hq)
        u = np.cbrt(w)
        v = np.where(u != 0, -third_p[one_real] / np.where(u != 0, u, 1.0), 0.0)
        x1 = u + v
        re = -0.5 * x1
        im = 0.5 * math.sqrt(3.0) * (u - v)
        s = shift[one_real]
        roots[one_real, 0] = x1 - s
        roots[one_real, 1] = re - s + 1j * im
        roots[one_real, 2] = re - s - 1j * im

    if np.any(near):
        roots[near] = companion_roots(c2[near], c1[near], c0[near])

    if polish:
        roots = _newton_polish(roots, c2, c1, c0, steps=polish)
    return _canonicalize(roots)


def _canonicalize(roots):
    """Snap nearly-real roots to the real axis and force conjugate pairs."""
    out = roots.copy()
    mag = np.maximum(1.0, np.abs(roots).max(axis=1, keepdims=True))
    tiny = np.abs(roots.imag) <= 1e-14 * mag
    out[tiny] = out[tiny].real
    nonreal = np.abs(out.imag) > 0
    pair_rows = nonreal.sum(axis=1) >= 2
    for i in np.flatnonzero(pair_rows):
        row = out[i]
        idx = np.flatnonzero(row.imag != 0)
        if idx.size < 2:
            continue
        j, k = idx[0], idx[1]
        z = 0.5 * (row[j] + np.conj(row[k]))
        if z.imag < 0:
            z = np.conj(z)
        real_idx = [m for m in range(3) if m not in (j, k)]
        out[i] = np.array([z, np.conj(z), row[real_idx[0]].real])
    return out


# -- spectral points --------------------------------------------------------

@dataclass
class SpectralPoint:
    r: float
    lambdas: np.ndarray
    projectors: np.ndarray | None
    degenerate: bool
    min_gap: float
    matrix: np.ndarray = field(repr=False, default=None)


def _pairwise_gap(lam):
    d01 = np.abs(lam[..., 0] - lam[..., 1])
    d02 = np.abs(lam[..., 0] - lam[..., 2])
    d12 = np.abs(lam[..., 1] - lam[..., 2])
    return np.minimum(np.minimum(d01, d02), d12)


def projectors_from(mats, lam):
    """Spectral projectors ``P_i = prod_{j != i} (A - lam_j I) / (lam_i - lam_j)``.

    ``mats`` is ``(n, 3, 3)``, ``lam`` is ``(n, 3)``; returns ``(n, 3, 3, 3)``
    indexed ``[point, i, row, col]``.
    """
    n = lam.shape[0]
    eye = np.eye(3)
    shifted = mats[:, None, :, :].astype(complex) - lam[:, :, None, None] * eye
    out = np.empty((n, 3, 3, 3), dtype=complex)
    for i in range(3):
        j, k = [m for m in range(3) if m != i]
        num = shifted[:, j] @ shifted[:, k]
        den = (lam[:, i] - lam[:, j]) * (lam[:, i] - lam[:, k])
        out[:, i] = num / den[:, None, None]
    return out


def eigen_solve_many(coeffs: DerivedCoeffs, params: ModelParams, r, gap_tol=GAP_TOL,
                     with_projectors=True):
    """Vectorised eigen-solve on an array of wavenumbers.

    Returns ``(lam, proj, degenerate, min_gap)``; ``proj`` entries at
    degenerate points are NaN.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    check_nonneg(r, "r")
    c2, c1, c0 = char_coeffs(coeffs, params, r)
    lam = solve_cubic(c2, c1, c0)
    gap = _pairwise_gap(lam)
    degenerate = gap < gap_tol * np.maximum(1.0, np.abs(lam).max(axis=1))
    proj = None
    if with_projectors:
        mats = symbol(coeffs, params, r)
        safe = lam.copy()
        # keep the division finite at degenerate points, then blank them
        safe[degenerate] = np.array([0.0, 1.0, 2.0])
        proj = projectors_from(mats, safe)
        proj[degenerate] = np.nan
    return lam, proj, degenerate, gap


def eigen_solve(m, coeffs: DerivedCoeffs = None, params: ModelParams = None,
                gap_tol=GAP_TOL) -> SpectralPoint:
    """Eigen-decompose one symbol matrix.

    ``m`` may be a 3x3 symbol matrix (``r`` and the coefficients are read
    off its entries) or a wavenumber together with ``coeffs`` and
    ``params``.
    """
    if np.ndim(m) == 0:
        r = float(m)
        mat = symbol(coeffs, params, r)
    else:
        mat = np.asarray(m, dtype=float)
        r = None
    # read the cubic straight from the matrix entries
    a_r = mat[1, 0]
    alpha = -mat[1, 1]
    b_r = -mat[1, 2]
    gamma = mat[2, 0]
    s = -mat[2, 2]
    c2 = alpha + s
    c1 = alpha * s + a_r * a_r
    c0 = a_r * a_r * s - a_r * b_r * gamma
    if r is None:
        r = float(a_r / coeffs.a) if coeffs is not None and coeffs.a else float("nan")
    lam = solve_cubic(c2, c1, c0)[0]
    gap = float(_pairwise_gap(lam))
    degenerate = bool(gap < gap_tol * max(1.0, float(np.abs(lam).max())))
    proj = None if degenerate else projectors_from(mat[None], lam[None])[0]
    return SpectralPoint(r=r, lambdas=lam, projectors=proj, degenerate=degenerate,
                         min_gap=gap, matrix=mat)


def vieta_residuals(coeffs, params, r, lam):
    """Relative residuals of the three symmetric-function identities."""
    c2, c1, c0 = char_coeffs(coeffs, params, r)
    l1, l2, l3 = lam[..., 0], lam[..., 1], lam[..., 2]
    s1 = l1 + l2 + l3
    s2 = l1 * l2 + l2 * l3 + l3 * l1
    s3 = l1 * l2 * l3

    def rel(lhs, rhs):
        den = np.where(np.abs(rhs) > 0, np.abs(rhs), 1.0)
        return np.abs(lhs - rhs) / den

    return rel(s1, -c2), rel(s2, c1), rel(s3, -c0)


# -- branches ---------------------------------------------------------------

def low_freq_prediction(coeffs, params, r):
    """Leading-order small-|xi| eigenvalues as an ``(n, 3)`` array (branches 1, 2, 3)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    a, b = coeffs.a, coeffs.b
    al, mu, nu, ga = params.alpha, params.mu, params.nu, params.gamma
    r2 = r * r
    l3 = -a * (a * nu - b * ga) / (al * nu) * r2
    if math.isclose(al, nu, rel_tol=1e-12):
        im = math.sqrt(a * b * ga / al) * r
        re = -al + 0.5 * (a * (a * al - b * ga) / al ** 2 - mu) * r2
        return np.stack([re + 1j * im, re - 1j * im, l3 + 0j], axis=1)
    l1 = -al + (a * a * (al - nu) + a * b * ga) / (al * (al - nu)) * r2
    l2 = -nu - (mu * nu * (al - nu) + a * b * ga) / (nu * (al - nu)) * r2
    return np.stack([l1 + 0j, l2 + 0j, l3 + 0j], axis=1)


def high_freq_prediction(coeffs, params, r):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    a = coeffs.a
    al, mu, nu = params.alpha, params.mu, params.nu
    return np.stack([1j * a * r - al / 2, -1j * a * r - al / 2, -mu * r * r - nu + 0j], axis=1)


def _best_assignment(prev, cur):
    """Permutation ``perm`` with ``cur[perm]`` matched to ``prev``.

    ``cur`` is visited in a canonical order (real part, then imaginary part)
    so that equal-cost ties, as where two real roots merge into a conjugate
    pair, resolve the same way whatever order the solver returned them in.
    """
    order = np.lexsort((cur.imag, cur.real))
    cost = np.abs(prev[:, None] - cur[order][None, :])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(3, dtype=int)
    perm[rows] = order[cols]
    return perm


@dataclass
class SpectralBranch:
    """Eigenvalues on a grid, columns matched for continuity.

    ``values[:, i]`` is branch ``i + 1``.
    """

    grid: np.ndarray
    values: np.ndarray
    min_gap: np.ndarray
    degenerate: np.ndarray

    def branch(self, label):
        return self.values[:, label - 1]


def match_branches(lam):
    """Reorder the columns of ``lam`` (n, 3) so adjacent rows pair up optimally."""
    out = np.empty_like(lam)
    out[0] = lam[0]
    for i in range(1, lam.shape[0]):
        perm = _best_assignment(out[i - 1], lam[i])
        out[i] = lam[i][perm]
    return out


def build_branches(coeffs: DerivedCoeffs, params: ModelParams, grid) -> SpectralBranch:
    grid = check_grid(grid)
    lam, _, degenerate, gap = eigen_solve_many(coeffs, params, grid, with_projectors=False)
    tracked = match_branches(lam)
    # label by the small-|xi| asymptotics at the first node
    pred = low_freq_prediction(coeffs, params, grid[:1])[0]
    perm = _best_assignment(pred, tracked[0])
    labelled = tracked[:, perm]
    return SpectralBranch(grid=grid, values=labelled, min_gap=gap, degenerate=degenerate)


def branch_labels_at_high(branches: SpectralBranch, coeffs, params):
    """Index (0-based) of the column closest to each high-frequency prediction."""
    pred = high_freq_prediction(coeffs, params, branches.grid[-1:])[0]
    return _best_assignment(pred, branches.values[-1])


# -- expansion checks -------------------------------------------------------

@dataclass
class ExpansionCoeff:
    branch: int
    kind: str
    fitted: float
    expected: float
    rel_error: float
    abs_error: float


@dataclass
class ExpansionReport:
    regime: str
    window: tuple
    entries: list
    shrunk: bool = False

    def as_dict(self):
        return {
            "regime": self.regime,
            "window": list(self.window),
            "shrunk": self.shrunk,
            "entries": [e.__dict__ for e in self.entries],
        }


def default_eta(coeffs, params):
    a, b = coeffs.a, coeffs.b
    al, nu, mu = params.alpha, params.nu, params.mu
    eta1 = 0.01 * min(1.0, al, nu) / max(1.0, a, b)
    eta2 = 100.0 * max(1.0, a, al, nu, math.sqrt(nu / mu))
    return eta1, eta2


def _fit_slope(x, y):
    """Least squares through the origin ``y = c x``."""
    return float(np.dot(x, y) / np.dot(x, x))


def verify_low_freq_expansion(branches: SpectralBranch, coeffs, params) -> ExpansionReport:
    """Fit the leading small-|xi| coefficients of each branch.

    For ``alpha != nu`` each branch is fitted as ``lam(r) - lam(0) = c r^2``.
    For ``alpha == nu`` the complex pair is fitted as ``Im lam = c r`` and
    branch 3 as ``c r^2``.
    """
    grid = branches.grid
    keep = ~branches.degenerate
    shrunk = bool(not keep.all())
    grid_k = grid[keep]
    vals = branches.values[keep]
    if grid_k.size < 2:
        raise DomainError("no non-degenerate points inside the low-frequency window")
    a, b = coeffs.a, coeffs.b
    al, mu, nu, ga = params.alpha, params.mu, params.nu, params.gamma
    r2 = grid_k ** 2
    entries = []
    lam3_c = -a * (a * nu - b * ga) / (al * nu)
    if math.isclose(al, nu, rel_tol=1e-12):
        regime = "alpha==nu"
        im_c = math.sqrt(a * b * ga / al)
        for label in (1, 2):
            fitted = _fit_slope(grid_k, np.abs(vals[:, label - 1].imag))
            entries.append(_entry(label, "imag_linear", fitted, im_c))
        re_c = 0.5 * (a * (a * al - b * ga) / al ** 2 - mu)
        for label in (1, 2):
            fitted = _fit_slope(r2, vals[:, label - 1].real + al)
            entries.append(_entry(label, "real_quadratic", fitted, re_c))
        fitted = _fit_slope(r2, vals[:, 2].real)
        entries.append(_entry(3, "quadratic", fitted, -a * (a * al - b * ga) / al ** 2))
    else:
        regime = "alpha!=nu"
        expected = [
            (a * a * (al - nu) + a * b * ga) / (al * (al - nu)),
            -(mu * nu * (al - nu) + a * b * ga) / (nu * (al - nu)),
            lam3_c,
        ]
        base = [-al, -nu, 0.0]
        for label in (1, 2, 3):
            fitted = _fit_slope(r2, vals[:, label - 1].real - base[label - 1])
            entries.append(_entry(label, "quadratic", fitted, expected[label - 1]))
    return ExpansionReport(regime=regime, window=(float(grid_k[0]), float(grid_k[-1])),
                           entries=entries, shrunk=shrunk)


def _entry(label, kind, fitted, expected):
    abs_err = abs(fitted - expected)
    rel = abs_err / abs(expected) if expected != 0 else abs_err
    return ExpansionCoeff(branch=label, kind=kind, fitted=fitted, expected=expected,
                          rel_error=rel, abs_error=abs_err)


@dataclass
class HighFreqReport:
    slope_pair: float
    slope_real: float
    re_pair_limit: float
    lam3_over_r2: float
    window: tuple

    def passes(self, tol=0.2):
        return abs(self.slope_pair + 1.0) <= tol and abs(self.slope_real + 2.0) <= tol

    def as_dict(self):
        return dict(self.__dict__, window=list(self.window), pass_=self.passes())


def verify_high_freq_expansion(branches: SpectralBranch, coeffs, params) -> HighFreqReport:
    grid = branches.grid
    cols = branch_labels_at_high(branches, coeffs, params)
    pred = high_freq_prediction(coeffs, params, grid)
    pair = branches.values[:, cols[0]]
    res_pair = np.abs(pair - pred[:, 0])
    lam3 = branches.values[:, cols[2]]
    res3 = np.abs(lam3 - pred[:, 2])
    logr = np.log(grid)
    slope_pair = float(np.polyfit(logr, np.log(res_pair), 1)[0])
    slope_real = float(np.polyfit(logr, np.log(res3), 1)[0])
    return HighFreqReport(
        slope_pair=slope_pair,
        slope_real=slope_real,
        re_pair_limit=float(pair[-1].real),
        lam3_over_r2=float(lam3[-1].real / grid[-1] ** 2),
        window=(float(grid[0]), float(grid[-1])),
    )


# -- growth maximum ---------------------------------------------------------

@dataclass
class GrowthSummary:
    Theta: float
    xi0: float
    attained: bool
    branch_index: int
    lambda0: complex = 0j
    stability: Stability = Stability.STABLE

    def as_dict(self):
        return {
            "Theta": self.Theta, "xi0": self.xi0, "attained": self.attained,
            "branch_index": self.branch_index,
            "lambda0": [self.lambda0.real, self.lambda0.imag],
            "stability": self.stability.value,
        }


def max_real_part(coeffs, params, r):
    lam = solve_cubic(*char_coeffs(coeffs, params, r))
    return lam.real.max(axis=1)


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Maximise a unimodal ``f`` on ``[lo, hi]``; ``tol`` is relative in x."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol * max(abs(lo), abs(hi), 1e-300):
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = f(x1)
    if f1 >= f2:
        return x1, f1
    return x2, f2


def find_growth_max(coeffs: DerivedCoeffs, params: ModelParams, r_min=1e-4, r_max=None,
                    coarse_n=4096, refine_tol=1e-10) -> GrowthSummary:
    """Supremum of ``max_i Re lam_i`` over ``r`` and the wavenumber attaining it."""
    if r_max is None:
        r_max = 10.0 * default_eta(coeffs, params)[1]
    if not 0 < r_min < r_max:
        raise DomainError("need 0 < r_min < r_max")
    grid = np.geomspace(r_min, r_max, coarse_n)
    lam = solve_cubic(*char_coeffs(coeffs, params, grid))
    re_max = lam.real.max(axis=1)
    i = int(np.argmax(re_max))
    stability = classify_stability(coeffs, params.nu)

    if stability is not Stability.UNSTABLE:
        # supremum approached as r -> 0 along the slow branch
        return GrowthSummary(Theta=float(re_max[i]), xi0=float(grid[i]), attained=False,
                             branch_index=3, lambda0=complex(lam[i, np.argmax(lam[i].real)]),
                             stability=stability)

    if i == 0 or i == coarse_n - 1:
        raise WindowError(
            f"growth maximum at the window edge r={grid[i]:.3g}; widen [r_min, r_max] "
            f"= [{r_min:.3g}, {r_max:.3g}]")
    lo, hi = grid[i - 1], grid[i + 1]
    xi0, theta = golden_section_max(lambda x: float(max_real_part(coeffs, params, x)[0]),
                                    lo, hi, tol=refine_tol)
    # compare against the coarse nodes in case the bracket missed a kink
    if re_max[i] > theta:
        xi0, theta = float(grid[i]), float(re_max[i])
    lam0 = solve_cubic(*char_coeffs(coeffs, params, xi0))[0]
    j = int(np.argmax(lam0.real))
    lam0_val = lam0[j]
    if lam0_val.imag < 0:
        lam0_val = np.conj(lam0_val)
    # branch label via continuity from small r
    label = _label_of_top(coeffs, params, xi0, r_min)
    return GrowthSummary(Theta=float(theta), xi0=float(xi0), attained=True,
                         branch_index=label, lambda0=complex(lam0_val), stability=stability)


def _label_of_top(coeffs, params, xi0, r_min):
    grid = np.geomspace(min(r_min, xi0 / 10), xi0, 2048)
    br = build_branches(coeffs, params, grid)
    return int(np.argmax(br.values[-1].real)) + 1


@dataclass
class BandBound:
    stable: bool
    band: tuple
    max_real: float
    vartheta: float | None
    Theta: float | None
    projector_bound: float
    degenerate_points: int

    def as_dict(self):
        return dict(self.__dict__, band=list(self.band))


def middle_band_bound(coeffs, params, eta1=None, eta2=None, n=4096, Theta=None) -> BandBound:
    d1, d2 = default_eta(coeffs, params)
    eta1 = d1 if eta1 is None else eta1
    eta2 = d2 if eta2 is None else eta2
    if not 0 < eta1 < eta2:
        raise DomainError("need 0 < eta1 < eta2")
    grid = np.geomspace(eta1, eta2, n)
    lam, proj, degenerate, _ = eigen_solve_many(coeffs, params, grid)
    max_re = float(lam.real.max())
    pnorm = float(np.nanmax(np.abs(proj[~degenerate]))) if np.any(~degenerate) else float("nan")
    stability = classify_stability(coeffs, params.nu)
    if stability is Stability.STABLE:
        return BandBound(True, (eta1, eta2), max_re, -max_re, None, pnorm, int(degenerate.sum()))
    if Theta is None:
        Theta = find_growth_max(coeffs, params).Theta
    return BandBound(False, (eta1, eta2), max_re, None, Theta, pnorm, int(degenerate.sum()))


def neutral_wavenumber(coeffs, params):
    """Upper edge of the unstable band: ``F(r, 0) = 0`` for ``r > 0``."""
    if coeffs.discriminant >= 0:
        return None
    return math.sqrt(-coeffs.discriminant / (coeffs.a * params.mu))


def scan_table(coeffs, params, grid):
    """Rows ``r, Re l1, Im l1, Re l2, Im l2, Re l3, Im l3, min_gap, degenerate``."""
    br = build_branches(coeffs, params, grid)
    cols = [br.grid]
    for i in range(3):
        cols += [br.values[:, i].real, br.values[:, i].imag]
    cols += [br.min_gap, br.degenerate.astype(int)]
    return np.column_stack(cols)


def locate_level(f, level, lo, hi):
    """Root of ``f(x) = level`` on a bracket, via Brent's method."""
    return brentq(lambda x: f(x) - level, lo, hi, xtol=1e-14, rtol=1e-13)
