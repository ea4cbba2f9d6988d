import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from vspectra.dispersion import eigen_solve, symbol
from vspectra.semigroup import (
    DecayDiagnostic,
    LinearPropagator,
    RadialProfile,
    convolution_bound,
    cutoff_psi,
    decay_envelope_check,
    default_low_profile,
    duhamel_envelope,
    evolve_linear,
    expected_exponent,
    high_frequency_check,
    kernel_integral,
    kernel_integral_quad,
    mode_exp,
    mode_exp_many,
    omega_decay,
    radial_grid,
    smooth_step,
)

GAUSS_NORM_SQ = math.pi ** 1.5 / (2 * math.sqrt(2))


def _taylor_exp(m, t, terms=30):
    out = np.eye(3)
    term = np.eye(3)
    for n in range(1, terms):
        term = term @ (t * m) / n
        out = out + term
    return out


def test_cutoff_shape():
    r = np.array([0.0, 0.5, 1.0, 1.5, 2.0, 3.0])
    psi = cutoff_psi(r)
    assert np.array_equal(psi[[0, 1, 2]], [1.0, 1.0, 1.0])
    assert np.array_equal(psi[[4, 5]], [0.0, 0.0])
    assert 0 < psi[3] < 1
    s = np.linspace(-0.5, 1.5, 401)
    assert np.all(np.diff(smooth_step(s)) >= 0)


def test_gaussian_plancherel():
    prof = RadialProfile.from_functions(lambda r: np.exp(-r * r), lambda r: 0 * r,
                                        lambda r: 0 * r)
    assert prof.norm("rho") ** 2 == pytest.approx(GAUSS_NORM_SQ, rel=1e-6)
    assert prof.accepted()


def test_quadrature_converges_under_doubling():
    f = lambda r: np.exp(-r * r)  # noqa: E731
    zero = lambda r: 0 * r  # noqa: E731
    errs = [abs(RadialProfile.from_functions(f, zero, zero, n=n, r_max=8.0).norm("rho") ** 2
                - GAUSS_NORM_SQ) for n in (65, 129, 257)]
    assert errs[0] > errs[1] > errs[2]
    # composite Simpson is fourth order
    assert errs[0] / errs[1] > 8


def test_radial_grid_weights_integrate_polynomial():
    grid, w = radial_grid(n=2049, r_lo=1e-6, r_max=5.0)
    assert np.all(np.diff(grid) > 0)
    assert float(np.dot(w, grid ** 2)) == pytest.approx((5.0 ** 3 - 1e-18) / 3, rel=1e-9)


def test_mode_exp_at_time_zero_is_identity(unstable):
    p, c = unstable
    assert np.allclose(mode_exp(eigen_solve(0.7, c, p), 0.0), np.eye(3), atol=1e-13)


def test_mode_exp_zero_wavenumber_series_oracle(stable):
    p, c = stable
    sp = eigen_solve(0.0, c, p)
    assert np.allclose(mode_exp(sp, 1.0), _taylor_exp(symbol(c, p, 0.0), 1.0), atol=1e-13)


def test_mode_exp_spectral_vs_expm(unstable, rng):
    p, c = unstable
    for r, t in zip(10 ** rng.uniform(-2, 1.5, 100), rng.uniform(0, 5, 100)):
        sp = eigen_solve(r, c, p)
        spectral = mode_exp(sp, t, method="spectral")
        ref = expm(t * symbol(c, p, r))
        assert np.abs(spectral - ref).max() <= 1e-8 * max(1.0, np.abs(ref).max())


@given(st.floats(0.01, 20.0))
def test_semigroup_property(r):
    from vspectra.model import DEFAULT_STABLE, derive_coeffs

    c = derive_coeffs(DEFAULT_STABLE)
    e = lambda t: mode_exp_many(c, DEFAULT_STABLE, r, t)[0]  # noqa: E731
    assert np.allclose(e(0.3) @ e(0.7), e(1.0), atol=1e-12)


def test_negative_time_rejected(stable):
    p, c = stable
    with pytest.raises(ValueError):
        mode_exp_many(c, p, [1.0], -1.0)
    with pytest.raises(ValueError):
        omega_decay(1.0, -0.5, 1.0)


def test_zero_profile_stays_zero(stable):
    p, c = stable
    prof = RadialProfile.from_functions(*(lambda r: 0 * r,) * 3, n=257, r_max=3.0)
    assert evolve_linear(prof, 2.0, c, p).norm() == 0.0


def test_linearity(stable):
    p, c = stable
    prof = default_low_profile(n=1025)
    base = evolve_linear(prof, 3.0, c, p)
    scaled = evolve_linear(prof.with_values(2.5 * prof.values), 3.0, c, p)
    scale = np.abs(2.5 * base.values).max()
    assert np.abs(scaled.values - 2.5 * base.values).max() <= 1e-12 * scale


def test_propagator_matches_evolve(stable):
    p, c = stable
    prof = default_low_profile(n=1025)
    prop = LinearPropagator(prof, c, p)
    assert np.allclose(prop(7.0).values, evolve_linear(prof, 7.0, c, p).values, atol=1e-13)


def test_band_supported_data_decay_exponentially(stable):
    p, c = stable
    prof = RadialProfile.from_functions(
        lambda r: np.exp(-8 * (r - 1.5) ** 2) * ((r > 1) & (r < 2)),
        lambda r: 0 * r, lambda r: 0 * r, n=2049, r_max=3.0)
    from vspectra.dispersion import middle_band_bound

    theta = middle_band_bound(c, p, eta1=1.0, eta2=2.0).vartheta
    prop = LinearPropagator(prof, c, p)
    n0 = prof.norm()
    ratios = [prop(t).norm() / (n0 * math.exp(-theta * t)) for t in (5.0, 10.0, 20.0)]
    # bounded by a constant, not growing
    assert max(ratios) < 10 and ratios[2] <= ratios[0] * 1.01


def test_omega_decay_closed_form():
    assert omega_decay(3.0, 0.0, 2.0) == 3.0
    assert omega_decay(1.0, 1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-15)
    f1, f2 = omega_decay(1.0, 1.3, 0.7), omega_decay(1.0, 2.6, 0.7)
    assert f2 == pytest.approx(f1 ** 2, rel=1e-14)


def test_expected_exponents():
    assert expected_exponent("rho", 0) == -0.75
    assert expected_exponent("d", 1) == -1.75
    assert expected_exponent("phi", 3) == -2.25


def test_decay_exponents(stable):
    p, c = stable
    checks = decay_envelope_check(c, p)
    frozen = {("rho", 0): -0.7465, ("d", 0): -1.2458, ("phi", 3): -2.2301}
    for chk in checks:
        assert chk.passes(0.05), chk.as_dict()
        if (chk.component, chk.k) in frozen:
            assert chk.fit.exponent == pytest.approx(frozen[(chk.component, chk.k)], abs=2e-4)


def test_decay_rejects_unexcited_data(stable):
    p, c = stable
    prof = RadialProfile.from_functions(
        lambda r: np.exp(-8 * (r - 1.5) ** 2) * (r > 1), lambda r: 0 * r, lambda r: 0 * r,
        n=1025, r_max=2.5)
    with pytest.raises(DecayDiagnostic):
        decay_envelope_check(c, p, profile=prof)


def test_decay_needs_stable_regime(unstable):
    p, c = unstable
    with pytest.raises(ValueError):
        decay_envelope_check(c, p)


def test_high_frequency_rate(stable):
    p, c = stable
    hf = high_frequency_check(c, p)
    assert hf.passes()
    assert hf.fitted_rate >= p.alpha / 4


def test_kernel_integral_oracle():
    for s in (0.75, 1.0, 1.25, 2.0):
        assert kernel_integral(100.0, s) == pytest.approx(kernel_integral_quad(100.0, s),
                                                          rel=1e-10)


def test_duhamel_envelope_constant_source():
    tau = np.linspace(0.0, 100.0, 20001)
    one = np.ones_like(tau)
    zero = np.zeros_like(tau)
    env = duhamel_envelope(tau, one, zero, 100.0, k=0, output="S1")
    assert env == pytest.approx(kernel_integral_quad(100.0, 0.75), rel=1e-6)
    assert duhamel_envelope(tau, zero, zero, 100.0) == 0.0


def test_convolution_bound_decays_like_slower_rate():
    # s1 = 9/4 source against s2 = 2 kernel stays below C (1 + t)^-2
    tau = np.linspace(0.0, 2000.0, 200001)
    source = (1 + tau) ** -2.25
    vals = [convolution_bound(tau, source, t, 2.0) * (1 + t) ** 2 for t in (100, 500, 2000)]
    assert max(vals) < 10 and vals[-1] <= vals[0] * 1.5
